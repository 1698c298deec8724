#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "versekit/reach.hpp"

namespace versekit {

struct CacheStats {
    std::uint64_t guard_lookups = 0;
    std::uint64_t guard_hits = 0;
    std::uint64_t flow_lookups = 0;
    std::uint64_t flow_hits = 0;
    std::size_t guard_bytes = 0;
    std::size_t flow_bytes = 0;

    double guard_hit_rate() const {
        return guard_lookups == 0 ? 0.0
                                  : static_cast<double>(guard_hits) /
                                        static_cast<double>(guard_lookups);
    }
    double flow_hit_rate() const {
        return flow_lookups == 0 ? 0.0
                                 : static_cast<double>(flow_hits) /
                                       static_cast<double>(flow_lookups);
    }
    double combined_hit_rate() const {
        const std::uint64_t lookups = guard_lookups + flow_lookups;
        return lookups == 0 ? 0.0
                            : static_cast<double>(guard_hits + flow_hits) /
                                  static_cast<double>(lookups);
    }
};

// The cache header pins everything a cached result depends on besides the
// node key itself. A mismatch clears the caches with a warning and the run
// proceeds cold.
struct CacheHeader {
    double delta = 0.0;
    double dt = 0.0;
    EngineConfig engine;
    std::string map_name;
    std::vector<std::string> schema;
    int agent_count = 0;
    bool simulation = false;

    bool operator==(const CacheHeader& o) const = default;
};

namespace cache_detail {

// Canonical key text for a box: values rounded to 12 significant digits, so
// bitwise-identical reruns hit while genuinely different sets do not.
inline std::string canonical_rect(const HyperRect& r) {
    std::string out;
    char buf[64];
    for (const auto& iv : r.dims()) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g;", iv.lo, iv.hi);
        out += buf;
    }
    return out;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline nlohmann::json rect_json(const HyperRect& r) {
    return nlohmann::json::array({r.lower(), r.upper()});
}

inline HyperRect rect_from_json(const nlohmann::json& j) {
    const auto lo = j.at(0).get<std::vector<double>>();
    const auto hi = j.at(1).get<std::vector<double>>();
    return HyperRect::from_bounds(lo, hi);
}

inline nlohmann::json mode_json(const JointMode& m) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& mp : m) j.push_back(nlohmann::json::array({mp.tactical, mp.track}));
    return j;
}

inline JointMode mode_from_json(const nlohmann::json& j) {
    JointMode m;
    for (const auto& p : j) m.push_back(ModePair{p.at(0), p.at(1)});
    return m;
}

}  // namespace cache_detail

// Guard cache C_g (exact canonical key, tri-state verdicts with the cached
// discrete post) and flow cache C_f (per-mode containment lookup). Both
// persist across runs.
class VerificationCaches final : public ReachCacheBackend {
  public:
    static constexpr std::size_t kFlowBucketCap = 256;

    explicit VerificationCaches(CacheHeader header) : header_(std::move(header)) {}

    // ---- guard cache ----

    GuardHit guard_lookup(const HyperRect& start, const JointMode& mode,
                          const GuardKey& key) override {
        ++stats_.guard_lookups;
        const auto it = guard_.find(guard_key(start, mode, key));
        GuardHit hit;
        if (it == guard_.end()) return hit;
        ++stats_.guard_hits;
        hit.found = true;
        hit.verdict = it->second.verdict;
        if (it->second.verdict != TriBool::DefFalse) {
            hit.child_set = it->second.child_set;
            hit.child_mode = it->second.child_mode;
        }
        return hit;
    }

    void guard_record(const HyperRect& start, const JointMode& mode, const GuardKey& key,
                      TriBool verdict, const HyperRect* child_set,
                      const JointMode* child_mode) override {
        GuardEntry entry;
        entry.verdict = verdict;
        if (verdict != TriBool::DefFalse && child_set != nullptr) {
            entry.child_set = *child_set;
            entry.child_mode = *child_mode;
        }
        guard_[guard_key(start, mode, key)] = std::move(entry);
    }

    // ---- flow cache ----

    FlowHit flow_lookup(const HyperRect& start, const JointMode& mode) override {
        ++stats_.flow_lookups;
        FlowHit hit;
        const auto it = flow_.find(joint_mode_string(mode));
        if (it == flow_.end()) return hit;
        // Exact key first, then containment, most recently inserted first.
        for (const auto& entry : it->second) {
            if (entry.start == start) {
                ++stats_.flow_hits;
                hit.found = true;
                hit.tube = entry.tube;
                hit.end_set = entry.end_set;
                return hit;
            }
        }
        for (const auto& entry : it->second) {
            if (contains(entry.start, start)) {
                ++stats_.flow_hits;
                hit.found = true;
                hit.tube = entry.tube;
                hit.end_set = entry.end_set;
                return hit;
            }
        }
        return hit;
    }

    void flow_record(const HyperRect& start, const JointMode& mode,
                     const std::vector<TimedRect>& tube, const HyperRect& end_set) override {
        auto& bucket = flow_[joint_mode_string(mode)];
        bucket.push_front(FlowEntry{start, tube, end_set});
        while (bucket.size() > kFlowBucketCap) bucket.pop_back();
    }

    // ---- stats and persistence ----

    CacheStats stats() const {
        CacheStats s = stats_;
        for (const auto& [key, entry] : guard_) {
            s.guard_bytes += key.size() + entry.child_set.size() * 16 + 32;
        }
        for (const auto& [key, bucket] : flow_) {
            for (const auto& entry : bucket) {
                s.flow_bytes += key.size() + entry.start.size() * 16 +
                                entry.tube.size() * (entry.start.size() * 16 + 16) +
                                entry.end_set.size() * 16;
            }
        }
        return s;
    }

    void clear() {
        guard_.clear();
        flow_.clear();
        stats_ = CacheStats{};
    }

    std::size_t guard_entries() const { return guard_.size(); }
    std::size_t flow_entries() const {
        std::size_t n = 0;
        for (const auto& [_, bucket] : flow_) n += bucket.size();
        return n;
    }

    const CacheHeader& header() const { return header_; }

    nlohmann::json to_json() const {
        nlohmann::json doc;
        doc["schema"] = "versekit-cache/1";
        doc["header"] = {{"delta", header_.delta},
                         {"dt", header_.dt},
                         {"engine", header_.engine.name},
                         {"bloat_factor", header_.engine.bloat_factor},
                         {"corner_cap", header_.engine.corner_cap},
                         {"map", header_.map_name},
                         {"fields", header_.schema},
                         {"agent_count", header_.agent_count},
                         {"simulation", header_.simulation}};
        doc["stats"] = {{"guard_lookups", stats_.guard_lookups},
                        {"guard_hits", stats_.guard_hits},
                        {"flow_lookups", stats_.flow_lookups},
                        {"flow_hits", stats_.flow_hits}};
        nlohmann::json gj = nlohmann::json::object();
        for (const auto& [key, entry] : guard_) {
            nlohmann::json ej;
            ej["verdict"] = static_cast<int>(entry.verdict);
            if (entry.verdict != TriBool::DefFalse) {
                ej["child_set"] = cache_detail::rect_json(entry.child_set);
                ej["child_mode"] = cache_detail::mode_json(entry.child_mode);
            }
            gj[key] = std::move(ej);
        }
        doc["guard_cache"] = std::move(gj);
        nlohmann::json fj = nlohmann::json::object();
        for (const auto& [key, bucket] : flow_) {
            nlohmann::json bj = nlohmann::json::array();
            for (const auto& entry : bucket) {
                nlohmann::json ej;
                ej["start"] = cache_detail::rect_json(entry.start);
                ej["end"] = cache_detail::rect_json(entry.end_set);
                nlohmann::json tj = nlohmann::json::array();
                for (const auto& tr : entry.tube) {
                    tj.push_back(nlohmann::json::array(
                        {tr.t_lo, tr.t_hi, tr.rect.lower(), tr.rect.upper()}));
                }
                ej["tube"] = std::move(tj);
                bj.push_back(std::move(ej));
            }
            fj[key] = std::move(bj);
        }
        doc["flow_cache"] = std::move(fj);
        return doc;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write cache file '" + path + "'");
        out << to_json().dump();
    }

    // Loads a cache file. On a header mismatch (or unreadable file) the
    // caches stay cold and a warning is emitted; the run proceeds.
    bool load(const std::string& path, std::ostream& warn = std::cerr) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return false;
        nlohmann::json doc;
        try {
            in >> doc;
            if (doc.value("schema", std::string()) != "versekit-cache/1") {
                warn << "warning: cache file '" << path << "' has unknown schema; starting cold\n";
                return false;
            }
            const auto& hj = doc.at("header");
            CacheHeader h;
            h.delta = hj.at("delta").get<double>();
            h.dt = hj.at("dt").get<double>();
            h.engine.name = hj.at("engine").get<std::string>();
            h.engine.bloat_factor = hj.at("bloat_factor").get<double>();
            h.engine.corner_cap = hj.at("corner_cap").get<int>();
            h.map_name = hj.at("map").get<std::string>();
            h.schema = hj.at("fields").get<std::vector<std::string>>();
            h.agent_count = hj.at("agent_count").get<int>();
            h.simulation = hj.value("simulation", false);
            if (!(h == header_)) {
                warn << "warning: cache file '" << path
                     << "' was built under a different configuration "
                        "(delta/dt/engine/map/schema); starting cold\n";
                return false;
            }
            const auto& sj = doc.at("stats");
            stats_.guard_lookups = sj.at("guard_lookups").get<std::uint64_t>();
            stats_.guard_hits = sj.at("guard_hits").get<std::uint64_t>();
            stats_.flow_lookups = sj.at("flow_lookups").get<std::uint64_t>();
            stats_.flow_hits = sj.at("flow_hits").get<std::uint64_t>();
            for (const auto& [key, ej] : doc.at("guard_cache").items()) {
                GuardEntry entry;
                entry.verdict = static_cast<TriBool>(ej.at("verdict").get<int>());
                if (entry.verdict != TriBool::DefFalse) {
                    entry.child_set = cache_detail::rect_from_json(ej.at("child_set"));
                    entry.child_mode = cache_detail::mode_from_json(ej.at("child_mode"));
                }
                guard_[key] = std::move(entry);
            }
            for (const auto& [key, bj] : doc.at("flow_cache").items()) {
                auto& bucket = flow_[key];
                for (const auto& ej : bj) {
                    FlowEntry entry;
                    entry.start = cache_detail::rect_from_json(ej.at("start"));
                    entry.end_set = cache_detail::rect_from_json(ej.at("end"));
                    for (const auto& tj : ej.at("tube")) {
                        entry.tube.emplace_back(
                            tj.at(0).get<double>(), tj.at(1).get<double>(),
                            HyperRect::from_bounds(tj.at(2).get<std::vector<double>>(),
                                                   tj.at(3).get<std::vector<double>>()));
                    }
                    bucket.push_back(std::move(entry));
                }
            }
            return true;
        } catch (const std::exception& e) {
            warn << "warning: cache file '" << path << "' is unreadable (" << e.what()
                 << "); starting cold\n";
            clear();
            return false;
        }
    }

  private:
    struct GuardEntry {
        TriBool verdict = TriBool::DefFalse;
        HyperRect child_set;
        JointMode child_mode;
    };

    struct FlowEntry {
        HyperRect start;
        std::vector<TimedRect> tube;  // relative times
        HyperRect end_set;
    };

    static std::string guard_key(const HyperRect& start, const JointMode& mode,
                                 const GuardKey& key) {
        return cache_detail::canonical_rect(start) + "|" + joint_mode_string(mode) + "|" +
               std::to_string(key.agent) + ">" + key.target.to_string() + "|" +
               cache_detail::hex64(key.guard_fp) + "|" + cache_detail::hex64(key.reset_fp);
    }

    CacheHeader header_;
    std::unordered_map<std::string, GuardEntry> guard_;
    std::map<std::string, std::deque<FlowEntry>> flow_;
    CacheStats stats_;
};

inline CacheHeader make_cache_header(const HybridAutomaton& aut, const ReachConfig& cfg) {
    CacheHeader h;
    h.delta = cfg.delta;
    h.dt = cfg.dt;
    h.engine = cfg.engine;
    h.map_name = aut.scenario().map().name();
    h.schema = aut.scenario().agents().front().type->fields;
    h.agent_count = static_cast<int>(aut.agent_count());
    h.simulation = cfg.simulation;
    return h;
}

// Incremental verification: verify with persistent caches attached.
inline ExecutionTree verify_inc(const HybridAutomaton& aut, ReachConfig cfg,
                                VerificationCaches& caches) {
    cfg.simulation = false;
    return TreeBuilder(aut, cfg, &caches).run();
}

inline ExecutionTree simulate_inc(const HybridAutomaton& aut, ReachConfig cfg,
                                  VerificationCaches& caches) {
    cfg.simulation = true;
    return TreeBuilder(aut, cfg, &caches).run();
}

}  // namespace versekit
