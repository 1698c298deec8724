#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "versekit/errors.hpp"
#include "versekit/eval.hpp"

namespace versekit {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{1, 0, 0};
    }
};

// ---------------------------------------------------------------------------
// Curves. A curve is an arc-length parameterized path in the workspace.
// ---------------------------------------------------------------------------

class Curve {
  public:
    virtual ~Curve() = default;
    virtual double length() const = 0;
    virtual bool cyclic() const { return false; }
    virtual Vec3 point(double arc) const = 0;
    virtual Vec3 tangent(double arc) const = 0;
    // Arc position of the point nearest to p. `hint` (when >= 0) localizes
    // the search for repeated queries along a flow.
    virtual double project(const Vec3& p, double hint = -1.0) const = 0;

  protected:
    double clamp_arc(double arc) const {
        if (cyclic()) {
            const double len = length();
            arc = std::fmod(arc, len);
            return arc < 0 ? arc + len : arc;
        }
        return std::clamp(arc, 0.0, length());
    }
};

using CurvePtr = std::shared_ptr<const Curve>;

class StraightCurve final : public Curve {
  public:
    StraightCurve(Vec3 start, Vec3 dir, double len)
        : start_(start), dir_(dir.normalized()), len_(len) {}

    double length() const override { return len_; }
    Vec3 point(double arc) const override { return start_ + dir_ * clamp_arc(arc); }
    Vec3 tangent(double) const override { return dir_; }

    double project(const Vec3& p, double = -1.0) const override {
        return std::clamp((p - start_).dot(dir_), 0.0, len_);
    }

  private:
    Vec3 start_, dir_;
    double len_;
};

// Planar circular arc at constant z. Positive sweep is counterclockwise.
class ArcCurve final : public Curve {
  public:
    ArcCurve(Vec3 center, double radius, double start_angle, double sweep)
        : center_(center), radius_(radius), a0_(start_angle), sweep_(sweep) {}

    double length() const override { return radius_ * std::abs(sweep_); }

    Vec3 point(double arc) const override {
        const double a = angle_at(clamp_arc(arc));
        return {center_.x + radius_ * std::cos(a), center_.y + radius_ * std::sin(a), center_.z};
    }

    Vec3 tangent(double arc) const override {
        const double a = angle_at(clamp_arc(arc));
        const double s = sweep_ >= 0 ? 1.0 : -1.0;
        return {-std::sin(a) * s, std::cos(a) * s, 0.0};
    }

    double project(const Vec3& p, double = -1.0) const override {
        const double raw = std::atan2(p.y - center_.y, p.x - center_.x);
        // Unwrap towards the arc's angular range.
        double rel = (raw - a0_) * (sweep_ >= 0 ? 1.0 : -1.0);
        const double two_pi = 2.0 * M_PI;
        rel = std::fmod(rel, two_pi);
        if (rel < 0) rel += two_pi;
        if (rel > std::abs(sweep_)) {
            // Outside the angular span: clamp to the nearer endpoint.
            const double over = rel - std::abs(sweep_);
            const double under = two_pi - rel;
            rel = over < under ? std::abs(sweep_) : 0.0;
        }
        return rel * radius_;
    }

  private:
    double angle_at(double arc) const {
        return a0_ + (sweep_ >= 0 ? 1.0 : -1.0) * arc / radius_;
    }

    Vec3 center_;
    double radius_, a0_, sweep_;
};

// Arc-length table over a parametric generator; used for the figure-eight.
class SampledCurve final : public Curve {
  public:
    template <typename F>
    SampledCurve(F generator, double t0, double t1, int samples, bool cyclic)
        : cyclic_(cyclic) {
        pts_.reserve(static_cast<std::size_t>(samples) + 1);
        cum_.reserve(static_cast<std::size_t>(samples) + 1);
        double acc = 0.0;
        for (int i = 0; i <= samples; ++i) {
            const double t = t0 + (t1 - t0) * static_cast<double>(i) / samples;
            const Vec3 p = generator(t);
            if (i > 0) acc += (p - pts_.back()).norm();
            pts_.push_back(p);
            cum_.push_back(acc);
        }
    }

    double length() const override { return cum_.back(); }
    bool cyclic() const override { return cyclic_; }

    Vec3 point(double arc) const override {
        const auto [i, frac] = locate(clamp_arc(arc));
        return pts_[i] + (pts_[i + 1] - pts_[i]) * frac;
    }

    Vec3 tangent(double arc) const override {
        const auto [i, frac] = locate(clamp_arc(arc));
        (void)frac;
        return (pts_[i + 1] - pts_[i]).normalized();
    }

    double project(const Vec3& p, double hint = -1.0) const override {
        std::size_t lo = 0;
        std::size_t hi = pts_.size() - 2;
        if (hint >= 0.0) {
            const auto [i, frac] = locate(clamp_arc(hint));
            (void)frac;
            const std::size_t window = 64;
            lo = i > window ? i - window : 0;
            hi = std::min(pts_.size() - 2, i + window);
        }
        double best_d = 1e300;
        std::size_t best = lo;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double d = (pts_[i] - p).dot(pts_[i] - p);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        // Refine within the two segments flanking the best sample.
        double best_arc = cum_[best];
        double best_dist = best_d;
        for (std::size_t i = (best > 0 ? best - 1 : 0); i <= best && i + 1 < pts_.size(); ++i) {
            const Vec3 seg = pts_[i + 1] - pts_[i];
            const double seg_len2 = seg.dot(seg);
            if (seg_len2 <= 0) continue;
            const double t = std::clamp((p - pts_[i]).dot(seg) / seg_len2, 0.0, 1.0);
            const Vec3 q = pts_[i] + seg * t;
            const double d = (q - p).dot(q - p);
            if (d < best_dist) {
                best_dist = d;
                best_arc = cum_[i] + (cum_[i + 1] - cum_[i]) * t;
            }
        }
        return best_arc;
    }

  private:
    std::pair<std::size_t, double> locate(double arc) const {
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), arc);
        std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
        i = std::min(i, pts_.size() - 2);
        const double span = cum_[i + 1] - cum_[i];
        const double frac = span > 0 ? (arc - cum_[i]) / span : 0.0;
        return {i, std::clamp(frac, 0.0, 1.0)};
    }

    std::vector<Vec3> pts_;
    std::vector<double> cum_;
    bool cyclic_;
};

// Several curves traversed in order.
class CompositeCurve final : public Curve {
  public:
    explicit CompositeCurve(std::vector<CurvePtr> parts) : parts_(std::move(parts)) {
        double acc = 0.0;
        for (const auto& c : parts_) {
            offsets_.push_back(acc);
            acc += c->length();
        }
        total_ = acc;
    }

    double length() const override { return total_; }

    Vec3 point(double arc) const override {
        const auto [i, local] = locate(clamp_arc(arc));
        return parts_[i]->point(local);
    }

    Vec3 tangent(double arc) const override {
        const auto [i, local] = locate(clamp_arc(arc));
        return parts_[i]->tangent(local);
    }

    double project(const Vec3& p, double hint = -1.0) const override {
        double best_d = 1e300;
        double best_arc = 0.0;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            const double local_hint = hint >= 0 ? hint - offsets_[i] : -1.0;
            const double local = parts_[i]->project(p, local_hint);
            const Vec3 q = parts_[i]->point(local);
            const double d = (q - p).dot(q - p);
            if (d < best_d) {
                best_d = d;
                best_arc = offsets_[i] + local;
            }
        }
        return best_arc;
    }

  private:
    std::pair<std::size_t, double> locate(double arc) const {
        std::size_t i = parts_.size() - 1;
        for (std::size_t j = 0; j + 1 < parts_.size(); ++j) {
            if (arc < offsets_[j + 1]) {
                i = j;
                break;
            }
        }
        return {i, arc - offsets_[i]};
    }

    std::vector<CurvePtr> parts_;
    std::vector<double> offsets_;
    double total_ = 0.0;
};

// A suffix of an existing curve starting at a fixed arc position.
class ShiftedCurve final : public Curve {
  public:
    ShiftedCurve(CurvePtr base, double from_arc) : base_(std::move(base)), from_(from_arc) {}

    double length() const override {
        return base_->cyclic() ? base_->length() : base_->length() - from_;
    }
    Vec3 point(double arc) const override { return base_->point(from_ + clamp_arc(arc)); }
    Vec3 tangent(double arc) const override { return base_->tangent(from_ + clamp_arc(arc)); }

    double project(const Vec3& p, double hint = -1.0) const override {
        const double base_arc = base_->project(p, hint >= 0 ? from_ + hint : -1.0);
        return std::clamp(base_arc - from_, 0.0, length());
    }

  private:
    CurvePtr base_;
    double from_;
};

// ---------------------------------------------------------------------------
// Tracks: a curve anchored near an agent position.
// ---------------------------------------------------------------------------

enum class TrackKind { Lane, Transition };

// The concrete path an agent follows in one mode, anchored at the position
// the mode was entered from. sample(0) is the anchor point.
struct Track {
    TrackKind kind = TrackKind::Lane;
    CurvePtr curve;
    double start_arc = 0.0;

    Vec3 point_at(double d) const { return curve->point(start_arc + d); }
    Vec3 tangent_at(double d) const { return curve->tangent(start_arc + d); }

    // Spec sampler over a bounded preview window.
    Vec3 sample(double s) const {
        const double window = preview_window();
        return curve->point(start_arc + s * window);
    }

    double preview_window() const {
        const double remaining =
            curve->cyclic() ? curve->length() : curve->length() - start_arc;
        return std::min(60.0, std::max(remaining, 0.0));
    }

    // Signed lateral offset and tangent at the nearest curve point; the sign
    // is positive when p lies left of the travel direction (x-y plane).
    struct Frame {
        double arc;
        double lateral;
        Vec3 tangent;
        Vec3 nearest;
    };

    Frame frame_at(const Vec3& p, double hint = -1.0) const {
        const double arc = curve->project(p, hint >= 0 ? start_arc + hint : -1.0);
        const Vec3 q = curve->point(arc);
        const Vec3 t = curve->tangent(arc);
        const Vec3 d = p - q;
        const double lateral = t.x * d.y - t.y * d.x;
        return Frame{arc - start_arc, lateral, t, q};
    }
};

// ---------------------------------------------------------------------------
// Map definition.
// ---------------------------------------------------------------------------

struct LaneGeometry {
    std::string kind;  // "straight" | "arc" | "figure8" | "route"
    nlohmann::json params;
};

struct LaneDef {
    std::string id;
    LaneGeometry geometry;
    double offset = 0.0;
    CurvePtr curve;
};

// The map object: track modes, lane geometry, and the mode-transition
// function h. Lane-change tactical modes route through transition track
// modes auto-named M<src><dst>; any other tactical change keeps the track.
class MapDef : public TrackOffsetLookup {
  public:
    static constexpr double kLaneChangeLead = 15.0;  // 2-d longitudinal lead (m)

    MapDef(std::string name, int dim, std::vector<LaneDef> lanes,
           std::vector<std::pair<std::string, std::string>> adjacent)
        : name_(std::move(name)), dim_(dim), lanes_(std::move(lanes)),
          adjacent_(std::move(adjacent)) {
        if (dim_ != 2 && dim_ != 3) {
            throw Error(ErrorCode::Map, "map dimension must be 2 or 3");
        }
        for (std::size_t i = 0; i < lanes_.size(); ++i) {
            if (lane_index_.count(lanes_[i].id)) {
                throw Error(ErrorCode::Map, "duplicate lane id '" + lanes_[i].id + "'");
            }
            lane_index_[lanes_[i].id] = i;
        }
        for (const auto& [a, b] : adjacent_) {
            if (!lane_index_.count(a) || !lane_index_.count(b)) {
                throw Error(ErrorCode::Map,
                            "adjacency references unknown lane '" +
                                (lane_index_.count(a) ? b : a) + "'");
            }
            transition_modes_[transition_name(a, b)] = {a, b};
            transition_modes_[transition_name(b, a)] = {b, a};
        }
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    int workspace_dim() const override { return dim_; }
    const std::vector<LaneDef>& lanes() const { return lanes_; }
    const std::vector<std::pair<std::string, std::string>>& adjacency() const {
        return adjacent_;
    }

    // The full track-mode alphabet L: persistent lanes plus transitions.
    std::set<std::string> track_modes() const {
        std::set<std::string> modes;
        for (const auto& l : lanes_) modes.insert(l.id);
        for (const auto& [m, _] : transition_modes_) modes.insert(m);
        return modes;
    }

    bool is_transition(const std::string& mode) const {
        return transition_modes_.count(mode) > 0;
    }

    bool has_mode(const std::string& mode) const {
        return lane_index_.count(mode) || transition_modes_.count(mode);
    }

    // Lane-change tactical modes this map family supports.
    std::set<std::string> supported_lane_changes() const {
        if (dim_ == 2) return {"SwitchLeft", "SwitchRight"};
        return {"MoveUp", "MoveDown"};
    }

    static const std::set<std::string>& known_lane_changes() {
        static const std::set<std::string> kKnown = {"SwitchLeft", "SwitchRight", "MoveUp",
                                                     "MoveDown"};
        return kKnown;
    }

    // Transverse offset of a track mode: layer height in 3-d maps, lateral
    // lane offset in 2-d maps. Transition modes report their destination's
    // offset, so completion guards can compare the ego position against it.
    double transverse_offset(const std::string& mode) const override {
        if (const auto it = transition_modes_.find(mode); it != transition_modes_.end()) {
            return lane(it->second.second).offset;
        }
        return lane(mode).offset;
    }

    // The mode-transition function h. Unsupported triples throw; reach
    // treats them as absent transition candidates.
    std::string next_track_mode(const std::string& track, const std::string& tactical,
                                const std::string& next_tactical) const {
        const auto result = try_next_track_mode(track, tactical, next_tactical);
        if (!result) {
            throw Error(ErrorCode::Map, "unsupported mode triple h(" + track + ", " + tactical +
                                            ", " + next_tactical + ")");
        }
        return *result;
    }

    std::optional<std::string> try_next_track_mode(const std::string& track,
                                                   const std::string& tactical,
                                                   const std::string& next_tactical) const {
        if (!has_mode(track)) return std::nullopt;
        if (tactical == next_tactical) return track;  // staying keeps the track
        const bool target_is_lane_change = known_lane_changes().count(next_tactical) > 0;
        if (target_is_lane_change) {
            if (!supported_lane_changes().count(next_tactical)) return std::nullopt;
            if (is_transition(track)) return std::nullopt;  // no maneuver mid-maneuver
            const bool up = next_tactical == "SwitchLeft" || next_tactical == "MoveUp";
            const auto dest = adjacent_lane(track, up);
            if (!dest) return std::nullopt;
            return transition_name(track, *dest);
        }
        // Completion or a custom tactical change: transitions land on their
        // destination lane, persistent tracks are kept.
        if (const auto it = transition_modes_.find(track); it != transition_modes_.end()) {
            return it->second.second;
        }
        return track;
    }

    // Track construction (the g function). For persistent modes the lane is
    // re-anchored at the projection of the position. 2-d transition modes
    // follow the destination lane directly; 3-d transition modes climb a
    // vertical connector above/below the source-lane projection and then
    // continue along the destination lane.
    Track track_for(const Vec3& position, const std::string& mode) const {
        if (const auto it = transition_modes_.find(mode); it != transition_modes_.end()) {
            const LaneDef& src = lane(it->second.first);
            const LaneDef& dst = lane(it->second.second);
            if (dim_ == 2) {
                Track t;
                t.kind = TrackKind::Transition;
                t.curve = dst.curve;
                t.start_arc = dst.curve->project(position);
                return t;
            }
            const double src_arc = src.curve->project(position);
            const Vec3 anchor = src.curve->point(src_arc);
            const Vec3 target{anchor.x, anchor.y, dst.offset};
            const double climb = std::abs(target.z - anchor.z);
            std::vector<CurvePtr> parts;
            if (climb > 1e-12) {
                const Vec3 dir{0, 0, target.z > anchor.z ? 1.0 : -1.0};
                parts.push_back(std::make_shared<StraightCurve>(anchor, dir, climb));
            }
            const double dst_arc = dst.curve->project(target);
            parts.push_back(std::make_shared<ShiftedCurve>(dst.curve, dst_arc));
            Track t;
            t.kind = TrackKind::Transition;
            t.curve = parts.size() == 1 ? parts[0]
                                        : std::make_shared<CompositeCurve>(std::move(parts));
            t.start_arc = 0.0;
            return t;
        }
        const auto it = lane_index_.find(mode);
        if (it == lane_index_.end()) {
            throw Error(ErrorCode::Map, "unknown track mode '" + mode + "'");
        }
        const LaneDef& l = lanes_[it->second];
        Track t;
        t.kind = TrackKind::Lane;
        t.curve = l.curve;
        t.start_arc = l.curve->project(position);
        return t;
    }

    const LaneDef& lane(const std::string& id) const {
        const auto it = lane_index_.find(id);
        if (it == lane_index_.end()) {
            throw Error(ErrorCode::Map, "unknown track mode '" + id + "'");
        }
        return lanes_[it->second];
    }

    static std::string transition_name(const std::string& src, const std::string& dst) {
        const auto suffix = [](const std::string& id) {
            return (id.size() > 1 && id[0] == 'T') ? id.substr(1) : id;
        };
        return "M" + suffix(src) + suffix(dst);
    }

    std::optional<std::pair<std::string, std::string>> transition_endpoints(
        const std::string& mode) const {
        if (const auto it = transition_modes_.find(mode); it != transition_modes_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

  private:
    // Nearest adjacent lane in the +offset (up/left) or -offset direction.
    std::optional<std::string> adjacent_lane(const std::string& from, bool up) const {
        const double base = lane(from).offset;
        std::optional<std::string> best;
        double best_gap = 1e300;
        for (const auto& [a, b] : adjacent_) {
            for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                if (x != from) continue;
                const double gap = lane(y).offset - base;
                if (up && gap > 0 && gap < best_gap) {
                    best_gap = gap;
                    best = y;
                } else if (!up && gap < 0 && -gap < best_gap) {
                    best_gap = -gap;
                    best = y;
                }
            }
        }
        return best;
    }

    std::string name_;
    int dim_;
    std::vector<LaneDef> lanes_;
    std::vector<std::pair<std::string, std::string>> adjacent_;
    std::map<std::string, std::size_t> lane_index_;
    std::map<std::string, std::pair<std::string, std::string>> transition_modes_;
};

using MapPtr = std::shared_ptr<const MapDef>;

// ---------------------------------------------------------------------------
// Geometry construction and (de)serialization.
// ---------------------------------------------------------------------------

namespace map_detail {

inline CurvePtr build_curve(const LaneGeometry& g, double offset, int dim) {
    const auto& p = g.params;
    const double transverse_y = dim == 2 ? offset : 0.0;
    const double transverse_z = dim == 3 ? offset : 0.0;
    if (g.kind == "straight") {
        const double heading = p.value("heading", 0.0);
        const double length = p.value("length", 400.0);
        std::vector<double> start = p.value("start", std::vector<double>{0.0, 0.0});
        const Vec3 dir{std::cos(heading), std::sin(heading), 0.0};
        const Vec3 normal{-std::sin(heading), std::cos(heading), 0.0};
        Vec3 s{start[0], start.size() > 1 ? start[1] : 0.0, transverse_z};
        s = s + normal * transverse_y;
        return std::make_shared<StraightCurve>(s, dir, length);
    }
    if (g.kind == "arc") {
        std::vector<double> center = p.value("center", std::vector<double>{0.0, 0.0});
        const double radius = p.at("radius").get<double>();
        const double a0 = p.value("start_angle", 0.0);
        const double sweep = p.value("sweep", M_PI / 2);
        // Positive (ccw) sweep turns left: larger transverse offset means a
        // smaller radius.
        const double r = sweep >= 0 ? radius - transverse_y : radius + transverse_y;
        return std::make_shared<ArcCurve>(Vec3{center[0], center[1], transverse_z}, r, a0,
                                          sweep);
    }
    if (g.kind == "figure8") {
        const double scale = p.value("scale", 40.0);
        const int samples = p.value("samples", 4096);
        const double z = transverse_z;
        const double y_off = transverse_y;
        auto gen = [scale, z, y_off](double t) {
            return Vec3{scale * std::sin(t), scale * std::sin(t) * std::cos(t) + y_off, z};
        };
        return std::make_shared<SampledCurve>(gen, 0.0, 2.0 * M_PI, samples, /*cyclic=*/true);
    }
    if (g.kind == "route") {
        std::vector<CurvePtr> parts;
        for (const auto& seg : p.at("segments")) {
            LaneGeometry sub{seg.at("kind").get<std::string>(), seg};
            parts.push_back(build_curve(sub, offset, dim));
        }
        return std::make_shared<CompositeCurve>(std::move(parts));
    }
    throw Error(ErrorCode::Map, "unknown lane geometry kind '" + g.kind + "'");
}

}  // namespace map_detail

inline MapPtr make_map(std::string name, int dim, std::vector<LaneDef> lanes,
                       std::vector<std::pair<std::string, std::string>> adjacent) {
    for (auto& l : lanes) {
        if (!l.curve) l.curve = map_detail::build_curve(l.geometry, l.offset, dim);
    }
    return std::make_shared<MapDef>(std::move(name), dim, std::move(lanes),
                                    std::move(adjacent));
}

// Built-in maps (M4 is import-only and intentionally not bundled):
//   M1: 3 parallel straight lanes, 3 m spacing.
//   M2: 5 parallel straight lanes (M1 plus outer lanes T3/T4).
//   M3: 3 parallel lanes with a circular-arc section.
//   M5: 3 vertically stacked straight layers, 1 unit spacing.
//   M6: 3 vertically stacked figure-eight layers, 1 unit spacing.
inline MapPtr builtin_map(const std::string& name) {
    const auto straight_lane = [](const std::string& id, double offset) {
        LaneDef l;
        l.id = id;
        l.geometry = {"straight",
                      nlohmann::json{{"start", {0.0, 0.0}}, {"heading", 0.0}, {"length", 400.0}}};
        l.offset = offset;
        return l;
    };
    if (name == "M1" || name == "M2") {
        std::vector<LaneDef> lanes = {straight_lane("T0", 3.0), straight_lane("T1", 0.0),
                                      straight_lane("T2", -3.0)};
        std::vector<std::pair<std::string, std::string>> adj = {{"T0", "T1"}, {"T1", "T2"}};
        if (name == "M2") {
            lanes.push_back(straight_lane("T3", 6.0));
            lanes.push_back(straight_lane("T4", -6.0));
            adj.emplace_back("T3", "T0");
            adj.emplace_back("T2", "T4");
        }
        return make_map(name, 2, std::move(lanes), std::move(adj));
    }
    if (name == "M3") {
        const auto route_lane = [](const std::string& id, double offset) {
            LaneDef l;
            l.id = id;
            l.geometry = {
                "route",
                nlohmann::json{
                    {"segments",
                     {nlohmann::json{{"kind", "straight"},
                                     {"start", {0.0, 0.0}},
                                     {"heading", 0.0},
                                     {"length", 60.0}},
                      nlohmann::json{{"kind", "arc"},
                                     {"center", {60.0, 40.0}},
                                     {"radius", 40.0},
                                     {"start_angle", -M_PI / 2},
                                     {"sweep", M_PI / 2}},
                      nlohmann::json{{"kind", "straight"},
                                     {"start", {100.0, 40.0}},
                                     {"heading", M_PI / 2},
                                     {"length", 60.0}}}}}};
            l.offset = offset;
            return l;
        };
        // The trailing straight runs along +y; its transverse offset points
        // in -x, which the straight builder derives from the heading.
        std::vector<LaneDef> lanes = {route_lane("T0", 3.0), route_lane("T1", 0.0),
                                      route_lane("T2", -3.0)};
        return make_map("M3", 2, std::move(lanes), {{"T0", "T1"}, {"T1", "T2"}});
    }
    if (name == "M5" || name == "M6") {
        std::vector<LaneDef> lanes;
        const std::vector<std::pair<std::string, double>> layers = {
            {"T0", 2.0}, {"T1", 1.0}, {"T2", 0.0}};
        for (const auto& [id, z] : layers) {
            LaneDef l;
            l.id = id;
            if (name == "M5") {
                l.geometry = {"straight", nlohmann::json{{"start", {0.0, 0.0}},
                                                         {"heading", 0.0},
                                                         {"length", 400.0}}};
            } else {
                l.geometry = {"figure8", nlohmann::json{{"scale", 40.0}, {"samples", 4096}}};
            }
            l.offset = z;
            lanes.push_back(std::move(l));
        }
        return make_map(name, 3, std::move(lanes), {{"T0", "T1"}, {"T1", "T2"}});
    }
    if (name == "M4") {
        throw Error(ErrorCode::Map, "map M4 is import-only and not bundled");
    }
    throw Error(ErrorCode::Map, "unknown builtin map '" + name + "'");
}

// JSON map format:
//   { "dim": 2|3,
//     "lanes": [{ "id": str, "geometry": {"kind": ..., ...}, "offset": num }],
//     "adjacent": [[laneId, laneId], ...] }
inline MapPtr load_map(const nlohmann::json& doc, const std::string& name = "custom") {
    if (!doc.contains("dim")) throw Error(ErrorCode::Config, "map file: missing key 'dim'");
    if (!doc.contains("lanes")) throw Error(ErrorCode::Config, "map file: missing key 'lanes'");
    const int dim = doc.at("dim").get<int>();
    std::vector<LaneDef> lanes;
    for (const auto& lj : doc.at("lanes")) {
        LaneDef l;
        if (!lj.contains("id")) throw Error(ErrorCode::Config, "map file: lane missing 'id'");
        l.id = lj.at("id").get<std::string>();
        if (!lj.contains("geometry")) {
            throw Error(ErrorCode::Config, "map file: lane '" + l.id + "' missing 'geometry'");
        }
        const auto& gj = lj.at("geometry");
        l.geometry = {gj.value("kind", std::string()), gj};
        l.offset = lj.value("offset", 0.0);
        if (!std::isfinite(l.offset)) {
            throw Error(ErrorCode::Config, "map file: lane '" + l.id + "' non-finite offset");
        }
        lanes.push_back(std::move(l));
    }
    std::vector<std::pair<std::string, std::string>> adjacent;
    if (doc.contains("adjacent")) {
        for (const auto& pair : doc.at("adjacent")) {
            adjacent.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
        }
    }
    try {
        return make_map(name, dim, std::move(lanes), std::move(adjacent));
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, std::string("map file: ") + e.what());
    }
}

inline nlohmann::json save_map(const MapDef& map) {
    nlohmann::json doc;
    doc["dim"] = map.dim();
    doc["lanes"] = nlohmann::json::array();
    for (const auto& l : map.lanes()) {
        nlohmann::json lj;
        lj["id"] = l.id;
        nlohmann::json gj = l.geometry.params;
        gj["kind"] = l.geometry.kind;
        lj["geometry"] = gj;
        lj["offset"] = l.offset;
        doc["lanes"].push_back(lj);
    }
    doc["adjacent"] = nlohmann::json::array();
    for (const auto& [a, b] : map.adjacency()) {
        doc["adjacent"].push_back(nlohmann::json::array({a, b}));
    }
    return doc;
}

}  // namespace versekit
