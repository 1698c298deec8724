#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "versekit/agent.hpp"
#include "versekit/dsl/check.hpp"
#include "versekit/errors.hpp"
#include "versekit/extract.hpp"
#include "versekit/geometry.hpp"
#include "versekit/map.hpp"
#include "versekit/sensor.hpp"

namespace versekit {

// An agent's full discrete state: its decision-logic (tactical) mode and the
// map-assigned track mode.
struct ModePair {
    std::string tactical;
    std::string track;

    bool operator==(const ModePair& o) const = default;
    std::string to_string() const { return tactical + "," + track; }
};

using JointMode = std::vector<ModePair>;

inline std::string joint_mode_string(const JointMode& jm) {
    std::string s;
    for (const auto& m : jm) {
        if (!s.empty()) s += ";";
        s += m.to_string();
    }
    return s;
}

struct AgentDef {
    std::string id;
    std::string type_name;
    const AgentType* type = nullptr;
    dsl::CheckedProgram logic;
    HyperRect initial_set;
    ModePair initial_mode;
    AgentParams params;
};

// A scenario: map + agents + shared sensor, with the reach configuration the
// CLI reads from the scenario file.
class Scenario {
  public:
    Scenario(MapPtr map, SensorDef sensor) : map_(std::move(map)), sensor_(sensor) {}

    void add_agent(AgentDef agent) {
        for (const auto& a : agents_) {
            if (a.id == agent.id) {
                throw Error(ErrorCode::Scenario, "duplicate agent id '" + agent.id + "'");
            }
        }
        if (agent.initial_set.size() != agent.type->fields.size()) {
            throw Error(ErrorCode::Scenario,
                        "agent '" + agent.id + "': initial set has " +
                            std::to_string(agent.initial_set.size()) + " dims, schema has " +
                            std::to_string(agent.type->fields.size()));
        }
        agents_.push_back(std::move(agent));
    }

    void set_initial(const std::string& id, HyperRect rect, ModePair mode) {
        AgentDef& a = agent_mut(id);
        if (rect.size() != a.type->fields.size()) {
            throw Error(ErrorCode::Scenario, "agent '" + id + "': initial set dimension mismatch");
        }
        a.initial_set = std::move(rect);
        a.initial_mode = std::move(mode);
    }

    const MapDef& map() const { return *map_; }
    MapPtr map_ptr() const { return map_; }
    const SensorDef& sensor() const { return sensor_; }
    void set_sensor(SensorDef s) { sensor_ = s; }
    const std::vector<AgentDef>& agents() const { return agents_; }
    std::size_t agent_count() const { return agents_.size(); }

    // Compatibility validation. Returns every violation, not just the first:
    //   (1) agent tactical modes covered by the map's mode-transition table,
    //   (2) identical state schemas across agents,
    //   (3) schema/sensor fit.
    std::vector<std::string> validate() const {
        std::vector<std::string> violations;
        if (agents_.empty()) {
            violations.push_back("scenario has no agents");
            return violations;
        }
        for (const auto& a : agents_) {
            for (const auto& tactical : a.logic.tactical_modes) {
                if (MapDef::known_lane_changes().count(tactical) &&
                    !map_->supported_lane_changes().count(tactical)) {
                    const std::string lane =
                        map_->lanes().empty() ? "?" : map_->lanes().front().id;
                    violations.push_back("agent '" + a.id + "': map " + map_->name() +
                                         " does not support h(" + lane + ", Normal, " +
                                         tactical + ")");
                }
            }
            if (!map_->has_mode(a.initial_mode.track)) {
                violations.push_back("agent '" + a.id + "': initial track mode '" +
                                     a.initial_mode.track + "' is not a map track mode");
            }
            if (!a.logic.is_tactical_mode(a.initial_mode.tactical)) {
                violations.push_back("agent '" + a.id + "': initial tactical mode '" +
                                     a.initial_mode.tactical + "' is not declared");
            }
        }
        const auto& schema = agents_.front().type->fields;
        for (const auto& a : agents_) {
            if (a.type->fields != schema) {
                violations.push_back("agent '" + a.id +
                                     "': state schema differs from agent '" +
                                     agents_.front().id + "' (identical state spaces required)");
            }
        }
        if (sensor_.kind == SensorDef::Kind::Noisy &&
            sensor_.position_noise.size() != static_cast<std::size_t>(map_->dim())) {
            violations.push_back("sensor noise bounds have " +
                                 std::to_string(sensor_.position_noise.size()) +
                                 " dims, workspace has " + std::to_string(map_->dim()));
        }
        return violations;
    }

  private:
    AgentDef& agent_mut(const std::string& id) {
        for (auto& a : agents_) {
            if (a.id == id) return a;
        }
        throw Error(ErrorCode::Scenario, "unknown agent id '" + id + "'");
    }

    MapPtr map_;
    SensorDef sensor_;
    std::vector<AgentDef> agents_;
};

// The hybrid automaton H(SC) induced by a scenario: joint continuous space,
// joint mode space, guards and resets delegated to the switching agent, and
// per-agent independent flows. A joint transition changes exactly one
// agent's mode pair.
class HybridAutomaton {
  public:
    struct Candidate {
        int agent;
        int transition;  // index into transitions(agent)
        ModePair target;
    };

    explicit HybridAutomaton(const Scenario& sc) : sc_(sc) {
        const auto violations = sc.validate();
        if (!violations.empty()) {
            throw Error(ErrorCode::Scenario, "invalid scenario: " + violations.front());
        }
        const int k = static_cast<int>(sc.agent_count());
        for (const auto& a : sc.agents()) {
            auto extracted = extract_transitions(a.logic, k);
            transitions_.push_back(std::move(extracted.transitions));
            asserts_.push_back(std::move(extracted.asserts));
        }
    }

    const Scenario& scenario() const { return sc_; }
    std::size_t agent_count() const { return sc_.agent_count(); }
    std::size_t state_dims() const { return sc_.agents().front().type->fields.size(); }
    std::size_t joint_dims() const { return agent_count() * state_dims(); }

    const std::vector<TransitionSpec>& transitions(std::size_t agent) const {
        return transitions_[agent];
    }
    const std::vector<AssertSpec>& asserts(std::size_t agent) const { return asserts_[agent]; }

    HyperRect joint_initial_set() const {
        std::vector<Interval> dims;
        for (const auto& a : sc_.agents()) {
            for (const auto& iv : a.initial_set.dims()) dims.push_back(iv);
        }
        return HyperRect(std::move(dims));
    }

    JointMode joint_initial_mode() const {
        JointMode jm;
        for (const auto& a : sc_.agents()) jm.push_back(a.initial_mode);
        return jm;
    }

    // Transition candidates from a joint mode, in deterministic order: agent
    // index, then transition declaration order. A candidate exists when the
    // switching agent's source tactical matches and the map defines the
    // track-mode successor.
    std::vector<Candidate> candidates(const JointMode& mode) const {
        std::vector<Candidate> out;
        for (std::size_t i = 0; i < agent_count(); ++i) {
            const auto& specs = transitions_[i];
            for (std::size_t t = 0; t < specs.size(); ++t) {
                if (specs[t].src_tactical != mode[i].tactical) continue;
                const auto next_track = sc_.map().try_next_track_mode(
                    mode[i].track, specs[t].src_tactical, specs[t].dst_tactical);
                if (!next_track) continue;
                out.push_back(Candidate{static_cast<int>(i), static_cast<int>(t),
                                        ModePair{specs[t].dst_tactical, *next_track}});
            }
        }
        return out;
    }

    // Agent views of a joint box under a fixed joint mode.
    std::vector<AgentView> views(const HyperRect& joint, const JointMode& mode) const {
        const std::size_t n = state_dims();
        std::vector<AgentView> v;
        v.reserve(agent_count());
        for (std::size_t i = 0; i < agent_count(); ++i) {
            v.push_back(AgentView{joint.slice(i * n, n), mode[i].tactical, mode[i].track});
        }
        return v;
    }

    EvalEnv guard_env(const HyperRect& joint, const JointMode& mode, int ego) const {
        const std::size_t n = state_dims();
        std::vector<HyperRect> rects;
        rects.reserve(agent_count());
        for (std::size_t i = 0; i < agent_count(); ++i) rects.push_back(joint.slice(i * n, n));
        const auto observed = sc_.sensor().observe_sets(static_cast<std::size_t>(ego), rects);
        EvalEnv env;
        env.ego = ego;
        env.map = &sc_.map();
        for (std::size_t i = 0; i < agent_count(); ++i) {
            env.agents.push_back(AgentView{observed[i], mode[i].tactical, mode[i].track});
        }
        return env;
    }

    EvalEnv raw_env(const HyperRect& joint, const JointMode& mode, int ego) const {
        EvalEnv env;
        env.ego = ego;
        env.map = &sc_.map();
        env.agents = views(joint, mode);
        return env;
    }

    // Discrete post: clip the switching agent's box against the guard, apply
    // the resets as interval images, and advance the track mode through the
    // map. Non-switching agents are untouched.
    std::pair<HyperRect, JointMode> post_disc(const HyperRect& joint, const JointMode& mode,
                                              const Candidate& cand) const {
        const std::size_t n = state_dims();
        const auto& spec = transitions_[static_cast<std::size_t>(cand.agent)]
                                       [static_cast<std::size_t>(cand.transition)];
        EvalEnv env = raw_env(joint, mode, cand.agent);
        const std::size_t ego = static_cast<std::size_t>(cand.agent);
        HyperRect ego_rect = clip_guard(env.agents[ego].rect, spec.guard, env);
        env.agents[ego].rect = ego_rect;
        for (const auto& [field, expr] : spec.resets) {
            const Interval img = IntervalEval::eval_num(expr, env);
            ego_rect[static_cast<std::size_t>(field)] = img;
            env.agents[ego].rect = ego_rect;
        }
        std::vector<Interval> dims = joint.dims();
        for (std::size_t d = 0; d < n; ++d) dims[ego * n + d] = ego_rect[d];
        JointMode next = mode;
        next[ego] = cand.target;
        return {HyperRect(std::move(dims)), next};
    }

  private:
    const Scenario& sc_;
    std::vector<std::vector<TransitionSpec>> transitions_;
    std::vector<std::vector<AssertSpec>> asserts_;
};

inline std::shared_ptr<HybridAutomaton> build_automaton(const Scenario& sc) {
    return std::make_shared<HybridAutomaton>(sc);
}

}  // namespace versekit
