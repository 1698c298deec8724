#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "versekit/decomposition.hpp"
#include "versekit/errors.hpp"
#include "versekit/eval.hpp"
#include "versekit/geometry.hpp"
#include "versekit/scenario.hpp"

namespace versekit {

struct EngineConfig {
    std::string name = "sample-bloat";
    double bloat_factor = 0.2;  // tube width inflation relative to sample spread
    int corner_cap = 5;         // corners taken over at most this many widest dims

    bool operator==(const EngineConfig& o) const = default;
};

struct ReachConfig {
    double delta = 1.0;
    double dt = 0.05;
    int horizon = 10;  // number of delta segments
    EngineConfig engine;
    std::size_t node_cap = 100000;
    bool simulation = false;
};

struct SegmentResult {
    std::vector<TimedRect> tube;  // relative times within [0, delta]
    HyperRect end_set;
    // Simulation mode keeps the raw joint trace alongside the tube.
    std::vector<double> trace_times;
    std::vector<std::vector<double>> trace_states;
};

// Cache backend interface consumed by the tree builder. The cold algorithms
// run with a null backend; incremental verification plugs in persistent
// guard and flow caches.
class ReachCacheBackend {
  public:
    virtual ~ReachCacheBackend() = default;

    struct GuardHit {
        bool found = false;
        TriBool verdict = TriBool::Unknown;  // DefFalse == unsat
        HyperRect child_set;
        JointMode child_mode;
    };

    // The key identifies the transition edge: the canonical node, the
    // switching agent with its target mode pair, and the structural
    // fingerprints of the extracted guard and reset (so logic edits
    // invalidate entries).
    struct GuardKey {
        int agent;
        ModePair target;
        std::uint64_t guard_fp;
        std::uint64_t reset_fp;
    };

    virtual GuardHit guard_lookup(const HyperRect& start, const JointMode& mode,
                                  const GuardKey& key) = 0;
    virtual void guard_record(const HyperRect& start, const JointMode& mode,
                              const GuardKey& key, TriBool verdict,
                              const HyperRect* child_set, const JointMode* child_mode) = 0;

    struct FlowHit {
        bool found = false;
        std::vector<TimedRect> tube;  // relative times
        HyperRect end_set;
    };

    virtual FlowHit flow_lookup(const HyperRect& start, const JointMode& mode) = 0;
    virtual void flow_record(const HyperRect& start, const JointMode& mode,
                             const std::vector<TimedRect>& tube, const HyperRect& end_set) = 0;
};

// ---------------------------------------------------------------------------
// Continuous post operators.
// ---------------------------------------------------------------------------

namespace reach_detail {

// Sample selection for the sample-bloat engine: all corners over the widest
// non-degenerate dims (capped) plus the center point.
inline std::vector<std::vector<double>> corner_samples(const HyperRect& rect, int cap) {
    std::vector<std::size_t> wide;
    for (std::size_t d = 0; d < rect.size(); ++d) {
        if (rect[d].width() > 0.0) wide.push_back(d);
    }
    std::stable_sort(wide.begin(), wide.end(), [&](std::size_t a, std::size_t b) {
        return rect[a].width() > rect[b].width();
    });
    if (static_cast<int>(wide.size()) > cap) wide.resize(static_cast<std::size_t>(cap));
    std::sort(wide.begin(), wide.end());

    std::vector<std::vector<double>> samples;
    samples.push_back(rect.center());
    const std::size_t combos = std::size_t{1} << wide.size();
    if (wide.empty()) return samples;
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::vector<double> p = rect.center();
        for (std::size_t j = 0; j < wide.size(); ++j) {
            p[wide[j]] = (mask >> j) & 1 ? rect[wide[j]].hi : rect[wide[j]].lo;
        }
        samples.push_back(std::move(p));
    }
    return samples;
}

// Per-agent sample-bloat tube: per time step, the hull of the sampled
// states widened to (1 + beta) of the sample spread.
struct AgentTube {
    std::vector<std::vector<Interval>> step_rects;  // per time index, per dim
};

inline AgentTube sample_bloat_agent(const AgentDef& agent, const HyperRect& sub,
                                    const ModePair& mode, const MapDef& map, double delta,
                                    double dt, const EngineConfig& engine) {
    const auto samples = corner_samples(sub, engine.corner_cap);
    std::vector<Trace> traces;
    traces.reserve(samples.size());
    for (const auto& x0 : samples) {
        FlowRequest req;
        req.x0 = x0;
        req.tactical = mode.tactical;
        req.track = mode.track;
        req.map = &map;
        req.duration = delta;
        req.dt = dt;
        req.params = agent.params;
        traces.push_back(agent.type->flow(req));
    }
    const std::size_t steps = traces.front().times.size();
    const std::size_t dims = sub.size();
    AgentTube tube;
    tube.step_rects.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        auto& rect = tube.step_rects[t];
        rect.reserve(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            double lo = traces[0].states[t][d];
            double hi = lo;
            for (const auto& tr : traces) {
                lo = std::min(lo, tr.states[t][d]);
                hi = std::max(hi, tr.states[t][d]);
            }
            const double pad = 0.5 * engine.bloat_factor * (hi - lo);
            rect.emplace_back(lo - pad, hi + pad);
        }
    }
    return tube;
}

// Mixed-monotone decomposition tube: integrate the 2n-dimensional embedding
// from (sub.lo, sub.hi) under the agent's disturbance bounds.
inline AgentTube mixed_monotone_agent(const AgentDef& agent, const HyperRect& sub,
                                      double delta, double dt) {
    if (!agent.type->decomposition) {
        throw Error(ErrorCode::Engine, "agent type '" + agent.type_name +
                                           "' has no decomposition function registered");
    }
    const std::size_t n = sub.size();
    const double w_bound = agent.params.get("w_bound", 0.0);
    const std::vector<double> w_lo(n, -w_bound), w_hi(n, w_bound);
    const EnvelopeTrace env = decomposition_post(agent.type->decomposition, sub.lower(),
                                                 sub.upper(), w_lo, w_hi, delta, dt);
    AgentTube tube;
    tube.step_rects.reserve(env.times.size());
    for (std::size_t t = 0; t < env.times.size(); ++t) {
        std::vector<Interval> rect;
        rect.reserve(n);
        for (std::size_t d2 = 0; d2 < n; ++d2) {
            double a = env.lower[t][d2];
            double b = env.upper[t][d2];
            if (a > b) {
                if (a - b > 1e-9) {
                    throw Error(ErrorCode::Engine,
                                "mixed-monotone envelope inverted at dimension " +
                                    std::to_string(d2));
                }
                std::swap(a, b);
            }
            rect.emplace_back(a, b);
        }
        tube.step_rects.push_back(std::move(rect));
    }
    return tube;
}

}  // namespace reach_detail

// Continuous post over one delta segment. Returns the reachtube as timed
// rects (relative times) and the final set; guarantees by construction that
// every sampled trace lies inside the tube.
inline SegmentResult post_cont(const HybridAutomaton& aut, const HyperRect& joint,
                               const JointMode& mode, double delta, double dt,
                               const EngineConfig& engine) {
    const std::size_t k = aut.agent_count();
    const std::size_t n = aut.state_dims();
    std::vector<reach_detail::AgentTube> agent_tubes;
    agent_tubes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const HyperRect sub = joint.slice(i * n, n);
        const AgentDef& agent = aut.scenario().agents()[i];
        if (engine.name == "sample-bloat") {
            agent_tubes.push_back(reach_detail::sample_bloat_agent(
                agent, sub, mode[i], aut.scenario().map(), delta, dt, engine));
        } else if (engine.name == "mixed-monotone") {
            agent_tubes.push_back(reach_detail::mixed_monotone_agent(agent, sub, delta, dt));
        } else {
            throw Error(ErrorCode::Engine, "unknown reachability engine '" + engine.name + "'");
        }
    }
    const std::size_t steps = agent_tubes.front().step_rects.size();
    SegmentResult out;
    out.tube.reserve(steps - 1);
    const auto joint_rect = [&](std::size_t t) {
        std::vector<Interval> dims;
        dims.reserve(k * n);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t d = 0; d < n; ++d) dims.push_back(agent_tubes[i].step_rects[t][d]);
        }
        return HyperRect(std::move(dims));
    };
    HyperRect prev = joint_rect(0);
    for (std::size_t t = 1; t < steps; ++t) {
        HyperRect cur = joint_rect(t);
        out.tube.emplace_back((t - 1) * dt, t * dt, hull(prev, cur));
        prev = std::move(cur);
    }
    out.end_set = prev;
    return out;
}

// Point-mode continuous post: one flow per agent from the exact state.
inline SegmentResult simulate_segment(const HybridAutomaton& aut,
                                      const std::vector<double>& joint_point,
                                      const JointMode& mode, double delta, double dt) {
    const std::size_t k = aut.agent_count();
    const std::size_t n = aut.state_dims();
    std::vector<Trace> traces;
    traces.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        FlowRequest req;
        req.x0.assign(joint_point.begin() + static_cast<long>(i * n),
                      joint_point.begin() + static_cast<long>((i + 1) * n));
        req.tactical = mode[i].tactical;
        req.track = mode[i].track;
        req.map = &aut.scenario().map();
        req.duration = delta;
        req.dt = dt;
        req.params = aut.scenario().agents()[i].params;
        traces.push_back(aut.scenario().agents()[i].type->flow(req));
    }
    SegmentResult out;
    const std::size_t steps = traces.front().times.size();
    out.trace_times.reserve(steps);
    out.trace_states.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> joint;
        joint.reserve(k * n);
        for (std::size_t i = 0; i < k; ++i) {
            joint.insert(joint.end(), traces[i].states[t].begin(), traces[i].states[t].end());
        }
        out.trace_times.push_back(traces.front().times[t]);
        out.trace_states.push_back(std::move(joint));
    }
    out.tube.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        out.tube.emplace_back(out.trace_times[t], out.trace_times[t],
                              HyperRect::point(out.trace_states[t]));
    }
    out.end_set = HyperRect::point(out.trace_states.back());
    return out;
}

// ---------------------------------------------------------------------------
// Execution tree.
// ---------------------------------------------------------------------------

struct TreeNode {
    int id = 0;
    int parent = -1;
    int depth = 0;
    JointMode mode;
    HyperRect start_set;
    std::vector<TimedRect> tube;  // absolute times
    HyperRect end_set;
    int switching_agent = -1;   // -1: root or stay-child
    int transition_index = -1;  // index into the switching agent's transitions
    std::vector<int> children;
    std::string error;  // engine/flow failure recorded during expansion
    // Simulation mode only: the raw joint trace.
    std::vector<double> trace_times;
    std::vector<std::vector<double>> trace_states;
    // Filled by check_asserts: worst verdict per flattened assert.
    std::vector<TriBool> assert_verdicts;
};

struct ExecutionTree {
    double delta = 0.0;
    double dt = 0.0;
    int horizon = 0;
    EngineConfig engine;
    bool simulation = false;
    bool incomplete = false;  // node cap reached
    bool had_errors = false;
    std::vector<TreeNode> nodes;  // BFS order; node id == index

    int transition_count() const {
        int count = 0;
        for (const auto& n : nodes) {
            if (n.switching_agent >= 0) ++count;
        }
        return count;
    }

    std::vector<int> depth_nodes(int depth) const {
        std::vector<int> ids;
        for (const auto& n : nodes) {
            if (n.depth == depth) ids.push_back(n.id);
        }
        return ids;
    }

    std::vector<JointMode> mode_path(int node_id) const {
        std::vector<JointMode> path;
        for (int id = node_id; id >= 0; id = nodes[static_cast<std::size_t>(id)].parent) {
            path.push_back(nodes[static_cast<std::size_t>(id)].mode);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

// ---------------------------------------------------------------------------
// Tree builder: breadth-first expansion shared by simulate, verify and
// verifyInc. Deterministic node ordering: stay-child last, transition
// children by (agent index, transition declaration order).
// ---------------------------------------------------------------------------

namespace reach_detail {

struct GuardOutcome {
    TriBool verdict = TriBool::DefFalse;
    bool unconditional = false;
    std::optional<HyperRect> child_set;
    JointMode child_mode;
};

}  // namespace reach_detail

class TreeBuilder {
  public:
    TreeBuilder(const HybridAutomaton& aut, const ReachConfig& cfg,
                ReachCacheBackend* caches = nullptr)
        : aut_(aut), cfg_(cfg), caches_(caches) {}

    ExecutionTree run() {
        if (cfg_.delta <= 0 || cfg_.dt <= 0) {
            throw Error(ErrorCode::Config, "delta and dt must be positive");
        }
        const double ratio = cfg_.delta / cfg_.dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-9) {
            throw Error(ErrorCode::Config,
                        "decision period delta must be an integer multiple of dt");
        }
        ExecutionTree tree;
        tree.delta = cfg_.delta;
        tree.dt = cfg_.dt;
        tree.horizon = cfg_.horizon;
        tree.engine = cfg_.engine;
        tree.simulation = cfg_.simulation;

        TreeNode root;
        root.id = 0;
        root.depth = 0;
        root.mode = aut_.joint_initial_mode();
        root.start_set = aut_.joint_initial_set();
        if (cfg_.simulation && !root.start_set.is_point()) {
            // Simulation runs from the center of a non-degenerate initial set.
            root.start_set = HyperRect::point(root.start_set.center());
        }
        tree.nodes.push_back(std::move(root));
        expand_segment(tree, 0);

        std::deque<int> queue = {0};
        while (!queue.empty()) {
            const int id = queue.front();
            queue.pop_front();
            if (tree.nodes[static_cast<std::size_t>(id)].depth + 1 >= cfg_.horizon) continue;
            if (!tree.nodes[static_cast<std::size_t>(id)].error.empty()) continue;
            if (tree.nodes.size() >= cfg_.node_cap) {
                tree.incomplete = true;
                break;
            }
            for (const int child : expand_children(tree, id)) queue.push_back(child);
        }
        return tree;
    }

  private:
    // Computes the node's continuous segment (through the flow cache when
    // one is attached) and stores the absolute-time tube.
    void expand_segment(ExecutionTree& tree, int id) {
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        const double t0 = node.depth * cfg_.delta;
        try {
            SegmentResult seg;
            if (cfg_.simulation) {
                seg = simulate_segment(aut_, node.start_set.lower(), node.mode, cfg_.delta,
                                       cfg_.dt);
            } else if (caches_ != nullptr) {
                const auto hit = caches_->flow_lookup(node.start_set, node.mode);
                if (hit.found) {
                    seg.tube = hit.tube;
                    seg.end_set = hit.end_set;
                } else {
                    seg = post_cont(aut_, node.start_set, node.mode, cfg_.delta, cfg_.dt,
                                    cfg_.engine);
                    caches_->flow_record(node.start_set, node.mode, seg.tube, seg.end_set);
                }
            } else {
                seg = post_cont(aut_, node.start_set, node.mode, cfg_.delta, cfg_.dt,
                                cfg_.engine);
            }
            node.tube.reserve(seg.tube.size());
            for (const auto& tr : seg.tube) {
                node.tube.emplace_back(t0 + tr.t_lo, t0 + tr.t_hi, tr.rect);
            }
            node.end_set = seg.end_set;
            for (auto& t : seg.trace_times) t += t0;
            node.trace_times = std::move(seg.trace_times);
            node.trace_states = std::move(seg.trace_states);
        } catch (const Error& e) {
            node.error = e.formatted();
            tree.had_errors = true;
        }
    }

    // Evaluates every transition candidate on the node's end-of-segment set
    // and emits children per the branching rule:
    //  - every candidate with a non-DefFalse verdict becomes a child
    //    (simulation: DefTrue only, point verdicts are exact),
    //  - a stay-child is added when no verdict is DefTrue, or any verdict is
    //    Unknown, or a DefTrue transition is unconditional while another
    //    candidate is enabled.
    std::vector<int> expand_children(ExecutionTree& tree, int id) {
        const TreeNode snapshot = tree.nodes[static_cast<std::size_t>(id)];
        const auto candidates = aut_.candidates(snapshot.mode);

        std::vector<reach_detail::GuardOutcome> outcomes;
        outcomes.reserve(candidates.size());
        for (const auto& cand : candidates) {
            outcomes.push_back(evaluate_candidate(tree, id, snapshot, cand));
        }

        bool any_unknown = false;
        bool any_def_true = false;
        bool unconditional_clash = false;
        int enabled = 0;
        for (const auto& oc : outcomes) {
            if (oc.verdict == TriBool::Unknown) any_unknown = true;
            if (oc.verdict == TriBool::DefTrue) any_def_true = true;
            if (oc.verdict != TriBool::DefFalse) ++enabled;
        }
        for (const auto& oc : outcomes) {
            if (oc.verdict == TriBool::DefTrue && oc.unconditional && enabled > 1) {
                unconditional_clash = true;
            }
        }
        const bool stay = !any_def_true || any_unknown || unconditional_clash;

        std::vector<int> children;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const auto& oc = outcomes[c];
            const bool take = cfg_.simulation ? oc.verdict == TriBool::DefTrue
                                              : oc.verdict != TriBool::DefFalse;
            if (!take || !oc.child_set) continue;
            TreeNode child;
            child.id = static_cast<int>(tree.nodes.size());
            child.parent = id;
            child.depth = snapshot.depth + 1;
            child.mode = oc.child_mode;
            child.start_set = *oc.child_set;
            child.switching_agent = candidates[c].agent;
            child.transition_index = candidates[c].transition;
            tree.nodes.push_back(std::move(child));
            tree.nodes[static_cast<std::size_t>(id)].children.push_back(
                static_cast<int>(tree.nodes.size() - 1));
            children.push_back(static_cast<int>(tree.nodes.size() - 1));
        }
        if (stay) {
            TreeNode child;
            child.id = static_cast<int>(tree.nodes.size());
            child.parent = id;
            child.depth = snapshot.depth + 1;
            child.mode = snapshot.mode;
            child.start_set = snapshot.end_set;
            tree.nodes.push_back(std::move(child));
            tree.nodes[static_cast<std::size_t>(id)].children.push_back(
                static_cast<int>(tree.nodes.size() - 1));
            children.push_back(static_cast<int>(tree.nodes.size() - 1));
        }
        for (const int c : children) expand_segment(tree, c);
        return children;
    }

    reach_detail::GuardOutcome evaluate_candidate(ExecutionTree& tree, int id,
                                                  const TreeNode& node,
                                                  const HybridAutomaton::Candidate& cand) {
        const auto& spec = aut_.transitions(static_cast<std::size_t>(cand.agent))
                               [static_cast<std::size_t>(cand.transition)];
        reach_detail::GuardOutcome oc;
        oc.unconditional =
            spec.guard->kind == dsl::ExprKind::BoolLit && spec.guard->boolean;
        const ReachCacheBackend::GuardKey key{cand.agent, cand.target,
                                              spec.guard_fingerprint,
                                              spec.reset_fingerprint};

        if (caches_ != nullptr) {
            const auto hit = caches_->guard_lookup(node.start_set, node.mode, key);
            if (hit.found) {
                oc.verdict = hit.verdict;
                if (hit.verdict != TriBool::DefFalse) {
                    oc.child_set = hit.child_set;
                    oc.child_mode = hit.child_mode;
                }
                return oc;
            }
        }

        try {
            const EvalEnv env = aut_.guard_env(node.end_set, node.mode, cand.agent);
            oc.verdict = eval_guard(spec.guard, env);
            if (cfg_.simulation && oc.verdict == TriBool::Unknown) {
                throw Error(ErrorCode::Eval,
                            "point guard evaluation returned unknown", spec.span);
            }
            if (oc.verdict != TriBool::DefFalse) {
                auto [child_set, child_mode] = aut_.post_disc(node.end_set, node.mode, cand);
                oc.child_set = std::move(child_set);
                oc.child_mode = std::move(child_mode);
            }
        } catch (const Error& e) {
            tree.nodes[static_cast<std::size_t>(id)].error = e.formatted();
            tree.had_errors = true;
            oc.verdict = TriBool::DefFalse;
            oc.child_set.reset();
            return oc;
        }

        if (caches_ != nullptr) {
            caches_->guard_record(node.start_set, node.mode, key, oc.verdict,
                                  oc.child_set ? &*oc.child_set : nullptr,
                                  oc.child_set ? &oc.child_mode : nullptr);
        }
        return oc;
    }

    const HybridAutomaton& aut_;
    ReachConfig cfg_;
    ReachCacheBackend* caches_;
};

// Breadth-first branching simulation from a point initial state.
inline ExecutionTree simulate(const HybridAutomaton& aut, ReachConfig cfg,
                              ReachCacheBackend* caches = nullptr) {
    cfg.simulation = true;
    return TreeBuilder(aut, cfg, caches).run();
}

// Bounded-time reachability: over-approximate execution tree up to the
// horizon.
inline ExecutionTree verify(const HybridAutomaton& aut, ReachConfig cfg,
                            ReachCacheBackend* caches = nullptr) {
    cfg.simulation = false;
    return TreeBuilder(aut, cfg, caches).run();
}

// ---------------------------------------------------------------------------
// Assertion checking.
// ---------------------------------------------------------------------------

struct AssertInstance {
    int agent;
    std::string label;
};

inline std::vector<AssertInstance> assert_instances(const HybridAutomaton& aut) {
    std::vector<AssertInstance> out;
    for (std::size_t i = 0; i < aut.agent_count(); ++i) {
        for (const auto& spec : aut.asserts(i)) {
            out.push_back(AssertInstance{static_cast<int>(i), spec.label});
        }
    }
    return out;
}

struct Violation {
    int agent;
    std::string label;
    int node_id;
    TriBool verdict;  // DefFalse or Unknown (potential violation)
    TimedRect witness;
    std::vector<JointMode> mode_path;
};

// Over-approximate safety: only DefTrue passes. Every delta-segment rect of
// every node is checked against every assert; DefFalse or Unknown verdicts
// are recorded as potential violations with the witness rect and the mode
// path back to the root.
inline std::vector<Violation> check_asserts(ExecutionTree& tree, const HybridAutomaton& aut) {
    std::vector<Violation> violations;
    const auto instances = assert_instances(aut);
    for (auto& node : tree.nodes) {
        node.assert_verdicts.assign(instances.size(), TriBool::DefTrue);
        if (node.tube.empty()) continue;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < aut.agent_count(); ++i) {
            for (const auto& spec : aut.asserts(i)) {
                TriBool worst = TriBool::DefTrue;
                const TimedRect* witness = nullptr;
                for (const auto& tr : node.tube) {
                    EvalEnv env = aut.raw_env(tr.rect, node.mode, static_cast<int>(i));
                    const TriBool v = eval_guard(spec.predicate, env);
                    if (v < worst) {
                        worst = v;
                        witness = &tr;
                        if (worst == TriBool::DefFalse) break;
                    }
                }
                node.assert_verdicts[flat] = worst;
                if (worst != TriBool::DefTrue && witness != nullptr) {
                    violations.push_back(Violation{static_cast<int>(i), spec.label, node.id,
                                                   worst, *witness, tree.mode_path(node.id)});
                }
                ++flat;
            }
        }
    }
    return violations;
}

}  // namespace versekit
