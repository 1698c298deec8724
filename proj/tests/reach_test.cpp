#include "versekit/reach.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support/builders.hpp"
#include "support/helpers.hpp"

namespace versekit {
namespace {

using testing::make_agent;

ReachConfig fig8_config() {
    ReachConfig cfg;
    cfg.delta = 4.0;
    cfg.dt = 0.05;
    cfg.horizon = 6;
    return cfg;
}

int leaf_count(const ExecutionTree& tree) {
    int leaves = 0;
    for (const auto& n : tree.nodes) {
        if (n.children.empty()) ++leaves;
    }
    return leaves;
}

// Transition branches: subtrees rooted at a non-stay edge.
int transition_branches(const ExecutionTree& tree) {
    int count = 0;
    for (const auto& n : tree.nodes) {
        if (n.switching_agent >= 0) {
            const auto& parent = tree.nodes[static_cast<std::size_t>(n.parent)];
            (void)parent;
            ++count;
        }
    }
    return count;
}

TEST(PostCont, PointSetGivesExactTrace) {
    const MapPtr m5 = builtin_map("M5");
    Scenario sc(m5, SensorDef::transparent());
    sc.add_agent(make_agent("d", "drone", "logic/drone_npv.vdl", *m5, {0, 0, 1, 1, 0, 0},
                            {0, 0, 1, 1, 0, 0}, "Normal", "T1", {{"speed", 1.0}}));
    const HybridAutomaton aut(sc);
    const auto seg = post_cont(aut, aut.joint_initial_set(), aut.joint_initial_mode(), 2.0,
                               0.05, EngineConfig{});
    // Degenerate input: zero spread, zero bloat; the tube hull matches the
    // simulated trace exactly.
    const auto sim = simulate_segment(aut, aut.joint_initial_set().lower(),
                                      aut.joint_initial_mode(), 2.0, 0.05);
    ASSERT_EQ(seg.tube.size(), sim.trace_states.size() - 1);
    EXPECT_EQ(seg.end_set, sim.end_set);
    for (std::size_t t = 0; t < seg.tube.size(); ++t) {
        EXPECT_TRUE(contains_point(seg.tube[t].rect, sim.trace_states[t]));
        EXPECT_TRUE(contains_point(seg.tube[t].rect, sim.trace_states[t + 1]));
    }
}

TEST(PostCont, CarIntervalTranslatesAlongLane) {
    const MapPtr m1 = builtin_map("M1");
    Scenario sc(m1, SensorDef::transparent());
    sc.add_agent(make_agent("c", "car", "logic/car_npv.vdl", *m1, {0.0, 0, 0, 1},
                            {0.1, 0, 0, 1}, "Normal", "T1", {{"speed", 1.0}}));
    const HybridAutomaton aut(sc);
    const auto seg = post_cont(aut, aut.joint_initial_set(), aut.joint_initial_mode(), 1.0,
                               0.05, EngineConfig{});
    // Constant speed 1 for 1 s translates x by 1; the end set must contain
    // the translated interval.
    EXPECT_LE(seg.end_set[0].lo, 1.0 + 1e-6);
    EXPECT_GE(seg.end_set[0].hi, 1.1 - 1e-6);
}

TEST(PostCont, MonteCarloTracesStayInsideTube) {
    const MapPtr m5 = builtin_map("M5");
    Scenario sc(m5, SensorDef::transparent());
    sc.add_agent(make_agent("a", "drone", "logic/drone_npv.vdl", *m5,
                            {0, -0.2, 0.9, 0.9, 0, 0}, {0.5, 0.2, 1.1, 1.1, 0, 0}, "Normal",
                            "T1", {{"speed", 1.0}}));
    sc.add_agent(make_agent("b", "drone", "logic/drone_npv.vdl", *m5,
                            {8, -0.1, 1.9, 0.4, 0, 0}, {8.5, 0.1, 2.1, 0.6, 0, 0}, "Normal",
                            "T0", {{"speed", 0.5}}));
    const HybridAutomaton aut(sc);
    const HyperRect init = aut.joint_initial_set();
    const auto seg =
        post_cont(aut, init, aut.joint_initial_mode(), 3.0, 0.05, EngineConfig{});
    std::mt19937_64 rng(5);
    for (int mc = 0; mc < 100; ++mc) {
        std::vector<double> x0;
        for (std::size_t d = 0; d < init.size(); ++d) {
            std::uniform_real_distribution<double> u(init[d].lo, init[d].hi);
            x0.push_back(u(rng));
        }
        const auto sim = simulate_segment(aut, x0, aut.joint_initial_mode(), 3.0, 0.05);
        for (std::size_t t = 0; t + 1 < sim.trace_states.size(); ++t) {
            EXPECT_TRUE(contains_point(seg.tube[t].rect, sim.trace_states[t]))
                << "mc=" << mc << " t=" << t;
        }
        EXPECT_TRUE(contains(seg.end_set, sim.end_set));
    }
}

TEST(Simulate, SingleNpvAgentIsAChain) {
    const MapPtr m5 = builtin_map("M5");
    Scenario sc(m5, SensorDef::transparent());
    sc.add_agent(make_agent("d", "drone", "logic/drone_npv.vdl", *m5, {0, 0, 1, 1, 0, 0},
                            {0, 0, 1, 1, 0, 0}, "Normal", "T1"));
    const HybridAutomaton aut(sc);
    ReachConfig cfg;
    cfg.delta = 1.0;
    cfg.dt = 0.05;
    cfg.horizon = 7;
    const ExecutionTree tree = simulate(aut, cfg);
    EXPECT_EQ(tree.nodes.size(), 7u);
    EXPECT_EQ(tree.transition_count(), 0);
    EXPECT_EQ(leaf_count(tree), 1);
}

TEST(Simulate, Fig8TwoBranches) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    const ExecutionTree tree = simulate(aut, fig8_config());
    EXPECT_EQ(leaf_count(tree), 2);
    EXPECT_EQ(tree.transition_count(), 4);  // two dodges, two completions
    // Both dodge branches belong to the red (faster, trailing) drone.
    std::set<std::string> dodge_modes;
    for (const auto& n : tree.nodes) {
        if (n.switching_agent == 0 &&
            tree.nodes[static_cast<std::size_t>(n.parent)].mode[0].tactical == "Normal") {
            dodge_modes.insert(n.mode[0].tactical);
        }
        EXPECT_NE(n.switching_agent, 1);  // the slow leader never reacts in simulation
    }
    EXPECT_EQ(dodge_modes, (std::set<std::string>{"MoveUp", "MoveDown"}));
}

TEST(Verify, Fig8FourBranchesAndEightTransitions) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    const ExecutionTree tree = verify(aut, fig8_config());
    EXPECT_FALSE(tree.had_errors);
    // All four dodges (red up/down, blue up/down) are explored.
    int dodges = 0;
    std::set<std::pair<int, std::string>> dodge_kinds;
    for (const auto& n : tree.nodes) {
        if (n.switching_agent < 0) continue;
        const auto& parent = tree.nodes[static_cast<std::size_t>(n.parent)];
        if (parent.mode[static_cast<std::size_t>(n.switching_agent)].tactical == "Normal") {
            ++dodges;
            dodge_kinds.insert(
                {n.switching_agent, n.mode[static_cast<std::size_t>(n.switching_agent)].tactical});
        }
    }
    EXPECT_EQ(dodges, 4);
    EXPECT_EQ(dodge_kinds.size(), 4u);
    EXPECT_EQ(tree.transition_count(), 8);  // four dodges + four completions
}

TEST(Verify, Fig8RestrictedZoneViolatedOnExactlyOneBranch) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    ExecutionTree tree = verify(aut, fig8_config());
    const auto violations = check_asserts(tree, aut);
    ASSERT_FALSE(violations.empty());
    // Collect the dodge ancestor of every violating node: all violations live
    // in a single branch (the red drone moving down).
    std::set<int> violating_branches;
    for (const auto& v : violations) {
        int id = v.node_id;
        int branch_root = -1;
        while (id >= 0) {
            const auto& n = tree.nodes[static_cast<std::size_t>(id)];
            if (n.switching_agent >= 0) branch_root = n.id;
            id = n.parent;
        }
        violating_branches.insert(branch_root);
        EXPECT_EQ(v.label, "restricted airspace");
    }
    EXPECT_EQ(violating_branches.size(), 1u);
    const int branch = *violating_branches.begin();
    const auto& bn = tree.nodes[static_cast<std::size_t>(branch)];
    EXPECT_EQ(bn.switching_agent, 0);
    EXPECT_EQ(bn.mode[0].tactical, "MoveDown");  // the red drone's downward dodge
    EXPECT_EQ(bn.mode[0].track, "M12");
}

TEST(Verify, DeterministicTrees) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    const ExecutionTree a = verify(aut, fig8_config());
    const ExecutionTree b = verify(aut, fig8_config());
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        EXPECT_EQ(a.nodes[i].mode, b.nodes[i].mode);
        EXPECT_EQ(a.nodes[i].start_set, b.nodes[i].start_set);
        EXPECT_EQ(a.nodes[i].end_set, b.nodes[i].end_set);
        EXPECT_EQ(a.nodes[i].children, b.nodes[i].children);
    }
}

// Simulation branch structure equals an independent transition-closure
// oracle: recursive descent over concrete guard evaluations.
TEST(Simulate, BranchStructureMatchesClosureOracle) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    const ReachConfig cfg = fig8_config();
    const ExecutionTree tree = simulate(aut, cfg);

    // Oracle: expand (point, joint mode, depth) recursively; children are
    // the concrete-satisfied single-switch transitions, a stay child exists
    // only when none is satisfied.
    struct Oracle {
        const HybridAutomaton& aut;
        const ReachConfig& cfg;
        int nodes = 0;
        int transitions = 0;
        void expand(const std::vector<double>& point, const JointMode& mode, int depth) {
            ++nodes;
            if (depth + 1 >= cfg.horizon) return;
            const auto seg = simulate_segment(aut, point, mode, cfg.delta, cfg.dt);
            const auto& end = seg.trace_states.back();
            const HyperRect end_rect = HyperRect::point(end);
            bool any_sat = false;
            for (const auto& cand : aut.candidates(mode)) {
                const auto& spec = aut.transitions(static_cast<std::size_t>(cand.agent))
                                       [static_cast<std::size_t>(cand.transition)];
                const EvalEnv env = aut.guard_env(end_rect, mode, cand.agent);
                if (eval_guard(spec.guard, env) == TriBool::DefTrue) {
                    any_sat = true;
                    ++transitions;
                    const auto [next, next_mode] = aut.post_disc(end_rect, mode, cand);
                    expand(next.lower(), next_mode, depth + 1);
                }
            }
            if (!any_sat) expand(end, mode, depth + 1);
        }
    } oracle{aut, cfg};
    oracle.expand(aut.joint_initial_set().center(), aut.joint_initial_mode(), 0);
    EXPECT_EQ(static_cast<int>(tree.nodes.size()), oracle.nodes);
    EXPECT_EQ(tree.transition_count(), oracle.transitions);
}

TEST(CheckAsserts, TautologyHasNoViolations) {
    const std::string src =
        "class TacticalMode:\n    Normal = 0\n"
        "def f(ego, others):\n"
        "    assert 0 < 1, \"tautology\"\n"
        "    return ego\n";
    const MapPtr m5 = builtin_map("M5");
    Scenario sc(m5, SensorDef::transparent());
    AgentDef a;
    a.id = "d";
    a.type_name = "drone";
    a.type = &AgentTypeRegistry::instance().get("drone");
    a.logic = dsl::check(dsl::parse(src), m5->track_modes(), a.type->fields);
    a.initial_set = HyperRect::from_bounds(std::vector<double>{0, 0, 1, 1, 0, 0},
                                           std::vector<double>{0, 0, 1, 1, 0, 0});
    a.initial_mode = ModePair{"Normal", "T1"};
    sc.add_agent(std::move(a));
    const HybridAutomaton aut(sc);
    ReachConfig cfg;
    cfg.delta = 1.0;
    cfg.dt = 0.05;
    cfg.horizon = 3;
    ExecutionTree tree = verify(aut, cfg);
    EXPECT_TRUE(check_asserts(tree, aut).empty());
}

TEST(CheckAsserts, SeparationViolationAtRoot) {
    // Two stationary agents 0.5 apart violate an infinity-norm >= 1
    // separation assert immediately.
    const MapPtr m1 = builtin_map("M1");
    Scenario sc(m1, SensorDef::transparent());
    sc.add_agent(make_agent("a", "car", "logic/car_ca.vdl", *m1, {0, 0, 0, 0}, {0, 0, 0, 0},
                            "Normal", "T1", {{"speed", 0.0}}));
    sc.add_agent(make_agent("b", "car", "logic/car_npv.vdl", *m1, {0.5, 0, 0, 0},
                            {0.5, 0, 0, 0}, "Normal", "T1", {{"speed", 0.0}}));
    const HybridAutomaton aut(sc);
    ReachConfig cfg;
    cfg.delta = 1.0;
    cfg.dt = 0.05;
    cfg.horizon = 2;
    ExecutionTree tree = verify(aut, cfg);
    const auto violations = check_asserts(tree, aut);
    ASSERT_FALSE(violations.empty());
    EXPECT_EQ(violations[0].node_id, 0);
    EXPECT_EQ(violations[0].label, "separation");
    EXPECT_EQ(violations[0].mode_path.size(), 1u);
}

// Tube monotonicity in the initial set: a run from a subset initial box
// stays within the union of the superset run's rects at each depth.
TEST(Verify, TubeMonotoneInInitialSet) {
    const MapPtr m5 = builtin_map("M5");
    const auto build = [&](double spread) {
        Scenario sc(m5, SensorDef::transparent());
        sc.add_agent(make_agent("d", "drone", "logic/drone_ca3.vdl", *m5,
                                {0 - spread, 0, 1, 1, 0, 0}, {0 + spread, 0, 1, 1, 0, 0},
                                "Normal", "T1", {{"speed", 1.0}}));
        return sc;
    };
    const Scenario small_sc = build(0.05);
    const Scenario big_sc = build(0.2);
    ReachConfig cfg;
    cfg.delta = 2.0;
    cfg.dt = 0.05;
    cfg.horizon = 5;
    const HybridAutomaton aut_small(small_sc);
    const HybridAutomaton aut_big(big_sc);
    const ExecutionTree ts = verify(aut_small, cfg);
    const ExecutionTree tb = verify(aut_big, cfg);
    for (int depth = 0; depth < cfg.horizon; ++depth) {
        for (const int sid : ts.depth_nodes(depth)) {
            const auto& sn = ts.nodes[static_cast<std::size_t>(sid)];
            bool covered = false;
            for (const int bid : tb.depth_nodes(depth)) {
                const auto& bn = tb.nodes[static_cast<std::size_t>(bid)];
                if (bn.mode == sn.mode && contains(bn.end_set, sn.end_set)) {
                    covered = true;
                    break;
                }
            }
            EXPECT_TRUE(covered) << "depth " << depth << " node " << sid;
        }
    }
}

TEST(Verify, NodeCapFlagsIncompleteTree) {
    const MapPtr m6 = builtin_map("M6");
    const Scenario sc = testing::fig8_two_drones(m6);
    const HybridAutomaton aut(sc);
    ReachConfig cfg = fig8_config();
    cfg.node_cap = 4;
    const ExecutionTree tree = verify(aut, cfg);
    EXPECT_TRUE(tree.incomplete);
    // The cap stops expansion; one in-flight expansion may overshoot by its
    // branching factor.
    EXPECT_LE(tree.nodes.size(), 4u + 5u);
}

}  // namespace
}  // namespace versekit
