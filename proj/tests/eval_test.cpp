#include "versekit/eval.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "versekit/extract.hpp"

namespace versekit {
namespace {

using testing::check_source;
using testing::ConcreteAgent;
using testing::ConcreteEval;
using testing::drone_fields;
using testing::layer_modes;

struct OffsetStub : TrackOffsetLookup {
    double transverse_offset(const std::string& m) const override {
        if (m == "T0" || m == "M10") return 2.0;
        if (m == "T1" || m == "M01" || m == "M21") return 1.0;
        return 0.0;
    }
    int workspace_dim() const override { return 3; }
};

// Builds a closed single-transition guard from a condition snippet.
dsl::ExprPtr closed_guard(const std::string& condition, int k = 2) {
    const std::string src =
        "class TacticalMode:\n    A = 0\n    B = 1\n"
        "def f(ego, others):\n"
        "    if ego.tactical == TacticalMode.A:\n"
        "        if " + condition + ":\n"
        "            ego.tactical = TacticalMode.B\n"
        "    return ego\n";
    const auto cp = check_source(src, layer_modes(), drone_fields());
    auto result = extract_transitions(cp, k);
    return result.transitions.at(0).guard;
}

EvalEnv env_of(const std::vector<HyperRect>& rects, const OffsetStub& stub,
               const std::vector<std::string>& tracks = {}) {
    EvalEnv env;
    env.ego = 0;
    env.map = &stub;
    for (std::size_t i = 0; i < rects.size(); ++i) {
        env.agents.push_back(AgentView{
            rects[i], "A", tracks.empty() ? std::string("T1") : tracks[i]});
    }
    return env;
}

HyperRect drone_box(double px_lo, double px_hi, double pz_lo, double pz_hi) {
    return HyperRect({Interval(px_lo, px_hi), Interval(0, 0), Interval(pz_lo, pz_hi),
                      Interval(0, 0), Interval(0, 0), Interval(0, 0)});
}

TEST(TriBoolLogic, KleeneTables) {
    EXPECT_EQ(tri_and(TriBool::DefTrue, TriBool::Unknown), TriBool::Unknown);
    EXPECT_EQ(tri_and(TriBool::DefFalse, TriBool::Unknown), TriBool::DefFalse);
    EXPECT_EQ(tri_or(TriBool::DefFalse, TriBool::Unknown), TriBool::Unknown);
    EXPECT_EQ(tri_or(TriBool::DefTrue, TriBool::Unknown), TriBool::DefTrue);
    EXPECT_EQ(tri_not(TriBool::Unknown), TriBool::Unknown);
}

TEST(EvalInterval, ComparisonVerdicts) {
    OffsetStub stub;
    const auto guard_gt2 = closed_guard("ego.pz > 2");
    const auto guard_gt05 = closed_guard("ego.pz > 0.5");
    const auto env = env_of({drone_box(0, 0, 0, 1), drone_box(5, 5, 0, 0)}, stub);
    EXPECT_EQ(eval_guard(guard_gt2, env), TriBool::DefFalse);
    EXPECT_EQ(eval_guard(guard_gt05, env), TriBool::Unknown);
}

TEST(EvalInterval, DivisionByStraddlingIntervalIsAnError) {
    OffsetStub stub;
    const auto guard = closed_guard("1 / ego.pz > 0.5");
    const auto env = env_of({drone_box(0, 0, -1, 1), drone_box(5, 5, 0, 0)}, stub);
    EXPECT_THROW(eval_guard(guard, env), Error);
}

TEST(EvalInterval, ModeAtomsAreConcrete) {
    OffsetStub stub;
    const auto g = closed_guard("any(sameTrack(ego, o) for o in others)");
    auto env = env_of({drone_box(0, 0, 0, 0), drone_box(5, 5, 0, 0)}, stub, {"T1", "T1"});
    EXPECT_EQ(eval_guard(g, env), TriBool::DefTrue);
    env.agents[1].track = "T0";
    EXPECT_EQ(eval_guard(g, env), TriBool::DefFalse);
}

TEST(EvalInterval, TrackHeightWindowChain) {
    OffsetStub stub;
    const auto guard = closed_guard("-1 < trackHeight(ego.track) - ego.pz < 1");
    // ego on M10: destination offset 2.
    auto env = env_of({drone_box(0, 0, 1.5, 1.8), drone_box(9, 9, 0, 0)}, stub,
                      {"M10", "T1"});
    EXPECT_EQ(eval_guard(guard, env), TriBool::DefTrue);
    env.agents[0].rect = drone_box(0, 0, 0.5, 1.5);
    EXPECT_EQ(eval_guard(guard, env), TriBool::Unknown);
    env.agents[0].rect = drone_box(0, 0, 0.0, 0.9);
    EXPECT_EQ(eval_guard(guard, env), TriBool::DefFalse);
}

// Soundness of the interval evaluator: for random point samples inside the
// environment boxes, concrete evaluation agrees with every definite verdict
// and numeric values land inside the returned interval.
TEST(EvalInterval, SoundnessBySampling) {
    OffsetStub stub;
    const std::string src =
        "class TacticalMode:\n    A = 0\n    B = 1\n"
        "def f(ego, others):\n"
        "    if ego.tactical == TacticalMode.A:\n"
        "        if any(sameTrack(ego, o) and dist(ego, o) < 4 and -1 < o.px - ego.px < 3 "
        "for o in others):\n"
        "            ego.tactical = TacticalMode.B\n"
        "    return ego\n";
    const auto cp = check_source(src, layer_modes(), drone_fields());
    const auto spec = extract_transitions(cp, 3).transitions.at(0);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> width(0.0, 2.0);
    std::uniform_real_distribution<double> base(-4.0, 4.0);
    const std::vector<std::string> tracks = {"T0", "T1", "T1"};
    int checked_verdicts = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<HyperRect> rects;
        for (int a = 0; a < 3; ++a) {
            std::vector<Interval> dims;
            for (int d = 0; d < 6; ++d) {
                const double lo = base(rng);
                dims.emplace_back(lo, lo + width(rng));
            }
            rects.emplace_back(std::move(dims));
        }
        EvalEnv env;
        env.ego = 0;
        env.map = &stub;
        for (int a = 0; a < 3; ++a) {
            env.agents.push_back(AgentView{rects[static_cast<std::size_t>(a)], "A",
                                           tracks[static_cast<std::size_t>(a)]});
        }
        const TriBool verdict = eval_guard(spec.guard, env);

        // Sample a concrete joint point inside the boxes.
        std::vector<ConcreteAgent> agents(3);
        for (int a = 0; a < 3; ++a) {
            for (int d = 0; d < 6; ++d) {
                const auto& iv = rects[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
                std::uniform_real_distribution<double> in(iv.lo, iv.hi);
                agents[static_cast<std::size_t>(a)].state.push_back(in(rng));
            }
            agents[static_cast<std::size_t>(a)].tactical = "A";
            agents[static_cast<std::size_t>(a)].track = tracks[static_cast<std::size_t>(a)];
        }
        ConcreteEval oracle(cp, agents[0], {agents[1], agents[2]},
                            [&](const std::string& m) { return stub.transverse_offset(m); },
                            3);
        const auto& trigger = cp.decision().body[0]->body[0]->condition;
        const bool concrete = oracle.eval_bool(trigger);
        if (verdict == TriBool::DefTrue) {
            EXPECT_TRUE(concrete) << "iter " << iter;
            ++checked_verdicts;
        } else if (verdict == TriBool::DefFalse) {
            EXPECT_FALSE(concrete) << "iter " << iter;
            ++checked_verdicts;
        }
    }
    EXPECT_GT(checked_verdicts, 100);  // the sweep hits plenty of definite cases
}

TEST(EvalInterval, NumericContainmentBySampling) {
    OffsetStub stub;
    const std::string src =
        "class TacticalMode:\n    A = 0\n    B = 1\n"
        "def f(ego, others):\n"
        "    if ego.tactical == TacticalMode.A:\n"
        "        if (ego.px * ego.pz - 2 * ego.py) / 4 > 1:\n"
        "            ego.tactical = TacticalMode.B\n"
        "    return ego\n";
    const auto cp = check_source(src, layer_modes(), drone_fields());
    const auto spec = extract_transitions(cp, 1).transitions.at(0);
    // The guard is `expr > 1`; grab the numeric side.
    const dsl::ExprPtr numeric = spec.guard->lhs;
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<Interval> dims;
        for (int d = 0; d < 6; ++d) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            dims.emplace_back(a, b);
        }
        const HyperRect rect(dims);
        EvalEnv env;
        env.ego = 0;
        env.map = &stub;
        env.agents.push_back(AgentView{rect, "A", "T1"});
        const Interval img = IntervalEval::eval_num(numeric, env);
        std::vector<double> p;
        for (int d = 0; d < 6; ++d) {
            std::uniform_real_distribution<double> in(rect[static_cast<std::size_t>(d)].lo,
                                                      rect[static_cast<std::size_t>(d)].hi);
            p.push_back(in(rng));
        }
        const double concrete = (p[0] * p[2] - 2 * p[1]) / 4;
        EXPECT_GE(concrete, img.lo - 1e-12);
        EXPECT_LE(concrete, img.hi + 1e-12);
    }
}

TEST(ClipGuard, OneDimensionalClip) {
    OffsetStub stub;
    const auto guard = closed_guard("ego.px > 4");
    std::vector<Interval> dims(6, Interval(0, 0));
    dims[0] = Interval(0, 10);
    const HyperRect rect(dims);
    EvalEnv env = env_of({rect, drone_box(0, 0, 0, 0)}, stub);
    const HyperRect clipped = clip_guard(rect, guard, env);
    EXPECT_DOUBLE_EQ(clipped[0].lo, 4.0);
    EXPECT_DOUBLE_EQ(clipped[0].hi, 10.0);
}

TEST(ClipGuard, CrossAgentAtomsLeaveRectUnchanged) {
    OffsetStub stub;
    const auto guard = closed_guard("any(0 < o.px - ego.px < 5 for o in others)");
    std::vector<Interval> dims(6, Interval(0, 0));
    dims[0] = Interval(0, 10);
    const HyperRect rect(dims);
    EvalEnv env = env_of({rect, drone_box(3, 3, 0, 0)}, stub);
    EXPECT_EQ(clip_guard(rect, guard, env), rect);
}

TEST(ClipGuard, ChainWithTrackHeightConstant) {
    OffsetStub stub;
    // ego on M01: destination T1 offset 1. Chain -1 < 1 - pz < 1 -> pz in (0, 2).
    const auto guard = closed_guard("-1 < trackHeight(ego.track) - ego.pz < 1");
    std::vector<Interval> dims(6, Interval(0, 0));
    dims[2] = Interval(0, 3);
    const HyperRect rect(dims);
    EvalEnv env;
    env.ego = 0;
    env.map = &stub;
    env.agents.push_back(AgentView{rect, "A", "M01"});
    env.agents.push_back(AgentView{drone_box(0, 0, 0, 0), "A", "T1"});
    const HyperRect clipped = clip_guard(rect, guard, env);
    EXPECT_DOUBLE_EQ(clipped[2].lo, 0.0);
    EXPECT_DOUBLE_EQ(clipped[2].hi, 2.0);
}

// clipGuard never removes a satisfying point.
TEST(ClipGuard, KeepsSatisfyingSamples) {
    OffsetStub stub;
    const auto guard = closed_guard("ego.px - ego.py > 1 and ego.pz <= 2.5");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<Interval> dims(6, Interval(0, 0));
        for (int d = 0; d < 3; ++d) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            dims[static_cast<std::size_t>(d)] = Interval(a, b);
        }
        const HyperRect rect(dims);
        EvalEnv env = env_of({rect, drone_box(0, 0, 0, 0)}, stub);
        const HyperRect clipped = clip_guard(rect, guard, env);
        EXPECT_TRUE(contains(rect, clipped));
        for (int s = 0; s < 20; ++s) {
            std::vector<double> p(6, 0.0);
            for (int d = 0; d < 3; ++d) {
                const auto& iv = rect[static_cast<std::size_t>(d)];
                std::uniform_real_distribution<double> in(iv.lo, iv.hi);
                p[static_cast<std::size_t>(d)] = in(rng);
            }
            const bool satisfies = (p[0] - p[1] > 1) && (p[2] <= 2.5);
            if (satisfies) {
                EXPECT_TRUE(contains_point(clipped, p));
            }
        }
    }
}

}  // namespace
}  // namespace versekit
