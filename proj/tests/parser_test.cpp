#include "versekit/dsl/parser.hpp"

#include <gtest/gtest.h>

#include "support/helpers.hpp"

namespace versekit::dsl {
namespace {

using versekit::testing::read_file;
using versekit::testing::scenario_path;

ExprPtr parse_expr(const std::string& text) {
    const Program prog = parse("def f(ego, others):\n    flag = " + text + "\n");
    return prog.functions.front().body.front()->value;
}

TEST(Parser, PrecedenceMulBindsTighterThanAdd) {
    const ExprPtr e = parse_expr("a + b * c");
    ASSERT_EQ(e->kind, ExprKind::Binary);
    EXPECT_EQ(e->binary_op, BinaryOp::Add);
    EXPECT_EQ(e->rhs->kind, ExprKind::Binary);
    EXPECT_EQ(e->rhs->binary_op, BinaryOp::Mul);
}

TEST(Parser, BooleanPrecedence) {
    // not binds tighter than and, and tighter than or.
    const ExprPtr e = parse_expr("not a and b or c");
    ASSERT_EQ(e->kind, ExprKind::BoolChain);
    EXPECT_EQ(e->bool_op, BoolOp::Or);
    ASSERT_EQ(e->items.size(), 2u);
    EXPECT_EQ(e->items[0]->kind, ExprKind::BoolChain);
    EXPECT_EQ(e->items[0]->bool_op, BoolOp::And);
    EXPECT_EQ(e->items[0]->items[0]->kind, ExprKind::Unary);
}

TEST(Parser, ComparisonChainIsPreserved) {
    const ExprPtr e = parse_expr("-1 < c - x < 1");
    ASSERT_EQ(e->kind, ExprKind::Compare);
    ASSERT_EQ(e->cmp_ops.size(), 2u);
    EXPECT_EQ(e->cmp_ops[0], CmpOp::Lt);
    EXPECT_EQ(e->cmp_ops[1], CmpOp::Lt);
    EXPECT_EQ(e->items.size(), 2u);
}

TEST(Parser, QuantifierComprehension) {
    const ExprPtr e = parse_expr("any(dist(ego, o) < 3 for o in others)");
    ASSERT_EQ(e->kind, ExprKind::Quantifier);
    EXPECT_EQ(e->name, "any");
    EXPECT_EQ(e->bound_var, "o");
    EXPECT_EQ(e->iterable->name, "others");
    EXPECT_EQ(e->base->kind, ExprKind::Compare);
}

TEST(Parser, ModeEnumDeclaration) {
    const Program prog = parse("class TacticalMode:\n    A = 0\n    B = 1\n"
                               "def f(ego, others):\n    return ego\n");
    ASSERT_EQ(prog.mode_decls.size(), 1u);
    EXPECT_EQ(prog.mode_decls[0].name, "TacticalMode");
    EXPECT_EQ(prog.mode_decls[0].members, (std::vector<std::string>{"A", "B"}));
}

TEST(Parser, AssertWithMessage) {
    const Program prog =
        parse("def f(ego, others):\n    assert ego.x > 0, \"stay positive\"\n");
    const StmtPtr s = prog.functions.front().body.front();
    ASSERT_EQ(s->kind, StmtKind::Assert);
    ASSERT_TRUE(s->message.has_value());
    EXPECT_EQ(*s->message, "stay positive");
}

TEST(Parser, ElifChainBecomesNestedIf) {
    const Program prog = parse(
        "def f(ego, others):\n"
        "    if a > 1:\n        x = 1\n"
        "    elif a > 0:\n        x = 2\n"
        "    else:\n        x = 3\n");
    const StmtPtr s = prog.functions.front().body.front();
    ASSERT_EQ(s->kind, StmtKind::If);
    EXPECT_TRUE(s->is_elif);
    ASSERT_EQ(s->orelse.size(), 1u);
    EXPECT_EQ(s->orelse.front()->kind, StmtKind::If);
    EXPECT_EQ(s->orelse.front()->orelse.size(), 1u);
}

TEST(Parser, AnnotationsAreAcceptedAndDropped) {
    const Program prog = parse("def f(ego: State, others: List) -> State:\n    return ego\n");
    EXPECT_EQ(prog.functions.front().params,
              (std::vector<std::string>{"ego", "others"}));
}

TEST(Parser, EmptyFileIsEmptyProgram) {
    const Program prog = parse("");
    EXPECT_TRUE(prog.functions.empty());
    EXPECT_TRUE(prog.mode_decls.empty());
}

TEST(Parser, ErrorsCarrySpans) {
    try {
        parse("def f(ego, others)\n    return ego\n");
        FAIL() << "expected parse error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        ASSERT_TRUE(e.span().has_value());
        EXPECT_EQ(e.span()->begin.line, 1);
        EXPECT_GT(e.span()->begin.column, 1);
    }
}

TEST(Parser, UnsupportedConstructDiagnostic) {
    try {
        parse("def f(ego, others):\n    while ego.x < 1:\n        y = 2\n");
        FAIL() << "expected parse error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
    }
}

// The controller corpus parses into the expected statement shapes.
TEST(Parser, DroneControllerShape) {
    const Program prog = parse(read_file(scenario_path("logic/drone_ca.vdl")));
    ASSERT_EQ(prog.functions.size(), 1u);
    const auto& body = prog.functions.front().body;
    ASSERT_GE(body.size(), 3u);
    EXPECT_EQ(body[0]->kind, StmtKind::If);
    EXPECT_TRUE(body[0]->is_elif);
    EXPECT_EQ(body[1]->kind, StmtKind::Assert);
    EXPECT_EQ(body[2]->kind, StmtKind::Return);
    // The Normal branch holds two independent any(...) guarded rules.
    const auto& normal_branch = body[0]->body;
    ASSERT_EQ(normal_branch.size(), 2u);
    EXPECT_EQ(normal_branch[0]->condition->kind, ExprKind::Quantifier);
    EXPECT_EQ(normal_branch[1]->condition->kind, ExprKind::Quantifier);
}

TEST(Parser, ThreeAssertBlockParses) {
    const Program prog = parse(read_file(scenario_path("logic/drone_ca3.vdl")));
    int asserts = 0;
    for (const auto& s : prog.functions.front().body) {
        if (s->kind == StmtKind::Assert) {
            ++asserts;
            EXPECT_TRUE(s->message.has_value());
        }
    }
    EXPECT_EQ(asserts, 3);
}

TEST(Parser, WholeCorpusParses) {
    for (const char* rel :
         {"logic/drone_ca.vdl", "logic/drone_ca3.vdl", "logic/drone_npv.vdl",
          "logic/car_ca.vdl", "logic/car_ca_45.vdl", "logic/car_npv.vdl",
          "logic/toy_updown.vdl", "logic/coupled_npv.vdl"}) {
        EXPECT_NO_THROW(parse(read_file(scenario_path(rel)))) << rel;
    }
}

}  // namespace
}  // namespace versekit::dsl
