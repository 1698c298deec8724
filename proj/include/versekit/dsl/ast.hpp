#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "versekit/errors.hpp"

namespace versekit::dsl {

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class ExprKind {
    NumberLit,
    StringLit,
    BoolLit,
    NoneLit,
    Name,
    Attribute,
    Unary,      // 'not' or '-'
    Binary,     // + - * /
    BoolChain,  // and / or over 2+ operands
    Compare,    // comparison chain: a < b <= c ...
    Call,
    Quantifier,  // any(...) / all(...) over a generator expression
    Tuple,
    Lambda,
    AgentRef,  // produced by extraction: ego or an indexed other agent
};

enum class UnaryOp { Not, Neg };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class BoolOp { And, Or };
enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

inline const char* cmp_op_name(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
    }
    return "?";
}

struct Expr {
    ExprKind kind;
    SourceSpan span;

    // NumberLit
    double number = 0.0;
    // StringLit
    std::string str;
    // BoolLit
    bool boolean = false;
    // Name / Attribute attr name / Call callee name / Quantifier function
    std::string name;
    // Attribute base, Unary operand, Lambda body, Quantifier element
    ExprPtr base;
    // Binary / Compare first operand
    ExprPtr lhs;
    ExprPtr rhs;
    UnaryOp unary_op = UnaryOp::Not;
    BinaryOp binary_op = BinaryOp::Add;
    BoolOp bool_op = BoolOp::And;
    // BoolChain operands; Call args; Tuple elements
    std::vector<ExprPtr> items;
    // Compare chain: lhs (op0) items[0] (op1) items[1] ...
    std::vector<CmpOp> cmp_ops;
    // Quantifier: bound variable and iterable; optional 'if' filters
    std::string bound_var;
    ExprPtr iterable;
    std::vector<ExprPtr> filters;
    // Lambda parameters
    std::vector<std::string> params;
    // AgentRef: -1 for ego, 0..k-2 for the unrolled other agents
    int agent_slot = -1;
    // Attribute on an agent: resolved continuous-field index (set by
    // extraction; -1 for discrete/unresolved attributes)
    int field_cache = -1;

    explicit Expr(ExprKind k) : kind(k) {}
};

inline ExprPtr make_expr(ExprKind k, SourceSpan span) {
    auto e = std::make_shared<Expr>(k);
    e->span = span;
    return e;
}

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

enum class StmtKind {
    Assign,  // dotted target = expr
    If,      // with elif chain flattened into nested If in orelse
    Assert,
    Return,
};

struct Stmt {
    StmtKind kind;
    SourceSpan span;

    // Assign: target expressed as Name or Attribute expr
    ExprPtr target;
    ExprPtr value;
    // If
    ExprPtr condition;
    std::vector<StmtPtr> body;
    std::vector<StmtPtr> orelse;
    bool is_elif = false;  // orelse holds a single If produced from 'elif'
    // Assert
    ExprPtr test;
    std::optional<std::string> message;
    // Return
    ExprPtr result;  // may be null

    explicit Stmt(StmtKind k) : kind(k) {}
};

inline StmtPtr make_stmt(StmtKind k, SourceSpan span) {
    auto s = std::make_shared<Stmt>(k);
    s->span = span;
    return s;
}

// Mode enumeration declared with a class block whose body is a list of
// `Name = number` members.
struct ModeDecl {
    std::string name;
    std::vector<std::string> members;
    SourceSpan span;
};

struct FunctionDef {
    std::string name;
    std::vector<std::string> params;  // annotations are accepted and dropped
    std::vector<StmtPtr> body;
    SourceSpan span;
};

// A parsed decision-logic file: mode declarations plus function definitions.
// Checking enforces that exactly one function is the decision function.
struct Program {
    std::vector<ModeDecl> mode_decls;
    std::vector<FunctionDef> functions;
};

}  // namespace versekit::dsl
