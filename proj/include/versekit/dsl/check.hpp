#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "versekit/dsl/ast.hpp"
#include "versekit/dsl/parser.hpp"
#include "versekit/errors.hpp"

namespace versekit::dsl {

// Result of name resolution and light type checking. Evaluation and
// extraction only accept checked programs.
struct CheckedProgram {
    Program program;
    std::string ego_param;
    std::string others_param;
    std::vector<std::string> tactical_modes;
    std::vector<std::string> state_fields;
    std::set<std::string> track_modes;

    const FunctionDef& decision() const { return program.functions.front(); }

    int field_index(const std::string& f) const {
        for (std::size_t i = 0; i < state_fields.size(); ++i) {
            if (state_fields[i] == f) return static_cast<int>(i);
        }
        return -1;
    }

    bool is_tactical_mode(const std::string& m) const {
        return std::find(tactical_modes.begin(), tactical_modes.end(), m) !=
               tactical_modes.end();
    }
};

namespace detail {

inline int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline std::string nearest(const std::string& name, const std::vector<std::string>& candidates) {
    std::string best;
    int best_d = 1 << 20;
    for (const auto& c : candidates) {
        const int d = levenshtein(name, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best_d <= 3 ? best : std::string();
}

}  // namespace detail

// Semantic checker. Resolves every name against the agent state schema, the
// declared tactical modes, the map's track-mode alphabet, and the builtin
// functions; rejects constructs the engine cannot evaluate over sets.
class Checker {
  public:
    enum class Type { Bool, Num, Mode, Agent, Str };

    static CheckedProgram check(Program program, const std::set<std::string>& map_modes,
                                const std::vector<std::string>& agent_state_fields) {
        Checker c(map_modes, agent_state_fields);
        return c.run(std::move(program));
    }

  private:
    Checker(const std::set<std::string>& map_modes, const std::vector<std::string>& fields)
        : track_modes_(map_modes), fields_(fields) {}

    CheckedProgram run(Program program) {
        CheckedProgram out;
        out.state_fields = fields_;
        out.track_modes = track_modes_;

        for (const auto& decl : program.mode_decls) {
            if (decl.name == "TacticalMode") {
                out.tactical_modes = decl.members;
            } else if (decl.name == "TrackMode") {
                for (const auto& m : decl.members) {
                    if (!track_modes_.count(m)) {
                        throw Error(ErrorCode::Check,
                                    "track mode '" + m + "' is not part of the map's alphabet",
                                    decl.span);
                    }
                }
            } else {
                throw Error(ErrorCode::Check,
                            "class '" + decl.name +
                                "' is not a mode enumeration (expected TacticalMode or "
                                "TrackMode)",
                            decl.span);
            }
        }
        if (program.functions.empty()) {
            throw Error(ErrorCode::Check, "no decision function");
        }
        if (out.tactical_modes.empty()) {
            throw Error(ErrorCode::Check, "no TacticalMode enumeration declared");
        }
        if (program.functions.size() > 1) {
            throw Error(ErrorCode::Check, "exactly one decision function is allowed",
                        program.functions[1].span);
        }
        const FunctionDef& fn = program.functions.front();
        if (fn.params.size() != 2) {
            throw Error(ErrorCode::Check,
                        "decision function must take (ego, others) parameters", fn.span);
        }
        out.ego_param = fn.params[0];
        out.others_param = fn.params[1];

        tactical_modes_ = out.tactical_modes;
        ego_ = out.ego_param;
        others_ = out.others_param;

        for (const auto& stmt : fn.body) check_stmt(stmt, /*top_level=*/true);

        out.program = std::move(program);
        return out;
    }

    void check_stmt(const StmtPtr& stmt, bool top_level) {
        switch (stmt->kind) {
            case StmtKind::Assign: check_assign(stmt); return;
            case StmtKind::If: {
                require(check_expr(stmt->condition) == Type::Bool, stmt->condition->span,
                        "if condition must be boolean");
                for (const auto& s : stmt->body) check_stmt(s, false);
                for (const auto& s : stmt->orelse) check_stmt(s, false);
                return;
            }
            case StmtKind::Assert: {
                if (!top_level) {
                    throw Error(ErrorCode::Check,
                                "assert statements must appear at the top level of the "
                                "decision function",
                                stmt->span);
                }
                require(check_expr(stmt->test) == Type::Bool, stmt->test->span,
                        "assert predicate must be boolean");
                return;
            }
            case StmtKind::Return: {
                if (stmt->result) {
                    if (stmt->result->kind != ExprKind::Name || stmt->result->name != ego_) {
                        throw Error(ErrorCode::Check, "only 'return " + ego_ + "' is supported",
                                    stmt->result->span);
                    }
                }
                return;
            }
        }
    }

    void check_assign(const StmtPtr& stmt) {
        const ExprPtr& target = stmt->target;
        if (target->kind != ExprKind::Attribute || target->base->kind != ExprKind::Name ||
            target->base->name != ego_) {
            throw Error(ErrorCode::Check, "only fields of '" + ego_ + "' can be assigned",
                        target->span);
        }
        if (target->name == "tactical") {
            require(check_expr(stmt->value) == Type::Mode, stmt->value->span,
                    "tactical mode assignment requires a TacticalMode constant");
            if (stmt->value->kind != ExprKind::Attribute ||
                stmt->value->base->name != "TacticalMode") {
                throw Error(ErrorCode::Check,
                            "tactical mode must be assigned a TacticalMode constant",
                            stmt->value->span);
            }
            return;
        }
        if (target->name == "track") {
            throw Error(ErrorCode::Check,
                        "the track mode is computed by the map and cannot be assigned",
                        target->span);
        }
        check_field(target->name, target->span);
        require(check_expr(stmt->value) == Type::Num, stmt->value->span,
                "continuous-field assignment requires a numeric expression");
    }

    Type check_expr(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::NumberLit: return Type::Num;
            case ExprKind::BoolLit: return Type::Bool;
            case ExprKind::StringLit:
                throw Error(ErrorCode::Check,
                            "string literals are only legal as assert messages", e->span);
            case ExprKind::NoneLit:
                throw Error(ErrorCode::Check, "'None' has no meaning in guards", e->span);
            case ExprKind::Lambda:
                throw Error(ErrorCode::Check, "unsupported construct: lambda", e->span);
            case ExprKind::Tuple:
                throw Error(ErrorCode::Check, "unsupported construct: tuple expression",
                            e->span);
            case ExprKind::Name: return check_name(e);
            case ExprKind::Attribute: return check_attribute(e);
            case ExprKind::Unary: {
                const Type t = check_expr(e->base);
                if (e->unary_op == UnaryOp::Not) {
                    require(t == Type::Bool, e->span, "'not' requires a boolean operand");
                    return Type::Bool;
                }
                require(t == Type::Num, e->span, "unary '-' requires a numeric operand");
                return Type::Num;
            }
            case ExprKind::Binary: {
                require(check_expr(e->lhs) == Type::Num, e->lhs->span,
                        "arithmetic requires numeric operands");
                require(check_expr(e->rhs) == Type::Num, e->rhs->span,
                        "arithmetic requires numeric operands");
                return Type::Num;
            }
            case ExprKind::BoolChain: {
                for (const auto& item : e->items) {
                    require(check_expr(item) == Type::Bool, item->span,
                            "'and'/'or' requires boolean operands");
                }
                return Type::Bool;
            }
            case ExprKind::Compare: return check_compare(e);
            case ExprKind::Call: return check_call(e);
            case ExprKind::Quantifier: return check_quantifier(e);
        }
        throw Error(ErrorCode::Check, "unsupported expression", e->span);
    }

    Type check_name(const ExprPtr& e) {
        if (e->name == ego_ || bound_vars_.count(e->name)) return Type::Agent;
        if (e->name == others_) {
            throw Error(ErrorCode::Check,
                        "'" + others_ + "' may only be iterated by any(...)/all(...)", e->span);
        }
        throw Error(ErrorCode::Check, "unknown name '" + e->name + "'", e->span);
    }

    Type check_attribute(const ExprPtr& e) {
        if (e->base->kind != ExprKind::Name) {
            throw Error(ErrorCode::Check, "unsupported attribute base", e->span);
        }
        const std::string& base = e->base->name;
        if (base == "TacticalMode") {
            if (std::find(tactical_modes_.begin(), tactical_modes_.end(), e->name) ==
                tactical_modes_.end()) {
                throw Error(ErrorCode::Check,
                            "mode constant 'TacticalMode." + e->name + "' is not declared",
                            e->span);
            }
            return Type::Mode;
        }
        if (base == "TrackMode") {
            if (!track_modes_.count(e->name)) {
                throw Error(ErrorCode::Check,
                            "track mode '" + e->name + "' is not part of the map's alphabet",
                            e->span);
            }
            return Type::Mode;
        }
        if (base == ego_ || bound_vars_.count(base)) {
            if (e->name == "tactical" || e->name == "track") return Type::Mode;
            check_field(e->name, e->span);
            return Type::Num;
        }
        throw Error(ErrorCode::Check, "unknown name '" + base + "'", e->base->span);
    }

    Type check_compare(const ExprPtr& e) {
        std::vector<ExprPtr> operands;
        operands.push_back(e->lhs);
        operands.insert(operands.end(), e->items.begin(), e->items.end());
        std::vector<Type> types;
        types.reserve(operands.size());
        for (const auto& op : operands) types.push_back(check_expr(op));

        const bool has_mode = std::any_of(types.begin(), types.end(),
                                          [](Type t) { return t == Type::Mode; });
        if (has_mode) {
            if (operands.size() != 2 ||
                (e->cmp_ops[0] != CmpOp::Eq && e->cmp_ops[0] != CmpOp::Ne)) {
                throw Error(ErrorCode::Check,
                            "mode values only support a single '==' or '!=' comparison",
                            e->span);
            }
            require(types[0] == Type::Mode && types[1] == Type::Mode, e->span,
                    "mode values can only be compared with mode constants");
            return Type::Bool;
        }
        for (std::size_t i = 0; i < operands.size(); ++i) {
            require(types[i] == Type::Num, operands[i]->span,
                    "comparisons require numeric operands");
        }
        return Type::Bool;
    }

    Type check_call(const ExprPtr& e) {
        if (e->name == "sameTrack") {
            require_args(e, 2);
            require(check_expr(e->items[0]) == Type::Agent, e->span,
                    "sameTrack expects agent arguments");
            require(check_expr(e->items[1]) == Type::Agent, e->span,
                    "sameTrack expects agent arguments");
            return Type::Bool;
        }
        if (e->name == "dist") {
            require_args(e, 2);
            require(check_expr(e->items[0]) == Type::Agent, e->span,
                    "dist expects agent arguments");
            require(check_expr(e->items[1]) == Type::Agent, e->span,
                    "dist expects agent arguments");
            return Type::Num;
        }
        if (e->name == "trackHeight") {
            require_args(e, 1);
            require(check_expr(e->items[0]) == Type::Mode, e->span,
                    "trackHeight expects a track mode");
            return Type::Num;
        }
        if (e->name == "any" || e->name == "all") {
            throw Error(ErrorCode::Check,
                        "'" + e->name + "' expects a generator expression argument", e->span);
        }
        throw Error(ErrorCode::Check, "unknown function '" + e->name + "'", e->span);
    }

    Type check_quantifier(const ExprPtr& e) {
        if (e->name != "any" && e->name != "all") {
            throw Error(ErrorCode::Check,
                        "generator expressions are only legal inside any(...)/all(...)",
                        e->span);
        }
        if (e->iterable->kind != ExprKind::Name || e->iterable->name != others_) {
            throw Error(ErrorCode::Check,
                        "quantifiers may only range over '" + others_ + "'", e->iterable->span);
        }
        if (e->bound_var == ego_ || bound_vars_.count(e->bound_var)) {
            throw Error(ErrorCode::Check, "bound variable '" + e->bound_var + "' shadows a name",
                        e->span);
        }
        bound_vars_.insert(e->bound_var);
        require(check_expr(e->base) == Type::Bool, e->base->span,
                "quantified expression must be boolean");
        for (const auto& f : e->filters) {
            require(check_expr(f) == Type::Bool, f->span, "quantifier filter must be boolean");
        }
        bound_vars_.erase(e->bound_var);
        return Type::Bool;
    }

    void check_field(const std::string& field, SourceSpan span) {
        if (std::find(fields_.begin(), fields_.end(), field) != fields_.end()) return;
        std::vector<std::string> candidates = fields_;
        candidates.push_back("tactical");
        candidates.push_back("track");
        const std::string hint = detail::nearest(field, candidates);
        std::string msg = "unknown field '" + field + "'";
        if (!hint.empty()) msg += " (nearest field: '" + hint + "')";
        throw Error(ErrorCode::Check, msg, span);
    }

    void require_args(const ExprPtr& e, std::size_t n) {
        if (e->items.size() != n) {
            throw Error(ErrorCode::Check,
                        "'" + e->name + "' expects " + std::to_string(n) + " argument(s)",
                        e->span);
        }
    }

    static void require(bool cond, SourceSpan span, const std::string& message) {
        if (!cond) throw Error(ErrorCode::Check, message, span);
    }

    std::set<std::string> track_modes_;
    std::vector<std::string> fields_;
    std::vector<std::string> tactical_modes_;
    std::string ego_;
    std::string others_;
    std::set<std::string> bound_vars_;
};

inline CheckedProgram check(Program program, const std::set<std::string>& map_modes,
                            const std::vector<std::string>& agent_state_fields) {
    return Checker::check(std::move(program), map_modes, agent_state_fields);
}

}  // namespace versekit::dsl
