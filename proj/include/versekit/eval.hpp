#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "versekit/dsl/ast.hpp"
#include "versekit/errors.hpp"
#include "versekit/geometry.hpp"

namespace versekit {

// Kleene three-valued logic. Used both as a guard verdict over sets and as
// the cache status alphabet.
enum class TriBool { DefFalse, Unknown, DefTrue };

inline TriBool tri_and(TriBool a, TriBool b) { return a < b ? a : b; }
inline TriBool tri_or(TriBool a, TriBool b) { return a > b ? a : b; }
inline TriBool tri_not(TriBool a) {
    if (a == TriBool::DefTrue) return TriBool::DefFalse;
    if (a == TriBool::DefFalse) return TriBool::DefTrue;
    return TriBool::Unknown;
}

inline const char* tri_name(TriBool t) {
    switch (t) {
        case TriBool::DefFalse: return "false";
        case TriBool::Unknown: return "unknown";
        case TriBool::DefTrue: return "true";
    }
    return "?";
}

// Map access needed during expression evaluation: the transverse offset of a
// track mode (layer height in 3-d, lateral lane offset in 2-d). For a
// transition mode this is the destination track's offset.
class TrackOffsetLookup {
  public:
    virtual ~TrackOffsetLookup() = default;
    virtual double transverse_offset(const std::string& track_mode) const = 0;
    virtual int workspace_dim() const = 0;
};

// One agent as seen by a guard or assert evaluation: a box of continuous
// states plus its concrete discrete modes.
struct AgentView {
    HyperRect rect;
    std::string tactical;
    std::string track;
};

struct EvalEnv {
    std::vector<AgentView> agents;
    int ego = 0;
    const TrackOffsetLookup* map = nullptr;

    // Resolve an extraction-produced agent slot: -1 is ego, j >= 0 the j-th
    // other agent in declaration order.
    const AgentView& agent(int slot) const {
        if (slot < 0) return agents[static_cast<std::size_t>(ego)];
        const int abs = slot < ego ? slot : slot + 1;
        if (abs >= static_cast<int>(agents.size())) {
            throw Error(ErrorCode::Eval,
                        "agent slot " + std::to_string(slot) + " out of range for k=" +
                            std::to_string(agents.size()));
        }
        return agents[static_cast<std::size_t>(abs)];
    }
};

using EvalValue = std::variant<TriBool, Interval>;

// Interval abstract interpretation of a closed (extraction-produced) guard
// or reset expression. Numeric subexpressions evaluate to intervals;
// comparisons yield DefTrue when true for every point of the environment,
// DefFalse when false for every point, Unknown otherwise. Mode-equality
// atoms are concrete. Degenerate (point) environments make this an exact
// concrete evaluator.
class IntervalEval {
  public:
    static EvalValue eval(const dsl::ExprPtr& e, const EvalEnv& env) {
        IntervalEval ev(env);
        return ev.visit(e);
    }

    static TriBool eval_bool(const dsl::ExprPtr& e, const EvalEnv& env) {
        const EvalValue v = eval(e, env);
        if (!std::holds_alternative<TriBool>(v)) {
            throw Error(ErrorCode::Eval, "expected a boolean expression", e->span);
        }
        return std::get<TriBool>(v);
    }

    static Interval eval_num(const dsl::ExprPtr& e, const EvalEnv& env) {
        const EvalValue v = eval(e, env);
        if (!std::holds_alternative<Interval>(v)) {
            throw Error(ErrorCode::Eval, "expected a numeric expression", e->span);
        }
        return std::get<Interval>(v);
    }

  private:
    explicit IntervalEval(const EvalEnv& env) : env_(env) {}

    EvalValue visit(const dsl::ExprPtr& e) {
        using dsl::ExprKind;
        switch (e->kind) {
            case ExprKind::NumberLit: return Interval::point(e->number);
            case ExprKind::BoolLit: return e->boolean ? TriBool::DefTrue : TriBool::DefFalse;
            case ExprKind::Unary: {
                if (e->unary_op == dsl::UnaryOp::Not) {
                    return tri_not(bool_of(e->base));
                }
                return -num_of(e->base);
            }
            case ExprKind::Binary: {
                const Interval l = num_of(e->lhs);
                const Interval r = num_of(e->rhs);
                try {
                    switch (e->binary_op) {
                        case dsl::BinaryOp::Add: return l + r;
                        case dsl::BinaryOp::Sub: return l - r;
                        case dsl::BinaryOp::Mul: return l * r;
                        case dsl::BinaryOp::Div: return l / r;
                    }
                } catch (const Error& err) {
                    throw Error(ErrorCode::Eval, err.what(), e->span);
                }
                return Interval::point(0);
            }
            case ExprKind::BoolChain: {
                TriBool acc =
                    e->bool_op == dsl::BoolOp::And ? TriBool::DefTrue : TriBool::DefFalse;
                for (const auto& item : e->items) {
                    const TriBool v = bool_of(item);
                    acc = e->bool_op == dsl::BoolOp::And ? tri_and(acc, v) : tri_or(acc, v);
                }
                return acc;
            }
            case ExprKind::Compare: return visit_compare(e);
            case ExprKind::Call: return visit_call(e);
            case ExprKind::Attribute: return visit_attribute(e);
            default:
                throw Error(ErrorCode::Eval, "expression cannot be evaluated over sets",
                            e->span);
        }
    }

    // Attribute on an agent reference: a continuous field interval, or a
    // mode value (returned via mode_of, not here).
    EvalValue visit_attribute(const dsl::ExprPtr& e) {
        if (is_mode_expr(e)) {
            throw Error(ErrorCode::Eval,
                        "mode value used outside a mode comparison", e->span);
        }
        const AgentView& agent = agent_of(e->base);
        const int idx = field_index(e);
        return agent.rect[static_cast<std::size_t>(idx)];
    }

    EvalValue visit_compare(const dsl::ExprPtr& e) {
        // Mode equality atoms are concrete in a fixed joint mode.
        if (is_mode_expr(e->lhs) || is_mode_expr(e->items[0])) {
            const std::string l = mode_of(e->lhs);
            const std::string r = mode_of(e->items[0]);
            const bool eq = l == r;
            const bool want_eq = e->cmp_ops[0] == dsl::CmpOp::Eq;
            return (eq == want_eq) ? TriBool::DefTrue : TriBool::DefFalse;
        }
        TriBool acc = TriBool::DefTrue;
        Interval prev = num_of(e->lhs);
        for (std::size_t i = 0; i < e->cmp_ops.size(); ++i) {
            const Interval cur = num_of(e->items[i]);
            acc = tri_and(acc, compare(prev, e->cmp_ops[i], cur));
            prev = cur;
        }
        return acc;
    }

    static TriBool compare(const Interval& a, dsl::CmpOp op, const Interval& b) {
        switch (op) {
            case dsl::CmpOp::Lt:
                if (a.hi < b.lo) return TriBool::DefTrue;
                if (a.lo >= b.hi) return TriBool::DefFalse;
                return TriBool::Unknown;
            case dsl::CmpOp::Le:
                if (a.hi <= b.lo) return TriBool::DefTrue;
                if (a.lo > b.hi) return TriBool::DefFalse;
                return TriBool::Unknown;
            case dsl::CmpOp::Gt: return compare(b, dsl::CmpOp::Lt, a);
            case dsl::CmpOp::Ge: return compare(b, dsl::CmpOp::Le, a);
            case dsl::CmpOp::Eq:
                if (a.is_point() && b.is_point() && a.lo == b.lo) return TriBool::DefTrue;
                if (a.hi < b.lo || b.hi < a.lo) return TriBool::DefFalse;
                return TriBool::Unknown;
            case dsl::CmpOp::Ne: return tri_not(compare(a, dsl::CmpOp::Eq, b));
        }
        return TriBool::Unknown;
    }

    EvalValue visit_call(const dsl::ExprPtr& e) {
        if (e->name == "sameTrack") {
            const AgentView& a = agent_of(e->items[0]);
            const AgentView& b = agent_of(e->items[1]);
            return a.track == b.track ? TriBool::DefTrue : TriBool::DefFalse;
        }
        if (e->name == "dist") {
            const AgentView& a = agent_of(e->items[0]);
            const AgentView& b = agent_of(e->items[1]);
            const int wdim = env_.map ? env_.map->workspace_dim()
                                      : static_cast<int>(a.rect.size());
            Interval sum = Interval::point(0.0);
            for (int d = 0; d < wdim; ++d) {
                const Interval diff =
                    abs(a.rect[static_cast<std::size_t>(d)] - b.rect[static_cast<std::size_t>(d)]);
                sum = sum + Interval(diff.lo * diff.lo, diff.hi * diff.hi);
            }
            return versekit::sqrt(sum);
        }
        if (e->name == "trackHeight") {
            if (env_.map == nullptr) {
                throw Error(ErrorCode::Eval, "trackHeight requires a map", e->span);
            }
            const std::string mode = mode_of(e->items[0]);
            return Interval::point(env_.map->transverse_offset(mode));
        }
        throw Error(ErrorCode::Eval, "unknown function '" + e->name + "'", e->span);
    }

    // True for expressions that denote discrete mode values.
    bool is_mode_expr(const dsl::ExprPtr& e) const {
        using dsl::ExprKind;
        if (e->kind != ExprKind::Attribute) return false;
        if (e->base->kind == ExprKind::Name &&
            (e->base->name == "TacticalMode" || e->base->name == "TrackMode")) {
            return true;
        }
        return (e->base->kind == ExprKind::AgentRef) &&
               (e->name == "tactical" || e->name == "track");
    }

    std::string mode_of(const dsl::ExprPtr& e) {
        using dsl::ExprKind;
        if (e->kind == ExprKind::Attribute && e->base->kind == ExprKind::Name) {
            return e->name;  // TacticalMode.X / TrackMode.X -> constant name
        }
        if (e->kind == ExprKind::Attribute && e->base->kind == ExprKind::AgentRef) {
            const AgentView& agent = env_.agent(e->base->agent_slot);
            if (e->name == "tactical") return agent.tactical;
            if (e->name == "track") return agent.track;
        }
        throw Error(ErrorCode::Eval, "expected a mode value", e->span);
    }

    const AgentView& agent_of(const dsl::ExprPtr& e) {
        if (e->kind != dsl::ExprKind::AgentRef) {
            throw Error(ErrorCode::Eval, "expected an agent reference", e->span);
        }
        return env_.agent(e->agent_slot);
    }

    int field_index(const dsl::ExprPtr& attr) {
        if (attr->field_cache >= 0) return attr->field_cache;
        throw Error(ErrorCode::Eval, "unresolved field '" + attr->name + "'", attr->span);
    }

    TriBool bool_of(const dsl::ExprPtr& e) {
        const EvalValue v = visit(e);
        if (!std::holds_alternative<TriBool>(v)) {
            throw Error(ErrorCode::Eval, "expected a boolean subexpression", e->span);
        }
        return std::get<TriBool>(v);
    }

    Interval num_of(const dsl::ExprPtr& e) {
        const EvalValue v = visit(e);
        if (!std::holds_alternative<Interval>(v)) {
            throw Error(ErrorCode::Eval, "expected a numeric subexpression", e->span);
        }
        return std::get<Interval>(v);
    }

    const EvalEnv& env_;
};

inline EvalValue eval_interval(const dsl::ExprPtr& e, const EvalEnv& env) {
    return IntervalEval::eval(e, env);
}

inline TriBool eval_guard(const dsl::ExprPtr& e, const EvalEnv& env) {
    return IntervalEval::eval_bool(e, env);
}

// Tightens the ego box against the guard. Only conjunctive atoms that are
// affine in exactly one ego field (with unit coefficient) and otherwise
// constant within the environment clip; every other atom leaves the box
// unchanged, so the result always satisfies
//   clipped <= rect  and  clipped >= rect intersect guard-set.
class GuardClipper {
  public:
    static HyperRect clip(const HyperRect& ego_rect, const dsl::ExprPtr& guard,
                          const EvalEnv& env) {
        GuardClipper c(env, ego_rect);
        c.walk(guard);
        if (c.inverted_) return ego_rect;  // contradictory atoms: keep input
        return c.rect_;
    }

  private:
    // Affine form c0 + sum_f coeff_f * ego.f restricted to a single field.
    struct Affine {
        bool ok = false;
        int field = -1;     // -1 when constant
        double coeff = 0.0; // +1 / -1 accumulated
        Interval constant = Interval::point(0.0);
    };

    GuardClipper(const EvalEnv& env, HyperRect rect) : env_(env), rect_(std::move(rect)) {}

    void walk(const dsl::ExprPtr& e) {
        using dsl::ExprKind;
        if (e->kind == ExprKind::BoolChain && e->bool_op == dsl::BoolOp::And) {
            for (const auto& item : e->items) walk(item);
            return;
        }
        if (e->kind == ExprKind::Compare) apply_compare(e);
        // Or / Not / quantified remnants cannot clip soundly: skipped.
    }

    void apply_compare(const dsl::ExprPtr& e) {
        std::vector<dsl::ExprPtr> ops;
        ops.push_back(e->lhs);
        ops.insert(ops.end(), e->items.begin(), e->items.end());
        for (std::size_t i = 0; i < e->cmp_ops.size(); ++i) {
            apply_atom(ops[i], e->cmp_ops[i], ops[i + 1]);
        }
    }

    void apply_atom(const dsl::ExprPtr& lhs, dsl::CmpOp op, const dsl::ExprPtr& rhs) {
        const Affine a = affine(lhs);
        const Affine b = affine(rhs);
        if (!a.ok || !b.ok) return;
        int field = -1;
        double coeff = 0.0;
        if (a.field >= 0 && b.field >= 0) {
            if (a.field != b.field) return;  // two distinct fields: skip
            field = a.field;
            coeff = a.coeff - b.coeff;
        } else if (a.field >= 0) {
            field = a.field;
            coeff = a.coeff;
        } else if (b.field >= 0) {
            field = b.field;
            coeff = -b.coeff;
        } else {
            return;  // constant atom
        }
        if (coeff != 1.0 && coeff != -1.0) return;
        // coeff * f  op  bound
        const Interval bound = b.constant - a.constant;
        dsl::CmpOp eff = op;
        Interval rhs_bound = bound;
        if (coeff == -1.0) {
            eff = flip(op);
            rhs_bound = -bound;
        }
        clip_field(field, eff, rhs_bound);
    }

    static dsl::CmpOp flip(dsl::CmpOp op) {
        switch (op) {
            case dsl::CmpOp::Lt: return dsl::CmpOp::Gt;
            case dsl::CmpOp::Le: return dsl::CmpOp::Ge;
            case dsl::CmpOp::Gt: return dsl::CmpOp::Lt;
            case dsl::CmpOp::Ge: return dsl::CmpOp::Le;
            default: return op;
        }
    }

    void clip_field(int field, dsl::CmpOp op, const Interval& bound) {
        auto& iv = rect_[static_cast<std::size_t>(field)];
        double lo = iv.lo;
        double hi = iv.hi;
        switch (op) {
            case dsl::CmpOp::Lt:
            case dsl::CmpOp::Le: hi = std::min(hi, bound.hi); break;
            case dsl::CmpOp::Gt:
            case dsl::CmpOp::Ge: lo = std::max(lo, bound.lo); break;
            case dsl::CmpOp::Eq:
                lo = std::max(lo, bound.lo);
                hi = std::min(hi, bound.hi);
                break;
            case dsl::CmpOp::Ne: return;
        }
        if (lo > hi) {
            inverted_ = true;
            return;
        }
        iv = Interval(lo, hi);
    }

    // Extract an affine single-ego-field form; fails on anything touching
    // another agent or a second field.
    Affine affine(const dsl::ExprPtr& e) {
        using dsl::ExprKind;
        Affine r;
        switch (e->kind) {
            case ExprKind::NumberLit:
                r.ok = true;
                r.constant = Interval::point(e->number);
                return r;
            case ExprKind::Attribute: {
                if (e->base->kind != ExprKind::AgentRef || e->base->agent_slot != -1) return r;
                if (e->name == "tactical" || e->name == "track") return r;
                r.ok = true;
                r.field = e->field_cache;
                r.coeff = 1.0;
                if (r.field < 0) r.ok = false;
                return r;
            }
            case ExprKind::Call: {
                if (e->name != "trackHeight") return r;
                try {
                    r.constant = IntervalEval::eval_num(e, env_);
                    r.ok = true;
                } catch (const Error&) {
                    r.ok = false;
                }
                return r;
            }
            case ExprKind::Unary: {
                if (e->unary_op != dsl::UnaryOp::Neg) return r;
                Affine inner = affine(e->base);
                if (!inner.ok) return r;
                inner.coeff = -inner.coeff;
                inner.constant = -inner.constant;
                return inner;
            }
            case ExprKind::Binary: {
                if (e->binary_op != dsl::BinaryOp::Add && e->binary_op != dsl::BinaryOp::Sub) {
                    return r;
                }
                const Affine l = affine(e->lhs);
                Affine rr = affine(e->rhs);
                if (!l.ok || !rr.ok) return r;
                const double sign = e->binary_op == dsl::BinaryOp::Add ? 1.0 : -1.0;
                if (l.field >= 0 && rr.field >= 0) return r;  // two fields in one side
                r.ok = true;
                r.field = l.field >= 0 ? l.field : rr.field;
                r.coeff = l.field >= 0 ? l.coeff : sign * rr.coeff;
                r.constant = sign > 0 ? l.constant + rr.constant : l.constant - rr.constant;
                return r;
            }
            default: return r;
        }
    }

    const EvalEnv& env_;
    HyperRect rect_;
    bool inverted_ = false;
};

inline HyperRect clip_guard(const HyperRect& ego_rect, const dsl::ExprPtr& guard,
                            const EvalEnv& env) {
    return GuardClipper::clip(ego_rect, guard, env);
}

}  // namespace versekit
