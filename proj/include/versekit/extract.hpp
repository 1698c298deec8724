#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "versekit/dsl/ast.hpp"
#include "versekit/dsl/check.hpp"
#include "versekit/errors.hpp"

namespace versekit {

// A discrete transition of one agent's decision logic: source and
// destination tactical modes, an enabling guard over the (sensed) continuous
// states, and the continuous-state resets applied on switching. The track
// mode successor is not part of the spec; the map's mode-transition function
// supplies it at switch time.
struct TransitionSpec {
    std::string src_tactical;
    std::string dst_tactical;
    dsl::ExprPtr guard;  // closed: agent refs resolved, quantifiers unrolled
    std::vector<std::pair<int, dsl::ExprPtr>> resets;  // field index -> expression
    SourceSpan span;
    std::uint64_t guard_fingerprint = 0;
    std::uint64_t reset_fingerprint = 0;

    std::string label() const { return src_tactical + "->" + dst_tactical; }
};

struct AssertSpec {
    dsl::ExprPtr predicate;  // closed
    std::string label;
    SourceSpan span;
};

namespace detail {

// Structural hash of an expression tree (FNV-1a). Used as the cache
// fingerprint: editing the decision logic changes the fingerprints of the
// affected guards and resets.
inline void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
}

inline void hash_string(std::uint64_t& h, const std::string& s) {
    for (const char c : s) fnv_mix(h, static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    fnv_mix(h, 0xFFULL);
}

inline void hash_expr(std::uint64_t& h, const dsl::ExprPtr& e) {
    if (!e) {
        fnv_mix(h, 0);
        return;
    }
    fnv_mix(h, static_cast<std::uint64_t>(e->kind) + 1);
    switch (e->kind) {
        case dsl::ExprKind::NumberLit: {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(e->number));
            std::memcpy(&bits, &e->number, sizeof(bits));
            fnv_mix(h, bits);
            break;
        }
        case dsl::ExprKind::StringLit: hash_string(h, e->str); break;
        case dsl::ExprKind::BoolLit: fnv_mix(h, e->boolean ? 2 : 1); break;
        case dsl::ExprKind::Name: hash_string(h, e->name); break;
        case dsl::ExprKind::AgentRef:
            fnv_mix(h, static_cast<std::uint64_t>(e->agent_slot + 2));
            break;
        case dsl::ExprKind::Attribute:
            hash_string(h, e->name);
            hash_expr(h, e->base);
            break;
        case dsl::ExprKind::Unary:
            fnv_mix(h, static_cast<std::uint64_t>(e->unary_op));
            hash_expr(h, e->base);
            break;
        case dsl::ExprKind::Binary:
            fnv_mix(h, static_cast<std::uint64_t>(e->binary_op));
            hash_expr(h, e->lhs);
            hash_expr(h, e->rhs);
            break;
        case dsl::ExprKind::BoolChain:
            fnv_mix(h, static_cast<std::uint64_t>(e->bool_op));
            for (const auto& i : e->items) hash_expr(h, i);
            break;
        case dsl::ExprKind::Compare:
            hash_expr(h, e->lhs);
            for (std::size_t i = 0; i < e->cmp_ops.size(); ++i) {
                fnv_mix(h, static_cast<std::uint64_t>(e->cmp_ops[i]));
                hash_expr(h, e->items[i]);
            }
            break;
        case dsl::ExprKind::Call:
            hash_string(h, e->name);
            for (const auto& i : e->items) hash_expr(h, i);
            break;
        default:
            for (const auto& i : e->items) hash_expr(h, i);
            hash_expr(h, e->base);
            break;
    }
}

inline std::uint64_t expr_fingerprint(const dsl::ExprPtr& e) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_expr(h, e);
    return h;
}

}  // namespace detail

// Turns a checked program into the agent's transition relation and assert
// set. Guards and asserts are closed for a fixed agent count k: the ego and
// bound comprehension variables become indexed agent references, and
// any/all comprehensions unroll to (k-1)-way disjunctions/conjunctions.
class Extractor {
  public:
    struct Result {
        std::vector<TransitionSpec> transitions;
        std::vector<AssertSpec> asserts;
    };

    static Result extract(const dsl::CheckedProgram& program, int agent_count) {
        if (agent_count < 1) {
            throw Error(ErrorCode::Extract, "agent count must be at least 1");
        }
        Extractor ex(program, agent_count);
        return ex.run();
    }

    // Exposed for the quantifier-unrolling tests: closes an expression for
    // ego slot and unrolls quantifiers for k agents.
    static dsl::ExprPtr close_expression(const dsl::CheckedProgram& program, int agent_count,
                                         const dsl::ExprPtr& e) {
        Extractor ex(program, agent_count);
        return ex.close(e);
    }

  private:
    Extractor(const dsl::CheckedProgram& program, int k) : prog_(program), k_(k) {}

    struct PathAssign {
        bool tactical = false;
        std::string mode;            // tactical target
        int field = -1;              // continuous target
        dsl::ExprPtr value;
        SourceSpan span;
    };

    Result run() {
        walk_block(prog_.decision().body, {}, {}, /*top=*/true);
        return std::move(result_);
    }

    void walk_block(const std::vector<dsl::StmtPtr>& block, std::vector<dsl::ExprPtr> conds,
                    std::vector<PathAssign> assigns, bool top) {
        bool direct_tactical = false;
        SourceSpan last_span{};
        for (const auto& stmt : block) {
            switch (stmt->kind) {
                case dsl::StmtKind::Assign: {
                    PathAssign pa;
                    pa.span = stmt->span;
                    if (stmt->target->name == "tactical") {
                        pa.tactical = true;
                        pa.mode = stmt->value->name;
                        direct_tactical = true;
                        last_span = stmt->span;
                    } else {
                        pa.field = prog_.field_index(stmt->target->name);
                        pa.value = stmt->value;
                    }
                    assigns.push_back(std::move(pa));
                    break;
                }
                case dsl::StmtKind::If: {
                    auto then_conds = conds;
                    flatten_conjunction(stmt->condition, then_conds);
                    walk_block(stmt->body, then_conds, assigns, false);
                    if (!stmt->orelse.empty()) {
                        auto else_conds = conds;
                        if (dsl::ExprPtr neg = negate_mode_atom(stmt->condition)) {
                            else_conds.push_back(neg);
                        }
                        walk_block(stmt->orelse, else_conds, assigns, false);
                    }
                    break;
                }
                case dsl::StmtKind::Assert: {
                    if (top) {
                        AssertSpec spec;
                        spec.predicate = close(stmt->test);
                        spec.label = stmt->message.value_or(
                            "assert@" + std::to_string(stmt->span.begin.line));
                        spec.span = stmt->span;
                        result_.asserts.push_back(std::move(spec));
                    }
                    break;
                }
                case dsl::StmtKind::Return: break;
            }
        }
        if (direct_tactical) emit(conds, assigns, last_span);
    }

    // Emit one transition for the accumulated path, keyed by the
    // mode-equality atoms among the path conditions.
    void emit(const std::vector<dsl::ExprPtr>& conds, const std::vector<PathAssign>& assigns,
              SourceSpan span) {
        std::string src;
        std::vector<std::string> neg_sources;
        std::vector<dsl::ExprPtr> guard_terms;
        for (const auto& cond : conds) {
            std::string mode;
            bool positive;
            if (tactical_atom(cond, mode, positive)) {
                if (positive) {
                    if (!src.empty() && src != mode) return;  // unsatisfiable path
                    src = mode;
                } else {
                    neg_sources.push_back(mode);
                }
                continue;
            }
            guard_terms.push_back(cond);
        }
        if (src.empty()) {
            throw Error(ErrorCode::Extract,
                        "ambiguous source mode: branch assigns a tactical mode without an "
                        "ego tactical-mode condition on its path",
                        span);
        }
        for (const auto& neg : neg_sources) {
            if (neg == src) return;  // path contradicts its own source mode
        }

        std::string dst;
        std::vector<std::pair<int, dsl::ExprPtr>> resets;
        for (const auto& pa : assigns) {
            if (pa.tactical) {
                dst = pa.mode;
            } else {
                resets.emplace_back(pa.field, close(pa.value));
            }
        }

        TransitionSpec spec;
        spec.src_tactical = src;
        spec.dst_tactical = dst;
        spec.span = span;
        if (guard_terms.empty()) {
            auto t = dsl::make_expr(dsl::ExprKind::BoolLit, span);
            t->boolean = true;
            spec.guard = t;
        } else if (guard_terms.size() == 1) {
            spec.guard = close(guard_terms[0]);
        } else {
            auto conj = dsl::make_expr(dsl::ExprKind::BoolChain, span);
            conj->bool_op = dsl::BoolOp::And;
            for (const auto& g : guard_terms) conj->items.push_back(close(g));
            spec.guard = conj;
        }
        spec.resets = std::move(resets);
        spec.guard_fingerprint = detail::expr_fingerprint(spec.guard);
        std::uint64_t rh = 0xcbf29ce484222325ULL;
        for (const auto& [field, value] : spec.resets) {
            detail::fnv_mix(rh, static_cast<std::uint64_t>(field) + 1);
            detail::hash_expr(rh, value);
        }
        spec.reset_fingerprint = rh;
        result_.transitions.push_back(std::move(spec));
    }

    // Top-level conjunctions split into their conjuncts so that
    // mode-equality atoms inside `a == M and <cond>` still key the source
    // mode.
    static void flatten_conjunction(const dsl::ExprPtr& cond, std::vector<dsl::ExprPtr>& out) {
        if (cond->kind == dsl::ExprKind::BoolChain && cond->bool_op == dsl::BoolOp::And) {
            for (const auto& item : cond->items) flatten_conjunction(item, out);
            return;
        }
        out.push_back(cond);
    }

    // Recognizes `ego.tactical == TacticalMode.X` (or !=) atoms.
    bool tactical_atom(const dsl::ExprPtr& e, std::string& mode, bool& positive) const {
        using dsl::ExprKind;
        if (e->kind != ExprKind::Compare || e->cmp_ops.size() != 1) return false;
        if (e->cmp_ops[0] != dsl::CmpOp::Eq && e->cmp_ops[0] != dsl::CmpOp::Ne) return false;
        const dsl::ExprPtr* agent_side = nullptr;
        const dsl::ExprPtr* const_side = nullptr;
        for (const dsl::ExprPtr* side : {&e->lhs, &e->items[0]}) {
            const auto& s = **side;
            if (s.kind == ExprKind::Attribute && s.base->kind == ExprKind::Name) {
                if (s.base->name == prog_.ego_param && s.name == "tactical") agent_side = side;
                if (s.base->name == "TacticalMode") const_side = side;
            }
        }
        if (!agent_side || !const_side) return false;
        mode = (*const_side)->name;
        positive = e->cmp_ops[0] == dsl::CmpOp::Eq;
        return true;
    }

    dsl::ExprPtr negate_mode_atom(const dsl::ExprPtr& cond) const {
        std::string mode;
        bool positive;
        if (!tactical_atom(cond, mode, positive)) return nullptr;
        auto neg = std::make_shared<dsl::Expr>(*cond);
        neg->cmp_ops = {positive ? dsl::CmpOp::Ne : dsl::CmpOp::Eq};
        return neg;
    }

    // ---- closing: agent-ref substitution + quantifier unrolling ----

    dsl::ExprPtr close(const dsl::ExprPtr& e) { return close_rec(e, {}); }

    using Bindings = std::vector<std::pair<std::string, int>>;  // var -> other slot

    dsl::ExprPtr close_rec(const dsl::ExprPtr& e, const Bindings& bindings) {
        using dsl::ExprKind;
        switch (e->kind) {
            case ExprKind::NumberLit:
            case ExprKind::StringLit:
            case ExprKind::BoolLit:
            case ExprKind::NoneLit: return e;
            case ExprKind::Name: {
                if (const int slot = lookup(e->name, bindings); slot != -2) {
                    auto ref = dsl::make_expr(ExprKind::AgentRef, e->span);
                    ref->agent_slot = slot;
                    return ref;
                }
                return e;
            }
            case ExprKind::Attribute: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->base = close_rec(e->base, bindings);
                if (cp->base->kind == ExprKind::AgentRef && cp->name != "tactical" &&
                    cp->name != "track") {
                    cp->field_cache = prog_.field_index(cp->name);
                }
                return cp;
            }
            case ExprKind::Unary: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->base = close_rec(e->base, bindings);
                return cp;
            }
            case ExprKind::Binary: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->lhs = close_rec(e->lhs, bindings);
                cp->rhs = close_rec(e->rhs, bindings);
                return cp;
            }
            case ExprKind::BoolChain: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->items.clear();
                for (const auto& i : e->items) cp->items.push_back(close_rec(i, bindings));
                return cp;
            }
            case ExprKind::Compare: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->lhs = close_rec(e->lhs, bindings);
                cp->items.clear();
                for (const auto& i : e->items) cp->items.push_back(close_rec(i, bindings));
                return cp;
            }
            case ExprKind::Call: {
                auto cp = std::make_shared<dsl::Expr>(*e);
                cp->items.clear();
                for (const auto& i : e->items) cp->items.push_back(close_rec(i, bindings));
                return cp;
            }
            case ExprKind::Quantifier: return unroll(e, bindings);
            default:
                throw Error(ErrorCode::Extract, "unsupported construct in guard", e->span);
        }
    }

    // any -> (k-1)-way disjunction, all -> (k-1)-way conjunction; empty
    // unrollings collapse to the neutral constants.
    dsl::ExprPtr unroll(const dsl::ExprPtr& q, const Bindings& bindings) {
        const bool is_any = q->name == "any";
        dsl::ExprPtr element = q->base;
        if (!q->filters.empty()) {
            auto conj = dsl::make_expr(dsl::ExprKind::BoolChain, q->span);
            conj->bool_op = dsl::BoolOp::And;
            for (const auto& f : q->filters) conj->items.push_back(f);
            conj->items.push_back(q->base);
            element = conj;
        }
        if (k_ == 1) {
            auto c = dsl::make_expr(dsl::ExprKind::BoolLit, q->span);
            c->boolean = !is_any;  // empty disjunction false, conjunction true
            return c;
        }
        std::vector<dsl::ExprPtr> instances;
        for (int slot = 0; slot < k_ - 1; ++slot) {
            Bindings inner = bindings;
            inner.emplace_back(q->bound_var, slot);
            instances.push_back(close_rec(element, inner));
        }
        if (instances.size() == 1) return instances[0];
        auto chain = dsl::make_expr(dsl::ExprKind::BoolChain, q->span);
        chain->bool_op = is_any ? dsl::BoolOp::Or : dsl::BoolOp::And;
        chain->items = std::move(instances);
        return chain;
    }

    int lookup(const std::string& name, const Bindings& bindings) const {
        if (name == prog_.ego_param) return -1;
        for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
            if (it->first == name) return it->second;
        }
        return -2;  // not an agent name
    }

    const dsl::CheckedProgram& prog_;
    int k_;
    Result result_;
};

inline Extractor::Result extract_transitions(const dsl::CheckedProgram& program,
                                             int agent_count) {
    return Extractor::extract(program, agent_count);
}

}  // namespace versekit
