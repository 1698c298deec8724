#pragma once

#include <memory>
#include <string>
#include <vector>

#include "versekit/dsl/ast.hpp"
#include "versekit/dsl/lexer.hpp"
#include "versekit/dsl/token.hpp"
#include "versekit/errors.hpp"

namespace versekit::dsl {

// Recursive-descent parser for the decision-logic language.
//
// Binding strength, loosest first:
//   or < and < not < comparison chains < (+ -) < (* /) < unary - < postfix.
class Parser {
  public:
    explicit Parser(TokenStream tokens) : tokens_(std::move(tokens)) {}

    static Program parse(const TokenStream& tokens) {
        Parser p(tokens);
        return p.parse_program();
    }

    static Program parse_source(std::string_view source) { return parse(tokenize(source)); }

  private:
    Program parse_program() {
        Program prog;
        while (!check(TokenKind::EndOfFile)) {
            if (match(TokenKind::Newline)) continue;
            if (check(TokenKind::KwClass)) {
                prog.mode_decls.push_back(parse_class());
            } else if (check(TokenKind::KwDef)) {
                prog.functions.push_back(parse_function());
            } else {
                throw err("expected 'class' or 'def' at top level");
            }
        }
        return prog;
    }

    ModeDecl parse_class() {
        ModeDecl decl;
        decl.span = peek().span;
        expect(TokenKind::KwClass);
        decl.name = expect(TokenKind::Ident).lexeme;
        expect(TokenKind::Colon);
        expect(TokenKind::Newline);
        expect(TokenKind::Indent);
        while (!check(TokenKind::Dedent)) {
            if (match(TokenKind::Newline)) continue;
            const Token member = expect(TokenKind::Ident);
            expect(TokenKind::Assign);
            expect(TokenKind::Number);
            expect(TokenKind::Newline);
            decl.members.push_back(member.lexeme);
        }
        expect(TokenKind::Dedent);
        if (decl.members.empty()) {
            throw Error(ErrorCode::Parse, "mode enumeration '" + decl.name + "' has no members",
                        decl.span);
        }
        return decl;
    }

    FunctionDef parse_function() {
        FunctionDef fn;
        fn.span = peek().span;
        expect(TokenKind::KwDef);
        fn.name = expect(TokenKind::Ident).lexeme;
        expect(TokenKind::LParen);
        if (!check(TokenKind::RParen)) {
            while (true) {
                fn.params.push_back(expect(TokenKind::Ident).lexeme);
                if (match(TokenKind::Colon)) parse_annotation();
                if (!match(TokenKind::Comma)) break;
            }
        }
        expect(TokenKind::RParen);
        if (match(TokenKind::Arrow)) parse_annotation();
        expect(TokenKind::Colon);
        fn.body = parse_block();
        return fn;
    }

    // Type annotations are accepted and ignored: a dotted name or a string.
    void parse_annotation() {
        if (match(TokenKind::String)) return;
        expect(TokenKind::Ident);
        while (match(TokenKind::Dot)) expect(TokenKind::Ident);
    }

    std::vector<StmtPtr> parse_block() {
        expect(TokenKind::Newline);
        expect(TokenKind::Indent);
        std::vector<StmtPtr> body;
        while (!check(TokenKind::Dedent)) {
            if (match(TokenKind::Newline)) continue;
            body.push_back(parse_statement());
        }
        expect(TokenKind::Dedent);
        if (body.empty()) throw err("block must contain at least one statement");
        return body;
    }

    StmtPtr parse_statement() {
        if (check(TokenKind::KwIf)) return parse_if();
        if (check(TokenKind::KwAssert)) return parse_assert();
        if (check(TokenKind::KwReturn)) return parse_return();
        if (check(TokenKind::KwDef) || check(TokenKind::KwClass)) {
            throw err("nested definitions are not supported");
        }
        return parse_assign();
    }

    StmtPtr parse_if() {
        auto stmt = make_stmt(StmtKind::If, peek().span);
        advance();  // 'if' or 'elif'
        stmt->condition = parse_expression();
        expect(TokenKind::Colon);
        stmt->body = parse_block();
        if (check(TokenKind::KwElif)) {
            auto nested = parse_if_from_elif();
            stmt->is_elif = true;
            stmt->orelse.push_back(nested);
        } else if (match(TokenKind::KwElse)) {
            expect(TokenKind::Colon);
            stmt->orelse = parse_block();
        }
        return stmt;
    }

    StmtPtr parse_if_from_elif() {
        auto stmt = make_stmt(StmtKind::If, peek().span);
        expect(TokenKind::KwElif);
        stmt->condition = parse_expression();
        expect(TokenKind::Colon);
        stmt->body = parse_block();
        if (check(TokenKind::KwElif)) {
            auto nested = parse_if_from_elif();
            stmt->is_elif = true;
            stmt->orelse.push_back(nested);
        } else if (match(TokenKind::KwElse)) {
            expect(TokenKind::Colon);
            stmt->orelse = parse_block();
        }
        return stmt;
    }

    StmtPtr parse_assert() {
        auto stmt = make_stmt(StmtKind::Assert, peek().span);
        expect(TokenKind::KwAssert);
        stmt->test = parse_expression();
        if (match(TokenKind::Comma)) {
            const Token msg = expect(TokenKind::String);
            stmt->message = msg.lexeme;
        }
        expect(TokenKind::Newline);
        return stmt;
    }

    StmtPtr parse_return() {
        auto stmt = make_stmt(StmtKind::Return, peek().span);
        expect(TokenKind::KwReturn);
        if (!check(TokenKind::Newline)) stmt->result = parse_expression();
        expect(TokenKind::Newline);
        return stmt;
    }

    StmtPtr parse_assign() {
        auto stmt = make_stmt(StmtKind::Assign, peek().span);
        ExprPtr target = parse_postfix();
        if (target->kind != ExprKind::Name && target->kind != ExprKind::Attribute) {
            throw Error(ErrorCode::Parse, "assignment target must be a name or attribute",
                        target->span);
        }
        if (check(TokenKind::Assign)) {
            advance();
            stmt->target = target;
            stmt->value = parse_expression();
            expect(TokenKind::Newline);
            return stmt;
        }
        throw err("expected '=' in assignment (loops, imports and bare expressions "
                  "are unsupported constructs)");
    }

    // ---- expressions ----

    ExprPtr parse_expression() {
        if (check(TokenKind::KwLambda)) return parse_lambda();
        return parse_or();
    }

    ExprPtr parse_lambda() {
        auto e = make_expr(ExprKind::Lambda, peek().span);
        expect(TokenKind::KwLambda);
        if (!check(TokenKind::Colon)) {
            while (true) {
                e->params.push_back(expect(TokenKind::Ident).lexeme);
                if (!match(TokenKind::Comma)) break;
            }
        }
        expect(TokenKind::Colon);
        e->base = parse_expression();
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr left = parse_and();
        if (!check(TokenKind::KwOr)) return left;
        auto chain = make_expr(ExprKind::BoolChain, left->span);
        chain->bool_op = BoolOp::Or;
        chain->items.push_back(left);
        while (match(TokenKind::KwOr)) chain->items.push_back(parse_and());
        return chain;
    }

    ExprPtr parse_and() {
        ExprPtr left = parse_not();
        if (!check(TokenKind::KwAnd)) return left;
        auto chain = make_expr(ExprKind::BoolChain, left->span);
        chain->bool_op = BoolOp::And;
        chain->items.push_back(left);
        while (match(TokenKind::KwAnd)) chain->items.push_back(parse_not());
        return chain;
    }

    ExprPtr parse_not() {
        if (check(TokenKind::KwNot)) {
            auto e = make_expr(ExprKind::Unary, peek().span);
            advance();
            e->unary_op = UnaryOp::Not;
            e->base = parse_not();
            return e;
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr first = parse_additive();
        if (!is_cmp(peek().kind)) return first;
        auto chain = make_expr(ExprKind::Compare, first->span);
        chain->lhs = first;
        while (is_cmp(peek().kind)) {
            chain->cmp_ops.push_back(to_cmp(peek().kind));
            advance();
            chain->items.push_back(parse_additive());
        }
        return chain;
    }

    ExprPtr parse_additive() {
        ExprPtr left = parse_multiplicative();
        while (check(TokenKind::Plus) || check(TokenKind::Minus)) {
            auto e = make_expr(ExprKind::Binary, peek().span);
            e->binary_op = check(TokenKind::Plus) ? BinaryOp::Add : BinaryOp::Sub;
            advance();
            e->lhs = left;
            e->rhs = parse_multiplicative();
            left = e;
        }
        return left;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr left = parse_unary();
        while (check(TokenKind::Star) || check(TokenKind::Slash)) {
            auto e = make_expr(ExprKind::Binary, peek().span);
            e->binary_op = check(TokenKind::Star) ? BinaryOp::Mul : BinaryOp::Div;
            advance();
            e->lhs = left;
            e->rhs = parse_unary();
            left = e;
        }
        return left;
    }

    ExprPtr parse_unary() {
        if (check(TokenKind::Minus)) {
            auto e = make_expr(ExprKind::Unary, peek().span);
            advance();
            e->unary_op = UnaryOp::Neg;
            e->base = parse_unary();
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_atom();
        while (true) {
            if (check(TokenKind::Dot)) {
                auto attr = make_expr(ExprKind::Attribute, peek().span);
                advance();
                attr->base = e;
                attr->name = expect(TokenKind::Ident).lexeme;
                e = attr;
            } else if (check(TokenKind::LParen)) {
                e = parse_call(e);
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parse_call(ExprPtr callee) {
        if (callee->kind != ExprKind::Name) {
            throw Error(ErrorCode::Parse, "only plain function names can be called",
                        callee->span);
        }
        const SourceSpan span = peek().span;
        expect(TokenKind::LParen);
        // A generator expression as the sole argument turns the call into a
        // quantified comprehension: any(P(o) for o in others).
        ExprPtr first;
        if (!check(TokenKind::RParen)) {
            first = parse_expression();
            if (check(TokenKind::KwFor)) {
                auto q = make_expr(ExprKind::Quantifier, span);
                q->name = callee->name;
                q->base = first;
                expect(TokenKind::KwFor);
                q->bound_var = expect(TokenKind::Ident).lexeme;
                expect(TokenKind::KwIn);
                q->iterable = parse_or();
                while (match(TokenKind::KwIf)) q->filters.push_back(parse_or());
                expect(TokenKind::RParen);
                return q;
            }
        }
        auto call = make_expr(ExprKind::Call, span);
        call->name = callee->name;
        if (first) {
            call->items.push_back(first);
            while (match(TokenKind::Comma)) call->items.push_back(parse_expression());
        }
        expect(TokenKind::RParen);
        return call;
    }

    ExprPtr parse_atom() {
        const Token& tok = peek();
        switch (tok.kind) {
            case TokenKind::Number: {
                auto e = make_expr(ExprKind::NumberLit, tok.span);
                e->number = std::stod(tok.lexeme);
                advance();
                return e;
            }
            case TokenKind::String: {
                auto e = make_expr(ExprKind::StringLit, tok.span);
                e->str = tok.lexeme;
                advance();
                return e;
            }
            case TokenKind::KwTrue:
            case TokenKind::KwFalse: {
                auto e = make_expr(ExprKind::BoolLit, tok.span);
                e->boolean = tok.kind == TokenKind::KwTrue;
                advance();
                return e;
            }
            case TokenKind::KwNone: {
                auto e = make_expr(ExprKind::NoneLit, tok.span);
                advance();
                return e;
            }
            case TokenKind::Ident: {
                auto e = make_expr(ExprKind::Name, tok.span);
                e->name = tok.lexeme;
                advance();
                return e;
            }
            case TokenKind::LParen: {
                advance();
                ExprPtr inner = parse_expression();
                if (check(TokenKind::Comma)) {
                    auto tup = make_expr(ExprKind::Tuple, tok.span);
                    tup->items.push_back(inner);
                    while (match(TokenKind::Comma)) {
                        if (check(TokenKind::RParen)) break;
                        tup->items.push_back(parse_expression());
                    }
                    expect(TokenKind::RParen);
                    return tup;
                }
                expect(TokenKind::RParen);
                return inner;  // grouping
            }
            default: break;
        }
        throw err("expected an expression");
    }

    // ---- token helpers ----

    static bool is_cmp(TokenKind k) {
        return k == TokenKind::Lt || k == TokenKind::Le || k == TokenKind::Gt ||
               k == TokenKind::Ge || k == TokenKind::EqEq || k == TokenKind::NotEq;
    }

    static CmpOp to_cmp(TokenKind k) {
        switch (k) {
            case TokenKind::Lt: return CmpOp::Lt;
            case TokenKind::Le: return CmpOp::Le;
            case TokenKind::Gt: return CmpOp::Gt;
            case TokenKind::Ge: return CmpOp::Ge;
            case TokenKind::EqEq: return CmpOp::Eq;
            default: return CmpOp::Ne;
        }
    }

    const Token& peek() const { return tokens_[idx_]; }

    bool check(TokenKind k) const { return peek().kind == k; }

    bool match(TokenKind k) {
        if (!check(k)) return false;
        advance();
        return true;
    }

    Token expect(TokenKind k) {
        if (!check(k)) {
            throw Error(ErrorCode::Parse,
                        std::string("expected ") + token_kind_name(k) + ", found " +
                            token_kind_name(peek().kind),
                        peek().span);
        }
        Token t = peek();
        advance();
        return t;
    }

    void advance() {
        if (idx_ + 1 < tokens_.size()) ++idx_;
    }

    Error err(const std::string& message) const {
        return Error(ErrorCode::Parse,
                     message + " (found " + token_kind_name(peek().kind) + ")", peek().span);
    }

    TokenStream tokens_;
    std::size_t idx_ = 0;
};

inline Program parse(std::string_view source) { return Parser::parse_source(source); }

}  // namespace versekit::dsl
