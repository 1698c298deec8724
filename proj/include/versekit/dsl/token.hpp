#pragma once

#include <string>
#include <vector>

#include "versekit/errors.hpp"

namespace versekit::dsl {

enum class TokenKind {
    Ident,
    Number,
    String,
    // keywords
    KwDef,
    KwClass,
    KwIf,
    KwElif,
    KwElse,
    KwReturn,
    KwAssert,
    KwAnd,
    KwOr,
    KwNot,
    KwFor,
    KwIn,
    KwLambda,
    KwTrue,
    KwFalse,
    KwNone,
    // operators
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Assign,
    Arrow,
    // punctuation
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Semicolon,
    // layout
    Newline,
    Indent,
    Dedent,
    EndOfFile,
};

inline const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Ident: return "identifier";
        case TokenKind::Number: return "number";
        case TokenKind::String: return "string";
        case TokenKind::KwDef: return "'def'";
        case TokenKind::KwClass: return "'class'";
        case TokenKind::KwIf: return "'if'";
        case TokenKind::KwElif: return "'elif'";
        case TokenKind::KwElse: return "'else'";
        case TokenKind::KwReturn: return "'return'";
        case TokenKind::KwAssert: return "'assert'";
        case TokenKind::KwAnd: return "'and'";
        case TokenKind::KwOr: return "'or'";
        case TokenKind::KwNot: return "'not'";
        case TokenKind::KwFor: return "'for'";
        case TokenKind::KwIn: return "'in'";
        case TokenKind::KwLambda: return "'lambda'";
        case TokenKind::KwTrue: return "'True'";
        case TokenKind::KwFalse: return "'False'";
        case TokenKind::KwNone: return "'None'";
        case TokenKind::Plus: return "'+'";
        case TokenKind::Minus: return "'-'";
        case TokenKind::Star: return "'*'";
        case TokenKind::Slash: return "'/'";
        case TokenKind::Lt: return "'<'";
        case TokenKind::Le: return "'<='";
        case TokenKind::Gt: return "'>'";
        case TokenKind::Ge: return "'>='";
        case TokenKind::EqEq: return "'=='";
        case TokenKind::NotEq: return "'!='";
        case TokenKind::Assign: return "'='";
        case TokenKind::Arrow: return "'->'";
        case TokenKind::LParen: return "'('";
        case TokenKind::RParen: return "')'";
        case TokenKind::Comma: return "','";
        case TokenKind::Colon: return "':'";
        case TokenKind::Dot: return "'.'";
        case TokenKind::Semicolon: return "';'";
        case TokenKind::Newline: return "newline";
        case TokenKind::Indent: return "indent";
        case TokenKind::Dedent: return "dedent";
        case TokenKind::EndOfFile: return "end of file";
    }
    return "?";
}

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string lexeme;
    SourceSpan span;
};

using TokenStream = std::vector<Token>;

}  // namespace versekit::dsl
