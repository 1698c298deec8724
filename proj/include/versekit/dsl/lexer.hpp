#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "versekit/dsl/token.hpp"
#include "versekit/errors.hpp"

namespace versekit::dsl {

// Indentation-sensitive lexer. Indentation must be spaces (tabs are
// rejected); any consistent widening counts as a single INDENT. INDENT and
// DEDENT tokens balance over a file, and the token stream always ends with
// NEWLINE-equivalent layout followed by EndOfFile.
class Lexer {
  public:
    explicit Lexer(std::string_view source) : src_(source) {}

    static TokenStream tokenize(std::string_view source) {
        Lexer lex(source);
        return lex.run();
    }

  private:
    TokenStream run() {
        indent_stack_.push_back(0);
        while (!at_end()) {
            lex_line();
        }
        // Implicit final NEWLINE when the file does not end with one.
        if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline) {
            emit(TokenKind::Newline, "");
        }
        while (indent_stack_.back() > 0) {
            indent_stack_.pop_back();
            emit(TokenKind::Dedent, "");
        }
        emit(TokenKind::EndOfFile, "");
        return std::move(tokens_);
    }

    void lex_line() {
        const int indent = consume_indent();
        if (at_end() || peek() == '\n' || peek() == '#') {
            // Blank or comment-only line: no layout tokens.
            skip_to_eol();
            if (!at_end()) advance();  // consume '\n'
            return;
        }
        apply_indent(indent);
        bool saw_token = false;
        while (!at_end() && peek() != '\n') {
            if (peek() == '#') {
                skip_to_eol();
                break;
            }
            if (peek() == ' ') {
                advance();
                continue;
            }
            if (peek() == '\t') {
                throw Error(ErrorCode::Lex, "tab character is not allowed", here());
            }
            if (peek() == '\r') {
                advance();
                continue;
            }
            lex_token();
            saw_token = true;
        }
        const SourcePos eol = pos();
        if (!at_end()) advance();  // consume '\n'
        if (saw_token) emit_at(TokenKind::Newline, "", eol);
    }

    int consume_indent() {
        int width = 0;
        while (!at_end()) {
            const char c = peek();
            if (c == ' ') {
                ++width;
                advance();
            } else if (c == '\t') {
                throw Error(ErrorCode::Lex, "tab character in indentation (use spaces)", here());
            } else if (c == '\r') {
                advance();
            } else {
                break;
            }
        }
        return width;
    }

    void apply_indent(int width) {
        if (width > indent_stack_.back()) {
            indent_stack_.push_back(width);
            emit(TokenKind::Indent, "");
            return;
        }
        while (width < indent_stack_.back()) {
            indent_stack_.pop_back();
            emit(TokenKind::Dedent, "");
        }
        if (width != indent_stack_.back()) {
            throw Error(ErrorCode::Lex,
                        "inconsistent dedent: indentation does not match any enclosing block",
                        here());
        }
    }

    void lex_token() {
        const SourcePos start = pos();
        const char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            lex_word(start);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number(start);
        } else if (c == '"' || c == '\'') {
            lex_string(start);
        } else {
            lex_operator(start);
        }
    }

    void lex_word(SourcePos start) {
        std::string word;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
            word.push_back(peek());
            advance();
        }
        static const std::unordered_map<std::string, TokenKind> kKeywords = {
            {"def", TokenKind::KwDef},       {"class", TokenKind::KwClass},
            {"if", TokenKind::KwIf},         {"elif", TokenKind::KwElif},
            {"else", TokenKind::KwElse},     {"return", TokenKind::KwReturn},
            {"assert", TokenKind::KwAssert}, {"and", TokenKind::KwAnd},
            {"or", TokenKind::KwOr},         {"not", TokenKind::KwNot},
            {"for", TokenKind::KwFor},       {"in", TokenKind::KwIn},
            {"lambda", TokenKind::KwLambda}, {"True", TokenKind::KwTrue},
            {"False", TokenKind::KwFalse},   {"None", TokenKind::KwNone},
        };
        const auto it = kKeywords.find(word);
        emit_at(it == kKeywords.end() ? TokenKind::Ident : it->second, word, start);
    }

    void lex_number(SourcePos start) {
        std::string num;
        bool seen_dot = false;
        while (!at_end()) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                num.push_back(c);
                advance();
            } else if (c == '.' && !seen_dot && pos_ + 1 < src_.size() &&
                       std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                seen_dot = true;
                num.push_back(c);
                advance();
            } else {
                break;
            }
        }
        emit_at(TokenKind::Number, num, start);
    }

    void lex_string(SourcePos start) {
        const char quote = peek();
        advance();
        std::string value;
        while (true) {
            if (at_end() || peek() == '\n') {
                throw Error(ErrorCode::Lex, "unterminated string literal",
                            SourceSpan{start, pos()});
            }
            const char c = peek();
            advance();
            if (c == quote) break;
            value.push_back(c);
        }
        emit_at(TokenKind::String, value, start);
    }

    void lex_operator(SourcePos start) {
        const char c = peek();
        advance();
        const char next = at_end() ? '\0' : peek();
        switch (c) {
            case '+': emit_at(TokenKind::Plus, "+", start); return;
            case '-':
                if (next == '>') {
                    advance();
                    emit_at(TokenKind::Arrow, "->", start);
                } else {
                    emit_at(TokenKind::Minus, "-", start);
                }
                return;
            case '*': emit_at(TokenKind::Star, "*", start); return;
            case '/': emit_at(TokenKind::Slash, "/", start); return;
            case '<':
                if (next == '=') {
                    advance();
                    emit_at(TokenKind::Le, "<=", start);
                } else {
                    emit_at(TokenKind::Lt, "<", start);
                }
                return;
            case '>':
                if (next == '=') {
                    advance();
                    emit_at(TokenKind::Ge, ">=", start);
                } else {
                    emit_at(TokenKind::Gt, ">", start);
                }
                return;
            case '=':
                if (next == '=') {
                    advance();
                    emit_at(TokenKind::EqEq, "==", start);
                } else {
                    emit_at(TokenKind::Assign, "=", start);
                }
                return;
            case '!':
                if (next == '=') {
                    advance();
                    emit_at(TokenKind::NotEq, "!=", start);
                    return;
                }
                break;
            case '(': emit_at(TokenKind::LParen, "(", start); return;
            case ')': emit_at(TokenKind::RParen, ")", start); return;
            case ',': emit_at(TokenKind::Comma, ",", start); return;
            case ':': emit_at(TokenKind::Colon, ":", start); return;
            case '.': emit_at(TokenKind::Dot, ".", start); return;
            case ';': emit_at(TokenKind::Semicolon, ";", start); return;
            default: break;
        }
        throw Error(ErrorCode::Lex, std::string("illegal character '") + c + "'",
                    SourceSpan{start, pos()});
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_to_eol() {
        while (!at_end() && peek() != '\n') advance();
    }

    SourcePos pos() const { return {line_, col_}; }
    SourceSpan here() const { return {pos(), pos()}; }

    void emit(TokenKind kind, std::string lexeme) { emit_at(kind, std::move(lexeme), pos()); }

    void emit_at(TokenKind kind, std::string lexeme, SourcePos start) {
        tokens_.push_back(Token{kind, std::move(lexeme), SourceSpan{start, pos()}});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::vector<int> indent_stack_;
    TokenStream tokens_;
};

inline TokenStream tokenize(std::string_view source) { return Lexer::tokenize(source); }

}  // namespace versekit::dsl
