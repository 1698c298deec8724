#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace versekit {

// Source location inside a decision-logic file. Lines and columns are 1-based.
struct SourcePos {
    int line = 0;
    int column = 0;
};

struct SourceSpan {
    SourcePos begin;
    SourcePos end;

    std::string to_string() const {
        return std::to_string(begin.line) + ":" + std::to_string(begin.column);
    }
};

// Error categories surfaced by the CLI as machine-parseable prefixes.
enum class ErrorCode {
    Lex,
    Parse,
    Check,
    Extract,
    Eval,
    Map,
    Scenario,
    Flow,
    Engine,
    Config,
    Io,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Lex: return "E_LEX";
        case ErrorCode::Parse: return "E_PARSE";
        case ErrorCode::Check: return "E_CHECK";
        case ErrorCode::Extract: return "E_EXTRACT";
        case ErrorCode::Eval: return "E_EVAL";
        case ErrorCode::Map: return "E_MAP";
        case ErrorCode::Scenario: return "E_SCENARIO";
        case ErrorCode::Flow: return "E_FLOW";
        case ErrorCode::Engine: return "E_ENGINE";
        case ErrorCode::Config: return "E_CONFIG";
        case ErrorCode::Io: return "E_IO";
    }
    return "E_UNKNOWN";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Error(ErrorCode code, std::string message, SourceSpan span)
        : std::runtime_error(span.to_string() + ": " + message), code_(code), span_(span) {}

    ErrorCode code() const { return code_; }
    const std::optional<SourceSpan>& span() const { return span_; }

    // Single-line form used on stderr: "E_PARSE: 3:7: unexpected token".
    std::string formatted() const {
        return std::string(error_code_name(code_)) + ": " + what();
    }

  private:
    ErrorCode code_;
    std::optional<SourceSpan> span_;
};

}  // namespace versekit
