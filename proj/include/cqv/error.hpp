/// @file error.hpp
/// @brief Error kinds shared by every module.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cqv {

enum class ErrorKind {
    ParseError,
    IoError,
    ManifestError,
    MissingSection,
    TransportError,
    AuthError,
    BackendUnavailable,
    ExtractionFailure,
    QuerySyntaxError,
    UnsupportedFeature,
    MissingPrediction,
    EmptyInput,
    InfeasibleConstraints,
    EmptyStory,
    OddRecordCount,
    OutOfOrderResponse,
    DuplicateResponse,
    SessionExpired,
    WindowExpired,
    UnknownSession,
    InvalidResponse,
    OutOfRange,
    WrongItemCount,
    NoCountableAnswers,
    MissingSuggestion,
    TooFewPairs,
    DegenerateMargin,
    ZeroVariance,
    TooFewPoints,
    ZeroPooledVariance,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Base exception. `what()` carries the human message; `kind()` names the case.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Syntax error with a 1-based source position (line 0 when unknown).
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
        : Error(kind, format(message, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& message, std::size_t line, std::size_t column);

    std::size_t line_;
    std::size_t column_;
};

}  // namespace cqv
