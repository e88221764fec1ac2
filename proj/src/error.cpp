#include "cqv/error.hpp"

namespace cqv {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ManifestError: return "ManifestError";
        case ErrorKind::MissingSection: return "MissingSection";
        case ErrorKind::TransportError: return "TransportError";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::ExtractionFailure: return "ExtractionFailure";
        case ErrorKind::QuerySyntaxError: return "QuerySyntaxError";
        case ErrorKind::UnsupportedFeature: return "UnsupportedFeature";
        case ErrorKind::MissingPrediction: return "MissingPrediction";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::InfeasibleConstraints: return "InfeasibleConstraints";
        case ErrorKind::EmptyStory: return "EmptyStory";
        case ErrorKind::OddRecordCount: return "OddRecordCount";
        case ErrorKind::OutOfOrderResponse: return "OutOfOrderResponse";
        case ErrorKind::DuplicateResponse: return "DuplicateResponse";
        case ErrorKind::SessionExpired: return "SessionExpired";
        case ErrorKind::WindowExpired: return "WindowExpired";
        case ErrorKind::UnknownSession: return "UnknownSession";
        case ErrorKind::InvalidResponse: return "InvalidResponse";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::WrongItemCount: return "WrongItemCount";
        case ErrorKind::NoCountableAnswers: return "NoCountableAnswers";
        case ErrorKind::MissingSuggestion: return "MissingSuggestion";
        case ErrorKind::TooFewPairs: return "TooFewPairs";
        case ErrorKind::DegenerateMargin: return "DegenerateMargin";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::ZeroPooledVariance: return "ZeroPooledVariance";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

std::string ParseError::format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

}  // namespace cqv
