/// @file verify.hpp
/// @brief Pre-checks for suggested queries: parse, vocabulary grounding, optional execution.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/corpus.hpp"
#include "cqv/judge.hpp"
#include "cqv/sparql.hpp"

namespace cqv {

enum class GroundingVerdict { FullyGrounded, PartiallyGrounded, Ungrounded };

std::string to_string(GroundingVerdict v);

struct GroundingReport {
    std::set<std::string> grounded;
    std::set<std::string> ungrounded;
    GroundingVerdict verdict = GroundingVerdict::FullyGrounded;
};

/// Only non-standard IRIs are in scope. An IRI is grounded when the ontology
/// declares it or it is the subject or object of some rdf:type triple.
GroundingReport ground_vocabulary(const sparql::ParsedQuery& q, const Ontology& o);

struct VerificationVerdict {
    bool parse_ok = false;
    std::string error;                  // parse failure message
    std::vector<std::string> warnings;  // skipped unsupported constructs
    std::optional<GroundingReport> grounding;
    std::optional<bool> executed;
    std::optional<bool> execution_nonempty;
    bool filters_ignored = false;
};

struct VerifyOptions {
    bool execute = false;
};

/// Never throws: parse errors land in `error` with parse_ok false. Warnings
/// from lenient parsing downgrade FullyGrounded to PartiallyGrounded.
VerificationVerdict verify_suggestion(const Suggestion& s, const Ontology& o, const VerifyOptions& options = {});
VerificationVerdict verify_query(const std::string& query_text, const Ontology& o, const VerifyOptions& options = {});

nlohmann::json to_json(const GroundingReport& g);
nlohmann::json to_json(const VerificationVerdict& v);
VerificationVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace cqv
