/// @file sampler.hpp
/// @brief Balanced small-subset construction under hard filters and soft
/// targets, plus one-line story condensation.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/backend.hpp"
#include "cqv/corpus.hpp"
#include "cqv/harness.hpp"

namespace cqv {

struct SoftWeights {
    double source = 1;
    double modelled = 1;
    double correctness = 1;
    double diversity = 1;
};

struct SamplingConstraints {
    std::size_t target_size = 20;
    bool exclude_no_minor = true;
    bool complex_only = true;
    std::size_t max_per_project = 3;
    std::size_t balance_source = 0;
    std::size_t balance_modelled = 0;
    /// Target fractions keyed "correct" / "incorrect"; needs a prior run.
    std::optional<std::map<std::string, double>> llm_correctness_profile;
    std::uint64_t seed = 0;
    std::size_t restarts = 16;
    SoftWeights weights;
};

/// Throws Error(InvalidArgument) when an invariant is violated.
void validate(const SamplingConstraints& c);

SamplingConstraints constraints_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SamplingConstraints& c);

struct SampleResult {
    Corpus corpus;                         // selected records, corpus order
    double score = 0;                      // weighted soft violation, 0 is perfect
    std::map<std::string, double> terms;   // unweighted per-term violation
};

/// Hard filters first (each may raise Error(InfeasibleConstraints) naming
/// itself), then seeded restarts with swap improvement; the best score wins.
SampleResult sample_small(const Corpus& corpus, const SamplingConstraints& c,
                          const std::vector<Prediction>* prior_run = nullptr);

/// Few-shot summarization through the completion client. The output has no
/// line breaks and at most 300 characters. Throws Error(EmptyStory).
std::string condense_story(const std::string& story, CompletionClient& client);

/// Fills `story_oneline` on every record lacking one (one request per distinct story).
void condense_corpus(Corpus& corpus, CompletionClient& client);

/// Normalizes a raw completion to a single line of at most `max_chars` characters.
std::string single_line(const std::string& text, std::size_t max_chars = 300);

}  // namespace cqv
