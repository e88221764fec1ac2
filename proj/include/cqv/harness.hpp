/// @file harness.hpp
/// @brief Scoring of judge runs against gold labels: macro-F1, accuracy,
/// breakdowns, multi-run aggregation and the uniform-random baseline.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/corpus.hpp"
#include "cqv/judge.hpp"

namespace cqv {

/// One judged record. A prediction without a label is a Failure.
struct Prediction {
    std::string record_id;
    std::optional<BinaryLabel> label;
    std::string failure;  // "<ErrorKind>: message" for failures
    int run_index = 1;

    bool is_failure() const { return !label.has_value(); }
};

std::vector<Prediction> predictions_from(const JudgeRun& run);

/// JSON Lines, one `{"record_id", "run", "label"}` or `{"record_id", "run", "failure"}` per line.
void write_run_file(const std::filesystem::path& path, const std::vector<Prediction>& preds);
std::vector<Prediction> read_run_file(const std::filesystem::path& path);
std::string run_file_text(const std::vector<Prediction>& preds);

/// Index 0 is Yes, index 1 is No; rows are gold, columns predicted.
using Confusion = std::array<std::array<std::size_t, 2>, 2>;

struct GroupScore {
    std::size_t n = 0;
    double macro_f1 = 0;
    double accuracy = 0;
};

struct MetricsReport {
    std::size_t n = 0;
    double accuracy = 0;
    double macro_f1 = 0;
    double f1_yes = 0;
    double f1_no = 0;
    Confusion confusion{};
    std::size_t failures = 0;
    std::map<std::string, GroupScore> breakdowns;  // by source: "human", "llm"
};

/// Metrics from a filled confusion matrix (per-class F1 is 0 when P+R = 0).
MetricsReport metrics_from_confusion(const Confusion& c);

/// Failure predictions count as wrong: they land off the diagonal of the gold row.
MetricsReport score_labels(const std::vector<BinaryLabel>& gold, const std::vector<std::optional<BinaryLabel>>& predicted);

/// Scores one run over every record of the corpus. Throws
/// Error(MissingPrediction) if a record has no prediction and
/// Error(InvalidArgument) on duplicates or unknown record ids.
MetricsReport score_run(const std::vector<Prediction>& preds, const Corpus& corpus);

enum class Grouping { Source, Project };

/// Each non-empty group scored independently.
std::map<std::string, MetricsReport> breakdown(const std::vector<Prediction>& preds, const Corpus& corpus,
                                               Grouping grouping);

struct MeanStd {
    double mean = 0;
    std::optional<double> std;  // sample std; absent for a single run
};

struct Aggregate {
    std::size_t runs = 0;
    std::map<std::string, MeanStd> metrics;  // "accuracy", "macro_f1", "f1_yes", "f1_no", "<group>.accuracy", ...
};

/// Throws Error(EmptyInput) for an empty list.
Aggregate aggregate_runs(const std::vector<MetricsReport>& reports);

/// Splits a multi-run prediction list by run index (ascending).
std::map<int, std::vector<Prediction>> split_runs(const std::vector<Prediction>& preds);

/// "0.72 ± 0.02", or "0.72" when the std is absent.
std::string format_mean_std(const MeanStd& m);

struct ExpectedScores {
    double accuracy = 0;
    double f1_yes = 0;
    double f1_no = 0;
    double macro_f1 = 0;
};

struct BaselineReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    ExpectedScores closed_form;
    ExpectedScores monte_carlo;
};

/// Uniform random Yes/No predictions. Closed form uses F1 = p / (p + 0.5) per class.
BaselineReport random_baseline(const std::vector<BinaryLabel>& gold, std::size_t trials, std::uint64_t seed);
BaselineReport random_baseline(const Corpus& corpus, std::size_t trials, std::uint64_t seed);

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const Aggregate& a);
nlohmann::json to_json(const BaselineReport& b);

struct TableRow {
    std::string name;
    Aggregate aggregate;
};

/// Text table with Macro-F1 and Accuracy for human-curated, LLM-generated and all records.
std::string render_table(const std::vector<TableRow>& rows);
std::string render_baseline(const BaselineReport& b);

}  // namespace cqv
