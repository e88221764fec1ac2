/// @file analysis.hpp
/// @brief Study statistics: per-user accuracy, condition deltas, paired t,
/// 2x2 chi-square, Pearson r, Cohen's d and the learning-curve table.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/corpus.hpp"
#include "cqv/study.hpp"

namespace cqv {

using GoldMap = std::map<std::string, BinaryLabel>;

/// Normalized gold label per record id.
GoldMap gold_map(const Corpus& corpus);

struct UserConditionAccuracy {
    std::size_t correct = 0;
    std::size_t incorrect = 0;
    std::size_t idk = 0;
    std::size_t skipped = 0;
    std::optional<double> accuracy;  // absent when correct + incorrect == 0
};

struct AccuracySummary {
    std::map<std::pair<std::string, Condition>, UserConditionAccuracy> per_user;
    std::map<Condition, double> condition_means;
    std::map<Condition, std::optional<double>> condition_stds;  // sample std, absent for one user
    std::optional<double> delta;                                 // assisted mean - unassisted mean
    std::size_t n_users = 0;
    /// (participant, condition) pairs with no countable answers (NoCountableAnswers).
    std::vector<std::pair<std::string, Condition>> flagged;
};

/// IDK and Skipped are excluded from numerator and denominator. Throws
/// Error(InvalidArgument) for responses naming records absent from `gold`.
AccuracySummary user_accuracy(const std::vector<TaskResponse>& responses, const GoldMap& gold);

struct SuggestionSplit {
    std::vector<TaskResponse> correct;    // records whose suggestion matched gold
    std::vector<TaskResponse> incorrect;  // records whose suggestion did not
};

/// Partitions Assisted responses by suggestion correctness and carries the
/// Unassisted responses for the same records along. Throws Error(MissingSuggestion).
SuggestionSplit split_by_suggestion_correctness(const std::vector<TaskResponse>& responses,
                                                const std::map<std::string, BinaryLabel>& suggestion_labels,
                                                const GoldMap& gold);

struct StatTestResult {
    double statistic = 0;
    double p_value = 1;
    std::optional<double> effect_size;
    std::optional<double> df;
    bool degenerate = false;  // p forced by zero variance of the differences
};

/// Two-tailed paired t-test. Throws Error(TooFewPairs) for fewer than 2 pairs.
StatTestResult paired_t_test(const std::vector<std::pair<double, double>>& pairs);

using Table2x2 = std::array<std::array<double, 2>, 2>;

/// Pearson chi-square test of independence, df 1; effect size is phi.
/// Throws Error(DegenerateMargin) when a row or column total is zero.
StatTestResult chi_square_2x2(const Table2x2& table, bool continuity_correction = false);

/// Statistic is r; p from t = r sqrt((n-2)/(1-r^2)) with n-2 df.
/// Throws Error(TooFewPoints) for n < 3 and Error(ZeroVariance).
StatTestResult pearson_r(const std::vector<double>& xs, const std::vector<double>& ys);

/// (mean_a - mean_b) / pooled sample std. Throws Error(TooFewPoints) or Error(ZeroPooledVariance).
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

struct CurveRow {
    ConditionOrder order = ConditionOrder::AssistedFirst;
    std::optional<Expertise> expertise;  // absent: all participants
    Condition first_condition = Condition::Assisted;
    Condition second_condition = Condition::Unassisted;
    std::size_t users = 0;
    std::optional<double> first_accuracy;   // mean per-user accuracy in the first half
    std::optional<double> second_accuracy;  // same for the second half
    std::optional<double> delta;            // second - first
    std::optional<StatTestResult> paired;   // users with both halves, if >= 2 and computable
};

/// First-half vs second-half accuracy per (condition order, expertise);
/// empty strata are omitted.
std::vector<CurveRow> learning_curve(const std::vector<TaskResponse>& responses, const GoldMap& gold);

/// "+13% (from 70.46% to 83.18%)": signed percentage-point change, then both values.
std::string format_delta(double from, double to);

struct ReportInputs {
    std::vector<TaskResponse> responses;
    std::vector<SUSResponse> surveys;
    const Corpus* corpus = nullptr;
    std::optional<std::map<std::string, BinaryLabel>> suggestion_labels;
};

/// Full study report as JSON (accuracy, deltas, tests, difficulty, learning curve, SUS).
nlohmann::json build_report(const ReportInputs& in);

/// Text summary of a report produced by build_report.
std::string render_report(const nlohmann::json& report);

nlohmann::json to_json(const StatTestResult& r);
nlohmann::json to_json(const AccuracySummary& s);

}  // namespace cqv
