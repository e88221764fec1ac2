/// @file judge.hpp
/// @brief Prompt construction, answer extraction and the per-record judging pipeline.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/backend.hpp"
#include "cqv/corpus.hpp"
#include "cqv/error.hpp"

namespace cqv {

/// One worked example shown to the model.
struct Exemplar {
    std::string story;
    std::string cq;
    std::string ontology_excerpt;
    BinaryLabel label = BinaryLabel::Yes;
    std::string query;
    bool partial = false;
    std::optional<std::string> source_record_id;  // set when drawn from a corpus record
};

struct PromptSpec {
    std::string task_description;
    std::vector<Exemplar> shots;
    std::string story;
    std::string cq;
    std::string ontology_text;
};

/// Plain-text template with the placeholders {task} {shots} {story} {cq} {ontology},
/// which must appear in that order.
class PromptTemplate {
public:
    explicit PromptTemplate(std::string text);

    static PromptTemplate builtin();
    static PromptTemplate load(const std::filesystem::path& path);

    const std::string& text() const { return text_; }
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    std::string text_;
};

std::string default_task_description();
std::vector<Exemplar> default_exemplars();
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);

/// Renders the prompt. Throws Error(MissingSection) when a component is empty
/// or the shots lack a Yes or a No example.
std::string build_prompt(const PromptSpec& spec, const PromptTemplate& tmpl = PromptTemplate::builtin());

struct Suggestion {
    BinaryLabel label = BinaryLabel::No;
    std::string sparql;  // empty when the completion carried no query block
    bool partial = false;
    std::string raw_completion;

    bool query_missing() const { return sparql.empty(); }
};

/// Inverse of extract_answer for well-formed completions.
std::string render_completion(const Suggestion& s);

/// Parses "Answer: Yes|No" (case-insensitive) plus the first fenced or
/// keyword-delimited SPARQL block. Throws Error(ExtractionFailure) without a label.
Suggestion extract_answer(const std::string& completion);

/// Transport of a prompt to the configured backend (cache + retries).
std::string request_judgment(const std::string& prompt, CompletionClient& client, int run_index = 1);

struct JudgeFailure {
    ErrorKind kind = ErrorKind::ExtractionFailure;
    std::string message;
    std::string raw_completion;
};

struct JudgeResult {
    std::string record_id;
    std::variant<Suggestion, JudgeFailure> outcome;
    std::chrono::nanoseconds latency{0};
    int run_index = 1;
    bool cache_hit = false;

    const Suggestion* suggestion() const { return std::get_if<Suggestion>(&outcome); }
    const JudgeFailure* failure() const { return std::get_if<JudgeFailure>(&outcome); }
};

struct JudgeContext {
    PromptTemplate prompt_template = PromptTemplate::builtin();
    std::string task_description = default_task_description();
    std::vector<Exemplar> shots = default_exemplars();
};

/// Prompt for one record (ontology serialized as Turtle).
std::string prompt_for(const CQRecord& record, const Corpus& corpus, const JudgeContext& ctx);

/// build_prompt -> request_judgment -> extract_answer. Never throws for
/// per-record failures; they are embedded in the result.
JudgeResult judge_record(const CQRecord& record, const Corpus& corpus, const JudgeContext& ctx,
                         CompletionClient& client, int run_index);

struct JudgeRunOptions {
    int runs = 1;
    unsigned jobs = 1;
    std::function<void(const JudgeResult&, std::size_t done, std::size_t total)> on_result;
    std::function<void(std::chrono::milliseconds)> sleeper;  // used for run spacing
};

struct JudgeRun {
    int run_index = 1;
    std::vector<JudgeResult> results;  // corpus order
};

struct JudgeBatch {
    std::vector<JudgeRun> runs;
    std::vector<std::string> excluded_shot_records;
};

/// Judges every record not used as a shot, `runs` times, with bounded parallelism.
JudgeBatch run_judge(const Corpus& corpus, const JudgeContext& ctx, CompletionClient& client,
                     const JudgeRunOptions& options);

nlohmann::json to_json(const Suggestion& s);
Suggestion suggestion_from_json(const nlohmann::json& j);

}  // namespace cqv
