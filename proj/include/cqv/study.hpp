/// @file study.hpp
/// @brief Counterbalanced study sessions: assignment planning, timed task
/// windows with auto-skip, response capture, SUS scoring and the event log.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cqv {

enum class Expertise { Expert, NonExpert };
enum class Condition { Assisted, Unassisted };
enum class ConditionOrder { AssistedFirst, UnassistedFirst };
enum class Answer { Yes, No, IDK, Skipped };
enum class Half { First, Second };

std::string to_string(Expertise e);
std::string to_string(Condition c);
std::string to_string(ConditionOrder o);
std::string to_string(Answer a);
std::string to_string(Half h);
Expertise parse_expertise(const std::string& s);
Condition parse_condition(const std::string& s);
ConditionOrder parse_condition_order(const std::string& s);
Answer parse_answer(const std::string& s);
Half parse_half(const std::string& s);

struct Participant {
    std::string id;
    Expertise expertise = Expertise::NonExpert;
};

struct PlannedTask {
    std::string record_id;
    Condition condition = Condition::Assisted;

    bool operator==(const PlannedTask&) const = default;
};

inline constexpr std::chrono::milliseconds kDefaultWindow = std::chrono::minutes(20);

struct SessionPlan {
    std::string participant_id;
    Expertise expertise = Expertise::NonExpert;
    std::vector<PlannedTask> tasks;  // first condition's tasks precede the second's
    ConditionOrder order = ConditionOrder::AssistedFirst;
    std::chrono::milliseconds per_condition_limit = kDefaultWindow;

    bool operator==(const SessionPlan&) const = default;

    /// Number of tasks in the first condition block.
    std::size_t first_block_size() const;
};

/// Seeded split of the records into halves A and B; participant i follows
/// pattern i mod 4 (A assisted/AssistedFirst, B assisted/UnassistedFirst,
/// B assisted/AssistedFirst, A assisted/UnassistedFirst). Throws
/// Error(OddRecordCount) and Error(InvalidArgument) for no participants or
/// repeated record ids.
std::vector<SessionPlan> build_assignment(const std::vector<Participant>& participants,
                                          const std::vector<std::string>& records, std::uint64_t seed,
                                          std::chrono::milliseconds per_condition_limit = kDefaultWindow);

struct TaskResponse {
    std::string participant_id;
    std::string record_id;
    Condition condition = Condition::Assisted;
    Answer answer = Answer::Skipped;
    std::optional<int> difficulty;  // 1..5, absent iff Skipped
    std::chrono::milliseconds elapsed{0};
    Half half = Half::First;
    // Annotations used by the analysis.
    std::size_t task_index = 0;
    Expertise expertise = Expertise::NonExpert;
    ConditionOrder order = ConditionOrder::AssistedFirst;
    bool auto_skipped = false;

    bool operator==(const TaskResponse&) const = default;
};

nlohmann::json to_json(const SessionPlan& p);
SessionPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TaskResponse& r);
TaskResponse response_from_json(const nlohmann::json& j);

/// Standard SUS: odd items (x-1), even items (5-x), sum times 2.5.
/// Throws Error(WrongItemCount) or Error(OutOfRange).
double compute_sus(const std::vector<int>& items);

struct SUSResponse {
    std::string participant_id;
    std::vector<int> items;
    double score = 0;
};

/// The ten statements shown on the survey screen.
const std::vector<std::string>& sus_items();

using Clock = std::function<std::chrono::steady_clock::time_point()>;

struct TaskView {
    bool done = false;
    std::size_t index = 0;  // position of the current task
    std::size_t total = 0;
    std::string record_id;
    Condition condition = Condition::Assisted;
    std::chrono::milliseconds remaining{0};
    bool survey_pending = false;
};

/// One participant's run through a plan. Not thread-safe; the service
/// serializes access per session.
class Session {
public:
    Session(SessionPlan plan, std::string token, Clock clock = {});

    const SessionPlan& plan() const { return plan_; }
    const std::string& token() const { return token_; }

    /// Starts the clock on first use; applies window expiry.
    TaskView next_task();

    /// Records an answer for the current task. Throws Error with kind
    /// InvalidResponse, OutOfOrderResponse, DuplicateResponse, WindowExpired or SessionExpired.
    TaskView submit(const std::string& record_id, Answer answer, std::optional<int> difficulty);

    /// Allowed once, after every task is recorded.
    SUSResponse submit_survey(const std::vector<int>& items);

    bool complete() const { return responses_.size() == plan_.tasks.size(); }
    bool survey_done() const { return survey_.has_value(); }
    void close() { closed_ = true; }

    const std::vector<TaskResponse>& responses() const { return responses_; }
    const std::optional<SUSResponse>& survey() const { return survey_; }

    /// Responses recorded since the previous call (for event logging).
    std::vector<TaskResponse> drain_new();

private:
    void start_if_needed();
    void apply_expiry();
    std::size_t block_end(std::size_t index) const;
    TaskView view() const;
    TaskResponse make_response(std::size_t index, Answer a, std::optional<int> difficulty,
                               std::chrono::milliseconds elapsed, bool automatic) const;

    SessionPlan plan_;
    std::string token_;
    Clock clock_;
    std::optional<std::chrono::steady_clock::time_point> block_start_;
    std::vector<TaskResponse> responses_;
    std::size_t drained_ = 0;
    std::optional<SUSResponse> survey_;
    bool closed_ = false;
};

/// Append-only JSON Lines log; appends are serialized across threads.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);

    void append(const nlohmann::json& event);
    std::string text() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
};

std::vector<nlohmann::json> parse_events(const std::string& jsonl);
std::vector<nlohmann::json> read_events(const std::filesystem::path& path);
std::vector<TaskResponse> responses_from_events(const std::vector<nlohmann::json>& events);
std::vector<SUSResponse> surveys_from_events(const std::vector<nlohmann::json>& events);

}  // namespace cqv
