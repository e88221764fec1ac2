#include "cqv/study.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv {

namespace fs = std::filesystem;
using nlohmann::json;
using std::chrono::milliseconds;

std::string to_string(Expertise e) { return e == Expertise::Expert ? "expert" : "non_expert"; }
std::string to_string(Condition c) { return c == Condition::Assisted ? "assisted" : "unassisted"; }
std::string to_string(ConditionOrder o) {
    return o == ConditionOrder::AssistedFirst ? "assisted_first" : "unassisted_first";
}
std::string to_string(Half h) { return h == Half::First ? "first" : "second"; }

std::string to_string(Answer a) {
    switch (a) {
        case Answer::Yes: return "yes";
        case Answer::No: return "no";
        case Answer::IDK: return "idk";
        case Answer::Skipped: return "skipped";
    }
    return "skipped";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void bad_value(const std::string& what, const std::string& value) {
    throw Error(ErrorKind::InvalidResponse, "invalid " + what + " '" + value + "'");
}

}  // namespace

Expertise parse_expertise(const std::string& s) {
    auto v = lower(s);
    if (v == "expert") return Expertise::Expert;
    if (v == "non_expert" || v == "nonexpert" || v == "non-expert") return Expertise::NonExpert;
    bad_value("expertise", s);
}

Condition parse_condition(const std::string& s) {
    auto v = lower(s);
    if (v == "assisted") return Condition::Assisted;
    if (v == "unassisted") return Condition::Unassisted;
    bad_value("condition", s);
}

ConditionOrder parse_condition_order(const std::string& s) {
    auto v = lower(s);
    if (v == "assisted_first") return ConditionOrder::AssistedFirst;
    if (v == "unassisted_first") return ConditionOrder::UnassistedFirst;
    bad_value("condition order", s);
}

Answer parse_answer(const std::string& s) {
    auto v = lower(s);
    if (v == "yes") return Answer::Yes;
    if (v == "no") return Answer::No;
    if (v == "idk") return Answer::IDK;
    if (v == "skipped" || v == "skip") return Answer::Skipped;
    bad_value("answer", s);
}

Half parse_half(const std::string& s) {
    auto v = lower(s);
    if (v == "first") return Half::First;
    if (v == "second") return Half::Second;
    bad_value("half", s);
}

std::size_t SessionPlan::first_block_size() const {
    if (tasks.empty()) return 0;
    std::size_t n = 1;
    while (n < tasks.size() && tasks[n].condition == tasks.front().condition) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Assignment

std::vector<SessionPlan> build_assignment(const std::vector<Participant>& participants,
                                          const std::vector<std::string>& records, std::uint64_t seed,
                                          milliseconds per_condition_limit) {
    if (records.size() % 2 != 0) {
        throw Error(ErrorKind::OddRecordCount,
                    "record count must be even to split evenly across conditions, got " + std::to_string(records.size()));
    }
    if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no records to assign");
    if (participants.empty()) throw Error(ErrorKind::InvalidArgument, "no participants");
    if (std::set<std::string>(records.begin(), records.end()).size() != records.size()) {
        throw Error(ErrorKind::InvalidArgument, "record ids must be distinct");
    }
    if (per_condition_limit <= milliseconds::zero()) {
        throw Error(ErrorKind::InvalidArgument, "per-condition limit must be positive");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::string> shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t half = shuffled.size() / 2;
    const std::vector<std::string> a(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<std::string> b(shuffled.begin() + static_cast<std::ptrdiff_t>(half), shuffled.end());

    std::vector<SessionPlan> plans;
    for (std::size_t i = 0; i < participants.size(); ++i) {
        const std::size_t pattern = i % 4;
        const bool a_assisted = pattern == 0 || pattern == 3;
        SessionPlan p;
        p.participant_id = participants[i].id;
        p.expertise = participants[i].expertise;
        p.order = (pattern == 0 || pattern == 2) ? ConditionOrder::AssistedFirst : ConditionOrder::UnassistedFirst;
        p.per_condition_limit = per_condition_limit;

        std::vector<std::string> assisted = a_assisted ? a : b;
        std::vector<std::string> unassisted = a_assisted ? b : a;
        std::mt19937_64 local(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
        std::shuffle(assisted.begin(), assisted.end(), local);
        std::shuffle(unassisted.begin(), unassisted.end(), local);

        auto push = [&](const std::vector<std::string>& ids, Condition c) {
            for (const auto& id : ids) p.tasks.push_back({id, c});
        };
        if (p.order == ConditionOrder::AssistedFirst) {
            push(assisted, Condition::Assisted);
            push(unassisted, Condition::Unassisted);
        } else {
            push(unassisted, Condition::Unassisted);
            push(assisted, Condition::Assisted);
        }
        plans.push_back(std::move(p));
    }
    return plans;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const SessionPlan& p) {
    json tasks = json::array();
    for (const auto& t : p.tasks) tasks.push_back({{"record_id", t.record_id}, {"condition", to_string(t.condition)}});
    return {{"participant_id", p.participant_id},
            {"expertise", to_string(p.expertise)},
            {"condition_order", to_string(p.order)},
            {"per_condition_limit_ms", p.per_condition_limit.count()},
            {"tasks", tasks}};
}

SessionPlan plan_from_json(const json& j) {
    try {
        SessionPlan p;
        p.participant_id = j.at("participant_id").get<std::string>();
        p.expertise = parse_expertise(j.value("expertise", "non_expert"));
        p.order = parse_condition_order(j.at("condition_order").get<std::string>());
        p.per_condition_limit = milliseconds(j.value("per_condition_limit_ms", kDefaultWindow.count()));
        for (const auto& t : j.at("tasks")) {
            p.tasks.push_back({t.at("record_id").get<std::string>(), parse_condition(t.at("condition").get<std::string>())});
        }
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("session plan: ") + e.what());
    }
}

json to_json(const TaskResponse& r) {
    json j = {{"participant_id", r.participant_id},
              {"record_id", r.record_id},
              {"condition", to_string(r.condition)},
              {"answer", to_string(r.answer)},
              {"elapsed_ms", r.elapsed.count()},
              {"half", to_string(r.half)},
              {"task_index", r.task_index},
              {"expertise", to_string(r.expertise)},
              {"condition_order", to_string(r.order)},
              {"auto_skipped", r.auto_skipped}};
    j["difficulty"] = r.difficulty ? json(*r.difficulty) : json(nullptr);
    return j;
}

TaskResponse response_from_json(const json& j) {
    try {
        TaskResponse r;
        r.participant_id = j.at("participant_id").get<std::string>();
        r.record_id = j.at("record_id").get<std::string>();
        r.condition = parse_condition(j.at("condition").get<std::string>());
        r.answer = parse_answer(j.at("answer").get<std::string>());
        if (j.contains("difficulty") && !j.at("difficulty").is_null()) r.difficulty = j.at("difficulty").get<int>();
        r.elapsed = milliseconds(j.at("elapsed_ms").get<std::int64_t>());
        r.half = parse_half(j.at("half").get<std::string>());
        r.task_index = j.value("task_index", std::size_t{0});
        r.expertise = parse_expertise(j.value("expertise", "non_expert"));
        r.order = parse_condition_order(j.value("condition_order", "assisted_first"));
        r.auto_skipped = j.value("auto_skipped", false);
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("response event: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// SUS

double compute_sus(const std::vector<int>& items) {
    if (items.size() != 10) {
        throw Error(ErrorKind::WrongItemCount, "SUS needs exactly 10 items, got " + std::to_string(items.size()));
    }
    int sum = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        int x = items[i];
        if (x < 1 || x > 5) {
            throw Error(ErrorKind::OutOfRange, "SUS item " + std::to_string(i + 1) + " must be in 1..5, got " + std::to_string(x));
        }
        sum += (i % 2 == 0) ? x - 1 : 5 - x;  // item 1 is at index 0
    }
    return sum * 2.5;
}

const std::vector<std::string>& sus_items() {
    static const std::vector<std::string> items = {
        "I think that I would like to use this system frequently.",
        "I found the system unnecessarily complex.",
        "I thought the system was easy to use.",
        "I think that I would need the support of a technical person to be able to use this system.",
        "I found the various functions in this system were well integrated.",
        "I thought there was too much inconsistency in this system.",
        "I would imagine that most people would learn to use this system very quickly.",
        "I found the system very cumbersome to use.",
        "I felt very confident using the system.",
        "I needed to learn a lot of things before I could get going with this system.",
    };
    return items;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionPlan plan, std::string token, Clock clock)
    : plan_(std::move(plan)), token_(std::move(token)), clock_(std::move(clock)) {
    if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
    if (plan_.tasks.empty()) throw Error(ErrorKind::InvalidArgument, "session plan has no tasks");
    std::set<std::string> seen;
    for (const auto& t : plan_.tasks) {
        if (!seen.insert(t.record_id).second) {
            throw Error(ErrorKind::InvalidArgument, "record '" + t.record_id + "' appears twice in the plan");
        }
    }
}

std::size_t Session::block_end(std::size_t index) const {
    std::size_t first = plan_.first_block_size();
    return index < first ? first : plan_.tasks.size();
}

TaskResponse Session::make_response(std::size_t index, Answer a, std::optional<int> difficulty, milliseconds elapsed,
                                    bool automatic) const {
    TaskResponse r;
    r.participant_id = plan_.participant_id;
    r.record_id = plan_.tasks[index].record_id;
    r.condition = plan_.tasks[index].condition;
    r.answer = a;
    r.difficulty = difficulty;
    r.elapsed = elapsed;
    r.half = index < plan_.tasks.size() / 2 ? Half::First : Half::Second;
    r.task_index = index;
    r.expertise = plan_.expertise;
    r.order = plan_.order;
    r.auto_skipped = automatic;
    return r;
}

void Session::start_if_needed() {
    if (!block_start_) block_start_ = clock_();
}

void Session::apply_expiry() {
    if (!block_start_) return;
    const auto now = clock_();
    while (!complete()) {
        const auto deadline = *block_start_ + plan_.per_condition_limit;
        if (now < deadline) return;
        const std::size_t end = block_end(responses_.size());
        for (std::size_t i = responses_.size(); i < end; ++i) {
            responses_.push_back(make_response(i, Answer::Skipped, std::nullopt, plan_.per_condition_limit, true));
        }
        block_start_ = deadline;  // the next condition's window opens at expiry
    }
}

TaskView Session::view() const {
    TaskView v;
    v.total = plan_.tasks.size();
    v.index = responses_.size();
    if (complete() || closed_) {
        v.done = true;
        v.survey_pending = complete() && !survey_;
        return v;
    }
    v.record_id = plan_.tasks[v.index].record_id;
    v.condition = plan_.tasks[v.index].condition;
    auto used = std::chrono::duration_cast<milliseconds>(clock_() - *block_start_);
    v.remaining = std::max(milliseconds::zero(), plan_.per_condition_limit - used);
    return v;
}

TaskView Session::next_task() {
    if (!closed_) {
        start_if_needed();
        apply_expiry();
    }
    return view();
}

TaskView Session::submit(const std::string& record_id, Answer answer, std::optional<int> difficulty) {
    if (answer == Answer::Skipped) {
        if (difficulty) throw Error(ErrorKind::InvalidResponse, "a skipped task carries no difficulty rating");
    } else {
        if (!difficulty) throw Error(ErrorKind::InvalidResponse, "answer '" + to_string(answer) + "' needs a difficulty rating");
        if (*difficulty < 1 || *difficulty > 5) {
            throw Error(ErrorKind::InvalidResponse, "difficulty must be in 1..5, got " + std::to_string(*difficulty));
        }
    }
    if (closed_) throw Error(ErrorKind::SessionExpired, "session is closed");
    start_if_needed();
    apply_expiry();

    auto it = std::find_if(plan_.tasks.begin(), plan_.tasks.end(),
                           [&](const PlannedTask& t) { return t.record_id == record_id; });
    if (it == plan_.tasks.end()) throw Error(ErrorKind::InvalidResponse, "record '" + record_id + "' is not in this session");
    const auto index = static_cast<std::size_t>(it - plan_.tasks.begin());
    if (index < responses_.size()) {
        if (responses_[index].auto_skipped) {
            throw Error(ErrorKind::WindowExpired,
                        "the time window for record '" + record_id + "' has closed; it was recorded as skipped");
        }
        throw Error(ErrorKind::DuplicateResponse, "record '" + record_id + "' already has a response");
    }
    if (complete()) throw Error(ErrorKind::SessionExpired, "all tasks of this session are recorded");
    if (index != responses_.size()) {
        throw Error(ErrorKind::OutOfOrderResponse, "expected a response for record '" + plan_.tasks[responses_.size()].record_id +
                                                       "', got '" + record_id + "'");
    }
    const auto now = clock_();
    auto elapsed = std::chrono::duration_cast<milliseconds>(now - *block_start_);
    responses_.push_back(make_response(index, answer, difficulty, elapsed, false));
    if (responses_.size() == plan_.first_block_size() && !complete()) block_start_ = now;
    return view();
}

SUSResponse Session::submit_survey(const std::vector<int>& items) {
    if (survey_) throw Error(ErrorKind::DuplicateResponse, "survey already submitted");
    if (!closed_) apply_expiry();
    if (!complete()) throw Error(ErrorKind::InvalidResponse, "survey is available after the last task");
    SUSResponse s{plan_.participant_id, items, compute_sus(items)};
    survey_ = s;
    return s;
}

std::vector<TaskResponse> Session::drain_new() {
    std::vector<TaskResponse> out(responses_.begin() + static_cast<std::ptrdiff_t>(drained_), responses_.end());
    drained_ = responses_.size();
    return out;
}

// ---------------------------------------------------------------------------
// Event log

EventLog::EventLog(fs::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error(ErrorKind::IoError, "cannot open event log " + path_.string());
}

void EventLog::append(const json& event) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot append to event log " + path_.string());
    out << event.dump() << '\n';
    out.flush();
}

std::string EventLog::text() const {
    std::lock_guard lock(mutex_);
    std::ifstream in(path_, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<json> parse_events(const std::string& jsonl) {
    std::vector<json> out;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(ErrorKind::ParseError, std::string("event log: ") + e.what(), n, 0);
        }
    }
    return out;
}

std::vector<json> read_events(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read event log " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_events(buf.str());
}

std::vector<TaskResponse> responses_from_events(const std::vector<json>& events) {
    std::vector<TaskResponse> out;
    for (const auto& e : events) {
        if (e.value("type", "") == "response") out.push_back(response_from_json(e.at("response")));
    }
    return out;
}

std::vector<SUSResponse> surveys_from_events(const std::vector<json>& events) {
    std::vector<SUSResponse> out;
    for (const auto& e : events) {
        if (e.value("type", "") != "survey") continue;
        out.push_back({e.at("participant_id").get<std::string>(), e.at("items").get<std::vector<int>>(),
                       e.at("score").get<double>()});
    }
    return out;
}

}  // namespace cqv
