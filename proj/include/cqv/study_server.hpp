/// @file study_server.hpp
/// @brief Study bundles, the session service behind the HTTP API, and the server.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/corpus.hpp"
#include "cqv/judge.hpp"
#include "cqv/study.hpp"
#include "cqv/verify.hpp"

namespace cqv {

/// Frozen suggestion shown in Assisted tasks.
struct SuggestionCard {
    std::string record_id;
    Suggestion suggestion;
    VerificationVerdict verification;
};

nlohmann::json to_json(const SuggestionCard& c);
SuggestionCard card_from_json(const nlohmann::json& j);

/// Verifies each suggestion against its record's ontology. Throws
/// Error(MissingSuggestion) for a record without one.
std::map<std::string, SuggestionCard> make_cards(const Corpus& corpus, const std::map<std::string, Suggestion>& suggestions,
                                                 const VerifyOptions& options = {.execute = true});

/// Everything a study needs, frozen before any session starts.
struct StudyBundle {
    std::filesystem::path dir;
    Corpus corpus;
    std::map<std::string, SuggestionCard> cards;
    std::vector<SessionPlan> plans;
};

/// Writes manifest.json (ontologies copied under ontologies/), suggestions.json and plans.json.
void write_bundle(const std::filesystem::path& dir, const Corpus& corpus,
                  const std::map<std::string, SuggestionCard>& cards, const std::vector<SessionPlan>& plans);

/// Throws Error(MissingSuggestion) when a planned record lacks a card and
/// Error(ManifestError) when a plan names an unknown record.
StudyBundle load_bundle(const std::filesystem::path& dir);

struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Session bookkeeping behind the HTTP API. Each session's transitions are
/// serialized by its own mutex; the event log is append-serialized.
class StudyService {
public:
    StudyService(StudyBundle bundle, std::filesystem::path event_log, Clock clock = {});

    /// Body: {"participant_id": "..."} to use the bundle's plan, or {"plan": {...}}.
    std::string create_session(const nlohmann::json& body);
    nlohmann::json task(const std::string& token);
    nlohmann::json respond(const std::string& token, const nlohmann::json& body);
    nlohmann::json survey(const std::string& token);
    nlohmann::json submit_survey(const std::string& token, const nlohmann::json& body);
    std::string export_events() const { return log_.text(); }

    /// Routes one request; domain errors become JSON error replies.
    HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

    const StudyBundle& bundle() const { return bundle_; }
    std::vector<TaskResponse> responses(const std::string& token);

private:
    struct Entry {
        std::mutex mutex;
        std::unique_ptr<Session> session;
    };

    Entry& entry(const std::string& token);
    nlohmann::json view_json(const Session& s, const TaskView& v) const;
    void log_new(Session& s);
    std::string new_token();

    StudyBundle bundle_;
    EventLog log_;
    Clock clock_;
    std::mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

/// HTTP front end (cpp-httplib) forwarding to StudyService::handle.
class StudyServer {
public:
    explicit StudyServer(StudyService& service);
    ~StudyServer();

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Percent-encodes everything except unreserved characters and '/'.
std::string url_encode_path(const std::string& s);

}  // namespace cqv
