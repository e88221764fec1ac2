#include "cqv/study_server.hpp"

#include <httplib.h>
#include <openssl/rand.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Cards and bundles

json to_json(const SuggestionCard& c) {
    return {{"record_id", c.record_id},
            {"label", to_string(c.suggestion.label)},
            {"sparql", c.suggestion.sparql},
            {"partial", c.suggestion.partial},
            {"verification", to_json(c.verification)}};
}

SuggestionCard card_from_json(const json& j) {
    SuggestionCard c;
    c.record_id = j.at("record_id").get<std::string>();
    c.suggestion = suggestion_from_json(j);
    c.verification = verdict_from_json(j.at("verification"));
    return c;
}

std::map<std::string, SuggestionCard> make_cards(const Corpus& corpus, const std::map<std::string, Suggestion>& suggestions,
                                                 const VerifyOptions& options) {
    std::map<std::string, SuggestionCard> cards;
    for (const auto& r : corpus.records) {
        auto it = suggestions.find(r.id);
        if (it == suggestions.end()) {
            throw Error(ErrorKind::MissingSuggestion, "no frozen suggestion for record '" + r.id + "'");
        }
        SuggestionCard c{r.id, it->second, verify_suggestion(it->second, corpus.ontology_of(r), options)};
        c.suggestion.raw_completion.clear();
        cards.emplace(r.id, std::move(c));
    }
    return cards;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    out << text;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ManifestError, p.string() + " is not valid JSON: " + e.what());
    }
}

}  // namespace

void write_bundle(const fs::path& dir, const Corpus& corpus, const std::map<std::string, SuggestionCard>& cards,
                  const std::vector<SessionPlan>& plans) {
    fs::create_directories(dir / "ontologies");
    Corpus copy = corpus;
    std::set<std::string> used;
    for (auto& [id, o] : copy.ontologies) {
        std::string name = o.path.filename().string();
        for (int k = 2; used.count(name); ++k) name = o.path.stem().string() + "_" + std::to_string(k) + o.path.extension().string();
        used.insert(name);
        fs::path target = fs::absolute(dir / "ontologies" / name).lexically_normal();
        if (fs::absolute(o.path).lexically_normal() != target) fs::copy_file(o.path, target, fs::copy_options::overwrite_existing);
        o.path = target;
    }
    write_text(dir / "manifest.json", corpus_to_json(copy, dir).dump(2) + "\n");
    json cj = json::array();
    for (const auto& [id, c] : cards) cj.push_back(to_json(c));
    write_text(dir / "suggestions.json", cj.dump(2) + "\n");
    json pj = json::array();
    for (const auto& p : plans) pj.push_back(to_json(p));
    write_text(dir / "plans.json", pj.dump(2) + "\n");
}

StudyBundle load_bundle(const fs::path& dir) {
    StudyBundle b;
    b.dir = dir;
    b.corpus = load_corpus(dir / "manifest.json");
    try {
        for (const auto& c : read_json(dir / "suggestions.json")) {
            auto card = card_from_json(c);
            b.cards.emplace(card.record_id, std::move(card));
        }
        for (const auto& p : read_json(dir / "plans.json")) b.plans.push_back(plan_from_json(p));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ManifestError, std::string("bundle: ") + e.what());
    }
    for (const auto& p : b.plans) {
        for (const auto& t : p.tasks) {
            if (!b.corpus.find(t.record_id)) {
                throw Error(ErrorKind::ManifestError, "plan for '" + p.participant_id + "' names unknown record '" + t.record_id + "'");
            }
            if (t.condition == Condition::Assisted && !b.cards.count(t.record_id)) {
                throw Error(ErrorKind::MissingSuggestion, "no frozen suggestion for assisted record '" + t.record_id + "'");
            }
        }
    }
    return b;
}

std::string url_encode_path(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Service

StudyService::StudyService(StudyBundle bundle, fs::path event_log, Clock clock)
    : bundle_(std::move(bundle)), log_(std::move(event_log)), clock_(std::move(clock)) {
    if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
}

std::string StudyService::new_token() {
    unsigned char buf[16];
    if (RAND_bytes(buf, sizeof buf) != 1) throw Error(ErrorKind::IoError, "cannot generate a session token");
    static const char* hex = "0123456789abcdef";
    std::string t;
    for (unsigned char c : buf) {
        t += hex[c >> 4];
        t += hex[c & 15];
    }
    return t;
}

StudyService::Entry& StudyService::entry(const std::string& token) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw Error(ErrorKind::UnknownSession, "unknown session token");
    return *it->second;
}

std::string StudyService::create_session(const json& body) {
    SessionPlan plan;
    if (body.contains("plan")) {
        plan = plan_from_json(body.at("plan"));
    } else if (body.contains("participant_id")) {
        const auto pid = body.at("participant_id").get<std::string>();
        auto it = std::find_if(bundle_.plans.begin(), bundle_.plans.end(),
                               [&](const SessionPlan& p) { return p.participant_id == pid; });
        if (it == bundle_.plans.end()) throw Error(ErrorKind::InvalidArgument, "no plan for participant '" + pid + "'");
        plan = *it;
    } else {
        throw Error(ErrorKind::InvalidArgument, "body needs 'participant_id' or 'plan'");
    }
    for (const auto& t : plan.tasks) {
        if (!bundle_.corpus.find(t.record_id)) throw Error(ErrorKind::InvalidArgument, "unknown record '" + t.record_id + "'");
        if (t.condition == Condition::Assisted && !bundle_.cards.count(t.record_id)) {
            throw Error(ErrorKind::MissingSuggestion, "no frozen suggestion for assisted record '" + t.record_id + "'");
        }
    }
    auto e = std::make_unique<Entry>();
    std::string token = new_token();
    e->session = std::make_unique<Session>(plan, token, clock_);
    {
        std::lock_guard lock(sessions_mutex_);
        sessions_.emplace(token, std::move(e));
    }
    log_.append({{"type", "session_created"}, {"token", token}, {"plan", to_json(plan)}});
    return token;
}

void StudyService::log_new(Session& s) {
    for (const auto& r : s.drain_new()) {
        log_.append({{"type", "response"}, {"token", s.token()}, {"response", to_json(r)}});
    }
}

json StudyService::view_json(const Session& s, const TaskView& v) const {
    json j = {{"done", v.done}, {"index", v.index}, {"total", v.total}};
    if (v.done) {
        j["survey_pending"] = v.survey_pending;
        return j;
    }
    const CQRecord* r = bundle_.corpus.find(v.record_id);
    j["record_id"] = v.record_id;
    j["condition"] = to_string(v.condition);
    j["cq"] = r->cq_text;
    j["story"] = r->story_oneline.value_or(r->story_text);
    j["ontology_url"] = "/ontologies/" + url_encode_path(r->ontology_ref);
    j["remaining_seconds"] = static_cast<double>(v.remaining.count()) / 1000.0;
    j["progress"] = {{"index", v.index + 1}, {"total", v.total}};
    if (v.condition == Condition::Assisted) j["suggestion"] = to_json(bundle_.cards.at(v.record_id));
    (void)s;
    return j;
}

json StudyService::task(const std::string& token) {
    Entry& e = entry(token);
    std::lock_guard lock(e.mutex);
    TaskView v = e.session->next_task();
    log_new(*e.session);
    return view_json(*e.session, v);
}

json StudyService::respond(const std::string& token, const json& body) {
    Entry& e = entry(token);
    std::lock_guard lock(e.mutex);
    std::string record_id;
    Answer answer;
    std::optional<int> difficulty;
    try {
        record_id = body.at("record_id").get<std::string>();
        answer = parse_answer(body.at("answer").get<std::string>());
        if (body.contains("difficulty") && !body.at("difficulty").is_null()) difficulty = body.at("difficulty").get<int>();
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::InvalidResponse, std::string("response body: ") + ex.what());
    }
    try {
        TaskView v = e.session->submit(record_id, answer, difficulty);
        log_new(*e.session);
        return {{"accepted", true}, {"next", view_json(*e.session, v)}};
    } catch (...) {
        // Expiry may have recorded skips before the rejection.
        log_new(*e.session);
        throw;
    }
}

json StudyService::survey(const std::string& token) {
    Entry& e = entry(token);
    std::lock_guard lock(e.mutex);
    json j = {{"items", sus_items()}, {"scale", {1, 5}}, {"submitted", e.session->survey_done()}};
    if (e.session->survey()) j["score"] = e.session->survey()->score;
    return j;
}

json StudyService::submit_survey(const std::string& token, const json& body) {
    Entry& e = entry(token);
    std::lock_guard lock(e.mutex);
    std::vector<int> items;
    try {
        items = body.at("items").get<std::vector<int>>();
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::InvalidResponse, std::string("survey body: ") + ex.what());
    }
    auto s = e.session->submit_survey(items);
    log_new(*e.session);
    log_.append({{"type", "survey"},
                 {"token", token},
                 {"participant_id", s.participant_id},
                 {"items", s.items},
                 {"score", s.score}});
    return {{"score", s.score}};
}

std::vector<TaskResponse> StudyService::responses(const std::string& token) {
    Entry& e = entry(token);
    std::lock_guard lock(e.mutex);
    return e.session->responses();
}

namespace {

int status_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnknownSession: return 404;
        case ErrorKind::OutOfOrderResponse:
        case ErrorKind::DuplicateResponse:
        case ErrorKind::WindowExpired: return 409;
        case ErrorKind::SessionExpired: return 410;
        default: return 400;
    }
}

HttpReply json_reply(int status, const json& j) { return {status, j.dump(), "application/json"}; }

std::string mime_for(const fs::path& p) {
    auto ext = p.extension().string();
    if (ext == ".ttl") return "text/turtle";
    if (ext == ".owl" || ext == ".rdf" || ext == ".xml") return "application/rdf+xml";
    return "application/octet-stream";
}

std::string percent_decode(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

HttpReply StudyService::handle(const std::string& method, const std::string& raw_path, const std::string& body) {
    static const std::regex session_route(R"(^/sessions/([0-9a-fA-F]+)/(task|response|survey)$)");
    const std::string path = raw_path.substr(0, raw_path.find('?'));
    try {
        auto parse_body = [&]() {
            try {
                return body.empty() ? json::object() : json::parse(body);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::InvalidResponse, std::string("request body is not JSON: ") + e.what());
            }
        };
        if (method == "GET" && path == "/health") return json_reply(200, {{"ok", true}});
        if (method == "POST" && path == "/sessions") return json_reply(201, {{"token", create_session(parse_body())}});
        if (method == "GET" && path == "/admin/export") return {200, export_events(), "application/x-ndjson"};
        if (method == "GET" && path.rfind("/ontologies/", 0) == 0) {
            const std::string id = percent_decode(path.substr(12));
            auto it = bundle_.corpus.ontologies.find(id);
            if (it == bundle_.corpus.ontologies.end()) return json_reply(404, {{"error", "NotFound"}, {"message", "unknown ontology"}});
            std::ifstream in(it->second.path, std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            return {200, buf.str(), mime_for(it->second.path)};
        }
        std::smatch m;
        if (std::regex_match(path, m, session_route)) {
            const std::string token = m[1];
            const std::string what = m[2];
            if (what == "task" && method == "GET") return json_reply(200, task(token));
            if (what == "response" && method == "POST") return json_reply(200, respond(token, parse_body()));
            if (what == "survey" && method == "GET") return json_reply(200, survey(token));
            if (what == "survey" && method == "POST") return json_reply(200, submit_survey(token, parse_body()));
            return json_reply(405, {{"error", "MethodNotAllowed"}, {"message", method + " " + path}});
        }
        return json_reply(404, {{"error", "NotFound"}, {"message", method + " " + path}});
    } catch (const Error& e) {
        return json_reply(status_for(e.kind()), {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}});
    } catch (const json::exception& e) {
        return json_reply(400, {{"error", "InvalidResponse"}, {"message", e.what()}});
    }
}

// ---------------------------------------------------------------------------
// HTTP server

struct StudyServer::Impl {
    StudyService& service;
    httplib::Server server;
    explicit Impl(StudyService& s) : service(s) {}
};

StudyServer::StudyServer(StudyService& service) : impl_(std::make_unique<Impl>(service)) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        HttpReply r = impl_->service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
        res.set_header("Access-Control-Allow-Origin", "*");
    };
    auto& s = impl_->server;
    s.Get(R"(/.*)", forward);
    s.Post(R"(/.*)", forward);
    s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
}

StudyServer::~StudyServer() { stop(); }

int StudyServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorKind::IoError, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorKind::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void StudyServer::serve() { impl_->server.listen_after_bind(); }

void StudyServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace cqv
