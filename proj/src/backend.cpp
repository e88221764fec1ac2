#include "cqv/backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cqv/digest.hpp"
#include "cqv/error.hpp"

namespace cqv {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Stub: return "stub";
        case BackendKind::Replay: return "replay";
        case BackendKind::RemoteHTTP: return "remote";
    }
    return "stub";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
    if (text == "stub") return BackendKind::Stub;
    if (text == "replay") return BackendKind::Replay;
    if (text == "remote" || text == "http") return BackendKind::RemoteHTTP;
    return std::nullopt;
}

void validate(const ModelConfig& cfg) {
    if (cfg.temperature < 0) throw Error(ErrorKind::InvalidArgument, "temperature must be >= 0");
    if (cfg.max_retries < 0) throw Error(ErrorKind::InvalidArgument, "max_retries must be >= 0");
}

namespace {

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomically(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Stub / Replay / Recording

StubBackend::StubBackend(std::string fixed_text)
    : responder_([text = std::move(fixed_text)](const CompletionRequest&) { return text; }) {}

StubBackend::StubBackend(Responder responder) : responder_(std::move(responder)) {}

std::string StubBackend::complete(const CompletionRequest& request) { return responder_(request); }

ReplayBackend::ReplayBackend(fs::path fixture_dir) : dir_(std::move(fixture_dir)) {
    if (!fs::is_directory(dir_)) {
        throw Error(ErrorKind::BackendUnavailable, "replay fixture directory not found: " + dir_.string());
    }
}

std::string ReplayBackend::fixture_name(const std::string& prompt_digest, std::optional<int> run_index) {
    if (run_index) return prompt_digest + ".run" + std::to_string(*run_index) + ".txt";
    return prompt_digest + ".txt";
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
    const std::string digest = sha256_hex(request.prompt);
    if (auto text = read_file(dir_ / fixture_name(digest, request.run_index))) return *text;
    if (auto text = read_file(dir_ / fixture_name(digest))) return *text;
    throw Error(ErrorKind::BackendUnavailable,
                "no recorded completion for prompt digest " + digest +
                    (request.record_id.empty() ? "" : " (record '" + request.record_id + "')"));
}

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner, fs::path fixture_dir, bool per_run)
    : inner_(std::move(inner)), dir_(std::move(fixture_dir)), per_run_(per_run) {
    fs::create_directories(dir_);
}

std::string RecordingBackend::complete(const CompletionRequest& request) {
    std::string text = inner_->complete(request);
    const std::string digest = sha256_hex(request.prompt);
    auto name = ReplayBackend::fixture_name(digest, per_run_ ? std::optional<int>(request.run_index) : std::nullopt);
    std::lock_guard lock(write_mutex_);
    write_file_atomically(dir_ / name, text);
    return text;
}

// ---------------------------------------------------------------------------
// Remote HTTP

RemoteSettings RemoteSettings::from_environment() {
    auto env = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? v : "";
    };
    RemoteSettings s{env("OEA_LLM_ENDPOINT"), env("OEA_LLM_MODEL"), env("OEA_LLM_KEY")};
    if (s.endpoint.empty()) throw Error(ErrorKind::BackendUnavailable, "OEA_LLM_ENDPOINT is not set");
    if (s.api_key.empty()) throw Error(ErrorKind::AuthError, "OEA_LLM_KEY is not set");
    return s;
}

RemoteHttpBackend::RemoteHttpBackend(RemoteSettings settings, std::chrono::seconds timeout)
    : settings_(std::move(settings)), timeout_(timeout) {}

std::string RemoteHttpBackend::complete(const CompletionRequest& request) {
    // Split "scheme://host[:port]/path?query".
    const std::string& url = settings_.endpoint;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::BackendUnavailable, "invalid endpoint URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(std::chrono::seconds(60));

    json body = {
        {"model", settings_.model.empty() ? request.model_name : settings_.model},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"frequency_penalty", request.penalty},
        {"presence_penalty", request.penalty},
    };
    httplib::Headers headers = {
        {"Authorization", "Bearer " + settings_.api_key},
        {"api-key", settings_.api_key},
    };
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorKind::TransportError, "request to " + origin + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw Error(ErrorKind::AuthError, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
        throw Error(ErrorKind::TransportError, "transient HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error(ErrorKind::BackendUnavailable, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
        json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BackendUnavailable, std::string("unexpected completion payload: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cache + client

CompletionCache::CompletionCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
}

std::string CompletionCache::key(const std::string& model, const std::string& prompt_digest, int run_index) {
    std::string material = model;
    material += '\0';
    material += prompt_digest;
    material += '\0';
    material += std::to_string(run_index);
    return sha256_hex(material);
}

std::string CompletionCache::get_or_compute(const std::string& key, const std::function<std::string()>& produce,
                                            bool& hit) {
    std::shared_future<std::string> pending;
    std::promise<std::string> promise;
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            pending = it->second;
        } else {
            if (dir_) {
                if (auto text = read_file(*dir_ / (key + ".txt"))) {
                    std::promise<std::string> ready;
                    ready.set_value(*text);
                    entries_.emplace(key, ready.get_future().share());
                    hit = true;
                    return *text;
                }
            }
            entries_.emplace(key, promise.get_future().share());
        }
    }
    if (pending.valid()) {
        hit = true;
        return pending.get();
    }
    try {
        std::string text = produce();
        if (dir_) write_file_atomically(*dir_ / (key + ".txt"), text);
        promise.set_value(text);
        hit = false;
        return text;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        entries_.erase(key);
        throw;
    }
}

CompletionClient::CompletionClient(std::shared_ptr<CompletionBackend> backend, ModelConfig cfg,
                                   std::shared_ptr<CompletionCache> cache)
    : backend_(std::move(backend)),
      cfg_(std::move(cfg)),
      cache_(std::move(cache)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    validate(cfg_);
}

std::string CompletionClient::call_with_retries(const CompletionRequest& req) {
    auto delay = cfg_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return backend_->complete(req);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TransportError || attempt >= cfg_.max_retries) throw;
        }
        sleeper_(delay);
        delay *= 2;
    }
}

Completion CompletionClient::request(const std::string& prompt, int run_index, const std::string& record_id) {
    CompletionRequest req{prompt, cfg_.model_name, run_index, record_id, cfg_.temperature, cfg_.penalty};
    auto start = std::chrono::steady_clock::now();
    Completion out;
    const std::string key = CompletionCache::key(cfg_.model_name, sha256_hex(prompt), run_index);
    out.text = cache_->get_or_compute(key, [&] { return call_with_retries(req); }, out.cache_hit);
    out.latency = std::chrono::steady_clock::now() - start;
    return out;
}

std::shared_ptr<CompletionBackend> make_backend(const ModelConfig& cfg, const fs::path& fixtures,
                                                const std::string& stub_text) {
    switch (cfg.backend) {
        case BackendKind::Stub: return std::make_shared<StubBackend>(stub_text);
        case BackendKind::Replay: return std::make_shared<ReplayBackend>(fixtures);
        case BackendKind::RemoteHTTP: return std::make_shared<RemoteHttpBackend>(RemoteSettings::from_environment());
    }
    throw Error(ErrorKind::BackendUnavailable, "unknown backend");
}

}  // namespace cqv
