/// @file backend.hpp
/// @brief Pluggable completion backends and the caching/retrying client in front of them.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace cqv {

enum class BackendKind { Stub, Replay, RemoteHTTP };

std::string to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct ModelConfig {
    BackendKind backend = BackendKind::Stub;
    std::string model_name = "stub";
    double temperature = 0.0;
    double penalty = 0.0;
    int max_retries = 3;
    std::optional<std::chrono::milliseconds> run_spacing;  // RemoteHTTP only
    std::chrono::milliseconds initial_backoff{500};
};

/// Throws Error(InvalidArgument) when temperature < 0 or max_retries < 0.
void validate(const ModelConfig& cfg);

struct CompletionRequest {
    std::string prompt;
    std::string model_name;
    int run_index = 1;
    std::string record_id;  // informational; never part of the cache key
    double temperature = 0.0;
    double penalty = 0.0;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    /// Returns completion text. Throws Error(TransportError) for retriable
    /// failures, Error(AuthError) / Error(BackendUnavailable) otherwise.
    virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Deterministic backend: fixed text, or a programmed responder.
class StubBackend : public CompletionBackend {
public:
    using Responder = std::function<std::string(const CompletionRequest&)>;

    explicit StubBackend(std::string fixed_text);
    explicit StubBackend(Responder responder);

    std::string complete(const CompletionRequest& request) override;

private:
    Responder responder_;
};

/// Serves recorded completions from a directory of `<prompt-digest>.txt` files.
/// A run-specific `<digest>.run<k>.txt` wins over the run-agnostic file.
class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::filesystem::path fixture_dir);

    std::string complete(const CompletionRequest& request) override;

    static std::string fixture_name(const std::string& prompt_digest, std::optional<int> run_index = std::nullopt);

private:
    std::filesystem::path dir_;
};

struct RemoteSettings {
    std::string endpoint;  // full URL of a chat-completions endpoint
    std::string model;
    std::string api_key;

    /// Reads OEA_LLM_ENDPOINT, OEA_LLM_MODEL, OEA_LLM_KEY.
    /// Throws Error(BackendUnavailable) if endpoint or key is unset.
    static RemoteSettings from_environment();
};

/// JSON-over-HTTP chat-completion backend.
class RemoteHttpBackend : public CompletionBackend {
public:
    explicit RemoteHttpBackend(RemoteSettings settings, std::chrono::seconds timeout = std::chrono::seconds(300));

    std::string complete(const CompletionRequest& request) override;

private:
    RemoteSettings settings_;
    std::chrono::seconds timeout_;
};

/// Decorator that writes every completion as a replay fixture.
class RecordingBackend : public CompletionBackend {
public:
    RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::filesystem::path fixture_dir, bool per_run = false);

    std::string complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::filesystem::path dir_;
    bool per_run_;
    std::mutex write_mutex_;
};

struct Completion {
    std::string text;
    bool cache_hit = false;
    std::chrono::nanoseconds latency{0};
};

/// Content-addressed completion cache keyed by (model, prompt digest, run index).
/// Concurrent requests for the same key are coalesced into one backend call.
class CompletionCache {
public:
    explicit CompletionCache(std::optional<std::filesystem::path> dir = std::nullopt);

    static std::string key(const std::string& model, const std::string& prompt_digest, int run_index);

    /// Returns the cached text or computes it with `produce`; `hit` reports which.
    std::string get_or_compute(const std::string& key, const std::function<std::string()>& produce, bool& hit);

private:
    std::optional<std::filesystem::path> dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_future<std::string>> entries_;
};

/// Backend + retry policy + cache. Thread-safe.
class CompletionClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    CompletionClient(std::shared_ptr<CompletionBackend> backend, ModelConfig cfg,
                     std::shared_ptr<CompletionCache> cache = std::make_shared<CompletionCache>());

    const ModelConfig& config() const { return cfg_; }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    Completion request(const std::string& prompt, int run_index = 1, const std::string& record_id = {});

private:
    std::string call_with_retries(const CompletionRequest& req);

    std::shared_ptr<CompletionBackend> backend_;
    ModelConfig cfg_;
    std::shared_ptr<CompletionCache> cache_;
    Sleeper sleeper_;
};

/// Builds the backend named by `cfg.backend`. `fixtures` is the replay directory,
/// `stub_text` the fixed stub completion.
std::shared_ptr<CompletionBackend> make_backend(const ModelConfig& cfg, const std::filesystem::path& fixtures = {},
                                                const std::string& stub_text = {});

}  // namespace cqv
