#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehrbench {

struct Decoding {
    double temperature = 0.0;
    int max_tokens = 2048;

    bool operator==(const Decoding&) const = default;
};

/// Single-turn chat: one system message, one user message.
struct ChatRequest {
    std::string system_text;
    std::string user_text;
    Decoding decoding;
    std::string model_name;

    bool operator==(const ChatRequest&) const = default;
};

/// Sorted-key JSON of every request field.
std::string canonical_json(const ChatRequest& request);
/// SHA-256 of canonical_json.
std::string request_key(const ChatRequest& request);

class BackendError : public std::runtime_error {
public:
    enum class Kind { Transport, Timeout, CacheMiss, MockUnmatched, Config };
    BackendError(Kind kind, const std::string& what, int status = 0)
        : std::runtime_error(what), kind_(kind), status_(status) {}
    Kind kind() const noexcept { return kind_; }
    /// HTTP status for Transport errors, 0 otherwise.
    int status() const noexcept { return status_; }

private:
    Kind kind_;
    int status_;
};

std::string_view to_string(BackendError::Kind kind);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    /// Raw model text. Must be safe to call from several threads.
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct HttpConfig {
    /// Full URL of an OpenAI-compatible chat-completions endpoint.
    std::string endpoint;
    /// Environment variable holding the bearer token; empty for no auth.
    std::string api_key_env;
    int max_retries = 3;
    int backoff_ms = 500;
    int timeout_ms = 120000;
    int max_concurrency = 4;
};

class HttpBackend : public ChatBackend {
public:
    /// Throws BackendError(Config) for malformed endpoints or a missing credential variable.
    explicit HttpBackend(HttpConfig config);
    std::string complete(const ChatRequest& request) override;

private:
    HttpConfig config_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
    std::string api_key_;
    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
};

/// Scripted responses. The first rule whose every substring occurs in the request wins.
class MockBackend : public ChatBackend {
public:
    struct Rule {
        std::vector<std::string> system_contains;
        std::vector<std::string> user_contains;
        std::string response;
    };
    using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

    MockBackend() = default;
    explicit MockBackend(std::vector<Rule> rules) : rules_(std::move(rules)) {}

    /// Appends rules from {"rules": [{"system_contains": [...], "user_contains": [...], "response": "..."}],
    /// "default": "..."}.
    void load_json(std::string_view text);

    void add_rule(Rule rule);
    /// Consulted after the rules; returning nullopt means unmatched.
    void set_responder(Responder responder);

    std::string complete(const ChatRequest& request) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
    std::optional<std::string> default_;
    Responder responder_;
    std::atomic<std::size_t> calls_{0};
};

/// Record/replay cache. Hits never reach the fallback; misses go to the fallback
/// and are appended to the cache file, or raise CacheMiss when there is no fallback.
/// File format: one {"key", "request_digest", "response_text"} object per line.
class ReplayBackend : public ChatBackend {
public:
    ReplayBackend(std::string cache_path, std::shared_ptr<ChatBackend> fallback);
    std::string complete(const ChatRequest& request) override;

    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }

private:
    std::string path_;
    std::shared_ptr<ChatBackend> fallback_;
    std::mutex mutex_;
    std::map<std::string, std::string> entries_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace ehrbench
