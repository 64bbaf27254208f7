#include "ehrbench/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ehrbench/hash.hpp"

namespace ehrbench {

using nlohmann::json;

std::string canonical_json(const ChatRequest& r) {
    json j = {{"decoding", {{"max_tokens", r.decoding.max_tokens}, {"temperature", r.decoding.temperature}}},
              {"model_name", r.model_name},
              {"system_text", r.system_text},
              {"user_text", r.user_text}};
    return j.dump();
}

std::string request_key(const ChatRequest& r) { return sha256_hex(canonical_json(r)); }

std::string_view to_string(BackendError::Kind kind) {
    switch (kind) {
        case BackendError::Kind::Transport: return "transport";
        case BackendError::Kind::Timeout: return "timeout";
        case BackendError::Kind::CacheMiss: return "cache-miss";
        case BackendError::Kind::MockUnmatched: return "mock-unmatched";
        case BackendError::Kind::Config: return "config";
    }
    return "?";
}

// ---- http ----

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw BackendError(BackendError::Kind::Config, "endpoint must be a URL");
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    base_ = config_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            throw BackendError(BackendError::Kind::Config, "credential variable " + config_.api_key_env + " is not set");
        api_key_ = key;
    }
    if (config_.max_concurrency < 1) config_.max_concurrency = 1;
}

std::string HttpBackend::complete(const ChatRequest& request) {
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
        ++in_flight_;
    }
    struct Release {
        HttpBackend* self;
        ~Release() {
            std::lock_guard lock(self->mutex_);
            --self->in_flight_;
            self->cv_.notify_one();
        }
    } release{this};

    const json body = {{"model", request.model_name},
                       {"messages",
                        json::array({{{"role", "system"}, {"content", request.system_text}},
                                     {{"role", "user"}, {"content", request.user_text}}})},
                       {"temperature", request.decoding.temperature},
                       {"max_tokens", request.decoding.max_tokens}};
    const auto payload = body.dump();

    httplib::Client client(base_);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), 0);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                            static_cast<long>((config_.timeout_ms % 1000) * 1000));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    BackendError last(BackendError::Kind::Transport, "no attempt made");
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            const bool timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                                   res.error() == httplib::Error::ConnectionTimeout;
            last = BackendError(timed_out ? BackendError::Kind::Timeout : BackendError::Kind::Transport,
                                "request failed: " + httplib::to_string(res.error()));
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last = BackendError(BackendError::Kind::Transport, "server returned " + std::to_string(res->status),
                                res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError(BackendError::Kind::Transport, "server returned " + std::to_string(res->status),
                               res->status);
        try {
            const auto j = json::parse(res->body);
            const auto& content = j.at("choices").at(0).at("message").at("content");
            return content.is_null() ? std::string() : content.get<std::string>();
        } catch (const json::exception& e) {
            throw BackendError(BackendError::Kind::Transport, std::string("malformed completion: ") + e.what(), 200);
        }
    }
    throw last;
}

// ---- mock ----

void MockBackend::load_json(std::string_view text) {
    std::lock_guard lock(mutex_);
    try {
        const auto j = json::parse(text);
        for (const auto& r : j.value("rules", json::array())) {
            Rule rule;
            rule.system_contains = r.value("system_contains", std::vector<std::string>{});
            rule.user_contains = r.value("user_contains", std::vector<std::string>{});
            rule.response = r.at("response").get<std::string>();
            rules_.push_back(std::move(rule));
        }
        if (j.contains("default")) default_ = j.at("default").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(BackendError::Kind::Config, std::string("bad mock script: ") + e.what());
    }
}

void MockBackend::add_rule(Rule rule) {
    std::lock_guard lock(mutex_);
    rules_.push_back(std::move(rule));
}

void MockBackend::set_responder(Responder responder) {
    std::lock_guard lock(mutex_);
    responder_ = std::move(responder);
}

std::string MockBackend::complete(const ChatRequest& request) {
    ++calls_;
    Responder responder;
    std::optional<std::string> fallback;
    {
        std::lock_guard lock(mutex_);
        const auto all_in = [](const std::vector<std::string>& needles, const std::string& hay) {
            for (const auto& n : needles)
                if (hay.find(n) == std::string::npos) return false;
            return true;
        };
        for (const auto& r : rules_)
            if (all_in(r.system_contains, request.system_text) && all_in(r.user_contains, request.user_text))
                return r.response;
        responder = responder_;
        fallback = default_;
    }
    if (responder)
        if (auto out = responder(request)) return *out;
    if (fallback) return *fallback;
    throw BackendError(BackendError::Kind::MockUnmatched, "no mock rule matches the request");
}

// ---- replay ----

ReplayBackend::ReplayBackend(std::string cache_path, std::shared_ptr<ChatBackend> fallback)
    : path_(std::move(cache_path)), fallback_(std::move(fallback)) {
    std::ifstream in(path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            entries_.emplace(j.at("key").get<std::string>(), j.at("response_text").get<std::string>());
        } catch (const json::exception&) {
            // A torn final line from an interrupted run is dropped; earlier corruption is an error.
            if (in.peek() != std::char_traits<char>::eof())
                throw BackendError(BackendError::Kind::Config,
                                   "corrupt replay cache " + path_ + " at line " + std::to_string(line_no));
        }
    }
}

std::string ReplayBackend::complete(const ChatRequest& request) {
    const auto key = request_key(request);
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            ++hits_;
            return it->second;
        }
    }
    ++misses_;
    if (!fallback_) throw BackendError(BackendError::Kind::CacheMiss, "request not in replay cache");
    auto text = fallback_->complete(request);
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    std::ofstream out(path_, std::ios::app);
    out << json{{"key", key}, {"request_digest", canonical_json(request)}, {"response_text", text}}.dump() << '\n';
    out.flush();
    if (!out) throw BackendError(BackendError::Kind::Config, "cannot append to replay cache " + path_);
    entries_.emplace(key, text);
    return text;
}

}  // namespace ehrbench
