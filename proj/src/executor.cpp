#include "ehrbench/executor.hpp"

#include <cerrno>
#include <chrono>
#include <set>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

extern char** environ;

namespace ehrbench {

using nlohmann::json;

std::string_view to_string(ExecErrorKind kind) {
    switch (kind) {
        case ExecErrorKind::Static: return "Static";
        case ExecErrorKind::Runtime: return "Runtime";
        case ExecErrorKind::Timeout: return "Timeout";
        case ExecErrorKind::Resource: return "Resource";
    }
    return "?";
}

std::optional<ExecErrorKind> parse_exec_error_kind(std::string_view text) {
    for (auto k : {ExecErrorKind::Static, ExecErrorKind::Runtime, ExecErrorKind::Timeout, ExecErrorKind::Resource})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

ExecResponse ExecResponse::success(std::string id, std::string result) {
    return {std::move(id), true, std::move(result), std::nullopt};
}

ExecResponse ExecResponse::failure(std::string id, ExecErrorKind kind, std::string message) {
    return {std::move(id), false, std::nullopt, ExecError{kind, std::move(message)}};
}

namespace {

json parse_object(std::string_view line, const std::set<std::string>& allowed) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ProtocolError("unexpected field '" + key + "'");
    return j;
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ProtocolError(std::string("missing field '") + name + "'");
    return *it;
}

std::string string_field(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) throw ProtocolError(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::string encode_request(const ExecRequest& r) {
    return json{{"id", r.id}, {"table_tsv", r.table_tsv}, {"code", r.code}, {"timeout_ms", r.timeout_ms}}.dump();
}

ExecRequest decode_request(std::string_view line) {
    const auto j = parse_object(line, {"id", "table_tsv", "code", "timeout_ms"});
    ExecRequest r;
    r.id = string_field(j, "id");
    r.table_tsv = string_field(j, "table_tsv");
    r.code = string_field(j, "code");
    const auto& t = field(j, "timeout_ms");
    if (!t.is_number_integer() || t.get<long long>() <= 0 || t.get<long long>() > 86400000)
        throw ProtocolError("timeout_ms must be a positive integer");
    r.timeout_ms = t.get<int>();
    return r;
}

std::string encode_response(const ExecResponse& r) {
    json j{{"id", r.id}, {"ok", r.ok}};
    if (r.result) j["result"] = *r.result;
    if (r.error) j["error"] = {{"kind", to_string(r.error->kind)}, {"message", r.error->message}};
    return j.dump();
}

ExecResponse decode_response(std::string_view line) {
    const auto j = parse_object(line, {"id", "ok", "result", "error"});
    ExecResponse r;
    r.id = string_field(j, "id");
    const auto& ok = field(j, "ok");
    if (!ok.is_boolean()) throw ProtocolError("field 'ok' must be a boolean");
    r.ok = ok.get<bool>();
    if (auto it = j.find("result"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ProtocolError("field 'result' must be a string");
        r.result = it->get<std::string>();
    }
    if (auto it = j.find("error"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ProtocolError("field 'error' must be an object");
        auto kind = parse_exec_error_kind(string_field(*it, "kind"));
        if (!kind) throw ProtocolError("unknown error kind");
        r.error = ExecError{*kind, string_field(*it, "message")};
    }
    if (r.ok && (!r.result || r.error)) throw ProtocolError("ok response must carry a result and no error");
    if (!r.ok && (!r.error || r.result)) throw ProtocolError("failed response must carry an error and no result");
    return r;
}

std::string handshake_line() {
    return json{{"protocol", kExecProtocol}, {"version", kExecProtocolVersion}}.dump();
}

void check_handshake(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception&) {
        throw ProtocolError("handshake is not JSON");
    }
    if (!j.is_object() || j.value("protocol", "") != kExecProtocol)
        throw ProtocolError("worker does not speak " + std::string(kExecProtocol));
    const auto v = j.find("version");
    if (v == j.end() || !v->is_number_integer() || v->get<int>() != kExecProtocolVersion)
        throw ProtocolError("unsupported protocol version");
}

ExecResponse NullExecutor::execute(const ExecRequest& request) {
    return ExecResponse::failure(request.id, ExecErrorKind::Resource, "no executor configured");
}

// ---- subprocess supervision ----

using Clock = std::chrono::steady_clock;

struct SubprocessExecutor::Worker {
    pid_t pid = -1;
    int fd = -1;
    std::string buffer;

    ~Worker() { terminate(); }

    void terminate() {
        if (pid > 0) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            int status = 0;
            while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
            }
            pid = -1;
        }
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }

    static int remaining_ms(Clock::time_point deadline) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        return left < 0 ? 0 : static_cast<int>(left);
    }

    enum class Io { Ok, Timeout, Closed };

    Io write_all(std::string_view data, Clock::time_point deadline) {
        while (!data.empty()) {
            const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
            if (n > 0) {
                data.remove_prefix(static_cast<std::size_t>(n));
                continue;
            }
            if (n < 0 && errno == EINTR) continue;
            if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
                pollfd p{fd, POLLOUT, 0};
                const int left = remaining_ms(deadline);
                if (left == 0) return Io::Timeout;
                if (::poll(&p, 1, left) == 0) return Io::Timeout;
                continue;
            }
            return Io::Closed;
        }
        return Io::Ok;
    }

    Io read_line(std::string& line, Clock::time_point deadline) {
        for (;;) {
            if (auto nl = buffer.find('\n'); nl != std::string::npos) {
                line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return Io::Ok;
            }
            pollfd p{fd, POLLIN, 0};
            const int left = remaining_ms(deadline);
            if (left == 0) return Io::Timeout;
            const int rc = ::poll(&p, 1, left);
            if (rc < 0 && errno == EINTR) continue;
            if (rc == 0) return Io::Timeout;
            char chunk[65536];
            const auto n = ::read(fd, chunk, sizeof chunk);
            if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
            if (n <= 0) return Io::Closed;
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

SubprocessExecutor::SubprocessExecutor(SubprocessConfig config) : config_(std::move(config)) {
    if (config_.argv.empty()) throw std::invalid_argument("worker command is empty");
    if (config_.pool_size == 0) config_.pool_size = 1;
}

SubprocessExecutor::~SubprocessExecutor() = default;

std::size_t SubprocessExecutor::spawned() const {
    std::lock_guard lock(mutex_);
    return spawned_;
}

std::unique_ptr<SubprocessExecutor::Worker> SubprocessExecutor::spawn() {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
        throw std::runtime_error(std::string("socketpair: ") + std::strerror(errno));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    sigset_t defaults;
    sigemptyset(&defaults);
    sigaddset(&defaults, SIGPIPE);
    posix_spawnattr_setsigdefault(&attr, &defaults);
    posix_spawnattr_setpgroup(&attr, 0);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);

    std::vector<char*> args;
    for (auto& a : config_.argv) args.push_back(a.data());
    args.push_back(nullptr);

    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, args[0], &actions, &attr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    ::close(sv[1]);
    if (rc != 0) {
        ::close(sv[0]);
        throw std::runtime_error("cannot start worker '" + config_.argv[0] + "': " + std::strerror(rc));
    }

    auto w = std::make_unique<Worker>();
    w->pid = pid;
    w->fd = sv[0];
    ::fcntl(w->fd, F_SETFL, ::fcntl(w->fd, F_GETFL) | O_NONBLOCK);
    {
        std::lock_guard lock(mutex_);
        ++spawned_;
    }

    std::string line;
    const auto deadline = Clock::now() + std::chrono::milliseconds(config_.handshake_timeout_ms);
    switch (w->read_line(line, deadline)) {
        case Worker::Io::Ok: break;
        case Worker::Io::Timeout: throw std::runtime_error("worker sent no handshake");
        case Worker::Io::Closed: throw std::runtime_error("worker exited before the handshake");
    }
    check_handshake(line);
    return w;
}

std::unique_ptr<SubprocessExecutor::Worker> SubprocessExecutor::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !idle_.empty() || live_ < config_.pool_size; });
    if (!idle_.empty()) {
        auto w = std::move(idle_.back());
        idle_.pop_back();
        return w;
    }
    ++live_;
    lock.unlock();
    try {
        return spawn();
    } catch (...) {
        lock.lock();
        --live_;
        cv_.notify_one();
        throw;
    }
}

void SubprocessExecutor::release(std::unique_ptr<Worker> worker) {
    std::lock_guard lock(mutex_);
    if (worker && !config_.fresh_worker_per_request) {
        idle_.push_back(std::move(worker));
    } else {
        worker.reset();
        --live_;
    }
    cv_.notify_one();
}

ExecResponse SubprocessExecutor::execute(const ExecRequest& request) {
    std::unique_ptr<Worker> w;
    try {
        w = acquire();
    } catch (const std::exception& e) {
        return ExecResponse::failure(request.id, ExecErrorKind::Resource, e.what());
    }

    const auto budget = std::chrono::milliseconds(request.timeout_ms + config_.grace_ms);
    const auto deadline = Clock::now() + budget;
    auto fail = [&](ExecErrorKind kind, std::string message) {
        w.reset();
        release(nullptr);
        return ExecResponse::failure(request.id, kind, std::move(message));
    };

    switch (w->write_all(encode_request(request) + "\n", deadline)) {
        case Worker::Io::Ok: break;
        case Worker::Io::Timeout: return fail(ExecErrorKind::Timeout, "worker did not accept the request in time");
        case Worker::Io::Closed: return fail(ExecErrorKind::Resource, "worker exited");
    }
    std::string line;
    switch (w->read_line(line, deadline)) {
        case Worker::Io::Ok: break;
        case Worker::Io::Timeout:
            return fail(ExecErrorKind::Timeout, "no result within " + std::to_string(request.timeout_ms) + " ms");
        case Worker::Io::Closed: return fail(ExecErrorKind::Resource, "worker exited while executing");
    }
    ExecResponse response;
    try {
        response = decode_response(line);
    } catch (const ProtocolError& e) {
        return fail(ExecErrorKind::Resource, std::string("protocol violation: ") + e.what());
    }
    if (response.id != request.id) return fail(ExecErrorKind::Resource, "protocol violation: response id mismatch");
    release(std::move(w));
    return response;
}

}  // namespace ehrbench
