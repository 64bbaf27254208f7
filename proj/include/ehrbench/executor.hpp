#pragma once

#include <condition_variable>
#include <set>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehrbench {

// ---- wire format: one JSON object per line over the worker's stdin/stdout ----

inline constexpr std::string_view kExecProtocol = "ehr-sandbox";
inline constexpr int kExecProtocolVersion = 1;

/// The program sees the table under this name and leaves its answer in `result`.
inline constexpr std::string_view kTableVariable = "df";

struct ExecRequest {
    std::string id;
    std::string table_tsv;
    std::string code;
    int timeout_ms = 10000;

    bool operator==(const ExecRequest&) const = default;
};

enum class ExecErrorKind { Static, Runtime, Timeout, Resource };

std::string_view to_string(ExecErrorKind kind);
std::optional<ExecErrorKind> parse_exec_error_kind(std::string_view text);

struct ExecError {
    ExecErrorKind kind = ExecErrorKind::Runtime;
    std::string message;

    bool operator==(const ExecError&) const = default;
};

/// ok implies result; !ok implies error.
struct ExecResponse {
    std::string id;
    bool ok = false;
    std::optional<std::string> result;
    std::optional<ExecError> error;

    static ExecResponse success(std::string id, std::string result);
    static ExecResponse failure(std::string id, ExecErrorKind kind, std::string message);

    bool operator==(const ExecResponse&) const = default;
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-line JSON encodings. Decoders throw ProtocolError on anything malformed,
/// including responses that break the ok/result/error invariant.
std::string encode_request(const ExecRequest& request);
ExecRequest decode_request(std::string_view line);
std::string encode_response(const ExecResponse& response);
ExecResponse decode_response(std::string_view line);

/// {"protocol":"ehr-sandbox","version":1}
std::string handshake_line();
/// Throws ProtocolError unless `line` announces this protocol at this version.
void check_handshake(std::string_view line);

// ---- executors ----

class Executor {
public:
    virtual ~Executor() = default;
    /// Total: failures come back as error responses with the request's id.
    virtual ExecResponse execute(const ExecRequest& request) = 0;
    /// False when no real execution backend is attached.
    virtual bool available() const { return true; }
};

/// Always fails with a Resource error.
class NullExecutor : public Executor {
public:
    ExecResponse execute(const ExecRequest& request) override;
    bool available() const override { return false; }
};

/// Delegates to a callable; used for stubs.
class FunctionExecutor : public Executor {
public:
    explicit FunctionExecutor(std::function<ExecResponse(const ExecRequest&)> fn) : fn_(std::move(fn)) {}
    ExecResponse execute(const ExecRequest& request) override { return fn_(request); }

private:
    std::function<ExecResponse(const ExecRequest&)> fn_;
};

struct SubprocessConfig {
    /// Worker command line; argv[0] is looked up on PATH.
    std::vector<std::string> argv;
    /// Extra wall-clock time past timeout_ms before the worker is killed.
    int grace_ms = 500;
    int handshake_timeout_ms = 10000;
    /// Maximum number of live workers.
    std::size_t pool_size = 2;
    /// Kill each worker after one request.
    bool fresh_worker_per_request = false;
};

/// Supervises worker processes speaking the wire format. A worker that times out,
/// dies, or answers out of protocol is killed and replaced; the caller gets a
/// Timeout or Resource error for that request.
class SubprocessExecutor : public Executor {
public:
    explicit SubprocessExecutor(SubprocessConfig config);
    ~SubprocessExecutor() override;
    SubprocessExecutor(const SubprocessExecutor&) = delete;
    SubprocessExecutor& operator=(const SubprocessExecutor&) = delete;

    ExecResponse execute(const ExecRequest& request) override;

    /// Workers started so far, including replacements.
    std::size_t spawned() const;

private:
    struct Worker;
    std::unique_ptr<Worker> acquire();
    void release(std::unique_ptr<Worker> worker);
    std::unique_ptr<Worker> spawn();

    SubprocessConfig config_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<std::unique_ptr<Worker>> idle_;
    std::size_t live_ = 0;
    std::size_t spawned_ = 0;
};

}  // namespace ehrbench
