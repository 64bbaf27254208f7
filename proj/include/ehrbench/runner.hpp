#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrbench/backend.hpp"
#include "ehrbench/ehrmaster.hpp"
#include "ehrbench/executor.hpp"
#include "ehrbench/fewshot.hpp"
#include "ehrbench/formats.hpp"
#include "ehrbench/metrics.hpp"
#include "ehrbench/taskgen.hpp"

namespace ehrbench {

/// Bad configuration or unusable paths; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PipelineKind { Bare, EhrMaster };
std::string_view to_string(PipelineKind p);

struct RunConfig {
    std::string run_id = "run";
    std::uint64_t seed = 2025;
    std::uint64_t pool_seed = 7;
    std::size_t per_task = 100;
    std::vector<TaskId> tasks{kAllTasks.begin(), kAllTasks.end()};
    std::vector<Flavor> flavors{kAllFlavors.begin(), kAllFlavors.end()};
    std::vector<InputFormat> formats{InputFormat::PlainText};
    std::vector<int> k_shots{0};
    PipelineKind pipeline = PipelineKind::Bare;
    /// {"kind": "mock"|"oracle"|"http"|"replay", ...}
    nlohmann::json backend = {{"kind", "oracle"}};
    /// {"kind": "null"|"subprocess", ...}
    nlohmann::json executor = {{"kind", "null"}};
    PromptSettings settings;
    DecisionMode decision_mode = DecisionMode::Rule;
    bool fallback = true;
    bool retry = true;
    int exec_timeout_ms = 10000;
    std::size_t concurrency = 4;
    std::filesystem::path output_dir = "ehrbench-out";
    Leniency leniency = Leniency::Standard;
    MetricOptions metric_options;
};

/// Unknown keys and out-of-range values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

// ---- layout under output_dir ----

std::filesystem::path instance_file(const std::filesystem::path& out, Flavor flavor, TaskId task);
std::filesystem::path finetune_file(const std::filesystem::path& out, Flavor flavor, TaskId task);
std::filesystem::path run_log_path(const std::filesystem::path& out);
std::filesystem::path trace_log_path(const std::filesystem::path& out);

// ---- backends and executors from config ----

/// `instances` feed the "oracle" kind. Relative paths resolve against `base_dir`.
std::shared_ptr<ChatBackend> make_backend(const nlohmann::json& spec, const std::vector<TaskInstance>& instances,
                                          const std::filesystem::path& base_dir = {});
std::shared_ptr<Executor> make_executor(const nlohmann::json& spec);

// ---- commands ----

/// Writes instances/<flavor>/<task>.jsonl and instances/manifest.json. Returns the instance count.
std::size_t cmd_gen(const RunConfig& config);

/// Writes finetune/<flavor>/<task>.jsonl, disjoint from the evaluation tables. Returns the pair count.
std::size_t cmd_export_finetune(const RunConfig& config);

/// Instances of the configured tasks and flavors, read back from the instance files.
std::vector<TaskInstance> load_instances(const RunConfig& config);

struct EvalSummary {
    std::size_t written = 0;
    std::size_t skipped = 0;   // already in the log
    std::size_t failures = 0;  // backend or pipeline errors, logged as Invalid
};

/// Appends one record per (instance, format, k) not yet in the run log without an
/// error; failed records are retried and the report uses the latest. Records are
/// written in a fixed order whatever the concurrency. Passing `backend` or `executor`
/// overrides the configured ones.
EvalSummary cmd_eval(const RunConfig& config, std::shared_ptr<ChatBackend> backend = nullptr,
                     std::shared_ptr<Executor> executor = nullptr);

class EmptyLog : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Report {
    nlohmann::json scores;
    std::string text;
};

/// Pure function of the log records. Throws EmptyLog.
Report build_report(const std::vector<nlohmann::json>& records, const MetricOptions& options = {});

/// Reads the run log, writes report.json and report.txt next to it.
Report cmd_report(const std::filesystem::path& output_dir, const MetricOptions& options = {});

/// Trace records for one instance, in log order.
std::vector<nlohmann::json> cmd_trace(const std::filesystem::path& output_dir, const std::string& instance_id);

/// Parsed lines of a JSONL file. A torn final line is ignored.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace ehrbench
