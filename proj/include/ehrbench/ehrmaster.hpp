#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ehrbench/answer.hpp"
#include "ehrbench/backend.hpp"
#include "ehrbench/executor.hpp"
#include "ehrbench/fewshot.hpp"
#include "ehrbench/taskgen.hpp"

namespace ehrbench {

enum class PlanKind { DU, DR, KU, KR };
PlanKind plan_kind(TaskId task);
std::string_view to_string(PlanKind kind);

enum class Decision { Code, Direct };
std::string_view to_string(Decision d);

/// Rule: Data-Driven tasks and K-U1 use code, K-R tasks answer directly.
/// Llm: one extra completion asks the model, falling back to the rule on an unclear reply.
enum class DecisionMode { Rule, Llm };

struct PipelineOptions {
    PromptSettings settings;
    DecisionMode decision_mode = DecisionMode::Rule;
    /// Answer directly when the code path fails.
    bool fallback = true;
    /// One regeneration with the error appended; skipped when the executor is unavailable.
    bool retry = true;
    int exec_timeout_ms = 10000;
    Leniency leniency = Leniency::Standard;
};

class ExecutorUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StageLatency {
    std::string stage;
    double ms = 0;

    bool operator==(const StageLatency&) const = default;
};

struct PipelineTrace {
    std::string instance_id;
    std::string plan_text;
    std::string aligned_text;
    std::optional<std::string> decision_text;
    Decision decision = Decision::Direct;
    /// Last program sent to the executor.
    std::optional<std::string> code_text;
    std::optional<std::string> execution_result;
    std::optional<ExecError> execution_error;
    int code_attempts = 0;
    bool fallback_used = false;
    std::string raw_answer;
    ParsedAnswer final_answer = Invalid{"not run"};
    std::vector<StageLatency> stage_latencies;
    std::size_t backend_calls = 0;
    /// Set when a stage raised; final_answer is then Invalid.
    std::optional<std::string> error;

    bool operator==(const PipelineTrace&) const = default;
};

nlohmann::json trace_to_json(const PipelineTrace& trace);
/// Throws std::invalid_argument.
PipelineTrace trace_from_json(const nlohmann::json& j);

// ---- stage prompts ----

std::string plan_prompt(const TaskInstance& instance);
std::string align_prompt(std::string_view plan_text, const Table& table);
std::string code_prompt(const TaskInstance& instance, std::string_view aligned_text);
std::string code_retry_prompt(const TaskInstance& instance, std::string_view aligned_text, std::string_view code,
                              std::string_view error);
/// The binary template for label contracts, the data template otherwise.
std::string direct_prompt(const TaskInstance& instance, std::string_view aligned_text);
std::string decide_prompt(const TaskInstance& instance, std::string_view aligned_text);

/// Rewrites "Label: x" answer lines to the contract's label word; other contracts pass through.
std::string relabel_direct_answer(const OutputContract& contract, std::string_view raw);

/// Drops markdown code fences around a generated program.
std::string strip_code_fences(std::string_view text);

/// Turns an executor result string into the contract's answer line. ID lists are
/// mapped onto the table's first-column values. Throws std::invalid_argument.
std::string render_exec_result(const OutputContract& contract, std::string_view result, const Table& table);

// ---- stages ----

std::string plan(const TaskInstance& instance, ChatBackend& backend, const PromptSettings& settings = {});
std::string align(std::string_view plan_text, const Table& table, ChatBackend& backend,
                  const PromptSettings& settings = {});
/// Returns the raw final answer and fills the decision fields of `trace`.
/// Throws ExecutorUnavailable when code is chosen, no executor is available, and fallback is off.
std::string decide_and_execute(std::string_view aligned_text, const TaskInstance& instance, ChatBackend& backend,
                               Executor* executor, const PipelineOptions& options, PipelineTrace& trace);

/// Never throws for stage failures; they end as an Invalid answer with trace.error set.
std::pair<ParsedAnswer, PipelineTrace> run_pipeline(const TaskInstance& instance, ChatBackend& backend,
                                                    Executor* executor, const PipelineOptions& options = {});

}  // namespace ehrbench
