#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ehrbench/answer.hpp"
#include "ehrbench/formats.hpp"
#include "ehrbench/table.hpp"
#include "ehrbench/task.hpp"

namespace ehrbench {

/// D-U filter: case-insensitive equalities plus one numeric comparison.
/// Numeric cells of the form "> N" (eICU ages) count as N + 1.
struct RowFilter {
    std::vector<std::pair<std::string, std::string>> equals;
    std::string numeric_column;
    CompareOp op = CompareOp::Gt;
    std::int64_t threshold = 0;

    bool operator==(const RowFilter&) const = default;
};

struct TaskParams {
    std::string patient_id;  // D-R*
    RowFilter filter;        // D-U*
    std::string concept_id;  // K-U1

    bool operator==(const TaskParams&) const = default;
};

class OracleError : public std::runtime_error {
public:
    enum class Kind { SchemaMismatch, MissingTarget };
    OracleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Column names a task expects for a flavor.
std::vector<std::string> expected_columns(TaskId task, Flavor flavor);

/// Gold answer computed from the table. K-R labels follow the synth labeling rules.
GoldAnswer oracle(TaskId task, Flavor flavor, const Table& table, const TaskParams& params);

struct TaskInstance {
    TaskId task = TaskId::DU1;
    Flavor flavor = Flavor::Synthea;
    std::uint64_t seed = 0;
    std::string instance_id;
    Table table;
    TaskParams params;
    std::string preamble;     // text above the table, may be empty
    std::string instruction;  // text below the table, ends with the output-format block
    OutputContract contract;
    GoldAnswer gold;
};

/// Seed domains keep evaluation, fine-tune and exemplar streams apart.
enum class SeedDomain : std::uint64_t { Eval = 0, Finetune = 1, Pool = 2 };

std::string_view to_string(SeedDomain d);

/// SHA-256 of the table's TSV rendering.
std::string table_hash(const Table& table);

/// `n` instances. Candidates whose table hash is in `exclude` are skipped.
std::vector<TaskInstance> synthesize(TaskId task, Flavor flavor, std::uint64_t seed, std::size_t n,
                                     SeedDomain domain = SeedDomain::Eval,
                                     const std::set<std::string>& exclude = {});

/// Every task and flavor, `per_task` instances each, in kAllFlavors x kAllTasks order.
std::vector<TaskInstance> synthesize_all(std::uint64_t seed, std::size_t per_task = 100);

inline constexpr std::size_t kFinetunePerTask = 30;

/// 30 fine-tune instances from the Finetune seed domain, disjoint by table hash from `eval_hashes`.
std::vector<TaskInstance> export_finetune_set(TaskId task, Flavor flavor, std::uint64_t seed,
                                              const std::set<std::string>& eval_hashes);

/// Preamble, "Table:" block in the given format, then the instruction.
std::string bare_prompt(const TaskInstance& instance, InputFormat format = InputFormat::PlainText);

/// One JSON object, no trailing newline.
std::string instance_to_jsonl(const TaskInstance& instance);
/// Throws std::invalid_argument on malformed records.
TaskInstance instance_from_jsonl(std::string_view line);

/// {"instance_id", "task", "flavor", "instruction", "response"}, one line.
std::string finetune_to_jsonl(const TaskInstance& instance);

}  // namespace ehrbench
