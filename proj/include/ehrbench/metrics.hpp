#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrbench/answer.hpp"
#include "ehrbench/task.hpp"

namespace ehrbench {

class MetricError : public std::runtime_error {
public:
    enum class Kind { EmptyInput, LengthMismatch, SingleClassGolds, NoScorablePosition, BaseAtCeiling, NonNumeric };
    MetricError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct MetricOptions {
    /// A task reports no valid output when more than this share of outputs is Invalid.
    double invalid_threshold = 0.5;
};

struct TaskScore {
    TaskId task = TaskId::DU1;
    MetricKind metric = MetricKind::Accuracy;
    std::optional<double> value;  // nullopt: no valid output
    std::size_t n_total = 0;
    std::size_t n_invalid = 0;

    bool no_valid_output() const { return !value.has_value(); }
    bool operator==(const TaskScore&) const = default;
};

/// 100 * correct / all; Invalid counts as not correct.
TaskScore accuracy(TaskId task, std::span<const Outcome> outcomes, const MetricOptions& options = {});

/// 100 * (sensitivity + specificity) / 2 over valid predictions (nullopt = Invalid).
/// A class with no valid predictions contributes a rate of 0.
TaskScore balanced_auc(TaskId task, std::span<const int> golds, std::span<const std::optional<int>> preds,
                       const MetricOptions& options = {});

/// Macro mean of per-position balanced accuracy over positions whose golds hold both classes.
TaskScore multilabel_auc(TaskId task, std::span<const Bits10> golds, std::span<const std::optional<Bits10>> preds,
                         const MetricOptions& options = {});

/// 100 * (method - base) / (100 - base), clamped below at 0.
double relative_gain(double base, double method);
double relative_gain(const TaskScore& base, const TaskScore& method);

/// Scores graded answers with the task's metric: accuracy for Data-Driven tasks,
/// balanced AUC for binary K-tasks ("Expired" is the positive class), macro AUC for vectors.
TaskScore score_answers(TaskId task, std::span<const GoldAnswer> golds, std::span<const ParsedAnswer> parsed,
                        const MetricOptions& options = {});

}  // namespace ehrbench
