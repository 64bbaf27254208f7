#include "ehrbench/metrics.hpp"

#include <algorithm>

namespace ehrbench {

namespace {

bool too_many_invalid(std::size_t invalid, std::size_t total, const MetricOptions& o) {
    return static_cast<double>(invalid) > o.invalid_threshold * static_cast<double>(total);
}

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw MetricError(MetricError::Kind::LengthMismatch, "golds and predictions differ in length");
}

struct Confusion {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

    double balanced() const {
        const double sens = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double spec = tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
        return 100.0 * (sens + spec) / 2.0;
    }
    void add(int gold, int pred) {
        if (gold)
            (pred ? tp : fn)++;
        else
            (pred ? fp : tn)++;
    }
};

}  // namespace

TaskScore accuracy(TaskId task, std::span<const Outcome> outcomes, const MetricOptions& options) {
    if (outcomes.empty()) throw MetricError(MetricError::Kind::EmptyInput, "no outcomes to score");
    TaskScore s{task, MetricKind::Accuracy, std::nullopt, outcomes.size(), 0};
    std::size_t correct = 0;
    for (auto o : outcomes) {
        correct += o == Outcome::Correct;
        s.n_invalid += o == Outcome::Invalid;
    }
    if (!too_many_invalid(s.n_invalid, s.n_total, options))
        s.value = 100.0 * static_cast<double>(correct) / static_cast<double>(s.n_total);
    return s;
}

TaskScore balanced_auc(TaskId task, std::span<const int> golds, std::span<const std::optional<int>> preds,
                       const MetricOptions& options) {
    require_same_length(golds.size(), preds.size());
    if (golds.empty()) throw MetricError(MetricError::Kind::EmptyInput, "no labels to score");
    const bool has_pos = std::any_of(golds.begin(), golds.end(), [](int g) { return g != 0; });
    const bool has_neg = std::any_of(golds.begin(), golds.end(), [](int g) { return g == 0; });
    if (!has_pos || !has_neg) throw MetricError(MetricError::Kind::SingleClassGolds, "golds hold a single class");
    TaskScore s{task, MetricKind::Auc, std::nullopt, golds.size(), 0};
    Confusion c;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (!preds[i]) {
            ++s.n_invalid;
            continue;
        }
        c.add(golds[i] != 0, *preds[i] != 0);
    }
    if (s.n_invalid < s.n_total && !too_many_invalid(s.n_invalid, s.n_total, options)) s.value = c.balanced();
    return s;
}

TaskScore multilabel_auc(TaskId task, std::span<const Bits10> golds, std::span<const std::optional<Bits10>> preds,
                         const MetricOptions& options) {
    require_same_length(golds.size(), preds.size());
    if (golds.empty()) throw MetricError(MetricError::Kind::EmptyInput, "no label vectors to score");
    TaskScore s{task, MetricKind::Auc, std::nullopt, golds.size(), 0};
    for (const auto& p : preds) s.n_invalid += !p.has_value();
    double total = 0;
    std::size_t scorable = 0;
    for (std::size_t k = 0; k < 10; ++k) {
        bool pos = false, neg = false;
        for (const auto& g : golds) (g[k] ? pos : neg) = true;
        if (!pos || !neg) continue;
        ++scorable;
        Confusion c;
        for (std::size_t i = 0; i < golds.size(); ++i)
            if (preds[i]) c.add(golds[i][k], (*preds[i])[k]);
        total += c.balanced();
    }
    if (scorable == 0) throw MetricError(MetricError::Kind::NoScorablePosition, "no position holds both classes");
    if (s.n_invalid < s.n_total && !too_many_invalid(s.n_invalid, s.n_total, options))
        s.value = total / static_cast<double>(scorable);
    return s;
}

double relative_gain(double base, double method) {
    if (base >= 100.0) throw MetricError(MetricError::Kind::BaseAtCeiling, "base score is already 100");
    return std::max(0.0, 100.0 * (method - base) / (100.0 - base));
}

double relative_gain(const TaskScore& base, const TaskScore& method) {
    if (!base.value || !method.value)
        throw MetricError(MetricError::Kind::NonNumeric, "relative gain needs two numeric scores");
    return relative_gain(*base.value, *method.value);
}

TaskScore score_answers(TaskId task, std::span<const GoldAnswer> golds, std::span<const ParsedAnswer> parsed,
                        const MetricOptions& options) {
    require_same_length(golds.size(), parsed.size());
    if (golds.empty()) throw MetricError(MetricError::Kind::EmptyInput, "no answers to score");
    if (info(task).metric == MetricKind::Accuracy) {
        std::vector<Outcome> outcomes;
        for (std::size_t i = 0; i < golds.size(); ++i) outcomes.push_back(grade(golds[i], parsed[i]).outcome);
        return accuracy(task, outcomes, options);
    }
    if (std::holds_alternative<BinaryVector>(golds.front())) {
        std::vector<Bits10> g;
        std::vector<std::optional<Bits10>> p;
        for (std::size_t i = 0; i < golds.size(); ++i) {
            grade(golds[i], parsed[i]);  // kind check
            g.push_back(std::get<BinaryVector>(golds[i]).bits);
            if (const auto* v = std::get_if<BinaryVector>(&parsed[i]))
                p.emplace_back(v->bits);
            else
                p.emplace_back(std::nullopt);
        }
        return multilabel_auc(task, g, p, options);
    }
    const auto as_bit = [](const auto& a) -> std::optional<int> {
        if (const auto* b = std::get_if<Binary>(&a)) return b->value;
        if (const auto* w = std::get_if<Word>(&a)) return w->value == "Expired" ? 1 : 0;
        return std::nullopt;
    };
    std::vector<int> g;
    std::vector<std::optional<int>> p;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        grade(golds[i], parsed[i]);
        const auto gb = as_bit(golds[i]);
        if (!gb) throw ContractMismatch("K-task gold is not a binary label");
        g.push_back(*gb);
        p.push_back(as_bit(parsed[i]));
    }
    return balanced_auc(task, g, p, options);
}

}  // namespace ehrbench
