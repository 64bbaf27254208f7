#include <doctest.h>

#include <cmath>

#include "ehrbench/metrics.hpp"
#include "ehrbench/rng.hpp"

using namespace ehrbench;

namespace {

std::vector<Outcome> outcomes(std::size_t correct, std::size_t incorrect, std::size_t invalid) {
    std::vector<Outcome> v(correct, Outcome::Correct);
    v.insert(v.end(), incorrect, Outcome::Incorrect);
    v.insert(v.end(), invalid, Outcome::Invalid);
    return v;
}

std::vector<std::optional<int>> opt(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// Per-class accuracy, averaged.
double brute_balanced(const std::vector<int>& golds, const std::vector<int>& preds) {
    double pos_hits = 0, pos = 0, neg_hits = 0, neg = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (golds[i]) {
            pos += 1;
            pos_hits += preds[i] == 1;
        } else {
            neg += 1;
            neg_hits += preds[i] == 0;
        }
    }
    return (100.0 * pos_hits / pos + 100.0 * neg_hits / neg) / 2.0;
}

}  // namespace

TEST_CASE("accuracy") {
    CHECK(*accuracy(TaskId::DU1, outcomes(100, 0, 0)).value == 100.0);
    CHECK(*accuracy(TaskId::DU1, outcomes(79, 21, 0)).value == 79.0);
    CHECK(accuracy(TaskId::DU1, outcomes(0, 0, 100)).no_valid_output());
    const auto half = accuracy(TaskId::DU1, outcomes(30, 20, 50));
    CHECK(*half.value == 30.0);
    CHECK(half.n_invalid == 50);
    CHECK(accuracy(TaskId::DU1, outcomes(30, 19, 51)).no_valid_output());
    CHECK(*accuracy(TaskId::DU1, outcomes(30, 19, 51), MetricOptions{0.9}).value == 30.0);
    try {
        accuracy(TaskId::DU1, {});
        FAIL("expected EmptyInput");
    } catch (const MetricError& e) {
        CHECK(e.kind() == MetricError::Kind::EmptyInput);
    }
}

TEST_CASE("balanced auc") {
    const std::vector<int> golds = {0, 0, 1, 1};
    CHECK(*balanced_auc(TaskId::KR1, golds, opt(golds)).value == 100.0);
    CHECK(*balanced_auc(TaskId::KR1, golds, opt({1, 1, 1, 1})).value == 50.0);
    CHECK(*balanced_auc(TaskId::KR1, golds, opt({1, 0, 1, 1})).value == 75.0);
    std::vector<std::optional<int>> with_invalid = {std::nullopt, 0, 1, 1};
    const auto s = balanced_auc(TaskId::KR1, golds, with_invalid);
    CHECK(*s.value == 100.0);
    CHECK(s.n_invalid == 1);
    try {
        balanced_auc(TaskId::KR1, std::vector<int>{1, 1}, opt({1, 1}));
        FAIL("expected SingleClassGolds");
    } catch (const MetricError& e) {
        CHECK(e.kind() == MetricError::Kind::SingleClassGolds);
    }
    std::vector<std::optional<int>> all_invalid(4);
    CHECK(balanced_auc(TaskId::KR1, golds, all_invalid).no_valid_output());
}

TEST_CASE("balanced auc properties") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform(2, 60));
        std::vector<int> g(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rng.bernoulli(0.5);
            p[i] = rng.bernoulli(0.5);
        }
        g[0] = 0;
        g[1] = 1;
        const double v = *balanced_auc(TaskId::KR1, g, opt(p)).value;
        CHECK(std::fabs(v - brute_balanced(g, p)) < 1e-9);
        CHECK(v >= 0.0);
        CHECK(v <= 100.0);
        std::vector<int> gs(n), ps(n);
        for (std::size_t i = 0; i < n; ++i) {
            gs[i] = 1 - g[i];
            ps[i] = 1 - p[i];
        }
        CHECK(std::fabs(*balanced_auc(TaskId::KR1, gs, opt(ps)).value - v) < 1e-9);
    }
}

TEST_CASE("multilabel auc") {
    std::vector<Bits10> golds(4, Bits10{});
    golds[0][0] = 1;
    golds[1][0] = 1;
    golds[0][1] = 1;
    golds[1][1] = 1;
    std::vector<std::optional<Bits10>> perfect(golds.begin(), golds.end());
    CHECK(*multilabel_auc(TaskId::KR2, golds, perfect).value == 100.0);

    // Position 0 perfect (100), position 1 constant 1 (50), the rest single-class.
    std::vector<std::optional<Bits10>> preds = perfect;
    for (auto& p : preds) (*p)[1] = 1;
    CHECK(*multilabel_auc(TaskId::KR2, golds, preds).value == 75.0);

    std::vector<Bits10> flat(3, Bits10{});
    std::vector<std::optional<Bits10>> flat_p(flat.begin(), flat.end());
    try {
        multilabel_auc(TaskId::KR2, flat, flat_p);
        FAIL("expected NoScorablePosition");
    } catch (const MetricError& e) {
        CHECK(e.kind() == MetricError::Kind::NoScorablePosition);
    }
}

TEST_CASE("relative gain") {
    CHECK(std::fabs(relative_gain(64.0, 98.0) - 94.4444) < 0.001);
    CHECK(relative_gain(64.0, 64.0) == 0.0);
    CHECK(relative_gain(64.0, 100.0) == 100.0);
    CHECK(relative_gain(64.0, 50.0) == 0.0);
    CHECK_THROWS_AS(relative_gain(100.0, 100.0), MetricError);
    TaskScore none{TaskId::DU1, MetricKind::Accuracy, std::nullopt, 10, 10};
    TaskScore some{TaskId::DU1, MetricKind::Accuracy, 50.0, 10, 0};
    CHECK_THROWS_AS(relative_gain(none, some), MetricError);
}

TEST_CASE("score_answers dispatch") {
    std::vector<GoldAnswer> golds = {Word{"Alive"}, Word{"Expired"}, Word{"Expired"}, Word{"Alive"}};
    std::vector<ParsedAnswer> parsed = {Word{"Alive"}, Word{"Expired"}, Invalid{"x"}, Word{"Expired"}};
    const auto s = score_answers(TaskId::KR1, golds, parsed);
    CHECK(s.metric == MetricKind::Auc);
    CHECK(*s.value == 75.0);
    CHECK(s.n_invalid == 1);

    std::vector<GoldAnswer> d = {Number{Decimal{3, 0}}, Number{Decimal{4, 0}}};
    std::vector<ParsedAnswer> dp = {Number{Decimal{3, 0}}, Invalid{"x"}};
    CHECK(*score_answers(TaskId::DR1, d, dp).value == 50.0);
}
