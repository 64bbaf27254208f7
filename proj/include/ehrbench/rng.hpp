#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ehrbench {

/// One step of SplitMix64 (Steele, Lea & Flood 2014). Advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a base seed and a path of stream
/// labels, e.g. derive_seed(base, {domain, task, flavor, index}). Each label is
/// folded in with a SplitMix64 step, so the result is stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// MT19937-64 with hand-written bounded draws. The standard distributions are
/// implementation-defined, so every draw here is specified explicitly to keep
/// generated data identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] by rejection sampling.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1) from the top 53 bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    template <typename T>
    const T& pick(std::span<const T> items) {
        if (items.empty()) throw std::invalid_argument("pick from empty range");
        return items[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(items.size()) - 1))];
    }
    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return pick(std::span<const T>(items));
    }

    /// Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ehrbench
