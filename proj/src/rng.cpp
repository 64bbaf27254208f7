#include "ehrbench/rng.hpp"

namespace ehrbench {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = base;
    std::uint64_t out = splitmix64(state);
    for (const auto label : path) {
        state = out ^ (label * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
        out = splitmix64(state);
    }
    return out;
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~0ULL) return static_cast<std::int64_t>(next());
    const std::uint64_t n = span + 1;
    const std::uint64_t limit = (~0ULL) - ((~0ULL) % n + 1) % n;  // largest multiple of n, minus one
    std::uint64_t x;
    do {
        x = next();
    } while (x > limit);
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % n);
}

}  // namespace ehrbench
