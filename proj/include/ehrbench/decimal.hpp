#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ehrbench {

/// Fixed-point number: value = mantissa / 10^scale.
///
/// Scale is part of the value's identity: Decimal{340, 1} ("34.0") and
/// Decimal{34, 0} ("34") render differently and compare unequal under
/// operator==. Use numeric_compare() for value ordering.
struct Decimal {
    std::int64_t mantissa = 0;
    int scale = 0;

    static constexpr int kMaxScale = 12;

    /// Parses "-?digits(.digits)?". Thousands separators are not accepted here.
    static std::optional<Decimal> parse(std::string_view text);

    std::string to_string() const;

    /// Same value at a larger scale. Throws std::invalid_argument when
    /// target < scale.
    Decimal rescaled(int target) const;

    /// Rounds half away from zero to the target scale (no-op when target >= scale
    /// except for padding).
    Decimal rounded(int target) const;

    /// Removes trailing fractional zeros.
    Decimal trimmed() const;

    /// mantissa / (divisor * 10^scale), rounded half away from zero to target scale.
    Decimal divided(std::int64_t divisor, int target) const;

    bool operator==(const Decimal&) const = default;
};

Decimal operator+(const Decimal& a, const Decimal& b);
Decimal operator-(const Decimal& a, const Decimal& b);
Decimal operator-(const Decimal& a);

std::strong_ordering numeric_compare(const Decimal& a, const Decimal& b);

}  // namespace ehrbench
