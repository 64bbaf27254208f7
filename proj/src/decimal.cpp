#include "ehrbench/decimal.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace ehrbench {

namespace {

std::int64_t pow10(int exp) {
    std::int64_t p = 1;
    for (int i = 0; i < exp; ++i) p *= 10;
    return p;
}

std::int64_t checked(__int128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error("decimal overflow");
    return static_cast<std::int64_t>(v);
}

// Rounds num/den half away from zero. den > 0.
__int128 div_round(__int128 num, __int128 den) {
    const bool neg = num < 0;
    __int128 a = neg ? -num : num;
    __int128 q = a / den;
    if ((a % den) * 2 >= den) ++q;
    return neg ? -q : q;
}

}  // namespace

std::optional<Decimal> Decimal::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-') {
        neg = true;
        i = 1;
    }
    __int128 m = 0;
    int scale = 0;
    bool seen_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_dot || !seen_digit) return std::nullopt;
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        seen_digit = true;
        m = m * 10 + (c - '0');
        if (m > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
        if (seen_dot && ++scale > kMaxScale) return std::nullopt;
    }
    if (!seen_digit || text.back() == '.') return std::nullopt;
    return Decimal{static_cast<std::int64_t>(neg ? -m : m), scale};
}

std::string Decimal::to_string() const {
    const bool neg = mantissa < 0;
    unsigned long long mag = neg ? 0ULL - static_cast<unsigned long long>(mantissa)
                                 : static_cast<unsigned long long>(mantissa);
    std::string digits = std::to_string(mag);
    if (scale > 0) {
        if (static_cast<int>(digits.size()) <= scale)
            digits.insert(0, static_cast<std::size_t>(scale) + 1 - digits.size(), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(scale), 1, '.');
    }
    return neg ? "-" + digits : digits;
}

Decimal Decimal::rescaled(int target) const {
    if (target < scale) throw std::invalid_argument("rescale would drop digits");
    if (target > kMaxScale) throw std::invalid_argument("scale too large");
    return Decimal{checked(static_cast<__int128>(mantissa) * pow10(target - scale)), target};
}

Decimal Decimal::rounded(int target) const {
    if (target >= scale) return rescaled(target);
    return Decimal{checked(div_round(mantissa, pow10(scale - target))), target};
}

Decimal Decimal::trimmed() const {
    Decimal d = *this;
    while (d.scale > 0 && d.mantissa % 10 == 0) {
        d.mantissa /= 10;
        --d.scale;
    }
    return d;
}

Decimal Decimal::divided(std::int64_t divisor, int target) const {
    if (divisor == 0) throw std::domain_error("division by zero");
    if (target > kMaxScale) throw std::invalid_argument("scale too large");
    __int128 num = mantissa;
    __int128 den = divisor;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    // value * 10^target = mantissa * 10^target / (divisor * 10^scale)
    if (target >= scale)
        num *= pow10(target - scale);
    else
        den *= pow10(scale - target);
    return Decimal{checked(div_round(num, den)), target};
}

Decimal operator+(const Decimal& a, const Decimal& b) {
    const int s = std::max(a.scale, b.scale);
    const Decimal x = a.rescaled(s);
    const Decimal y = b.rescaled(s);
    return Decimal{checked(static_cast<__int128>(x.mantissa) + y.mantissa), s};
}

Decimal operator-(const Decimal& a) { return Decimal{checked(-static_cast<__int128>(a.mantissa)), a.scale}; }

Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }

std::strong_ordering numeric_compare(const Decimal& a, const Decimal& b) {
    const int s = std::max(a.scale, b.scale);
    const __int128 x = static_cast<__int128>(a.mantissa) * pow10(s - a.scale);
    const __int128 y = static_cast<__int128>(b.mantissa) * pow10(s - b.scale);
    return x <=> y;
}

}  // namespace ehrbench
