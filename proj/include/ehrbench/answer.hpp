#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ehrbench/decimal.hpp"
#include "ehrbench/task.hpp"

namespace ehrbench {

// ---- output contracts ----

/// "<tag>: ID1,ID2,..." with "NULL" for the empty list.
struct IdListContract {
    std::string tag;
    bool operator==(const IdListContract&) const = default;
};

/// "<tag>: <number>" at a fixed scale. Untagged contracts render the bare number
/// but still accept the tag prefix when parsing.
struct NumberContract {
    std::string tag;
    int scale = 0;
    bool tagged = true;
    bool operator==(const NumberContract&) const = default;
};

/// "<label>: 0" or "<label>: 1".
struct BinaryLabelContract {
    std::string label;
    bool operator==(const BinaryLabelContract&) const = default;
};

/// One word: "Alive" or "Expired".
struct AliveExpiredContract {
    bool operator==(const AliveExpiredContract&) const = default;
};

/// Ten 0/1 values.
struct TenBitsContract {
    bool operator==(const TenBitsContract&) const = default;
};

using OutputContract =
    std::variant<IdListContract, NumberContract, BinaryLabelContract, AliveExpiredContract, TenBitsContract>;

/// Contract of a (task, flavor) pair. K-U1 needs the concept's label word.
OutputContract contract_for(TaskId task, Flavor flavor, std::string_view label_word = {});

/// Stable text form, e.g. "idlist/D-U1", "number/D-R2/1", "number-bare/D-R1/0",
/// "label/Death", "alive-expired", "ten-bits".
std::string contract_tag(const OutputContract& contract);
/// Throws std::invalid_argument.
OutputContract parse_contract_tag(std::string_view tag);

// ---- answers ----

struct IdSet {
    std::vector<std::string> ids;
    bool operator==(const IdSet&) const = default;
};
struct Number {
    Decimal value;
    bool operator==(const Number&) const = default;
};
struct Binary {
    int value = 0;
    bool operator==(const Binary&) const = default;
};
struct BinaryVector {
    Bits10 bits{};
    bool operator==(const BinaryVector&) const = default;
};
/// "Alive" or "Expired".
struct Word {
    std::string value;
    bool operator==(const Word&) const = default;
};
struct Invalid {
    std::string reason;
    bool operator==(const Invalid&) const = default;
};

using GoldAnswer = std::variant<IdSet, Number, Binary, BinaryVector, Word>;
using ParsedAnswer = std::variant<IdSet, Number, Binary, BinaryVector, Word, Invalid>;

inline bool is_invalid(const ParsedAnswer& a) { return std::holds_alternative<Invalid>(a); }
ParsedAnswer to_parsed(const GoldAnswer& gold);

/// Renders an answer in its contract's answer line. Invalid renders as "INVALID: <reason>".
std::string render_answer(const OutputContract& contract, const ParsedAnswer& answer);
inline std::string render_answer(const OutputContract& contract, const GoldAnswer& gold) {
    return render_answer(contract, to_parsed(gold));
}

// ---- parsing and grading ----

/// Strict: the whole output is one matching line.
/// Standard: the last line that matches the contract in full.
/// Loose: Standard, else the contract pattern anywhere in the last five lines.
enum class Leniency { Strict, Standard, Loose };

std::string_view to_string(Leniency l);

/// Total over arbitrary input; failures are returned as Invalid.
ParsedAnswer parse_answer(const OutputContract& contract, std::string_view raw,
                          Leniency leniency = Leniency::Standard);

enum class Outcome { Correct, Incorrect, Invalid };

std::string_view to_string(Outcome o);

struct Grade {
    Outcome outcome = Outcome::Invalid;
    /// Per-position outcomes; filled for BinaryVector golds only.
    std::vector<Outcome> positions;
};

class ContractMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// IdSet compares as a set, Number by value at the contract scale, vectors per position.
/// Throws ContractMismatch when a valid parsed answer has a different kind than the gold.
Grade grade(const GoldAnswer& gold, const ParsedAnswer& parsed);

}  // namespace ehrbench
