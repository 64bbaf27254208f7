#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ehrbench/table.hpp"

namespace ehrbench {

enum class InputFormat { PlainText, SpecialChar, GraphStructured, NaturalLanguage };

inline constexpr std::array<InputFormat, 4> kAllFormats = {InputFormat::PlainText, InputFormat::SpecialChar,
                                                           InputFormat::GraphStructured, InputFormat::NaturalLanguage};

/// "plain", "special", "graph", "nl".
std::string_view to_string(InputFormat f);
std::optional<InputFormat> parse_format(std::string_view text);

/// PlainText: TSV.
/// SpecialChar: cells joined by " | ", header followed by a "--- | ---" rule; '|' inside
///   names and values is doubled.
/// GraphStructured: "(row_<i>) -[<column>]-> <value>" per non-empty cell, rows 1-indexed;
///   ']' inside column names is doubled; a row with no values renders as "(row_<i>)".
/// NaturalLanguage: one sentence per row from a per-schema template; other schemas and
///   rows with empty cells use "Row <i>: <col> is <value>; ...".
std::string serialize(const Table& table, InputFormat format);

/// Inverse of serialize for PlainText, SpecialChar and GraphStructured. Column names
/// and types come from `schema`. Throws TableError(InvalidCell) on malformed text and
/// std::invalid_argument for NaturalLanguage.
Table deserialize(std::string_view text, InputFormat format, const Schema& schema);

/// True when every non-empty cell's value (or its escaped form) occurs in `rendered`.
bool content_complete(const Table& table, std::string_view rendered);

}  // namespace ehrbench
