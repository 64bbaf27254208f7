#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ehrbench/decimal.hpp"

namespace ehrbench {

struct Empty {
    bool operator==(const Empty&) const = default;
};

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    /// Accepts "YYYY-MM-DD" and "YYYY/MM/DD".
    static std::optional<Date> parse(std::string_view text);
    std::string iso() const;

    auto operator<=>(const Date&) const = default;
};

enum class CellType { Text, Integer, Decimal, Date };

std::string_view to_string(CellType t);

/// Empty is a distinct alternative; it is never equal to Text("").
using CellValue = std::variant<Empty, std::string, std::int64_t, Decimal, Date>;

inline bool is_empty(const CellValue& v) { return std::holds_alternative<Empty>(v); }

/// Type tag of a non-empty cell; nullopt for Empty.
std::optional<CellType> type_of(const CellValue& v);

/// Text form used by every serializer. Empty renders as "", dates as ISO.
std::string render_cell(const CellValue& v);

/// Numeric view of Integer/Decimal cells.
std::optional<Decimal> as_decimal(const CellValue& v);

/// nullopt when the two cells are not comparable (either Empty, or text vs number).
std::optional<std::strong_ordering> compare_cells(const CellValue& a, const CellValue& b);

class TableError : public std::runtime_error {
public:
    enum class Kind { EmptyInput, RaggedRow, DuplicateColumn, UnknownColumn, TypeMismatch, InvalidName, InvalidCell };

    TableError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct Column {
    std::string name;
    CellType type = CellType::Text;

    bool operator==(const Column&) const = default;
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Column> columns);

    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::size_t size() const noexcept { return columns_.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    /// Throws TableError(UnknownColumn).
    std::size_t require(std::string_view name) const;
    std::vector<std::string> names() const;

    bool operator==(const Schema&) const = default;

private:
    std::vector<Column> columns_;
};

using Row = std::vector<CellValue>;

/// Immutable rectangular relation. The constructor enforces that every row has
/// schema().size() cells and that each cell is Empty or of its column's type.
class Table {
public:
    Table() = default;
    Table(Schema schema, std::vector<Row> rows);

    const Schema& schema() const noexcept { return schema_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::size_t column_count() const noexcept { return schema_.size(); }

    const CellValue& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
    const CellValue& at(std::size_t row, std::string_view column) const {
        return rows_.at(row).at(schema_.require(column));
    }

    bool operator==(const Table&) const = default;

private:
    Schema schema_;
    std::vector<Row> rows_;
};

/// Header line then one line per row, tab-delimited, LF-separated, no trailing newline.
std::string render_tsv(const Table& table);

/// Parses TSV text. Columns named in `type_hints` take the hinted type (cells that
/// do not conform raise TypeMismatch); all other columns are inferred: canonical
/// integers -> Integer, numbers with a fraction -> Decimal, dates -> Date, else Text.
/// Blank fields become Empty. A single trailing newline is ignored for tables with
/// more than one column.
Table parse_tsv(std::string_view text, const std::optional<Schema>& type_hints = std::nullopt);

/// Parses one field under a declared type. Blank -> Empty. Throws TypeMismatch.
CellValue parse_cell(std::string_view field, CellType type);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Condition {
    std::string column;
    CompareOp op = CompareOp::Eq;
    CellValue operand;
};

/// Read-only access to one row by column name.
class RowView {
public:
    RowView(const Schema& schema, const Row& row) : schema_(&schema), row_(&row) {}
    const CellValue& operator[](std::string_view column) const { return (*row_)[schema_->require(column)]; }
    const Row& cells() const noexcept { return *row_; }

private:
    const Schema* schema_;
    const Row* row_;
};

/// True when the cell satisfies the condition. Incomparable pairs never match.
bool matches(const CellValue& cell, CompareOp op, const CellValue& operand);

/// Conjunction of conditions; an empty span keeps every row.
Table filter_rows(const Table& table, std::span<const Condition> all_of);
Table filter_rows(const Table& table, const std::function<bool(const RowView&)>& predicate);

}  // namespace ehrbench
