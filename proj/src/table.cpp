#include "ehrbench/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>

namespace ehrbench {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// "-?(0|[1-9][0-9]*)", excluding "-0": the forms render_cell produces.
bool canonical_integer(std::string_view s) {
    const bool neg = !s.empty() && s[0] == '-';
    const std::string_view digits = neg ? s.substr(1) : s;
    if (!all_digits(digits)) return false;
    if (digits.size() > 1 && digits[0] == '0') return false;
    if (neg && digits == "0") return false;
    return true;
}

bool canonical_decimal(std::string_view s) {
    const auto dot = s.find('.');
    if (dot == std::string_view::npos) return false;
    const std::string_view whole = s.substr(0, dot);
    const std::string_view frac = s.substr(dot + 1);
    if (!all_digits(frac) || frac.size() > static_cast<std::size_t>(Decimal::kMaxScale)) return false;
    const bool neg = !whole.empty() && whole[0] == '-';
    const std::string_view digits = neg ? whole.substr(1) : whole;
    if (!all_digits(digits) || (digits.size() > 1 && digits[0] == '0')) return false;
    if (neg && std::all_of(s.begin() + 1, s.end(), [](char c) { return c == '0' || c == '.'; })) return false;
    return true;
}

std::optional<std::int64_t> to_int64(std::string_view s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool valid_text(std::string_view s) { return s.find_first_of("\t\n\r") == std::string_view::npos; }

CellType infer_column(const std::vector<std::vector<std::string_view>>& rows, std::size_t col) {
    bool any = false;
    bool all_int = true;
    bool all_num = true;
    bool all_date = true;
    for (const auto& r : rows) {
        const auto f = r[col];
        if (f.empty()) continue;
        any = true;
        const bool is_int = canonical_integer(f) && to_int64(f).has_value();
        const bool is_dec = canonical_decimal(f) && Decimal::parse(f).has_value();
        all_int = all_int && is_int;
        all_num = all_num && (is_int || is_dec);
        all_date = all_date && Date::parse(f).has_value();
    }
    if (!any) return CellType::Text;
    if (all_int) return CellType::Integer;
    if (all_num) return CellType::Decimal;
    if (all_date) return CellType::Date;
    return CellType::Text;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10) return std::nullopt;
    const char sep = text[4];
    if ((sep != '-' && sep != '/') || text[7] != sep) return std::nullopt;
    const auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
    Date out{static_cast<int>(*to_int64(y)), static_cast<int>(*to_int64(m)), static_cast<int>(*to_int64(d))};
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (out.month < 1 || out.month > 12) return std::nullopt;
    const bool leap = (out.year % 4 == 0 && out.year % 100 != 0) || out.year % 400 == 0;
    const int max_day = kDays[out.month - 1] + (out.month == 2 && leap ? 1 : 0);
    if (out.day < 1 || out.day > max_day) return std::nullopt;
    return out;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string_view to_string(CellType t) {
    switch (t) {
        case CellType::Text: return "text";
        case CellType::Integer: return "integer";
        case CellType::Decimal: return "decimal";
        case CellType::Date: return "date";
    }
    return "text";
}

std::optional<CellType> type_of(const CellValue& v) {
    switch (v.index()) {
        case 1: return CellType::Text;
        case 2: return CellType::Integer;
        case 3: return CellType::Decimal;
        case 4: return CellType::Date;
        default: return std::nullopt;
    }
}

std::string render_cell(const CellValue& v) {
    struct Visitor {
        std::string operator()(const Empty&) const { return {}; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(const Decimal& d) const { return d.to_string(); }
        std::string operator()(const Date& d) const { return d.iso(); }
    };
    return std::visit(Visitor{}, v);
}

std::optional<Decimal> as_decimal(const CellValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return Decimal{*i, 0};
    if (const auto* d = std::get_if<Decimal>(&v)) return *d;
    return std::nullopt;
}

std::optional<std::strong_ordering> compare_cells(const CellValue& a, const CellValue& b) {
    if (is_empty(a) || is_empty(b)) return std::nullopt;
    const auto da = as_decimal(a), db = as_decimal(b);
    if (da && db) return numeric_compare(*da, *db);
    if (const auto* sa = std::get_if<std::string>(&a))
        if (const auto* sb = std::get_if<std::string>(&b)) return *sa <=> *sb;
    if (const auto* xa = std::get_if<Date>(&a))
        if (const auto* xb = std::get_if<Date>(&b)) return *xa <=> *xb;
    return std::nullopt;
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    std::set<std::string_view> seen;
    for (const auto& c : columns_) {
        if (c.name.empty() || !valid_text(c.name))
            throw TableError(TableError::Kind::InvalidName, "invalid column name '" + c.name + "'");
        if (!seen.insert(c.name).second)
            throw TableError(TableError::Kind::DuplicateColumn, "duplicate column '" + c.name + "'");
    }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
    if (auto i = index_of(name)) return *i;
    throw TableError(TableError::Kind::UnknownColumn, "unknown column '" + std::string(name) + "'");
}

std::vector<std::string> Schema::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

Table::Table(Schema schema, std::vector<Row> rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() != schema_.size())
            throw TableError(TableError::Kind::RaggedRow, "row " + std::to_string(r + 1) + " has " +
                                                              std::to_string(rows_[r].size()) + " cells, expected " +
                                                              std::to_string(schema_.size()));
        for (std::size_t c = 0; c < schema_.size(); ++c) {
            const auto& cell = rows_[r][c];
            const auto t = type_of(cell);
            if (t && *t != schema_.columns()[c].type)
                throw TableError(TableError::Kind::TypeMismatch,
                                 "cell (" + std::to_string(r + 1) + ", " + schema_.columns()[c].name + ") is " +
                                     std::string(to_string(*t)) + ", column is " +
                                     std::string(to_string(schema_.columns()[c].type)));
            if (const auto* s = std::get_if<std::string>(&cell); s && !valid_text(*s))
                throw TableError(TableError::Kind::InvalidCell, "text cell contains a tab or line break");
        }
    }
}

std::string render_tsv(const Table& table) {
    std::string out;
    const auto& cols = table.schema().columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += '\t';
        out += cols[c].name;
    }
    for (const auto& row : table.rows()) {
        out += '\n';
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += '\t';
            out += render_cell(row[c]);
        }
    }
    return out;
}

CellValue parse_cell(std::string_view field, CellType type) {
    if (field.empty()) return Empty{};
    auto mismatch = [&] {
        return TableError(TableError::Kind::TypeMismatch,
                          "'" + std::string(field) + "' is not a valid " + std::string(to_string(type)));
    };
    switch (type) {
        case CellType::Text: return std::string(field);
        case CellType::Integer:
            if (canonical_integer(field))
                if (auto v = to_int64(field)) return *v;
            throw mismatch();
        case CellType::Decimal:
            if (canonical_integer(field) || canonical_decimal(field))
                if (auto d = Decimal::parse(field)) return *d;
            throw mismatch();
        case CellType::Date:
            if (auto d = Date::parse(field)) return *d;
            throw mismatch();
    }
    throw mismatch();
}

Table parse_tsv(std::string_view text, const std::optional<Schema>& type_hints) {
    if (text.empty() || strip_cr(text.substr(0, text.find('\n'))).empty())
        throw TableError(TableError::Kind::EmptyInput, "no header line");
    auto lines = split(text, '\n');
    const auto header = split(strip_cr(lines[0]), '\t');
    if (header.size() > 1 && lines.size() > 1 && lines.back().empty()) lines.pop_back();

    std::vector<std::vector<std::string_view>> fields;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(strip_cr(lines[i]), '\t');
        if (f.size() != header.size())
            throw TableError(TableError::Kind::RaggedRow, "line " + std::to_string(i + 1) + " has " +
                                                              std::to_string(f.size()) + " fields, expected " +
                                                              std::to_string(header.size()));
        fields.push_back(std::move(f));
    }

    std::vector<Column> cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::optional<CellType> hinted;
        if (type_hints)
            if (auto i = type_hints->index_of(header[c])) hinted = type_hints->columns()[*i].type;
        cols.push_back(Column{std::string(header[c]), hinted ? *hinted : infer_column(fields, c)});
    }
    Schema schema(std::move(cols));

    std::vector<Row> rows;
    rows.reserve(fields.size());
    for (const auto& f : fields) {
        Row row;
        row.reserve(f.size());
        for (std::size_t c = 0; c < f.size(); ++c) row.push_back(parse_cell(f[c], schema.columns()[c].type));
        rows.push_back(std::move(row));
    }
    return Table(std::move(schema), std::move(rows));
}

bool matches(const CellValue& cell, CompareOp op, const CellValue& operand) {
    const auto ord = compare_cells(cell, operand);
    if (!ord) return false;
    switch (op) {
        case CompareOp::Eq: return *ord == 0;
        case CompareOp::Ne: return *ord != 0;
        case CompareOp::Lt: return *ord < 0;
        case CompareOp::Le: return *ord <= 0;
        case CompareOp::Gt: return *ord > 0;
        case CompareOp::Ge: return *ord >= 0;
    }
    return false;
}

Table filter_rows(const Table& table, std::span<const Condition> all_of) {
    std::vector<std::size_t> idx;
    for (const auto& c : all_of) idx.push_back(table.schema().require(c.column));
    std::vector<Row> kept;
    for (const auto& row : table.rows()) {
        bool keep = true;
        for (std::size_t i = 0; i < all_of.size() && keep; ++i)
            keep = matches(row[idx[i]], all_of[i].op, all_of[i].operand);
        if (keep) kept.push_back(row);
    }
    return Table(table.schema(), std::move(kept));
}

Table filter_rows(const Table& table, const std::function<bool(const RowView&)>& predicate) {
    std::vector<Row> kept;
    for (const auto& row : table.rows())
        if (predicate(RowView(table.schema(), row))) kept.push_back(row);
    return Table(table.schema(), std::move(kept));
}

}  // namespace ehrbench
