#include "ehrbench/formats.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace ehrbench {

namespace {

std::string escape_char(std::string_view s, char c) {
    std::string out;
    for (char ch : s) {
        out += ch;
        if (ch == c) out += c;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            return lines;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
}

[[noreturn]] void malformed(const std::string& what) { throw TableError(TableError::Kind::InvalidCell, what); }

// ---- special character ----

std::string special_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += " | ";
        out += escape_char(cells[i], '|');
    }
    return out;
}

std::vector<std::string> split_special(std::string_view line) {
    std::vector<std::string> cells(1);
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c != '|') {
            cells.back() += c;
            continue;
        }
        if (i + 1 < line.size() && line[i + 1] == '|') {
            cells.back() += '|';
            ++i;
            continue;
        }
        // A lone '|' is a delimiter and must be surrounded by single spaces.
        if (cells.back().empty() || cells.back().back() != ' ' || i + 1 >= line.size() || line[i + 1] != ' ')
            malformed("stray '|' in special-character row");
        cells.back().pop_back();
        cells.emplace_back();
        ++i;
    }
    return cells;
}

// ---- graph ----

std::string graph_column(std::string_view name) { return escape_char(name, ']'); }

// ---- natural language ----

struct NlTemplate {
    std::vector<std::string> columns;
    std::string text;  // {COLUMN} placeholders
};

const std::vector<NlTemplate>& nl_templates() {
    static const std::vector<NlTemplate> templates = {
        {{"ID", "RACE", "GENDER", "INCOME"}, "Patient {ID} is a {RACE} {GENDER} with income {INCOME}."},
        {{"patientunitstayid", "gender", "age", "ethnicity", "hospitaldischargestatus"},
         "Patient {patientunitstayid} is a {ethnicity} {gender} aged {age} with hospital discharge status "
         "{hospitaldischargestatus}."},
        {{"PATIENT", "DESCRIPTION", "VALUE", "UNITS", "TYPE"},
         "Patient {PATIENT} has a {TYPE} observation {DESCRIPTION} of {VALUE} {UNITS}."},
        {{"PATIENT", "DESCRIPTION", "UNITS", "VALUE"}, "Patient {PATIENT} has {DESCRIPTION} ({UNITS}) of {VALUE}."},
        {{"START", "STOP", "SYSTEM", "CODE"}, "From {START} to {STOP} the patient had {SYSTEM} code {CODE}."},
        {{"ID", "RACE", "GENDER", "HEALTHCARE", "INCOME"},
         "Patient {ID} is a {RACE} {GENDER} with healthcare expenses {HEALTHCARE} and income {INCOME}."},
        {{"age", "tax", "gender", "patientunitstayid", "admissionweight", "unitvisitnumber", "cost",
          "dischargeweight"},
         "Patient {patientunitstayid} (visit {unitvisitnumber}) is a {gender} aged {age} with tax {tax}, cost {cost}, "
         "admission weight {admissionweight} and discharge weight {dischargeweight}."},
        {{"DATE", "DESCRIPTION", "VALUE", "UNITS"}, "On {DATE} the {DESCRIPTION} was {VALUE} {UNITS}."},
        {{"labid", "patientunitstayid", "labresultoffset", "labtypeid", "labname", "labresult", "labresulttext"},
         "Lab {labid} for stay {patientunitstayid} at offset {labresultoffset} (type {labtypeid}) measured "
         "{labname} as {labresult} ({labresulttext})."},
        {{"ICD9_CODE", "LONG_TITLE"}, "Diagnosis {ICD9_CODE}: {LONG_TITLE}."},
    };
    return templates;
}

const NlTemplate* template_for(const Schema& schema) {
    const auto names = schema.names();
    for (const auto& t : nl_templates())
        if (t.columns == names) return &t;
    return nullptr;
}

std::string fill_row(const NlTemplate& t, const Schema& schema, const Row& row) {
    std::string out;
    const auto& s = t.text;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '{') {
            const auto close = s.find('}', i);
            const auto name = s.substr(i + 1, close - i - 1);
            out += render_cell(row[schema.require(name)]);
            i = close;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string fallback_row(std::size_t index, const Schema& schema, const Row& row) {
    std::string body;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (is_empty(row[c])) continue;
        if (!body.empty()) body += "; ";
        body += schema.columns()[c].name + " is " + render_cell(row[c]);
    }
    if (body.empty()) body = "no recorded values";
    return "Row " + std::to_string(index) + ": " + body + ".";
}

}  // namespace

std::string_view to_string(InputFormat f) {
    switch (f) {
        case InputFormat::PlainText: return "plain";
        case InputFormat::SpecialChar: return "special";
        case InputFormat::GraphStructured: return "graph";
        case InputFormat::NaturalLanguage: return "nl";
    }
    return "?";
}

std::optional<InputFormat> parse_format(std::string_view text) {
    for (auto f : kAllFormats)
        if (to_string(f) == text) return f;
    return std::nullopt;
}

std::string serialize(const Table& table, InputFormat format) {
    const auto& schema = table.schema();
    std::string out;
    switch (format) {
        case InputFormat::PlainText:
            return render_tsv(table);
        case InputFormat::SpecialChar: {
            out = special_line(schema.names());
            out += '\n';
            out += special_line(std::vector<std::string>(schema.size(), "---"));
            for (const auto& row : table.rows()) {
                std::vector<std::string> cells;
                for (const auto& cell : row) cells.push_back(render_cell(cell));
                out += '\n';
                out += special_line(cells);
            }
            return out;
        }
        case InputFormat::GraphStructured: {
            for (std::size_t r = 0; r < table.row_count(); ++r) {
                const std::string node = "(row_" + std::to_string(r + 1) + ")";
                bool any = false;
                for (std::size_t c = 0; c < schema.size(); ++c) {
                    const auto& cell = table.rows()[r][c];
                    if (is_empty(cell)) continue;
                    if (!out.empty()) out += '\n';
                    out += node + " -[" + graph_column(schema.columns()[c].name) + "]-> " + render_cell(cell);
                    any = true;
                }
                if (!any) {
                    if (!out.empty()) out += '\n';
                    out += node;
                }
            }
            return out;
        }
        case InputFormat::NaturalLanguage: {
            const auto* tmpl = template_for(schema);
            for (std::size_t r = 0; r < table.row_count(); ++r) {
                const auto& row = table.rows()[r];
                bool has_empty = false;
                for (const auto& cell : row) has_empty |= is_empty(cell);
                if (r) out += '\n';
                out += (tmpl && !has_empty) ? fill_row(*tmpl, schema, row) : fallback_row(r + 1, schema, row);
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown format");
}

Table deserialize(std::string_view text, InputFormat format, const Schema& schema) {
    std::vector<Row> rows;
    const auto to_row = [&](const std::vector<std::string>& fields) {
        if (fields.size() != schema.size()) malformed("row width does not match schema");
        Row row;
        for (std::size_t c = 0; c < fields.size(); ++c) row.push_back(parse_cell(fields[c], schema.columns()[c].type));
        return row;
    };
    switch (format) {
        case InputFormat::PlainText:
            return parse_tsv(text, schema);
        case InputFormat::SpecialChar: {
            const auto lines = split_lines(text);
            if (lines.size() < 2) malformed("special-character table needs a header and a rule line");
            if (split_special(lines[0]) != schema.names()) malformed("header does not match schema");
            if (lines[1] != special_line(std::vector<std::string>(schema.size(), "---"))) malformed("bad rule line");
            for (std::size_t i = 2; i < lines.size(); ++i) rows.push_back(to_row(split_special(lines[i])));
            return Table(schema, std::move(rows));
        }
        case InputFormat::GraphStructured: {
            if (text.empty()) return Table(schema, {});
            for (auto line : split_lines(text)) {
                if (line.substr(0, 5) != "(row_") malformed("graph line must start with (row_");
                const auto close = line.find(')');
                if (close == std::string_view::npos || close == 5) malformed("bad row node");
                std::size_t index = 0;
                for (std::size_t i = 5; i < close; ++i) {
                    if (line[i] < '0' || line[i] > '9') malformed("bad row index");
                    index = index * 10 + static_cast<std::size_t>(line[i] - '0');
                }
                if (index != rows.size() && index != rows.size() + 1) malformed("graph rows out of order");
                if (index == rows.size() + 1) rows.emplace_back(schema.size(), Empty{});
                if (close + 1 == line.size()) continue;
                if (line.substr(close + 1, 3) != " -[") malformed("bad edge");
                std::string column;
                std::size_t i = close + 4;
                for (; i < line.size(); ++i) {
                    if (line[i] == ']') {
                        if (i + 1 < line.size() && line[i + 1] == ']') {
                            column += ']';
                            ++i;
                            continue;
                        }
                        break;
                    }
                    column += line[i];
                }
                if (line.substr(i, 4) != "]-> ") malformed("bad edge arrow");
                const auto col = schema.index_of(column);
                if (!col) malformed("unknown column in graph edge");
                rows.back()[*col] = parse_cell(line.substr(i + 4), schema.columns()[*col].type);
            }
            return Table(schema, std::move(rows));
        }
        case InputFormat::NaturalLanguage:
            break;
    }
    throw std::invalid_argument("natural-language format is not parseable");
}

bool content_complete(const Table& table, std::string_view rendered) {
    for (const auto& row : table.rows())
        for (const auto& cell : row) {
            if (is_empty(cell)) continue;
            const auto v = render_cell(cell);
            if (rendered.find(v) == std::string_view::npos &&
                rendered.find(escape_char(v, '|')) == std::string_view::npos &&
                rendered.find(escape_char(v, ']')) == std::string_view::npos)
                return false;
        }
    return true;
}

}  // namespace ehrbench
