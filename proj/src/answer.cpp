#include "ehrbench/answer.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

namespace ehrbench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (lower(a[i]) != lower(b[i])) return false;
    return true;
}

// Drops markdown emphasis and code ticks, a trailing period and wrapping quotes.
std::string clean_line(std::string_view raw) {
    std::string s;
    for (char c : raw)
        if (c != '*' && c != '`') s += c;
    std::string_view v = trim(s);
    if (!v.empty() && v.back() == '.') v = trim(v.substr(0, v.size() - 1));
    while (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        v = trim(v.substr(1, v.size() - 2));
    return std::string(v);
}

std::string_view strip_brackets(std::string_view s) {
    s = trim(s);
    while (s.size() >= 2) {
        const char a = s.front(), b = s.back();
        if ((a == '[' && b == ']') || (a == '(' && b == ')') || (a == '<' && b == '>') || (a == '{' && b == '}'))
            s = trim(s.substr(1, s.size() - 2));
        else
            break;
    }
    return s;
}

// "<prefix> :" at the start of `line`; returns the remainder.
std::optional<std::string_view> strip_prefix(std::string_view line, std::string_view prefix) {
    if (prefix.empty() || line.size() < prefix.size() || !iequals(line.substr(0, prefix.size()), prefix))
        return std::nullopt;
    auto rest = trim(line.substr(prefix.size()));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return trim(rest.substr(1));
}

// Non-empty, non-fence lines of the output.
std::vector<std::string> answer_lines(std::string_view raw) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= raw.size()) {
        auto end = raw.find('\n', start);
        if (end == std::string_view::npos) end = raw.size();
        const auto line = trim(raw.substr(start, end - start));
        if (!line.empty() && line.substr(0, 3) != "```") {
            auto cleaned = clean_line(line);
            if (!cleaned.empty()) out.push_back(std::move(cleaned));
        }
        start = end + 1;
    }
    return out;
}

bool valid_id(std::string_view id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) { return is_word(c) || c == '-' || c == '_'; });
}

std::optional<IdSet> parse_id_list(std::string_view body) {
    body = strip_brackets(body);
    if (body.empty() || iequals(body, "NULL") || iequals(body, "none")) return IdSet{};
    IdSet out;
    std::size_t start = 0;
    while (true) {
        const auto comma = body.find(',', start);
        auto token = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (token.size() >= 2 && (token.front() == '"' || token.front() == '\'') && token.back() == token.front())
            token = token.substr(1, token.size() - 2);
        if (!valid_id(token)) return std::nullopt;
        out.ids.emplace_back(token);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Plain digits, or 1-3 digits followed by ",ddd" groups; optional sign and fraction.
std::optional<std::string> number_text(std::string_view s) {
    std::string out;
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') out += s[i++];
    const std::size_t int_start = i;
    while (i < s.size() && is_digit(s[i])) out += s[i++];
    const std::size_t lead = i - int_start;
    if (lead == 0) return std::nullopt;
    if (i < s.size() && s[i] == ',') {
        if (lead > 3) return std::nullopt;
        while (i < s.size() && s[i] == ',') {
            for (std::size_t k = 1; k <= 3; ++k)
                if (i + k >= s.size() || !is_digit(s[i + k])) return std::nullopt;
            out.append(s.substr(i + 1, 3));
            i += 4;
        }
    }
    if (i < s.size() && s[i] == '.') {
        out += s[i++];
        const auto frac_start = i;
        while (i < s.size() && is_digit(s[i])) out += s[i++];
        if (i == frac_start) return std::nullopt;
    }
    if (i != s.size()) return std::nullopt;
    return out;
}

std::optional<Number> parse_number(std::string_view s, int scale) {
    const auto text = number_text(strip_brackets(s));
    if (!text) return std::nullopt;
    const auto d = Decimal::parse(*text);
    if (!d) return std::nullopt;
    Decimal v = *d;
    if (v.scale > scale) {
        v = v.trimmed();
        if (v.scale > scale) return std::nullopt;
    }
    v = v.rescaled(scale);
    return Number{v};
}

std::optional<BinaryVector> parse_bits(std::string_view body) {
    body = strip_brackets(body);
    BinaryVector out;
    if (body.size() == 10 && std::all_of(body.begin(), body.end(), [](char c) { return c == '0' || c == '1'; })) {
        for (std::size_t i = 0; i < 10; ++i) out.bits[i] = body[i] == '1';
        return out;
    }
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (c == ',' || c == ';' || c == '|' || is_space(c)) {
            ++i;
            continue;
        }
        if ((c != '0' && c != '1') || (i + 1 < body.size() && !(body[i + 1] == ',' || body[i + 1] == ';' ||
                                                                 body[i + 1] == '|' || is_space(body[i + 1]))))
            return std::nullopt;
        if (n == 10) return std::nullopt;
        out.bits[n++] = c == '1';
        ++i;
    }
    if (n != 10) return std::nullopt;
    return out;
}

std::optional<Binary> parse_bit(std::string_view body) {
    body = strip_brackets(body);
    if (body == "0") return Binary{0};
    if (body == "1") return Binary{1};
    return std::nullopt;
}

std::optional<Word> parse_word(std::string_view body) {
    body = strip_brackets(body);
    if (iequals(body, "alive")) return Word{"Alive"};
    if (iequals(body, "expired")) return Word{"Expired"};
    return std::nullopt;
}

// Full-line match under the contract.
std::optional<ParsedAnswer> match_line(const OutputContract& contract, std::string_view line) {
    return std::visit(
        overloaded{
            [&](const IdListContract& c) -> std::optional<ParsedAnswer> {
                const auto rest = strip_prefix(line, c.tag);
                auto ids = parse_id_list(rest ? *rest : line);
                if (ids) return *ids;
                return std::nullopt;
            },
            [&](const NumberContract& c) -> std::optional<ParsedAnswer> {
                const auto rest = strip_prefix(line, c.tag);
                auto n = parse_number(rest ? *rest : line, c.scale);
                if (n) return *n;
                return std::nullopt;
            },
            [&](const BinaryLabelContract& c) -> std::optional<ParsedAnswer> {
                const auto rest = strip_prefix(line, c.label);
                auto b = parse_bit(rest ? *rest : line);
                if (b) return *b;
                return std::nullopt;
            },
            [&](const AliveExpiredContract&) -> std::optional<ParsedAnswer> {
                auto w = parse_word(line);
                if (w) return *w;
                return std::nullopt;
            },
            [&](const TenBitsContract&) -> std::optional<ParsedAnswer> {
                auto v = parse_bits(line);
                if (v) return *v;
                return std::nullopt;
            },
        },
        contract);
}

// Position just past the last "<prefix> :" in the line, case-insensitive.
std::optional<std::size_t> after_last_prefix(std::string_view line, std::string_view prefix) {
    if (prefix.empty() || line.size() < prefix.size()) return std::nullopt;
    for (std::size_t pos = line.size() - prefix.size() + 1; pos-- > 0;) {
        if (!iequals(line.substr(pos, prefix.size()), prefix)) continue;
        if (pos > 0 && is_word(line[pos - 1]) && is_word(prefix.front())) continue;
        std::size_t i = pos + prefix.size();
        while (i < line.size() && is_space(line[i])) ++i;
        if (i < line.size() && line[i] == ':') return i + 1;
    }
    return std::nullopt;
}

std::string_view leading_number(std::string_view s) {
    s = trim(s);
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') ++i;
    while (i < s.size() && (is_digit(s[i]) || s[i] == ',' || s[i] == '.')) ++i;
    auto out = s.substr(0, i);
    while (!out.empty() && (out.back() == ',' || out.back() == '.')) out.remove_suffix(1);
    return out;
}

std::string_view last_number(std::string_view s) {
    std::size_t end = s.size();
    while (end > 0 && !is_digit(s[end - 1])) --end;
    if (end == 0) return {};
    std::size_t start = end;
    while (start > 0 && (is_digit(s[start - 1]) || s[start - 1] == ',' || s[start - 1] == '.')) --start;
    while (start < end && (s[start] == ',' || s[start] == '.')) ++start;
    if (start > 0 && s[start - 1] == '-') --start;
    return s.substr(start, end - start);
}

// Pattern search inside a line (Loose level only).
std::optional<ParsedAnswer> search_line(const OutputContract& contract, std::string_view line) {
    return std::visit(
        overloaded{
            [&](const IdListContract& c) -> std::optional<ParsedAnswer> {
                const auto pos = after_last_prefix(line, c.tag);
                if (!pos) return std::nullopt;
                auto rest = trim(line.substr(*pos));
                if (auto full = parse_id_list(rest)) return *full;
                // Longest comma-separated run of ids at the start.
                IdSet ids;
                std::size_t i = 0;
                while (i < rest.size()) {
                    std::size_t j = i;
                    while (j < rest.size() && (is_word(rest[j]) || rest[j] == '-' || rest[j] == '_')) ++j;
                    if (j == i) break;
                    ids.ids.emplace_back(rest.substr(i, j - i));
                    while (j < rest.size() && is_space(rest[j])) ++j;
                    if (j >= rest.size() || rest[j] != ',') break;
                    i = j + 1;
                    while (i < rest.size() && is_space(rest[i])) ++i;
                }
                if (ids.ids.empty()) return std::nullopt;
                if (ids.ids.size() == 1 && iequals(ids.ids[0], "NULL")) return IdSet{};
                return ids;
            },
            [&](const NumberContract& c) -> std::optional<ParsedAnswer> {
                std::string_view token;
                if (const auto pos = after_last_prefix(line, c.tag))
                    token = leading_number(line.substr(*pos));
                else if (!c.tagged)
                    token = last_number(line);
                if (token.empty()) return std::nullopt;
                auto n = parse_number(token, c.scale);
                if (n) return *n;
                return std::nullopt;
            },
            [&](const BinaryLabelContract& c) -> std::optional<ParsedAnswer> {
                const auto pos = after_last_prefix(line, c.label);
                if (!pos) return std::nullopt;
                auto rest = trim(line.substr(*pos));
                if (!rest.empty() && rest.front() == '<') rest = trim(rest.substr(1));
                if (rest.empty() || (rest[0] != '0' && rest[0] != '1')) return std::nullopt;
                if (rest.size() > 1 && is_digit(rest[1])) return std::nullopt;
                return Binary{rest[0] - '0'};
            },
            [&](const AliveExpiredContract&) -> std::optional<ParsedAnswer> {
                std::set<std::string> seen;
                std::size_t i = 0;
                while (i < line.size()) {
                    std::size_t j = i;
                    while (j < line.size() && is_word(line[j])) ++j;
                    if (j > i) {
                        if (auto w = parse_word(line.substr(i, j - i))) seen.insert(w->value);
                        i = j;
                    } else {
                        ++i;
                    }
                }
                if (seen.size() != 1) return std::nullopt;
                return Word{*seen.begin()};
            },
            [&](const TenBitsContract&) -> std::optional<ParsedAnswer> {
                std::vector<std::string_view> runs;
                std::size_t i = 0;
                while (i < line.size()) {
                    std::size_t j = i;
                    while (j < line.size() && is_digit(line[j])) ++j;
                    if (j > i) {
                        runs.push_back(line.substr(i, j - i));
                        i = j;
                    } else {
                        ++i;
                    }
                }
                BinaryVector out;
                if (runs.size() == 1 && runs[0].size() == 10) {
                    if (auto v = parse_bits(runs[0])) return *v;
                    return std::nullopt;
                }
                if (runs.size() != 10) return std::nullopt;
                for (std::size_t k = 0; k < 10; ++k) {
                    if (runs[k] != "0" && runs[k] != "1") return std::nullopt;
                    out.bits[k] = runs[k] == "1";
                }
                return out;
            },
        },
        contract);
}

ParsedAnswer parse_impl(const OutputContract& contract, std::string_view raw, Leniency leniency) {
    const auto lines = answer_lines(raw);
    if (lines.empty()) return Invalid{"empty output"};
    if (leniency == Leniency::Strict) {
        if (lines.size() != 1) return Invalid{"expected a single answer line"};
        if (auto m = match_line(contract, lines[0])) return *m;
        return Invalid{"answer line does not match the contract"};
    }
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
        if (auto m = match_line(contract, *it)) return *m;
    if (leniency == Leniency::Loose) {
        std::size_t seen = 0;
        for (auto it = lines.rbegin(); it != lines.rend() && seen < 5; ++it, ++seen)
            if (auto m = search_line(contract, *it)) return *m;
    }
    return Invalid{"no line matches the contract"};
}

}  // namespace

OutputContract contract_for(TaskId task, Flavor flavor, std::string_view label_word) {
    const std::string tag(to_string(task));
    const bool eicu = flavor == Flavor::Eicu;
    switch (task) {
        case TaskId::DU1:
        case TaskId::DU2:
            return IdListContract{tag};
        case TaskId::DR1:
            return NumberContract{tag, 0, !eicu};
        case TaskId::DR2:
            return NumberContract{tag, 1, !eicu};
        case TaskId::DR3:
            return NumberContract{tag, eicu ? 1 : 0, !eicu};
        case TaskId::DR4:
        case TaskId::DR5:
            return NumberContract{tag, eicu ? 1 : 2, !eicu};
        case TaskId::KU1:
            if (label_word.empty()) throw std::invalid_argument("K-U1 contract needs a label word");
            return BinaryLabelContract{std::string(label_word)};
        case TaskId::KR1:
            if (eicu) return AliveExpiredContract{};
            return BinaryLabelContract{"Death"};
        case TaskId::KR2:
            if (eicu) return TenBitsContract{};
            return BinaryLabelContract{"Disorder"};
        case TaskId::KR3:
            if (eicu) return TenBitsContract{};
            return BinaryLabelContract{"Recommend"};
    }
    throw std::invalid_argument("unknown task");
}

std::string contract_tag(const OutputContract& contract) {
    return std::visit(overloaded{
                          [](const IdListContract& c) { return "idlist/" + c.tag; },
                          [](const NumberContract& c) {
                              return std::string(c.tagged ? "number/" : "number-bare/") + c.tag + "/" +
                                     std::to_string(c.scale);
                          },
                          [](const BinaryLabelContract& c) { return "label/" + c.label; },
                          [](const AliveExpiredContract&) { return std::string("alive-expired"); },
                          [](const TenBitsContract&) { return std::string("ten-bits"); },
                      },
                      contract);
}

OutputContract parse_contract_tag(std::string_view tag) {
    const auto fail = [&]() -> OutputContract {
        throw std::invalid_argument("bad contract tag: " + std::string(tag));
    };
    if (tag == "alive-expired") return AliveExpiredContract{};
    if (tag == "ten-bits") return TenBitsContract{};
    const auto slash = tag.find('/');
    if (slash == std::string_view::npos || slash + 1 >= tag.size()) return fail();
    const auto kind = tag.substr(0, slash);
    const auto rest = tag.substr(slash + 1);
    if (kind == "idlist") return IdListContract{std::string(rest)};
    if (kind == "label") return BinaryLabelContract{std::string(rest)};
    if (kind == "number" || kind == "number-bare") {
        const auto s2 = rest.rfind('/');
        if (s2 == std::string_view::npos || s2 == 0 || s2 + 2 != rest.size() || !is_digit(rest[s2 + 1])) return fail();
        return NumberContract{std::string(rest.substr(0, s2)), rest[s2 + 1] - '0', kind == "number"};
    }
    return fail();
}

ParsedAnswer to_parsed(const GoldAnswer& gold) {
    return std::visit([](const auto& g) -> ParsedAnswer { return g; }, gold);
}

std::string render_answer(const OutputContract& contract, const ParsedAnswer& answer) {
    if (const auto* inv = std::get_if<Invalid>(&answer)) return "INVALID: " + inv->reason;
    const auto mismatch = [&]() -> std::string {
        throw ContractMismatch("answer kind does not match contract " + contract_tag(contract));
    };
    return std::visit(
        overloaded{
            [&](const IdListContract& c) -> std::string {
                const auto* ids = std::get_if<IdSet>(&answer);
                if (!ids) return mismatch();
                std::string out = c.tag + ": ";
                if (ids->ids.empty()) return out + "NULL";
                for (std::size_t i = 0; i < ids->ids.size(); ++i) out += (i ? "," : "") + ids->ids[i];
                return out;
            },
            [&](const NumberContract& c) -> std::string {
                const auto* n = std::get_if<Number>(&answer);
                if (!n) return mismatch();
                const auto v = n->value.scale < c.scale ? n->value.rescaled(c.scale) : n->value;
                return (c.tagged ? c.tag + ": " : std::string()) + v.to_string();
            },
            [&](const BinaryLabelContract& c) -> std::string {
                const auto* b = std::get_if<Binary>(&answer);
                if (!b) return mismatch();
                return c.label + ": " + std::to_string(b->value);
            },
            [&](const AliveExpiredContract&) -> std::string {
                const auto* w = std::get_if<Word>(&answer);
                if (!w) return mismatch();
                return w->value;
            },
            [&](const TenBitsContract&) -> std::string {
                const auto* v = std::get_if<BinaryVector>(&answer);
                if (!v) return mismatch();
                return to_string(v->bits);
            },
        },
        contract);
}

std::string_view to_string(Leniency l) {
    switch (l) {
        case Leniency::Strict: return "strict";
        case Leniency::Standard: return "standard";
        case Leniency::Loose: return "loose";
    }
    return "?";
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Correct: return "correct";
        case Outcome::Incorrect: return "incorrect";
        case Outcome::Invalid: return "invalid";
    }
    return "?";
}

ParsedAnswer parse_answer(const OutputContract& contract, std::string_view raw, Leniency leniency) {
    try {
        return parse_impl(contract, raw, leniency);
    } catch (const std::exception& e) {
        return Invalid{std::string("unparseable: ") + e.what()};
    }
}

Grade grade(const GoldAnswer& gold, const ParsedAnswer& parsed) {
    Grade g;
    if (is_invalid(parsed)) {
        g.outcome = Outcome::Invalid;
        if (std::holds_alternative<BinaryVector>(gold)) g.positions.assign(10, Outcome::Invalid);
        return g;
    }
    if (gold.index() != parsed.index()) throw ContractMismatch("parsed answer kind differs from gold");
    const auto ok = [](bool b) { return b ? Outcome::Correct : Outcome::Incorrect; };
    std::visit(overloaded{
                   [&](const IdSet& a) {
                       const auto& b = std::get<IdSet>(parsed);
                       g.outcome = ok(std::set<std::string>(a.ids.begin(), a.ids.end()) ==
                                      std::set<std::string>(b.ids.begin(), b.ids.end()));
                   },
                   [&](const Number& a) {
                       g.outcome = ok(numeric_compare(a.value, std::get<Number>(parsed).value) == 0);
                   },
                   [&](const Binary& a) { g.outcome = ok(a == std::get<Binary>(parsed)); },
                   [&](const Word& a) { g.outcome = ok(a == std::get<Word>(parsed)); },
                   [&](const BinaryVector& a) {
                       const auto& b = std::get<BinaryVector>(parsed);
                       bool all = true;
                       for (std::size_t i = 0; i < 10; ++i) {
                           g.positions.push_back(ok(a.bits[i] == b.bits[i]));
                           all = all && a.bits[i] == b.bits[i];
                       }
                       g.outcome = ok(all);
                   },
               },
               gold);
    return g;
}

}  // namespace ehrbench
