#pragma once

// Straight-line reference answers for the Data-Driven tasks. Works on raw TSV text
// with integer arithmetic and shares no code with the library.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace naive {

using Grid = std::vector<std::vector<std::string>>;

inline Grid split_tsv(const std::string& tsv) {
    Grid g(1, std::vector<std::string>(1));
    for (char c : tsv) {
        if (c == '\n') {
            g.push_back(std::vector<std::string>(1));
        } else if (c == '\t') {
            g.back().push_back("");
        } else {
            g.back().back() += c;
        }
    }
    return g;
}

inline int col(const Grid& g, const std::string& name) {
    for (std::size_t i = 0; i < g[0].size(); ++i)
        if (g[0][i] == name) return static_cast<int>(i);
    return -1;
}

inline std::string low(std::string s) {
    for (auto& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

// Decimal text to an integer count of 10^-places units. Assumes at most `places` digits.
inline long long units(const std::string& s, int places) {
    long long v = 0;
    int frac = -1;
    bool neg = false;
    for (char c : s) {
        if (c == '-') {
            neg = true;
        } else if (c == '.') {
            frac = 0;
        } else {
            v = v * 10 + (c - '0');
            if (frac >= 0) ++frac;
        }
    }
    if (frac < 0) frac = 0;
    for (int i = frac; i < places; ++i) v *= 10;
    return neg ? -v : v;
}

inline std::string show(long long v, int places) {
    const bool neg = v < 0;
    unsigned long long a = neg ? 0ULL - static_cast<unsigned long long>(v) : static_cast<unsigned long long>(v);
    std::string digits = std::to_string(a);
    while (static_cast<int>(digits.size()) <= places) digits = "0" + digits;
    std::string out = places ? digits.substr(0, digits.size() - places) + "." + digits.substr(digits.size() - places)
                             : digits;
    return neg ? "-" + out : out;
}

inline long long age_value(const std::string& s) {
    if (s.size() > 2 && s[0] == '>' && s[1] == ' ') return std::stoll(s.substr(2)) + 1;
    return std::stoll(s);
}

/// D-U: ids whose equality columns match (case-insensitively) and whose number compares.
inline std::string filter_ids(const std::string& tag, const std::string& tsv,
                              const std::vector<std::pair<std::string, std::string>>& equals,
                              const std::string& numeric, const std::string& op, long long threshold) {
    const auto g = split_tsv(tsv);
    std::vector<std::string> ids;
    for (std::size_t r = 1; r < g.size(); ++r) {
        bool ok = true;
        for (const auto& e : equals) ok = ok && low(g[r][col(g, e.first)]) == low(e.second);
        const long long v = age_value(g[r][col(g, numeric)]);
        if (op == "gt") ok = ok && v > threshold;
        if (op == "lt") ok = ok && v < threshold;
        if (ok) ids.push_back(g[r][0]);
    }
    std::sort(ids.begin(), ids.end());
    std::string out = tag + ": ";
    if (ids.empty()) return out + "NULL";
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i];
    return out;
}

/// D-R1/2/3 over observation rows. `places` is the value precision (0 Synthea, 1 eICU).
inline std::string observations(const std::string& task, const std::string& tsv, const std::string& target,
                                const std::string& patient, int places) {
    const auto g = split_tsv(tsv);
    long long count = 0, sum = 0;
    for (std::size_t r = 1; r < g.size(); ++r) {
        if (g[r][col(g, "PATIENT")] != patient || g[r][col(g, "DESCRIPTION")] != target) continue;
        ++count;
        sum += units(g[r][col(g, "VALUE")], places);
    }
    if (task == "D-R1") return std::to_string(count);
    if (task == "D-R3") return show(sum, places);
    // Mean to one decimal, halves away from zero; values are non-negative here.
    const long long scaled = places == 0 ? sum * 10 : sum;
    return show((2 * scaled + count) / (2 * count), 1);
}

/// Synthea D-R4/D-R5 for one patient row (2 decimals).
inline std::string synthea_money(const std::string& task, const std::string& tsv, const std::string& patient) {
    const auto g = split_tsv(tsv);
    for (std::size_t r = 1; r < g.size(); ++r) {
        if (g[r][col(g, "ID")] != patient) continue;
        const long long income = units(g[r][col(g, "INCOME")], 2);
        const long long care = units(g[r][col(g, "HEALTHCARE")], 2);
        return show(task == "D-R4" ? income - care : income + care, 2);
    }
    return "missing";
}

/// eICU D-R4 (last discharge minus first admission) and D-R5 (cost summed over visits).
inline std::string eicu_money(const std::string& task, const std::string& tsv, const std::string& patient) {
    const auto g = split_tsv(tsv);
    long long cost = 0, first_visit = 1 << 30, last_visit = -1, admission = 0, discharge = 0;
    for (std::size_t r = 1; r < g.size(); ++r) {
        if (g[r][col(g, "patientunitstayid")] != patient) continue;
        cost += units(g[r][col(g, "cost")], 1);
        const long long visit = std::stoll(g[r][col(g, "unitvisitnumber")]);
        if (visit < first_visit) {
            first_visit = visit;
            admission = units(g[r][col(g, "admissionweight")], 1);
        }
        if (visit > last_visit) {
            last_visit = visit;
            discharge = units(g[r][col(g, "dischargeweight")], 1);
        }
    }
    return show(task == "D-R5" ? cost : discharge - admission, 1);
}

}  // namespace naive
