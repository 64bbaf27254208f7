#include "ehrbench/resources.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ehrbench {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

TemplateSet TemplateSet::parse(std::string_view text) {
    TemplateSet set;
    std::string* current = nullptr;
    for (const auto& line : split_lines(text)) {
        if (line.size() >= 8 && line.rfind("=== ", 0) == 0 && line.compare(line.size() - 4, 4, " ===") == 0) {
            const auto name = line.substr(4, line.size() - 8);
            auto [it, inserted] = set.sections_.emplace(name, std::string{});
            if (!inserted) throw std::invalid_argument("duplicate template section '" + name + "'");
            current = &it->second;
            continue;
        }
        if (!current) continue;
        if (!current->empty() || !line.empty()) {
            if (!current->empty()) *current += '\n';
            *current += line;
        }
    }
    for (auto& [name, body] : set.sections_)
        while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    return set;
}

const std::string& TemplateSet::get(std::string_view name) const {
    const auto it = sections_.find(std::string(name));
    if (it == sections_.end()) throw std::out_of_range("no template section '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> TemplateSet::names() const {
    std::vector<std::string> out;
    for (const auto& [name, body] : sections_) out.push_back(name);
    return out;
}

const TemplateSet& task_templates() {
    static const TemplateSet set = TemplateSet::parse(resources::task_templates_text());
    return set;
}

const TemplateSet& pipeline_templates() {
    static const TemplateSet set = TemplateSet::parse(resources::pipeline_templates_text());
    return set;
}

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && ((tmpl[j] >= 'a' && tmpl[j] <= 'z') || tmpl[j] == '_')) ++j;
            if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
                const std::string key(tmpl.substr(i + 1, j - i - 1));
                const auto it = values.find(key);
                if (it == values.end()) throw std::invalid_argument("no value for placeholder {" + key + "}");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out += tmpl[i++];
    }
    return out;
}

CodeMap CodeMap::parse(std::string_view text) {
    CodeMap map;
    int lineno = 0;
    for (const auto& line : split_lines(text)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_on(line, '\t');
        auto need = [&](std::size_t n) {
            if (f.size() != n)
                throw std::invalid_argument("code map line " + std::to_string(lineno) + ": expected " +
                                            std::to_string(n) + " fields");
        };
        const auto& kind = f[0];
        if (kind == "version") {
            need(2);
            map.version = std::stoi(f[1]);
        } else if (kind == "concept") {
            need(6);
            map.concepts.push_back(Concept{f[1], f[2], f[3], f[4], split_on(f[5], ',')});
        } else if (kind == "snomed") {
            need(3);
            map.snomed_names[f[1]] = f[2];
        } else if (kind == "distractor") {
            need(2);
            map.distractors.push_back(f[1]);
        } else if (kind == "icd9") {
            need(3);
            map.icd9_titles[f[1]] = f[2];
        } else if (kind == "drug") {
            need(3);
            map.drugs.push_back(Drug{f[1], split_on(f[2], ',')});
        } else if (kind == "icd9-distractor") {
            need(2);
            map.icd9_distractors.push_back(f[1]);
        } else {
            throw std::invalid_argument("code map line " + std::to_string(lineno) + ": unknown record '" + kind + "'");
        }
    }
    const auto targets = map.concept_codes();
    for (const auto& d : map.distractors)
        if (targets.count(d)) throw std::invalid_argument("distractor " + d + " is also a concept code");
    return map;
}

const Concept& CodeMap::concept_by_id(std::string_view id) const {
    for (const auto& c : concepts)
        if (c.id == id) return c;
    throw std::out_of_range("unknown concept '" + std::string(id) + "'");
}

bool CodeMap::indicates(const Concept& c, std::string_view code) const {
    return std::find(c.codes.begin(), c.codes.end(), code) != c.codes.end();
}

std::set<std::string> CodeMap::concept_codes() const {
    std::set<std::string> out;
    for (const auto& c : concepts) out.insert(c.codes.begin(), c.codes.end());
    return out;
}

const CodeMap& code_map() {
    static const CodeMap map = CodeMap::parse(resources::code_map_text());
    return map;
}

}  // namespace ehrbench
