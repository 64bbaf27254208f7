#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ehrbench {

namespace resources {
std::string_view code_map_text();
std::string_view task_templates_text();
std::string_view pipeline_templates_text();
}  // namespace resources

/// Named text sections parsed from "=== name ===" headers. Lines starting with
/// '#' before the first header are comments. Trailing blank lines are dropped.
class TemplateSet {
public:
    static TemplateSet parse(std::string_view text);

    /// Throws std::out_of_range for unknown names.
    const std::string& get(std::string_view name) const;
    bool contains(std::string_view name) const { return sections_.count(std::string(name)) != 0; }
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string> sections_;
};

const TemplateSet& task_templates();
const TemplateSet& pipeline_templates();

/// Replaces {name} placeholders (lower-case letters and '_'). A placeholder with no
/// value throws std::invalid_argument; other braces pass through untouched.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct Concept {
    std::string id;
    std::string label_word;
    std::string term;
    std::string semantic_tag;
    std::vector<std::string> codes;
};

struct Drug {
    std::string name;
    std::vector<std::string> indications;
};

/// The shipped SNOMED-CT concept map and ICD-9 drug indications.
struct CodeMap {
    int version = 0;
    std::vector<Concept> concepts;
    std::map<std::string, std::string> snomed_names;
    std::vector<std::string> distractors;
    std::map<std::string, std::string> icd9_titles;
    std::vector<Drug> drugs;
    std::vector<std::string> icd9_distractors;

    static CodeMap parse(std::string_view text);

    /// Throws std::out_of_range.
    const Concept& concept_by_id(std::string_view id) const;
    /// True when `code` is one of the concept's codes.
    bool indicates(const Concept& c, std::string_view code) const;
    /// Every code belonging to some concept.
    std::set<std::string> concept_codes() const;
};

const CodeMap& code_map();

}  // namespace ehrbench
