#include <doctest.h>

#include <stdexcept>

#include "ehrbench/resources.hpp"
#include "ehrbench/task.hpp"

using namespace ehrbench;

TEST_CASE("every flavor/task pair has a preamble and a body") {
    for (auto f : kAllFlavors)
        for (auto t : kAllTasks) {
            const std::string base = std::string(to_string(f)) + "/" + std::string(to_string(t)) + "/";
            CHECK(task_templates().contains(base + "preamble"));
            CHECK(task_templates().contains(base + "body"));
        }
}

TEST_CASE("template bodies pin the output-format blocks") {
    const auto& t = task_templates();
    CHECK(t.get("synthea/D-U1/body").find("D-U1: ID1,ID2,...") != std::string::npos);
    CHECK(t.get("synthea/D-U1/body").find("Use `NULL` if no patients meet the criteria.") != std::string::npos);
    CHECK(t.get("synthea/D-R4/body").find("For example: -13725.74") != std::string::npos);
    CHECK(t.get("synthea/K-R1/body").find("Death: 0 or 1") != std::string::npos);
    CHECK(t.get("eicu/K-R1/body").find("Only output one word: 'Alive' or 'Expired'.") != std::string::npos);
    CHECK(t.get("eicu/K-R2/body").find("exactly 10 values, each being 0 or 1") != std::string::npos);
    CHECK(t.get("synthea/D-R1/preamble") ==
          "You are given a patient table. For the patient ID = {patient_id}, answer the following about their pain "
          "severity scores:");
    CHECK(t.get("synthea/D-R4/preamble").empty());
}

TEST_CASE("pipeline templates carry the stage anchors") {
    const auto& p = pipeline_templates();
    for (const char* name : {"plan/D-U", "plan/D-R", "plan/K-U", "plan/K-R", "align", "code", "code-retry", "direct",
                             "direct-data", "decide"})
        CHECK(p.contains(name));
    CHECK(p.get("plan/D-U").rfind("You are a table question analyzer", 0) == 0);
    CHECK(p.get("align").rfind("You are a table-aware logic mapper", 0) == 0);
    CHECK(p.get("code").find("Assign the final result to a variable named result") != std::string::npos);
    CHECK(p.get("plan/K-U").find("714628002") != std::string::npos);
}

TEST_CASE("TemplateSet parse") {
    const auto set = TemplateSet::parse("# note\n=== a ===\n\nline 1\nline 2\n\n\n=== b ===\n=== c ===\nx  \n");
    CHECK(set.get("a") == "line 1\nline 2");
    CHECK(set.get("b").empty());
    CHECK(set.get("c") == "x");
    CHECK_THROWS_AS(set.get("d"), std::out_of_range);
    CHECK_THROWS(TemplateSet::parse("=== a ===\n=== a ===\n"));
}

TEST_CASE("fill") {
    CHECK(fill("ID = {patient_id}.", {{"patient_id", "003"}}) == "ID = 003.");
    CHECK(fill("{a}{a}", {{"a", "x"}}) == "xx");
    CHECK(fill("keep {Upper} and {} and {", {}) == "keep {Upper} and {} and {");
    CHECK_THROWS_AS(fill("{missing}", {}), std::invalid_argument);
}

TEST_CASE("code map") {
    const auto& m = code_map();
    CHECK(m.version == 1);
    const auto& diabetes = m.concept_by_id("diabetes");
    CHECK(m.indicates(diabetes, "44054006"));
    CHECK_FALSE(m.indicates(diabetes, "15777000"));
    CHECK(m.indicates(m.concept_by_id("prediabetes"), "714628002"));
    CHECK(m.drugs.size() == 10);
    for (const auto& d : m.distractors) CHECK(m.concept_codes().count(d) == 0);
    for (const auto& d : m.drugs)
        for (const auto& code : d.indications) CHECK(m.icd9_titles.count(code) == 1);
    for (const auto& code : m.icd9_distractors) CHECK(m.icd9_titles.count(code) == 1);
    CHECK_THROWS_AS(m.concept_by_id("nope"), std::out_of_range);
}
