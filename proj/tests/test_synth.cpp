#include <doctest.h>

#include <set>

#include "appendix_tables.hpp"
#include "ehrbench/resources.hpp"
#include "ehrbench/synth.hpp"

using namespace ehrbench;
using namespace ehrbench::synth;

namespace {

std::string header(const Table& t) {
    const auto tsv = render_tsv(t);
    return tsv.substr(0, tsv.find('\n'));
}

std::string header_of(const char* tsv) {
    const std::string s(tsv);
    return s.substr(0, s.find('\n'));
}

GeneratorConfig cfg(std::uint64_t seed, Flavor f, std::size_t rows = 6) {
    GeneratorConfig c;
    c.seed = seed;
    c.flavor = f;
    c.n_rows = rows;
    return c;
}

}  // namespace

TEST_CASE("generated headers equal the appendix headers") {
    CHECK(header(gen_demographics(cfg(1, Flavor::Synthea)).first) == header_of(appendix::kSyntheaDU1));
    CHECK(header(gen_demographics(cfg(1, Flavor::Eicu)).first) == header_of(appendix::kEicuDU1));
    CHECK(header(gen_observations(cfg(1, Flavor::Synthea))) == header_of(appendix::kSyntheaDR1));
    CHECK(header(gen_observations(cfg(1, Flavor::Eicu))) == header_of(appendix::kEicuDR1));
    CHECK(header(gen_condition_codes(cfg(1, Flavor::Synthea)).first) == header_of(appendix::kSyntheaKU1));
    CHECK(header(gen_weight_cost(cfg(1, Flavor::Synthea))) == header_of(appendix::kSyntheaDR4));
    CHECK(header(gen_weight_cost(cfg(1, Flavor::Eicu))) == header_of(appendix::kEicuDR5));
    CHECK(header(gen_clinical_profile(cfg(1, Flavor::Synthea)).first) == header_of(appendix::kSyntheaKR1));
}

TEST_CASE("generators are deterministic") {
    for (auto f : kAllFlavors)
        for (std::uint64_t seed : {1ULL, 42ULL, 0xdeadbeefULL}) {
            CHECK(render_tsv(gen_demographics(cfg(seed, f)).first) == render_tsv(gen_demographics(cfg(seed, f)).first));
            CHECK(render_tsv(gen_observations(cfg(seed, f))) == render_tsv(gen_observations(cfg(seed, f))));
            CHECK(render_tsv(gen_weight_cost(cfg(seed, f))) == render_tsv(gen_weight_cost(cfg(seed, f))));
            auto a = gen_clinical_profile(cfg(seed, f));
            auto b = gen_clinical_profile(cfg(seed, f));
            CHECK(render_tsv(a.first) == render_tsv(b.first));
            CHECK(a.second == b.second);
        }
}

TEST_CASE("different seeds give different tables") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        CHECK(render_tsv(gen_demographics(cfg(s, Flavor::Synthea, 4)).first) !=
              render_tsv(gen_demographics(cfg(s + 1000, Flavor::Synthea, 4)).first));
        CHECK(render_tsv(gen_observations(cfg(s, Flavor::Eicu))) !=
              render_tsv(gen_observations(cfg(s + 1000, Flavor::Eicu))));
    }
}

TEST_CASE("demographics") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto [t, truth] = gen_demographics(cfg(s, Flavor::Eicu, 10));
        std::set<std::string> ids;
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            const auto id = render_cell(t.at(r, "patientunitstayid"));
            CHECK(id.size() == 3);
            ids.insert(id);
            const auto status = render_cell(t.at(r, "hospitaldischargestatus"));
            CHECK((status == "alive" || status == "expired"));
        }
        CHECK(ids.size() == 10);
        CHECK(derive_demographics_truth(t, Flavor::Eicu) == truth);
    }
    bool saw_89 = false;
    for (std::uint64_t s = 0; s < 50 && !saw_89; ++s) {
        const auto t = gen_demographics(cfg(s, Flavor::Eicu, 10)).first;
        for (std::size_t r = 0; r < t.row_count(); ++r) saw_89 |= render_cell(t.at(r, "age")) == "> 89";
    }
    CHECK(saw_89);
    CHECK_THROWS_AS(gen_demographics(cfg(1, Flavor::Synthea, 0)), std::invalid_argument);
}

TEST_CASE("observations") {
    std::size_t pain_rows = 0;
    bool saw_bp = false;
    for (std::uint64_t s = 0; s < 400; ++s) {
        for (auto f : kAllFlavors) {
            const auto t = gen_observations(cfg(s, f, 8));
            std::size_t targets = 0;
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                const auto desc = render_cell(t.at(r, "DESCRIPTION"));
                if (desc != observation_target(f)) {
                    if (desc == "Blood Pressure") saw_bp = true;
                    continue;
                }
                ++targets;
                if (f == Flavor::Synthea) {
                    const auto& v = std::get<Decimal>(t.at(r, "VALUE"));
                    CHECK(v.scale == 0);
                    CHECK(v.mantissa >= 0);
                    CHECK(v.mantissa <= 10);
                    ++pain_rows;
                } else {
                    const auto v = *Decimal::parse(render_cell(t.at(r, "VALUE")));
                    CHECK(v.scale == 1);
                    CHECK(v.mantissa >= 350);
                    CHECK(v.mantissa <= 400);
                }
            }
            CHECK(targets >= 1);
            CHECK(targets <= 6);  // distractors fill at least 30%
        }
    }
    CHECK(pain_rows >= 1000);
    CHECK(saw_bp);
}

TEST_CASE("condition codes") {
    int planted = 0;
    for (std::uint64_t s = 0; s < 400; ++s) {
        auto c = cfg(s, Flavor::Synthea, 5);
        c.target_concept = s % 2 ? "diabetes" : "prediabetes";
        const auto [t, truth] = gen_condition_codes(c);
        CHECK(derive_condition_truth(t, c.target_concept) == truth);
        planted += *truth.patients.at("patient").concept_label;
        const auto& map = code_map();
        std::set<std::string> allowed(map.distractors.begin(), map.distractors.end());
        for (const auto& code : map.concept_codes()) allowed.insert(code);
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            CHECK(render_cell(t.at(r, "SYSTEM")) == "SNOMED-CT");
            CHECK(std::get<Date>(t.at(r, "START")) < std::get<Date>(t.at(r, "STOP")));
            CHECK(allowed.count(render_cell(t.at(r, "CODE"))) == 1);
        }
    }
    CHECK(planted > 150);
    CHECK(planted < 250);

    const auto t = parse_tsv(appendix::kSyntheaKU1, condition_schema());
    CHECK(*derive_condition_truth(t, "diabetes").patients.at("patient").concept_label == 1);
    CHECK(*derive_condition_truth(t, "prediabetes").patients.at("patient").concept_label == 1);
    CHECK(*derive_condition_truth(t, "hypertension").patients.at("patient").concept_label == 0);
}

TEST_CASE("weight and cost") {
    bool multi = false;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto t = gen_weight_cost(cfg(s, Flavor::Eicu, 6));
        CHECK(t.row_count() == 6);
        CHECK(std::get<std::int64_t>(t.at(0, "unitvisitnumber")) == 1);
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            const auto& cost = std::get<Decimal>(t.at(r, "cost"));
            CHECK(cost.scale == 1);
            CHECK(cost.mantissa >= 50000);
            CHECK(cost.mantissa <= 250000);
            multi |= std::get<std::int64_t>(t.at(r, "unitvisitnumber")) == 2;
        }
        const auto syn = gen_weight_cost(cfg(s, Flavor::Synthea, 5));
        for (std::size_t r = 0; r < syn.row_count(); ++r) CHECK(std::get<Decimal>(syn.at(r, "INCOME")).scale == 2);
    }
    CHECK(multi);
}

TEST_CASE("mortality rule on the appendix profile") {
    const auto t = parse_tsv(appendix::kSyntheaKR1, profile_schema(Flavor::Synthea, ProfileKind::Mortality));
    const auto truth = derive_profile_truth(t, Flavor::Synthea).patients.at("patient");
    CHECK(*truth.mortality == 1);
    CHECK(*truth.disorder == 0);
    CHECK(*truth.recommend == 0);
}

TEST_CASE("profile without indicators has all labels zero") {
    const auto t = parse_tsv(
        "DATE\tDESCRIPTION\tVALUE\tUNITS\n2001-02-15\tHeart rate\t84\tmin\n2001-02-15\tBody temperature\t36.8\tCel",
        profile_schema(Flavor::Synthea, ProfileKind::Mortality));
    const auto truth = derive_profile_truth(t, Flavor::Synthea).patients.at("patient");
    CHECK(*truth.mortality == 0);
    CHECK(*truth.disorder == 0);
    CHECK(*truth.recommend == 0);
}

TEST_CASE("profile labels are auditable and balanced") {
    for (auto f : kAllFlavors)
        for (auto kind : {ProfileKind::Mortality, ProfileKind::Disorder, ProfileKind::Treatment}) {
            int positives = 0;
            for (std::uint64_t s = 0; s < 300; ++s) {
                auto c = cfg(s, f, 10);
                c.profile = kind;
                const auto [t, truth] = gen_clinical_profile(c);
                REQUIRE(truth.patients.size() == 1);
                CHECK(derive_profile_truth(t, f) == truth);
                const auto& p = truth.patients.begin()->second;
                if (f == Flavor::Eicu && kind == ProfileKind::Disorder) {
                    REQUIRE(p.disease_vector);
                    CHECK(p.disease_vector->size() == 10);
                    positives += (*p.disease_vector)[0];
                } else if (f == Flavor::Eicu && kind == ProfileKind::Treatment) {
                    REQUIRE(p.drug_vector);
                    positives += (*p.drug_vector)[0];
                } else if (kind == ProfileKind::Mortality) {
                    positives += *p.mortality;
                } else if (kind == ProfileKind::Disorder) {
                    positives += *p.disorder;
                } else {
                    positives += *p.recommend;
                }
            }
            CHECK(positives > 100);
            CHECK(positives < 200);
        }
}

TEST_CASE("date arithmetic") {
    CHECK(add_days(Date{2000, 2, 28}, 1) == Date{2000, 2, 29});
    CHECK(add_days(Date{1999, 12, 31}, 1) == Date{2000, 1, 1});
    CHECK(days_between(Date{2001, 1, 1}, Date{2002, 1, 1}) == 365);
}
