#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "ehrbench/table.hpp"
#include "ehrbench/task.hpp"

/// Seeded generators for Synthea-style and eICU-style tables.
///
/// Knowledge-Driven labels are NOT clinical ground truth. They are produced by
/// fixed rules over the emitted cells (see the derive_* functions), so every
/// label can be re-derived from its table alone.
namespace ehrbench::synth {

enum class ProfileKind { Mortality, Disorder, Treatment };

struct GeneratorConfig {
    std::uint64_t seed = 0;
    Flavor flavor = Flavor::Synthea;
    std::size_t n_rows = 6;

    // Condition-code tables.
    std::string target_concept = "diabetes";
    double plant_probability = 0.5;

    // Clinical profiles.
    ProfileKind profile = ProfileKind::Mortality;

    // Observation tables: share of non-target rows, and patients sharing the table.
    double min_distractor_fraction = 0.3;
    double max_distractor_fraction = 0.7;
    std::size_t n_patients = 3;
};

struct PatientTruth {
    std::set<std::string> codes;
    std::optional<int> concept_label;
    std::optional<int> mortality;
    std::optional<int> disorder;
    std::optional<int> recommend;
    std::optional<Bits10> disease_vector;
    std::optional<Bits10> drug_vector;

    bool operator==(const PatientTruth&) const = default;
};

/// Keyed by patient id; single-patient tables without an id column use "patient".
struct LatentTruth {
    std::map<std::string, PatientTruth> patients;

    bool operator==(const LatentTruth&) const = default;
};

inline constexpr std::string_view kSinglePatient = "patient";

Schema demographics_schema(Flavor flavor);
Schema observation_schema(Flavor flavor);
Schema condition_schema();
Schema weight_cost_schema(Flavor flavor);
Schema profile_schema(Flavor flavor, ProfileKind kind);

/// Target DESCRIPTION of observation tables: "Pain severity" / "Temperature".
std::string_view observation_target(Flavor flavor);

std::pair<Table, LatentTruth> gen_demographics(const GeneratorConfig& config);
Table gen_observations(const GeneratorConfig& config);
std::pair<Table, LatentTruth> gen_condition_codes(const GeneratorConfig& config);
Table gen_weight_cost(const GeneratorConfig& config);
std::pair<Table, LatentTruth> gen_clinical_profile(const GeneratorConfig& config);

// Labeling rules. Each is a pure function of table cells.

/// eICU: mortality = hospitaldischargestatus is "expired". Synthea: no labels.
LatentTruth derive_demographics_truth(const Table& table, Flavor flavor);

/// concept_label = 1 iff some row has SYSTEM "SNOMED-CT" and a CODE of the concept.
LatentTruth derive_condition_truth(const Table& table, std::string_view concept_id);

/// Synthea observation profiles:
///   mortality = at least 3 of {Housing status Homeless, Employment status Unemployed,
///               Do you feel hopeless Yes, Body Mass Index > 30, Tobacco status
///               Current every day smoker, trouble sleeping Yes}
///   disorder  = at least 2 of {Body temperature >= 38.0, Throat redness Present,
///               Sore throat Yes, Cough frequency High}
///   recommend = Body temperature >= 38.5 and Throat redness Present and no
///               Penicillin allergy Yes
/// eICU lab profiles:
///   mortality = at least 3 of {WBC x 1000 > 20, Hgb < 8, creatinine > 3,
///               bicarbonate < 15, BNP > 1500, lactate > 4}
///   disease_vector[i] = lab i of disease_panel() beyond its threshold
/// eICU diagnosis lists:
///   drug_vector[i] = some ICD9_CODE is an indication of drug i in the code map
LatentTruth derive_profile_truth(const Table& table, Flavor flavor);

struct DiseaseRule {
    std::string_view disease;
    std::string_view lab;
    bool above;  // abnormal when value > threshold, else when value < threshold
    std::string_view threshold;
};

/// The ten predefined diseases of the eICU disease-prediction task, in order.
const std::array<DiseaseRule, 10>& disease_panel();

/// Drug names of the eICU treatment task, in order (from the code map).
std::array<std::string, 10> drug_panel();

/// Whole days between two dates (b - a).
int days_between(const Date& a, const Date& b);
Date add_days(const Date& d, int days);

}  // namespace ehrbench::synth
