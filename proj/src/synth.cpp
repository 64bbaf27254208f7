#include "ehrbench/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "ehrbench/resources.hpp"
#include "ehrbench/rng.hpp"

namespace ehrbench::synth {

namespace {

// Days since 1970-01-01 (H. Hinnant's civil algorithms).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date random_date(Rng& rng, int first_year, int last_year) {
    const auto lo = days_from_civil(first_year, 1, 1);
    const auto hi = days_from_civil(last_year, 12, 31);
    return civil_from_days(rng.uniform(lo, hi));
}

// Uniform decimal with mantissa in [lo, hi] at the given scale.
Decimal draw(Rng& rng, std::int64_t lo, std::int64_t hi, int scale) {
    return Decimal{rng.uniform(lo, hi), scale};
}

std::string pad3(std::int64_t id) {
    std::string s = std::to_string(id);
    return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

// `count` consecutive zero-padded ids from a random start.
std::vector<std::string> consecutive_ids(Rng& rng, std::size_t count) {
    if (count == 0 || count > 999) throw std::invalid_argument("patient count must be in [1, 999]");
    const auto start = rng.uniform(1, 999 - static_cast<std::int64_t>(count) + 1);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) ids.push_back(pad3(start + static_cast<std::int64_t>(i)));
    return ids;
}

void require_rows(const GeneratorConfig& c) {
    if (c.n_rows == 0) throw std::invalid_argument("n_rows must be positive");
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string text_of(const CellValue& v) { return render_cell(v); }

std::optional<Decimal> number_of(const CellValue& v) {
    if (auto d = as_decimal(v)) return d;
    if (const auto* s = std::get_if<std::string>(&v)) return Decimal::parse(*s);
    return std::nullopt;
}

bool gt(const Decimal& a, std::string_view t) { return numeric_compare(a, *Decimal::parse(t)) > 0; }
bool lt(const Decimal& a, std::string_view t) { return numeric_compare(a, *Decimal::parse(t)) < 0; }
bool ge(const Decimal& a, std::string_view t) { return numeric_compare(a, *Decimal::parse(t)) >= 0; }

// ---- Synthea profile vocabulary ----

struct StatusItem {
    std::string_view description;
    std::string_view positive;
    std::string_view negative;
};

constexpr std::string_view kBmi = "Body Mass Index";
constexpr std::string_view kTemperature = "Body temperature";
constexpr std::string_view kThroat = "Throat redness";
constexpr std::string_view kAllergy = "Penicillin allergy";

// Mortality indicators other than BMI.
constexpr std::array<StatusItem, 5> kMortalityStatus = {{
    {"Housing status", "Homeless", "Stable housing"},
    {"Employment status", "Unemployed", "Employed"},
    {"Do you feel hopeless", "Yes", "No"},
    {"Tobacco status", "Current every day smoker", "Never smoked"},
    {"In the past week, have you had trouble sleeping", "Yes", "No"},
}};

constexpr std::array<StatusItem, 3> kDisorderStatus = {{
    {kThroat, "Present", "Absent"},
    {"Sore throat", "Yes", "No"},
    {"Cough frequency", "High", "Low"},
}};

struct Vital {
    std::string_view description;
    std::string_view units;
    std::int64_t lo;
    std::int64_t hi;
    int scale;
};

constexpr std::array<Vital, 7> kSyntheaVitals = {{
    {"Pain severity", "score", 0, 10, 0},
    {"Heart rate", "min", 60, 110, 0},
    {"Respiratory rate", "min", 12, 24, 0},
    {"Body Height", "cm", 1500, 1950, 1},
    {"Body Weight", "kg", 450, 1200, 1},
    {"Diastolic Blood Pressure", "mm[Hg]", 60, 95, 0},
    {"Systolic Blood Pressure", "mm[Hg]", 100, 150, 0},
}};

// ---- eICU lab vocabulary ----

struct Lab {
    std::string_view name;
    std::int64_t type_id;
    int scale;
    std::int64_t normal_lo, normal_hi;  // mantissas
};

constexpr std::array<Lab, 11> kLabs = {{
    {"WBC x 1000", 3, 1, 40, 110},
    {"Hgb", 3, 1, 120, 170},
    {"platelets x 1000", 3, 1, 1500, 4000},
    {"creatinine", 1, 1, 6, 12},
    {"bicarbonate", 1, 1, 220, 290},
    {"troponin - I", 1, 2, 0, 3},
    {"BNP", 1, 1, 200, 1000},
    {"sodium", 1, 1, 1360, 1450},
    {"glucose", 1, 1, 700, 1400},
    {"anion gap", 1, 1, 80, 140},
    {"lactate", 1, 1, 5, 20},
}};

const Lab& lab_named(std::string_view name) {
    for (const auto& l : kLabs)
        if (l.name == name) return l;
    throw std::logic_error("unknown lab");
}

// Abnormal mantissa ranges for the disease panel, in panel order.
constexpr std::array<std::pair<std::int64_t, std::int64_t>, 10> kDiseaseAbnormal = {{
    {121, 400}, {50, 99}, {4501, 9000}, {21, 80}, {80, 179},
    {5, 200}, {4001, 40000}, {1200, 1349}, {2001, 5000}, {161, 300},
}};

struct Critical {
    std::string_view lab;
    bool above;
    std::string_view threshold;
    std::int64_t lo, hi;  // abnormal mantissas
};

constexpr std::array<Critical, 6> kMortalityLabs = {{
    {"WBC x 1000", true, "20", 201, 400},
    {"Hgb", false, "8", 50, 79},
    {"creatinine", true, "3.0", 31, 80},
    {"bicarbonate", false, "15", 80, 149},
    {"BNP", true, "1500", 15001, 40000},
    {"lactate", true, "4.0", 41, 100},
}};

bool beyond(const Decimal& v, bool above, std::string_view threshold) {
    return above ? gt(v, threshold) : lt(v, threshold);
}

}  // namespace

int days_between(const Date& a, const Date& b) {
    return static_cast<int>(days_from_civil(b.year, b.month, b.day) - days_from_civil(a.year, a.month, a.day));
}

Date add_days(const Date& d, int days) { return civil_from_days(days_from_civil(d.year, d.month, d.day) + days); }

const std::array<DiseaseRule, 10>& disease_panel() {
    static const std::array<DiseaseRule, 10> panel = {{
        {"Leukocytosis", "WBC x 1000", true, "12"},
        {"Anemia", "Hgb", false, "10"},
        {"Thrombocytosis", "platelets x 1000", true, "450"},
        {"Acute kidney injury", "creatinine", true, "2.0"},
        {"Metabolic acidosis", "bicarbonate", false, "18"},
        {"Myocardial injury", "troponin - I", true, "0.04"},
        {"Heart failure", "BNP", true, "400"},
        {"Hyponatremia", "sodium", false, "135"},
        {"Hyperglycemia", "glucose", true, "200"},
        {"High anion gap", "anion gap", true, "16"},
    }};
    return panel;
}

std::array<std::string, 10> drug_panel() {
    const auto& drugs = code_map().drugs;
    if (drugs.size() != 10) throw std::logic_error("code map must list ten drugs");
    std::array<std::string, 10> out;
    for (std::size_t i = 0; i < 10; ++i) out[i] = drugs[i].name;
    return out;
}

// ---- schemas ----

Schema demographics_schema(Flavor flavor) {
    if (flavor == Flavor::Synthea)
        return Schema({{"ID", CellType::Text}, {"RACE", CellType::Text}, {"GENDER", CellType::Text},
                       {"INCOME", CellType::Integer}});
    return Schema({{"patientunitstayid", CellType::Text}, {"gender", CellType::Text}, {"age", CellType::Text},
                   {"ethnicity", CellType::Text}, {"hospitaldischargestatus", CellType::Text}});
}

Schema observation_schema(Flavor flavor) {
    if (flavor == Flavor::Synthea)
        return Schema({{"PATIENT", CellType::Text}, {"DESCRIPTION", CellType::Text}, {"VALUE", CellType::Decimal},
                       {"UNITS", CellType::Text}, {"TYPE", CellType::Text}});
    return Schema({{"PATIENT", CellType::Text}, {"DESCRIPTION", CellType::Text}, {"UNITS", CellType::Text},
                   {"VALUE", CellType::Text}});
}

Schema condition_schema() {
    return Schema({{"START", CellType::Date}, {"STOP", CellType::Date}, {"SYSTEM", CellType::Text},
                   {"CODE", CellType::Text}});
}

Schema weight_cost_schema(Flavor flavor) {
    if (flavor == Flavor::Synthea)
        return Schema({{"ID", CellType::Text}, {"RACE", CellType::Text}, {"GENDER", CellType::Text},
                       {"HEALTHCARE", CellType::Decimal}, {"INCOME", CellType::Decimal}});
    return Schema({{"age", CellType::Integer}, {"tax", CellType::Decimal}, {"gender", CellType::Text},
                   {"patientunitstayid", CellType::Text}, {"admissionweight", CellType::Decimal},
                   {"unitvisitnumber", CellType::Integer}, {"cost", CellType::Decimal},
                   {"dischargeweight", CellType::Decimal}});
}

Schema profile_schema(Flavor flavor, ProfileKind kind) {
    if (flavor == Flavor::Synthea)
        return Schema({{"DATE", CellType::Date}, {"DESCRIPTION", CellType::Text}, {"VALUE", CellType::Text},
                       {"UNITS", CellType::Text}});
    if (kind == ProfileKind::Treatment)
        return Schema({{"ICD9_CODE", CellType::Text}, {"LONG_TITLE", CellType::Text}});
    return Schema({{"labid", CellType::Integer}, {"patientunitstayid", CellType::Integer},
                   {"labresultoffset", CellType::Integer}, {"labtypeid", CellType::Integer},
                   {"labname", CellType::Text}, {"labresult", CellType::Decimal},
                   {"labresulttext", CellType::Text}});
}

std::string_view observation_target(Flavor flavor) {
    return flavor == Flavor::Synthea ? "Pain severity" : "Temperature";
}

// ---- demographics ----

std::pair<Table, LatentTruth> gen_demographics(const GeneratorConfig& c) {
    require_rows(c);
    Rng rng(c.seed);
    const auto ids = consecutive_ids(rng, c.n_rows);
    std::vector<Row> rows;
    LatentTruth truth;
    if (c.flavor == Flavor::Synthea) {
        static const std::vector<std::string> races = {"White", "Black", "Asian", "Hispanic"};
        static const std::vector<std::string> genders = {"Male", "Female"};
        for (const auto& id : ids) {
            rows.push_back({id, rng.pick(races), rng.pick(genders), rng.uniform(10, 100) * 1000});
            truth.patients[id];
        }
    } else {
        static const std::vector<std::string> genders = {"Male", "Female"};
        static const std::vector<std::string> ethnicities = {"caucasian", "african american", "hispanic", "asian",
                                                             "native american"};
        for (const auto& id : ids) {
            const bool expired = rng.bernoulli(0.5);
            std::string age = rng.bernoulli(0.1) ? "> 89" : std::to_string(rng.uniform(18, 89));
            rows.push_back({id, rng.pick(genders), age, rng.pick(ethnicities),
                            std::string(expired ? "expired" : "alive")});
            truth.patients[id].mortality = expired ? 1 : 0;
        }
    }
    return {Table(demographics_schema(c.flavor), std::move(rows)), std::move(truth)};
}

LatentTruth derive_demographics_truth(const Table& table, Flavor flavor) {
    LatentTruth truth;
    const bool eicu = flavor == Flavor::Eicu;
    const auto id_col = table.schema().require(eicu ? "patientunitstayid" : "ID");
    for (const auto& row : table.rows()) {
        auto& p = truth.patients[text_of(row[id_col])];
        if (eicu)
            p.mortality = lower(text_of(row[table.schema().require("hospitaldischargestatus")])) == "expired" ? 1 : 0;
    }
    return truth;
}

// ---- observations ----

Table gen_observations(const GeneratorConfig& c) {
    require_rows(c);
    if (c.min_distractor_fraction < 0 || c.max_distractor_fraction > 1 ||
        c.min_distractor_fraction > c.max_distractor_fraction)
        throw std::invalid_argument("distractor fraction bounds must satisfy 0 <= min <= max <= 1");
    Rng rng(c.seed);
    const auto patients = consecutive_ids(rng, std::max<std::size_t>(c.n_patients, 1));

    const auto lo = static_cast<std::int64_t>(c.min_distractor_fraction * 1000 + 0.5);
    const auto hi = static_cast<std::int64_t>(c.max_distractor_fraction * 1000 + 0.5);
    const auto permille = rng.uniform(lo, hi);
    auto n_distractor = static_cast<std::size_t>((static_cast<std::int64_t>(c.n_rows) * permille + 500) / 1000);
    n_distractor = std::min(n_distractor, c.n_rows - 1);

    std::vector<Row> rows;
    const std::string target(observation_target(c.flavor));
    for (std::size_t i = 0; i < c.n_rows; ++i) {
        const bool distractor = i < n_distractor;
        const auto& patient = rng.pick(patients);
        if (c.flavor == Flavor::Synthea) {
            if (!distractor) {
                rows.push_back({patient, target, draw(rng, 0, 10, 0), std::string("score"), std::string("numeric")});
                continue;
            }
            static const std::array<Vital, 3> d = {{{"Body Weight", "kg", 450, 1200, 1},
                                                     {"Heart rate", "min", 60, 110, 0},
                                                     {"Respiratory Rate", "min", 12, 24, 0}}};
            const auto& v = rng.pick(std::span<const Vital>(d));
            rows.push_back({patient, std::string(v.description), draw(rng, v.lo, v.hi, v.scale),
                            std::string(v.units), std::string("numeric")});
        } else {
            if (!distractor) {
                std::string units = rng.bernoulli(0.5) ? "TEMP ORAL" : "TEMP TYMPANIC";
                rows.push_back({patient, target, units, draw(rng, 350, 400, 1).to_string()});
                continue;
            }
            switch (rng.uniform(0, 3)) {
                case 0:
                    rows.push_back({patient, std::string("O2 Saturation"), std::string("O2 Sat"),
                                    std::to_string(rng.uniform(90, 100))});
                    break;
                case 1:
                    rows.push_back({patient, std::string("Respiratory Rate"), std::string("Resp"),
                                    std::to_string(rng.uniform(12, 24))});
                    break;
                case 2:
                    rows.push_back({patient, std::string("Blood Pressure"), std::string("BP"),
                                    std::to_string(rng.uniform(95, 160)) + "/" + std::to_string(rng.uniform(55, 100))});
                    break;
                default:
                    rows.push_back({patient, std::string("Pain Assessment"), std::string("WDL"), Empty{}});
                    break;
            }
        }
    }
    rng.shuffle(rows);
    return Table(observation_schema(c.flavor), std::move(rows));
}

// ---- condition codes ----

std::pair<Table, LatentTruth> gen_condition_codes(const GeneratorConfig& c) {
    require_rows(c);
    const auto& map = code_map();
    const auto& target = map.concept_by_id(c.target_concept);
    Rng rng(c.seed);

    std::vector<std::string> pool = map.distractors;
    for (const auto& other : map.concepts)
        if (other.id != target.id)
            for (const auto& code : other.codes)
                if (!map.indicates(target, code)) pool.push_back(code);
    if (pool.size() < c.n_rows) throw std::invalid_argument("n_rows exceeds the distractor pool");
    rng.shuffle(pool);
    std::vector<std::string> codes(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(c.n_rows));
    const bool planted = rng.bernoulli(c.plant_probability);
    if (planted) {
        const auto slot = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(c.n_rows) - 1));
        codes[slot] = rng.pick(target.codes);
    }

    std::vector<Row> rows;
    Date start = random_date(rng, 1995, 2012);
    PatientTruth p;
    for (const auto& code : codes) {
        const Date stop = add_days(start, static_cast<int>(rng.uniform(30, 1500)));
        rows.push_back({start, stop, std::string("SNOMED-CT"), code});
        p.codes.insert(code);
        start = add_days(stop, static_cast<int>(rng.uniform(1, 400)));
    }
    p.concept_label = planted ? 1 : 0;
    LatentTruth truth;
    truth.patients[std::string(kSinglePatient)] = std::move(p);
    return {Table(condition_schema(), std::move(rows)), std::move(truth)};
}

LatentTruth derive_condition_truth(const Table& table, std::string_view concept_id) {
    const auto& map = code_map();
    const auto& target = map.concept_by_id(concept_id);
    const auto system_col = table.schema().require("SYSTEM");
    const auto code_col = table.schema().require("CODE");
    PatientTruth p;
    int label = 0;
    for (const auto& row : table.rows()) {
        const auto code = text_of(row[code_col]);
        p.codes.insert(code);
        if (text_of(row[system_col]) == "SNOMED-CT" && map.indicates(target, code)) label = 1;
    }
    p.concept_label = label;
    LatentTruth truth;
    truth.patients[std::string(kSinglePatient)] = std::move(p);
    return truth;
}

// ---- weight and cost ----

Table gen_weight_cost(const GeneratorConfig& c) {
    require_rows(c);
    Rng rng(c.seed);
    std::vector<Row> rows;
    if (c.flavor == Flavor::Synthea) {
        static const std::vector<std::string> races = {"white", "black", "asian", "hispanic"};
        static const std::vector<std::string> genders = {"M", "F"};
        for (const auto& id : consecutive_ids(rng, c.n_rows)) {
            rows.push_back({id, rng.pick(races), rng.pick(genders), draw(rng, 100000, 20000000, 2),
                            draw(rng, 1000000, 20000000, 2)});
        }
        return Table(weight_cost_schema(c.flavor), std::move(rows));
    }

    // Visits per patient: the first patient has one visit, later patients one or two.
    std::vector<int> visits;
    for (std::size_t left = c.n_rows; left > 0;) {
        const int v = (!visits.empty() && left >= 2 && rng.bernoulli(0.35)) ? 2 : 1;
        visits.push_back(v);
        left -= static_cast<std::size_t>(v);
    }
    static const std::vector<std::string> genders = {"Male", "Female"};
    const auto ids = consecutive_ids(rng, visits.size());
    for (std::size_t p = 0; p < visits.size(); ++p) {
        const auto age = rng.uniform(18, 89);
        const auto tax = draw(rng, 1000, 25000, 1);
        const auto& gender = rng.pick(genders);
        const auto admission = draw(rng, 400, 1500, 1);
        for (int v = 1; v <= visits[p]; ++v) {
            const auto discharge = admission + draw(rng, -60, 60, 1);
            rows.push_back({age, tax, gender, ids[p], admission, std::int64_t{v}, draw(rng, 50000, 250000, 1),
                            discharge});
        }
    }
    return Table(weight_cost_schema(c.flavor), std::move(rows));
}

// ---- clinical profiles ----

namespace {

Row profile_row(const Date& date, std::string_view description, CellValue value, std::string_view units) {
    Row r{date, std::string(description), std::move(value), Empty{}};
    if (!units.empty()) r[3] = std::string(units);
    return r;
}

std::pair<Table, LatentTruth> synthea_profile(const GeneratorConfig& c, Rng& rng) {
    const Date date = random_date(rng, 2000, 2022);
    std::vector<Row> rows;
    PatientTruth p;
    const int target = rng.bernoulli(0.5) ? 1 : 0;

    auto temperature_row = [&](std::int64_t lo, std::int64_t hi) {
        const auto t = draw(rng, lo, hi, 1);
        rows.push_back(profile_row(date, kTemperature, t.to_string(), "Cel"));
        return t;
    };

    std::size_t required = 0;
    if (c.profile == ProfileKind::Mortality) {
        // Six indicators: BMI plus five status items.
        std::vector<int> flags(6, 0);
        const auto k = target ? rng.uniform(3, 6) : rng.uniform(0, 2);
        for (std::int64_t i = 0; i < k; ++i) flags[static_cast<std::size_t>(i)] = 1;
        rng.shuffle(flags);
        const auto bmi = flags[0] ? draw(rng, 301, 450, 1) : draw(rng, 180, 300, 1);
        rows.push_back(profile_row(date, kBmi, bmi.to_string(), "kg/m2"));
        for (std::size_t i = 0; i < kMortalityStatus.size(); ++i) {
            const auto& s = kMortalityStatus[i];
            rows.push_back(profile_row(date, s.description, std::string(flags[i + 1] ? s.positive : s.negative), ""));
        }
        temperature_row(360, 379);
        p.mortality = target;
        p.disorder = 0;
        p.recommend = 0;
        required = rows.size();
    } else if (c.profile == ProfileKind::Disorder) {
        std::vector<int> flags(4, 0);
        const auto k = target ? rng.uniform(2, 4) : rng.uniform(0, 1);
        for (std::int64_t i = 0; i < k; ++i) flags[static_cast<std::size_t>(i)] = 1;
        rng.shuffle(flags);
        const auto t = flags[0] ? temperature_row(380, 400) : temperature_row(360, 379);
        for (std::size_t i = 0; i < kDisorderStatus.size(); ++i) {
            const auto& s = kDisorderStatus[i];
            rows.push_back(profile_row(date, s.description, std::string(flags[i + 1] ? s.positive : s.negative), ""));
        }
        p.mortality = 0;
        p.disorder = target;
        p.recommend = (ge(t, "38.5") && flags[1]) ? 1 : 0;
        required = rows.size();
    } else {
        // Treatment: fever >= 38.5, red throat, no penicillin allergy.
        bool fever = true, red = true, allergy = false;
        if (!target) {
            const auto failures = rng.uniform(1, 7);  // non-empty subset of three failure modes
            fever = !(failures & 1);
            red = !(failures & 2);
            allergy = (failures & 4) != 0;
        }
        const auto t = fever ? temperature_row(385, 400) : temperature_row(360, 384);
        rows.push_back(profile_row(date, kThroat, std::string(red ? "Present" : "Absent"), ""));
        rows.push_back(profile_row(date, kAllergy, std::string(allergy ? "Yes" : "No"), ""));
        rows.push_back(profile_row(date, "Cough frequency", std::string("Low"), ""));
        p.mortality = 0;
        p.disorder = (ge(t, "38.0") ? 1 : 0) + (red ? 1 : 0) >= 2 ? 1 : 0;
        p.recommend = target;
        required = rows.size();
    }

    // Neutral vitals to reach n_rows.
    std::vector<std::size_t> order(kSyntheaVitals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; required + i < c.n_rows && i < order.size(); ++i) {
        const auto& v = kSyntheaVitals[order[i]];
        rows.push_back(profile_row(date, v.description, draw(rng, v.lo, v.hi, v.scale).to_string(), v.units));
    }
    rng.shuffle(rows);
    LatentTruth truth;
    truth.patients[std::string(kSinglePatient)] = std::move(p);
    return {Table(profile_schema(Flavor::Synthea, c.profile), std::move(rows)), std::move(truth)};
}

std::pair<Table, LatentTruth> eicu_labs(const GeneratorConfig& c, Rng& rng) {
    struct Draw {
        std::string_view lab;
        Decimal value;
    };
    std::vector<Draw> draws;
    PatientTruth p;
    const auto normal = [&](std::string_view name) {
        const auto& l = lab_named(name);
        return Decimal{rng.uniform(l.normal_lo, l.normal_hi), l.scale};
    };

    if (c.profile == ProfileKind::Mortality) {
        const int target = rng.bernoulli(0.5) ? 1 : 0;
        std::vector<int> flags(6, 0);
        const auto k = target ? rng.uniform(3, 6) : rng.uniform(0, 2);
        for (std::int64_t i = 0; i < k; ++i) flags[static_cast<std::size_t>(i)] = 1;
        rng.shuffle(flags);
        for (std::size_t i = 0; i < kMortalityLabs.size(); ++i) {
            const auto& m = kMortalityLabs[i];
            const auto& l = lab_named(m.lab);
            draws.push_back({m.lab, flags[i] ? Decimal{rng.uniform(m.lo, m.hi), l.scale} : normal(m.lab)});
        }
        for (std::string_view extra : {"sodium", "glucose", "platelets x 1000"}) draws.push_back({extra, normal(extra)});
        p.mortality = target;
    } else {
        const auto& panel = disease_panel();
        Bits10 bits{};
        for (std::size_t i = 0; i < panel.size(); ++i) {
            bits[i] = rng.bernoulli(0.5) ? 1 : 0;
            const auto& l = lab_named(panel[i].lab);
            const auto [lo, hi] = kDiseaseAbnormal[i];
            draws.push_back({panel[i].lab, bits[i] ? Decimal{rng.uniform(lo, hi), l.scale} : normal(panel[i].lab)});
        }
        draws.push_back({"lactate", normal("lactate")});
        p.disease_vector = bits;
    }

    rng.shuffle(draws);
    const auto labid = rng.uniform(51000000, 51999000);
    const auto stay = rng.uniform(100000, 999999);
    const auto offset = rng.uniform(-1440, 0);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& l = lab_named(draws[i].lab);
        rows.push_back({labid + static_cast<std::int64_t>(i), stay, offset, l.type_id, std::string(l.name),
                        draws[i].value, draws[i].value.trimmed().to_string()});
    }
    Table table(profile_schema(Flavor::Eicu, c.profile), std::move(rows));

    // Non-targeted labels follow from the drawn values.
    if (!p.mortality) p.mortality = 0;
    int crit = 0;
    Bits10 bits{};
    for (const auto& d : draws) {
        for (const auto& m : kMortalityLabs)
            if (m.lab == d.lab && beyond(d.value, m.above, m.threshold)) ++crit;
        for (std::size_t i = 0; i < disease_panel().size(); ++i)
            if (disease_panel()[i].lab == d.lab && beyond(d.value, disease_panel()[i].above, disease_panel()[i].threshold))
                bits[i] = 1;
    }
    if (c.profile == ProfileKind::Mortality)
        p.disease_vector = bits;
    else
        p.mortality = crit >= 3 ? 1 : 0;

    LatentTruth truth;
    truth.patients[std::to_string(stay)] = std::move(p);
    return {std::move(table), std::move(truth)};
}

std::pair<Table, LatentTruth> eicu_diagnoses(const GeneratorConfig& c, Rng& rng) {
    const auto& map = code_map();
    Bits10 bits{};
    std::set<std::string> codes;
    for (std::size_t i = 0; i < map.drugs.size() && i < 10; ++i) {
        bits[i] = rng.bernoulli(0.5) ? 1 : 0;
        if (bits[i]) codes.insert(rng.pick(map.drugs[i].indications));
    }
    std::vector<std::string> distractors = map.icd9_distractors;
    rng.shuffle(distractors);
    const auto n_extra = rng.uniform(1, std::min<std::int64_t>(3, static_cast<std::int64_t>(distractors.size())));
    for (std::int64_t i = 0; i < n_extra; ++i) codes.insert(distractors[static_cast<std::size_t>(i)]);
    (void)c;

    std::vector<std::string> ordered(codes.begin(), codes.end());
    rng.shuffle(ordered);
    std::vector<Row> rows;
    for (const auto& code : ordered) rows.push_back({code, map.icd9_titles.at(code)});
    PatientTruth p;
    p.codes = codes;
    p.drug_vector = bits;
    LatentTruth truth;
    truth.patients[std::string(kSinglePatient)] = std::move(p);
    return {Table(profile_schema(Flavor::Eicu, ProfileKind::Treatment), std::move(rows)), std::move(truth)};
}

}  // namespace

std::pair<Table, LatentTruth> gen_clinical_profile(const GeneratorConfig& c) {
    require_rows(c);
    Rng rng(c.seed);
    if (c.flavor == Flavor::Synthea) return synthea_profile(c, rng);
    if (c.profile == ProfileKind::Treatment) return eicu_diagnoses(c, rng);
    return eicu_labs(c, rng);
}

LatentTruth derive_profile_truth(const Table& table, Flavor flavor) {
    LatentTruth truth;
    const auto& schema = table.schema();
    if (flavor == Flavor::Synthea) {
        const auto desc_col = schema.require("DESCRIPTION");
        const auto value_col = schema.require("VALUE");
        int mortality = 0, disorder = 0;
        bool fever = false, red = false, allergy = false;
        for (const auto& row : table.rows()) {
            const auto desc = lower(text_of(row[desc_col]));
            const auto value = text_of(row[value_col]);
            const auto number = number_of(row[value_col]);
            for (const auto& s : kMortalityStatus)
                if (desc == lower(s.description) && value == s.positive) ++mortality;
            if (desc == lower(kBmi) && number && gt(*number, "30")) ++mortality;
            for (const auto& s : kDisorderStatus)
                if (desc == lower(s.description) && value == s.positive) ++disorder;
            if (desc == lower(kTemperature) && number) {
                if (ge(*number, "38.0")) ++disorder;
                if (ge(*number, "38.5")) fever = true;
            }
            if (desc == lower(kThroat) && value == "Present") red = true;
            if (desc == lower(kAllergy) && value == "Yes") allergy = true;
        }
        PatientTruth p;
        p.mortality = mortality >= 3 ? 1 : 0;
        p.disorder = disorder >= 2 ? 1 : 0;
        p.recommend = fever && red && !allergy ? 1 : 0;
        truth.patients[std::string(kSinglePatient)] = std::move(p);
        return truth;
    }

    if (schema.index_of("ICD9_CODE")) {
        const auto& map = code_map();
        const auto code_col = schema.require("ICD9_CODE");
        PatientTruth p;
        Bits10 bits{};
        for (const auto& row : table.rows()) {
            const auto code = text_of(row[code_col]);
            p.codes.insert(code);
            for (std::size_t i = 0; i < map.drugs.size() && i < 10; ++i)
                for (const auto& ind : map.drugs[i].indications)
                    if (ind == code) bits[i] = 1;
        }
        p.drug_vector = bits;
        truth.patients[std::string(kSinglePatient)] = std::move(p);
        return truth;
    }

    const auto stay_col = schema.require("patientunitstayid");
    const auto name_col = schema.require("labname");
    const auto result_col = schema.require("labresult");
    std::map<std::string, std::pair<int, Bits10>> per_patient;
    for (const auto& row : table.rows()) {
        auto& [crit, bits] = per_patient[text_of(row[stay_col])];
        const auto value = number_of(row[result_col]);
        if (!value) continue;
        const auto name = text_of(row[name_col]);
        for (const auto& m : kMortalityLabs)
            if (m.lab == name && beyond(*value, m.above, m.threshold)) ++crit;
        for (std::size_t i = 0; i < disease_panel().size(); ++i) {
            const auto& d = disease_panel()[i];
            if (d.lab == name && beyond(*value, d.above, d.threshold)) bits[i] = 1;
        }
    }
    for (const auto& [id, v] : per_patient) {
        auto& p = truth.patients[id];
        p.mortality = v.first >= 3 ? 1 : 0;
        p.disease_vector = v.second;
    }
    return truth;
}

}  // namespace ehrbench::synth
