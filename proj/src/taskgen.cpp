#include "ehrbench/taskgen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include <json.hpp>

#include "ehrbench/hash.hpp"
#include "ehrbench/resources.hpp"
#include "ehrbench/rng.hpp"
#include "ehrbench/synth.hpp"

namespace ehrbench {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string title_case(std::string_view s) {
    std::string out(s);
    bool start = true;
    for (auto& c : out) {
        if (start) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        start = c == ' ';
    }
    return out;
}

// "> 89" style tokens mean "at least N + 1".
std::optional<std::int64_t> filter_number(const CellValue& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
    const auto text = render_cell(cell);
    std::string_view v = text;
    std::int64_t bump = 0;
    if (v.size() > 2 && v[0] == '>' && v[1] == ' ') {
        v.remove_prefix(2);
        bump = 1;
    }
    if (v.empty()) return std::nullopt;
    std::int64_t n = 0;
    for (char c : v) {
        if (c < '0' || c > '9' || n > 1'000'000'000'000LL) return std::nullopt;
        n = n * 10 + (c - '0');
    }
    return n + bump;
}

bool compare(std::int64_t a, CompareOp op, std::int64_t b) {
    switch (op) {
        case CompareOp::Eq: return a == b;
        case CompareOp::Ne: return a != b;
        case CompareOp::Lt: return a < b;
        case CompareOp::Le: return a <= b;
        case CompareOp::Gt: return a > b;
        case CompareOp::Ge: return a >= b;
    }
    return false;
}

std::string_view op_name(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "eq";
        case CompareOp::Ne: return "ne";
        case CompareOp::Lt: return "lt";
        case CompareOp::Le: return "le";
        case CompareOp::Gt: return "gt";
        case CompareOp::Ge: return "ge";
    }
    return "eq";
}

CompareOp parse_op(std::string_view s) {
    for (auto op : {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge})
        if (op_name(op) == s) return op;
    throw std::invalid_argument("bad comparison operator");
}

CellType parse_type(std::string_view s) {
    for (auto t : {CellType::Text, CellType::Integer, CellType::Decimal, CellType::Date})
        if (to_string(t) == s) return t;
    throw std::invalid_argument("bad cell type");
}

[[noreturn]] void missing(const std::string& what) { throw OracleError(OracleError::Kind::MissingTarget, what); }

Decimal number_cell(const CellValue& cell) {
    if (auto d = as_decimal(cell)) return *d;
    if (auto d = Decimal::parse(render_cell(cell))) return *d;
    throw OracleError(OracleError::Kind::SchemaMismatch, "non-numeric value where a number was expected");
}

std::vector<const Row*> rows_for(const Table& t, std::string_view column, std::string_view id) {
    const auto col = t.schema().require(column);
    std::vector<const Row*> out;
    for (const auto& row : t.rows())
        if (render_cell(row[col]) == id) out.push_back(&row);
    return out;
}

GoldAnswer observation_gold(TaskId task, Flavor flavor, const Table& t, const TaskParams& p) {
    const auto desc = t.schema().require("DESCRIPTION");
    const auto value = t.schema().require("VALUE");
    std::vector<Decimal> values;
    for (const auto* row : rows_for(t, "PATIENT", p.patient_id))
        if (render_cell((*row)[desc]) == synth::observation_target(flavor)) values.push_back(number_cell((*row)[value]));
    if (values.empty()) missing("patient " + p.patient_id + " has no target observations");
    const auto count = static_cast<std::int64_t>(values.size());
    Decimal sum{0, 0};
    for (const auto& v : values) sum = sum + v;
    switch (task) {
        case TaskId::DR1: return Number{Decimal{count, 0}};
        case TaskId::DR2: return Number{sum.divided(count, 1)};
        default: return Number{sum.rounded(flavor == Flavor::Eicu ? 1 : 0)};
    }
}

GoldAnswer weight_cost_gold(TaskId task, Flavor flavor, const Table& t, const TaskParams& p) {
    if (flavor == Flavor::Synthea) {
        const auto rows = rows_for(t, "ID", p.patient_id);
        if (rows.empty()) missing("no row for patient " + p.patient_id);
        const auto& row = *rows.front();
        const auto income = number_cell(row[t.schema().require("INCOME")]);
        const auto care = number_cell(row[t.schema().require("HEALTHCARE")]);
        const auto v = task == TaskId::DR4 ? income - care : income + care;
        return Number{v.rounded(2)};
    }
    auto rows = rows_for(t, "patientunitstayid", p.patient_id);
    if (rows.empty()) missing("no row for patient " + p.patient_id);
    const auto& s = t.schema();
    if (task == TaskId::DR5) {
        Decimal sum{0, 1};
        for (const auto* row : rows) sum = sum + number_cell((*row)[s.require("cost")]);
        return Number{sum.rounded(1)};
    }
    const auto visit = s.require("unitvisitnumber");
    std::stable_sort(rows.begin(), rows.end(), [&](const Row* a, const Row* b) {
        return number_cell((*a)[visit]).mantissa < number_cell((*b)[visit]).mantissa;
    });
    const auto change = number_cell((*rows.back())[s.require("dischargeweight")]) -
                        number_cell((*rows.front())[s.require("admissionweight")]);
    return Number{change.rounded(1)};
}

GoldAnswer filter_gold(const Table& t, const RowFilter& f) {
    std::vector<std::pair<std::size_t, std::string>> eq;
    for (const auto& [col, value] : f.equals) eq.emplace_back(t.schema().require(col), lower(value));
    const auto num = t.schema().require(f.numeric_column);
    const auto id_col = 0;
    IdSet out;
    for (const auto& row : t.rows()) {
        bool keep = true;
        for (const auto& [col, value] : eq) keep = keep && lower(render_cell(row[col])) == value;
        const auto n = filter_number(row[num]);
        keep = keep && n && compare(*n, f.op, f.threshold);
        if (keep) out.ids.push_back(render_cell(row[id_col]));
    }
    std::sort(out.ids.begin(), out.ids.end());
    return out;
}

// ---- instance construction ----

struct Built {
    Table table;
    TaskParams params;
    std::map<std::string, std::string> slots;
    std::string label_word;
    std::optional<GoldAnswer> latent;  // label from generator bookkeeping, when the task has one
};

std::size_t rows_between(Rng& rng, int lo, int hi) { return static_cast<std::size_t>(rng.uniform(lo, hi)); }

Built build_du(TaskId task, Flavor flavor, std::uint64_t gen_seed, Rng& rng) {
    synth::GeneratorConfig c;
    c.seed = gen_seed;
    c.flavor = flavor;
    c.n_rows = rows_between(rng, 4, 10);
    Built b{synth::gen_demographics(c).first, {}, {}, {}, {}};
    const auto& t = b.table;
    const auto& anchor = t.rows()[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(t.row_count()) - 1))];
    auto& f = b.params.filter;
    const bool greater = task == TaskId::DU1;
    f.op = greater ? CompareOp::Gt : CompareOp::Lt;
    if (flavor == Flavor::Synthea) {
        const bool by_race = rng.bernoulli(0.5);
        const std::string column = by_race ? "RACE" : "GENDER";
        const auto value = lower(render_cell(anchor[t.schema().require(column)]));
        f.equals = {{column, value}};
        f.numeric_column = "INCOME";
        f.threshold = rng.uniform(1, 9) * 10000;
        b.slots["condition"] = value;
        b.slots["threshold"] = std::to_string(f.threshold);
    } else {
        const auto ethnicity = render_cell(anchor[t.schema().require("ethnicity")]);
        const auto gender = render_cell(anchor[t.schema().require("gender")]);
        const auto status = render_cell(anchor[t.schema().require("hospitaldischargestatus")]);
        f.equals = {{"ethnicity", ethnicity}, {"gender", gender}, {"hospitaldischargestatus", status}};
        f.numeric_column = "age";
        f.threshold = greater ? rng.uniform(6, 17) * 5 : rng.uniform(7, 18) * 5;
        b.slots["ethnicity"] = title_case(ethnicity);
        b.slots["gender"] = lower(gender);
        b.slots["age"] = std::to_string(f.threshold);
        b.slots["outcome"] = lower(status) == "expired" ? "died" : "were discharged alive";
    }
    return b;
}

Built build_dr_obs(Flavor flavor, std::uint64_t gen_seed, Rng& rng) {
    synth::GeneratorConfig c;
    c.seed = gen_seed;
    c.flavor = flavor;
    c.n_rows = rows_between(rng, 7, 12);
    c.n_patients = 3;
    Built b{synth::gen_observations(c), {}, {}, {}, {}};
    std::vector<std::string> candidates;
    const auto& t = b.table;
    for (std::size_t r = 0; r < t.row_count(); ++r)
        if (render_cell(t.at(r, "DESCRIPTION")) == synth::observation_target(flavor)) {
            auto id = render_cell(t.at(r, "PATIENT"));
            if (std::find(candidates.begin(), candidates.end(), id) == candidates.end()) candidates.push_back(id);
        }
    std::sort(candidates.begin(), candidates.end());
    b.params.patient_id = rng.pick(candidates);
    b.slots["patient_id"] = b.params.patient_id;
    return b;
}

Built build_dr_money(TaskId task, Flavor flavor, std::uint64_t gen_seed, Rng& rng) {
    synth::GeneratorConfig c;
    c.seed = gen_seed;
    c.flavor = flavor;
    c.n_rows = rows_between(rng, 4, 7);
    Built b{synth::gen_weight_cost(c), {}, {}, {}, {}};
    const auto& t = b.table;
    const std::string id_col = flavor == Flavor::Synthea ? "ID" : "patientunitstayid";
    std::map<std::string, int> visits;
    for (std::size_t r = 0; r < t.row_count(); ++r) ++visits[render_cell(t.at(r, id_col))];
    std::vector<std::string> candidates;
    for (const auto& [id, n] : visits)
        if (!(flavor == Flavor::Eicu && task == TaskId::DR4 && n != 1)) candidates.push_back(id);
    b.params.patient_id = rng.pick(candidates);
    b.slots["patient_id"] = b.params.patient_id;
    return b;
}

Built build_ku(Flavor flavor, std::uint64_t gen_seed, Rng& rng) {
    const auto& map = code_map();
    const auto& target = rng.pick(map.concepts);
    synth::GeneratorConfig c;
    c.seed = gen_seed;
    c.flavor = flavor;
    c.n_rows = rows_between(rng, 4, 7);
    c.target_concept = target.id;
    auto [table, truth] = synth::gen_condition_codes(c);
    Built b{std::move(table), {}, {}, target.label_word, {}};
    b.params.concept_id = target.id;
    b.slots["term"] = target.term;
    b.slots["label"] = target.label_word;
    b.slots["semantic_tag"] = target.semantic_tag;
    b.latent = Binary{*truth.patients.at(std::string(synth::kSinglePatient)).concept_label};
    return b;
}

std::string numbered(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + items[i];
    }
    return out;
}

Built build_kr(TaskId task, Flavor flavor, std::uint64_t gen_seed) {
    synth::GeneratorConfig c;
    c.seed = gen_seed;
    c.flavor = flavor;
    c.n_rows = 10;
    c.profile = task == TaskId::KR1   ? synth::ProfileKind::Mortality
                : task == TaskId::KR2 ? synth::ProfileKind::Disorder
                                      : synth::ProfileKind::Treatment;
    auto [table, truth] = synth::gen_clinical_profile(c);
    Built b{std::move(table), {}, {}, {}, {}};
    const auto& p = truth.patients.begin()->second;
    std::vector<std::string> diseases;
    for (const auto& d : synth::disease_panel()) diseases.emplace_back(d.disease);
    const auto drugs = synth::drug_panel();
    b.slots["disease_list"] = numbered(diseases);
    b.slots["drug_list"] = numbered(std::vector<std::string>(drugs.begin(), drugs.end()));
    if (flavor == Flavor::Synthea) {
        b.latent = Binary{task == TaskId::KR1 ? *p.mortality : task == TaskId::KR2 ? *p.disorder : *p.recommend};
    } else if (task == TaskId::KR1) {
        b.latent = Word{*p.mortality ? "Expired" : "Alive"};
    } else {
        b.latent = BinaryVector{task == TaskId::KR2 ? *p.disease_vector : *p.drug_vector};
    }
    return b;
}

Built build(TaskId task, Flavor flavor, std::uint64_t gen_seed, Rng& rng) {
    switch (task) {
        case TaskId::DU1:
        case TaskId::DU2: return build_du(task, flavor, gen_seed, rng);
        case TaskId::DR1:
        case TaskId::DR2:
        case TaskId::DR3: return build_dr_obs(flavor, gen_seed, rng);
        case TaskId::DR4:
        case TaskId::DR5: return build_dr_money(task, flavor, gen_seed, rng);
        case TaskId::KU1: return build_ku(flavor, gen_seed, rng);
        default: return build_kr(task, flavor, gen_seed);
    }
}

std::string template_name(Flavor flavor, TaskId task, std::string_view part) {
    return std::string(to_string(flavor)) + "/" + std::string(to_string(task)) + "/" + std::string(part);
}

std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

std::string pad3(std::size_t i) {
    auto s = std::to_string(i);
    return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

std::size_t task_index(TaskId t) {
    return static_cast<std::size_t>(std::find(kAllTasks.begin(), kAllTasks.end(), t) - kAllTasks.begin());
}

json params_json(const TaskParams& p) {
    json eq = json::array();
    for (const auto& [c, v] : p.filter.equals) eq.push_back({c, v});
    return json{{"patient_id", p.patient_id},
                {"equals", eq},
                {"numeric_column", p.filter.numeric_column},
                {"op", op_name(p.filter.op)},
                {"threshold", p.filter.threshold},
                {"concept", p.concept_id}};
}

TaskParams params_from_json(const json& j) {
    TaskParams p;
    p.patient_id = j.at("patient_id").get<std::string>();
    for (const auto& e : j.at("equals")) p.filter.equals.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    p.filter.numeric_column = j.at("numeric_column").get<std::string>();
    p.filter.op = parse_op(j.at("op").get<std::string>());
    p.filter.threshold = j.at("threshold").get<std::int64_t>();
    p.concept_id = j.at("concept").get<std::string>();
    return p;
}

}  // namespace

std::vector<std::string> expected_columns(TaskId task, Flavor flavor) {
    switch (task) {
        case TaskId::DU1:
        case TaskId::DU2: return synth::demographics_schema(flavor).names();
        case TaskId::DR1:
        case TaskId::DR2:
        case TaskId::DR3: return synth::observation_schema(flavor).names();
        case TaskId::DR4:
        case TaskId::DR5: return synth::weight_cost_schema(flavor).names();
        case TaskId::KU1: return synth::condition_schema().names();
        case TaskId::KR1: return synth::profile_schema(flavor, synth::ProfileKind::Mortality).names();
        case TaskId::KR2: return synth::profile_schema(flavor, synth::ProfileKind::Disorder).names();
        case TaskId::KR3: return synth::profile_schema(flavor, synth::ProfileKind::Treatment).names();
    }
    return {};
}

GoldAnswer oracle(TaskId task, Flavor flavor, const Table& table, const TaskParams& params) {
    if (table.schema().names() != expected_columns(task, flavor))
        throw OracleError(OracleError::Kind::SchemaMismatch,
                          "table columns do not match " + std::string(to_string(task)) + " " +
                              std::string(to_string(flavor)));
    switch (task) {
        case TaskId::DU1:
        case TaskId::DU2: return filter_gold(table, params.filter);
        case TaskId::DR1:
        case TaskId::DR2:
        case TaskId::DR3: return observation_gold(task, flavor, table, params);
        case TaskId::DR4:
        case TaskId::DR5: return weight_cost_gold(task, flavor, table, params);
        case TaskId::KU1: {
            try {
                code_map().concept_by_id(params.concept_id);
            } catch (const std::out_of_range&) {
                missing("unknown concept " + params.concept_id);
            }
            const auto truth = synth::derive_condition_truth(table, params.concept_id);
            return Binary{*truth.patients.at(std::string(synth::kSinglePatient)).concept_label};
        }
        default: break;
    }
    const auto truth = synth::derive_profile_truth(table, flavor);
    if (truth.patients.empty()) missing("profile has no patient");
    const auto& p = truth.patients.begin()->second;
    if (flavor == Flavor::Synthea)
        return Binary{task == TaskId::KR1 ? *p.mortality : task == TaskId::KR2 ? *p.disorder : *p.recommend};
    if (task == TaskId::KR1) return Word{*p.mortality ? "Expired" : "Alive"};
    if (task == TaskId::KR2) return BinaryVector{*p.disease_vector};
    return BinaryVector{*p.drug_vector};
}

std::string_view to_string(SeedDomain d) {
    switch (d) {
        case SeedDomain::Eval: return "eval";
        case SeedDomain::Finetune: return "finetune";
        case SeedDomain::Pool: return "pool";
    }
    return "?";
}

std::string table_hash(const Table& table) { return sha256_hex(render_tsv(table)); }

std::vector<TaskInstance> synthesize(TaskId task, Flavor flavor, std::uint64_t seed, std::size_t n, SeedDomain domain,
                                     const std::set<std::string>& exclude) {
    if (n == 0) throw std::invalid_argument("n must be positive");
    const auto& templates = task_templates();
    const auto& preamble_t = templates.get(template_name(flavor, task, "preamble"));
    const auto& body_t = templates.get(template_name(flavor, task, "body"));
    std::vector<TaskInstance> out;
    for (std::uint64_t candidate = 0; out.size() < n; ++candidate) {
        if (candidate > n * 100 + 1000) throw std::runtime_error("could not find enough non-excluded tables");
        const auto instance_seed = derive_seed(seed, {static_cast<std::uint64_t>(domain), task_index(task),
                                                      static_cast<std::uint64_t>(flavor), candidate});
        Rng rng(derive_seed(instance_seed, {2}));
        auto b = build(task, flavor, derive_seed(instance_seed, {1}), rng);
        if (!exclude.empty() && exclude.count(table_hash(b.table))) continue;

        TaskInstance inst;
        inst.task = task;
        inst.flavor = flavor;
        inst.seed = instance_seed;
        inst.instance_id = std::string(to_string(task)) + "-" + std::string(to_string(flavor)) + "-" +
                           std::string(to_string(domain)) + "-" + pad3(out.size());
        inst.params = b.params;
        inst.preamble = fill(preamble_t, b.slots);
        inst.instruction = fill(body_t, b.slots);
        inst.contract = contract_for(task, flavor, b.label_word);
        inst.gold = oracle(task, flavor, b.table, b.params);
        if (b.latent && !(*b.latent == inst.gold))
            throw std::logic_error("oracle disagrees with generator truth for " + inst.instance_id);
        inst.table = std::move(b.table);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> synthesize_all(std::uint64_t seed, std::size_t per_task) {
    std::vector<TaskInstance> all;
    for (auto f : kAllFlavors)
        for (auto t : kAllTasks) {
            auto part = synthesize(t, f, seed, per_task);
            all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
    return all;
}

std::vector<TaskInstance> export_finetune_set(TaskId task, Flavor flavor, std::uint64_t seed,
                                              const std::set<std::string>& eval_hashes) {
    return synthesize(task, flavor, seed, kFinetunePerTask, SeedDomain::Finetune, eval_hashes);
}

std::string bare_prompt(const TaskInstance& instance, InputFormat format) {
    std::string out;
    if (!instance.preamble.empty()) out += instance.preamble + "\n\n";
    out += "Table:\n" + serialize(instance.table, format) + "\n\n" + instance.instruction;
    return out;
}

std::string instance_to_jsonl(const TaskInstance& inst) {
    json columns = json::array();
    for (const auto& c : inst.table.schema().columns()) columns.push_back({c.name, to_string(c.type)});
    json j = {{"instance_id", inst.instance_id},
              {"task", to_string(inst.task)},
              {"flavor", to_string(inst.flavor)},
              {"seed", hex16(inst.seed)},
              {"columns", columns},
              {"table_tsv", render_tsv(inst.table)},
              {"preamble", inst.preamble},
              {"instruction", inst.instruction},
              {"contract_tag", contract_tag(inst.contract)},
              {"gold_rendered", render_answer(inst.contract, inst.gold)},
              {"params", params_json(inst.params)}};
    return j.dump();
}

TaskInstance instance_from_jsonl(std::string_view line) {
    try {
        const auto j = json::parse(line);
        TaskInstance inst;
        inst.instance_id = j.at("instance_id").get<std::string>();
        const auto task = parse_task(j.at("task").get<std::string>());
        const auto flavor = parse_flavor(j.at("flavor").get<std::string>());
        if (!task || !flavor) throw std::invalid_argument("unknown task or flavor");
        inst.task = *task;
        inst.flavor = *flavor;
        inst.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
        std::vector<Column> cols;
        for (const auto& c : j.at("columns"))
            cols.push_back(Column{c.at(0).get<std::string>(), parse_type(c.at(1).get<std::string>())});
        inst.table = parse_tsv(j.at("table_tsv").get<std::string>(), Schema(cols));
        if (inst.table.schema().columns() != cols) throw std::invalid_argument("column types do not round-trip");
        inst.preamble = j.at("preamble").get<std::string>();
        inst.instruction = j.at("instruction").get<std::string>();
        inst.contract = parse_contract_tag(j.at("contract_tag").get<std::string>());
        const auto gold = parse_answer(inst.contract, j.at("gold_rendered").get<std::string>(), Leniency::Strict);
        if (is_invalid(gold)) throw std::invalid_argument("gold does not satisfy its contract");
        inst.gold = std::visit(
            [](const auto& g) -> GoldAnswer {
                if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Invalid>)
                    throw std::logic_error("unreachable");
                else
                    return g;
            },
            gold);
        inst.params = params_from_json(j.at("params"));
        return inst;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed instance record: ") + e.what());
    } catch (const TableError& e) {
        throw std::invalid_argument(std::string("malformed instance table: ") + e.what());
    }
}

std::string finetune_to_jsonl(const TaskInstance& inst) {
    json j = {{"instance_id", inst.instance_id},
              {"task", to_string(inst.task)},
              {"flavor", to_string(inst.flavor)},
              {"instruction", bare_prompt(inst)},
              {"response", render_answer(inst.contract, inst.gold)}};
    return j.dump();
}

}  // namespace ehrbench
