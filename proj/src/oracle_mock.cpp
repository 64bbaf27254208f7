#include "ehrbench/oracle_mock.hpp"

#include <map>
#include <set>
#include <unordered_map>

#include "ehrbench/formats.hpp"
#include "ehrbench/hash.hpp"

namespace ehrbench {

namespace {

constexpr const char* kPlanReply = "Find the rows for the patient and compute the requested value.";
constexpr const char* kAlignReply = "Filter rows where PATIENT matches, then use VALUE.";
constexpr const char* kCodeReply = "```python\nresult = df.shape[0]\n```";

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

struct Indexed {
    TaskInstance inst;
    std::vector<std::string> renderings;
};

}  // namespace

std::string gold_result(const GoldAnswer& gold) {
    if (auto* ids = std::get_if<IdSet>(&gold)) {
        std::string out;
        for (const auto& id : ids->ids) {
            if (!out.empty()) out += ", ";
            const auto nz = id.find_first_not_of('0');
            out += nz == std::string::npos ? "0" : id.substr(nz);
        }
        return "[" + out + "]";
    }
    if (auto* n = std::get_if<Number>(&gold)) return n->value.to_string();
    if (auto* b = std::get_if<Binary>(&gold)) return b->value ? "True" : "False";
    if (auto* w = std::get_if<Word>(&gold)) return w->value;
    return to_string(std::get<BinaryVector>(gold).bits);
}

std::shared_ptr<MockBackend> oracle_mock(std::vector<TaskInstance> instances, OracleMockOptions options) {
    auto m = std::make_shared<MockBackend>(std::move(options.first));
    m->add_rule({{}, {"You are a table-aware logic mapper"}, kAlignReply});
    m->add_rule({{}, {"Assign the final result to a variable named result"}, kCodeReply});
    m->add_rule({{}, {"Only output one word: CODE or DIRECT"}, "CODE"});
    for (const char* anchor :
         {"You are a table question analyzer", "You are a table reasoning planner", "You are a clinical reasoning planner"})
        m->add_rule({{}, {anchor}, kPlanReply});

    struct Index {
        std::unordered_map<std::string, std::vector<Indexed>> by_instruction;
        std::set<std::size_t> lengths;
    };
    auto index = std::make_shared<Index>();
    for (auto& inst : instances) {
        Indexed entry;
        for (auto f : kAllFormats) entry.renderings.push_back(serialize(inst.table, f));
        entry.renderings.push_back(render_tsv(inst.table));
        index->lengths.insert(inst.instruction.size());
        auto key = inst.instruction;
        entry.inst = std::move(inst);
        index->by_instruction[key].push_back(std::move(entry));
    }
    const double error_rate = options.error_rate;
    m->set_responder([index, error_rate](const ChatRequest& r) -> std::optional<std::string> {
        if (error_rate > 0) {
            const auto h = request_key(r);
            const double u =
                static_cast<double>(std::stoull(h.substr(0, 12), nullptr, 16)) / static_cast<double>(1ULL << 48);
            if (u < error_rate) return "I am not able to determine the answer from this table.";
        }
        const bool direct = contains(r.user_text, "You are a clinical reasoning assistant");
        // the question ends the bare prompt and the Instruction block of stage prompts
        std::string_view block = r.user_text;
        if (direct) {
            const auto b = block.find("Instruction:\n");
            const auto e = block.find("\n\nAligned logic:");
            if (b == std::string_view::npos || e == std::string_view::npos || e < b) return std::nullopt;
            block = block.substr(b + 13, e - b - 13);
        }
        for (auto len : index->lengths) {
            if (len > block.size()) break;
            auto it = index->by_instruction.find(std::string(block.substr(block.size() - len)));
            if (it == index->by_instruction.end()) continue;
            for (const auto& entry : it->second) {
                bool table_seen = false;
                for (const auto& t : entry.renderings)
                    if (contains(r.user_text, t)) table_seen = true;
                if (!table_seen) continue;
                const auto& inst = entry.inst;
                if (direct && std::holds_alternative<BinaryLabelContract>(inst.contract))
                    return "Label: " + std::to_string(std::get<Binary>(inst.gold).value);
                return render_answer(inst.contract, inst.gold);
            }
        }
        return std::nullopt;
    });
    return m;
}

std::shared_ptr<FunctionExecutor> gold_executor(const std::vector<TaskInstance>& instances) {
    std::map<std::string, std::string> results;
    for (const auto& inst : instances) results[inst.instance_id] = gold_result(inst.gold);
    return std::make_shared<FunctionExecutor>([results](const ExecRequest& req) {
        const auto id = req.id.substr(0, req.id.rfind('#'));
        auto it = results.find(id);
        if (it == results.end()) return ExecResponse::failure(req.id, ExecErrorKind::Runtime, "unknown instance");
        return ExecResponse::success(req.id, it->second);
    });
}

}  // namespace ehrbench
