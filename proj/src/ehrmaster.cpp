#include "ehrbench/ehrmaster.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>

#include "ehrbench/json_io.hpp"
#include "ehrbench/resources.hpp"

namespace ehrbench {

using nlohmann::json;

PlanKind plan_kind(TaskId task) {
    const auto i = info(task);
    if (i.scenario == Scenario::DataDriven)
        return i.level == Level::Understanding ? PlanKind::DU : PlanKind::DR;
    return i.level == Level::Understanding ? PlanKind::KU : PlanKind::KR;
}

std::string_view to_string(PlanKind kind) {
    switch (kind) {
        case PlanKind::DU: return "D-U";
        case PlanKind::DR: return "D-R";
        case PlanKind::KU: return "K-U";
        case PlanKind::KR: return "K-R";
    }
    return "?";
}

std::string_view to_string(Decision d) { return d == Decision::Code ? "Code" : "Direct"; }

// ---- trace serialization ----

json trace_to_json(const PipelineTrace& t) {
    json j{{"instance_id", t.instance_id},
           {"plan_text", t.plan_text},
           {"aligned_text", t.aligned_text},
           {"decision", to_string(t.decision)},
           {"code_attempts", t.code_attempts},
           {"fallback_used", t.fallback_used},
           {"raw_answer", t.raw_answer},
           {"final_answer", parsed_to_json(t.final_answer)},
           {"backend_calls", t.backend_calls}};
    j["decision_text"] = t.decision_text ? json(*t.decision_text) : json(nullptr);
    j["code_text"] = t.code_text ? json(*t.code_text) : json(nullptr);
    j["execution_result"] = t.execution_result ? json(*t.execution_result) : json(nullptr);
    j["execution_error"] = t.execution_error ? json{{"kind", to_string(t.execution_error->kind)},
                                                    {"message", t.execution_error->message}}
                                             : json(nullptr);
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    json lat = json::array();
    for (const auto& s : t.stage_latencies) lat.push_back({{"stage", s.stage}, {"ms", s.ms}});
    j["stage_latencies"] = std::move(lat);
    return j;
}

PipelineTrace trace_from_json(const json& j) {
    const auto opt = [&](const char* name) -> std::optional<std::string> {
        const auto& v = j.at(name);
        if (v.is_null()) return std::nullopt;
        return v.get<std::string>();
    };
    try {
        PipelineTrace t;
        t.instance_id = j.at("instance_id").get<std::string>();
        t.plan_text = j.at("plan_text").get<std::string>();
        t.aligned_text = j.at("aligned_text").get<std::string>();
        t.decision_text = opt("decision_text");
        const auto d = j.at("decision").get<std::string>();
        if (d != "Code" && d != "Direct") throw std::invalid_argument("bad decision");
        t.decision = d == "Code" ? Decision::Code : Decision::Direct;
        t.code_text = opt("code_text");
        t.execution_result = opt("execution_result");
        if (const auto& e = j.at("execution_error"); !e.is_null()) {
            auto kind = parse_exec_error_kind(e.at("kind").get<std::string>());
            if (!kind) throw std::invalid_argument("bad error kind");
            t.execution_error = ExecError{*kind, e.at("message").get<std::string>()};
        }
        t.code_attempts = j.at("code_attempts").get<int>();
        t.fallback_used = j.at("fallback_used").get<bool>();
        t.raw_answer = j.at("raw_answer").get<std::string>();
        t.final_answer = parsed_from_json(j.at("final_answer"));
        for (const auto& s : j.at("stage_latencies"))
            t.stage_latencies.push_back({s.at("stage").get<std::string>(), s.at("ms").get<double>()});
        t.backend_calls = j.at("backend_calls").get<std::size_t>();
        t.error = opt("error");
        return t;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad trace record: ") + e.what());
    }
}

// ---- prompts ----

namespace {

const std::string& tmpl(std::string_view name) { return pipeline_templates().get(name); }

std::string question_text(const TaskInstance& inst) {
    if (plan_kind(inst.task) == PlanKind::KR) return bare_prompt(inst, InputFormat::PlainText);
    return inst.preamble.empty() ? inst.instruction : inst.preamble + "\n\n" + inst.instruction;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string unquote(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') || (s.front() == '"' && s.back() == '"')))
        s = trim(s.substr(1, s.size() - 2));
    return s;
}

std::vector<std::string> split_list(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && ((s.front() == '[' && s.back() == ']') || (s.front() == '(' && s.back() == ')') ||
                          (s.front() == '{' && s.back() == '}')))
        s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == '\n') {
            out.push_back(unquote(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(unquote(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

std::optional<int> as_bit(std::string_view token) {
    const auto t = lower(unquote(std::string(token)));
    if (t == "1" || t == "1.0" || t == "true" || t == "yes") return 1;
    if (t == "0" || t == "0.0" || t == "false" || t == "no") return 0;
    return std::nullopt;
}

std::optional<Decimal> as_number(std::string_view token) {
    auto t = unquote(std::string(token));
    if (auto dot = t.find('.'); dot != std::string::npos && t.find_first_of("eE") == std::string::npos &&
                                t.size() - dot - 1 > static_cast<std::size_t>(Decimal::kMaxScale))
        t.resize(dot + 1 + Decimal::kMaxScale);
    if (auto d = Decimal::parse(t)) return d;
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v) || std::fabs(v) > 1e15) return std::nullopt;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", Decimal::kMaxScale - 4, v);
    return Decimal::parse(buf);
}

}  // namespace

std::string plan_prompt(const TaskInstance& inst) {
    return fill(tmpl("plan/" + std::string(to_string(plan_kind(inst.task)))), {{"task", question_text(inst)}});
}

std::string align_prompt(std::string_view plan_text, const Table& table) {
    return fill(tmpl("align"), {{"plan", std::string(plan_text)}, {"table", render_tsv(table)}});
}

std::string code_prompt(const TaskInstance& inst, std::string_view aligned) {
    return fill(tmpl("code"), {{"instruction", question_text(inst)},
                               {"aligned", std::string(aligned)},
                               {"table", render_tsv(inst.table)}});
}

std::string code_retry_prompt(const TaskInstance& inst, std::string_view aligned, std::string_view code,
                              std::string_view error) {
    return code_prompt(inst, aligned) + "\n\n" +
           fill(tmpl("code-retry"), {{"code", std::string(code)}, {"error", std::string(error)}});
}

std::string direct_prompt(const TaskInstance& inst, std::string_view aligned) {
    const bool binary = std::holds_alternative<BinaryLabelContract>(inst.contract);
    return fill(tmpl(binary ? "direct" : "direct-data"), {{"instruction", question_text(inst)},
                                                          {"aligned", std::string(aligned)},
                                                          {"table", render_tsv(inst.table)}});
}

std::string decide_prompt(const TaskInstance& inst, std::string_view aligned) {
    return fill(tmpl("decide"), {{"instruction", question_text(inst)}, {"aligned", std::string(aligned)}});
}

std::string relabel_direct_answer(const OutputContract& contract, std::string_view raw) {
    const auto* c = std::get_if<BinaryLabelContract>(&contract);
    if (!c) return std::string(raw);
    static const std::regex label(R"((^|\n)([ \t*`]*)Label([ \t*`]*:))");
    return std::regex_replace(std::string(raw), label, "$1$2" + c->label + "$3");
}

std::string strip_code_fences(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        if (trim(line).rfind("```", 0) != 0) {
            out.append(line);
            out += '\n';
        }
        pos = nl + 1;
    }
    return trim(out);
}

std::string render_exec_result(const OutputContract& contract, std::string_view result, const Table& table) {
    const auto bad = [&](const std::string& what) {
        return std::invalid_argument("result '" + std::string(result.substr(0, 80)) + "' is not " + what);
    };
    if (std::holds_alternative<IdListContract>(contract)) {
        std::vector<std::string> known;
        if (table.column_count() > 0)
            for (std::size_t r = 0; r < table.row_count(); ++r) known.push_back(render_cell(table.at(r, 0)));
        IdSet ids;
        const auto tokens = split_list(std::string(result));
        const bool null_result = tokens.size() == 1 && (lower(tokens[0]) == "null" || lower(tokens[0]) == "none");
        if (!null_result)
            for (const auto& tok : tokens) {
                if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) {
                        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
                    }))
                    throw bad("an ID list");
                auto match = std::find(known.begin(), known.end(), tok);
                if (match == known.end())
                    if (auto v = as_number(tok))
                        match = std::find_if(known.begin(), known.end(), [&](const std::string& k) {
                            auto kv = Decimal::parse(k);
                            return kv && numeric_compare(*kv, *v) == std::strong_ordering::equal;
                        });
                const auto id = match == known.end() ? tok : *match;
                if (std::find(ids.ids.begin(), ids.ids.end(), id) == ids.ids.end()) ids.ids.push_back(id);
            }
        std::sort(ids.ids.begin(), ids.ids.end());
        return render_answer(contract, ParsedAnswer{ids});
    }
    if (const auto* c = std::get_if<NumberContract>(&contract)) {
        auto tokens = split_list(std::string(result));
        if (tokens.size() != 1) throw bad("a single number");
        auto v = as_number(tokens[0]);
        if (!v) throw bad("a number");
        return render_answer(contract, ParsedAnswer{Number{v->rounded(c->scale)}});
    }
    if (std::holds_alternative<BinaryLabelContract>(contract)) {
        auto b = as_bit(result);
        if (!b) throw bad("0 or 1");
        return render_answer(contract, ParsedAnswer{Binary{*b}});
    }
    if (std::holds_alternative<AliveExpiredContract>(contract)) {
        const auto w = lower(unquote(std::string(result)));
        if (w == "alive") return render_answer(contract, ParsedAnswer{Word{"Alive"}});
        if (w == "expired") return render_answer(contract, ParsedAnswer{Word{"Expired"}});
        auto b = as_bit(result);
        if (!b) throw bad("Alive or Expired");
        return render_answer(contract, ParsedAnswer{Word{*b ? "Expired" : "Alive"}});
    }
    auto tokens = split_list(std::string(result));
    if (tokens.size() == 1) {
        // "1 0 1 ..." or "1010..." forms
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : tokens[0]) {
            if (ch == ' ' || ch == '\t') {
                if (!cur.empty()) parts.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!cur.empty()) parts.push_back(cur);
        if (parts.size() == 1 && parts[0].size() == 10) {
            parts.clear();
            for (char ch : tokens[0]) parts.emplace_back(1, ch);
        }
        tokens = parts;
    }
    if (tokens.size() != 10) throw bad("ten 0/1 values");
    Bits10 bits{};
    for (std::size_t i = 0; i < 10; ++i) {
        auto b = as_bit(tokens[i]);
        if (!b) throw bad("ten 0/1 values");
        bits[i] = static_cast<std::uint8_t>(*b);
    }
    return render_answer(contract, ParsedAnswer{BinaryVector{bits}});
}

// ---- stages ----

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

ChatRequest make_request(const PromptSettings& settings, std::string user) {
    ChatRequest r;
    r.system_text = settings.system_text;
    r.decoding = settings.decoding;
    r.model_name = settings.model_name;
    r.user_text = std::move(user);
    return r;
}

std::string timed_call(ChatBackend& backend, const PromptSettings& settings, std::string user,
                       PipelineTrace& trace, const char* stage) {
    const auto start = Clock::now();
    ++trace.backend_calls;
    try {
        auto out = backend.complete(make_request(settings, std::move(user)));
        trace.stage_latencies.push_back({stage, elapsed_ms(start)});
        return out;
    } catch (...) {
        trace.stage_latencies.push_back({stage, elapsed_ms(start)});
        throw;
    }
}

Decision rule_decision(TaskId task) { return plan_kind(task) == PlanKind::KR ? Decision::Direct : Decision::Code; }

std::optional<Decision> read_decision(std::string_view text) {
    std::string up(text);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const bool code = up.find("CODE") != std::string::npos;
    const bool direct = up.find("DIRECT") != std::string::npos;
    if (code == direct) return std::nullopt;
    return code ? Decision::Code : Decision::Direct;
}

}  // namespace

std::string plan(const TaskInstance& instance, ChatBackend& backend, const PromptSettings& settings) {
    return backend.complete(make_request(settings, plan_prompt(instance)));
}

std::string align(std::string_view plan_text, const Table& table, ChatBackend& backend,
                  const PromptSettings& settings) {
    if (plan_text.empty()) throw std::invalid_argument("empty plan");
    return backend.complete(make_request(settings, align_prompt(plan_text, table)));
}

std::string decide_and_execute(std::string_view aligned, const TaskInstance& inst, ChatBackend& backend,
                               Executor* executor, const PipelineOptions& opts, PipelineTrace& trace) {
    NullExecutor null_executor;
    if (!executor) executor = &null_executor;

    trace.decision = rule_decision(inst.task);
    if (opts.decision_mode == DecisionMode::Llm) {
        trace.decision_text = timed_call(backend, opts.settings, decide_prompt(inst, aligned), trace, "decide");
        if (auto d = read_decision(*trace.decision_text)) trace.decision = *d;
    }

    const auto direct = [&] {
        const auto raw = timed_call(backend, opts.settings, direct_prompt(inst, aligned), trace, "direct");
        return relabel_direct_answer(inst.contract, raw);
    };

    if (trace.decision == Decision::Direct) return direct();

    if (!executor->available() && !opts.fallback)
        throw ExecutorUnavailable("code execution chosen but no executor is available");

    const int max_attempts = (opts.retry && executor->available()) ? 2 : 1;
    std::string prompt = code_prompt(inst, aligned);
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const auto code = strip_code_fences(timed_call(backend, opts.settings, prompt, trace, "code"));
        trace.code_text = code;
        trace.code_attempts = attempt;

        ExecRequest req{inst.instance_id + "#" + std::to_string(attempt), render_tsv(inst.table), code,
                        opts.exec_timeout_ms};
        const auto start = Clock::now();
        const auto resp = executor->execute(req);
        trace.stage_latencies.push_back({"execute", elapsed_ms(start)});

        std::string error;
        if (resp.ok && resp.result) {
            trace.execution_result = resp.result;
            try {
                auto line = render_exec_result(inst.contract, *resp.result, inst.table);
                trace.execution_error.reset();
                return line;
            } catch (const std::invalid_argument& e) {
                trace.execution_error = ExecError{ExecErrorKind::Runtime, e.what()};
            }
        } else {
            trace.execution_result.reset();
            trace.execution_error = resp.error ? *resp.error : ExecError{ExecErrorKind::Resource, "no result"};
        }
        error = std::string(to_string(trace.execution_error->kind)) + ": " + trace.execution_error->message;
        prompt = code_retry_prompt(inst, aligned, code, error);
    }

    if (!opts.fallback)
        return "INVALID: code execution failed (" + std::string(to_string(trace.execution_error->kind)) + ")";
    trace.fallback_used = true;
    return direct();
}

std::pair<ParsedAnswer, PipelineTrace> run_pipeline(const TaskInstance& inst, ChatBackend& backend,
                                                    Executor* executor, const PipelineOptions& opts) {
    PipelineTrace trace;
    trace.instance_id = inst.instance_id;
    const char* stage = "plan";
    try {
        trace.plan_text = timed_call(backend, opts.settings, plan_prompt(inst), trace, "plan");
        stage = "align";
        if (trim(trace.plan_text).empty()) throw std::invalid_argument("empty plan");
        trace.aligned_text = timed_call(backend, opts.settings, align_prompt(trace.plan_text, inst.table), trace,
                                        "align");
        stage = "execute";
        if (trim(trace.aligned_text).empty()) throw std::invalid_argument("empty aligned logic");
        trace.raw_answer = decide_and_execute(trace.aligned_text, inst, backend, executor, opts, trace);
        trace.final_answer = parse_answer(inst.contract, trace.raw_answer, opts.leniency);
    } catch (const std::exception& e) {
        trace.error = std::string(stage) + ": " + e.what();
        trace.final_answer = Invalid{*trace.error};
    }
    return {trace.final_answer, trace};
}

}  // namespace ehrbench
