#include "ehrbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <unistd.h>

#include "ehrbench/hash.hpp"
#include "ehrbench/json_io.hpp"
#include "ehrbench/oracle_mock.hpp"

namespace ehrbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PipelineKind p) { return p == PipelineKind::Bare ? "bare" : "ehrmaster"; }

// ---- config ----

namespace {

template <class T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

std::vector<std::string> string_list(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_string()) return {v.get<std::string>()};
    return get_as<std::vector<std::string>>(j, key);
}

}  // namespace

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "run_id",   "seed",         "pool_seed", "per_task",       "tasks",           "flavors",
        "formats",  "k_shots",      "pipeline",  "backend",        "executor",        "model",
        "system_text", "decoding",  "decision_mode", "fallback",   "retry",           "exec_timeout_ms",
        "concurrency", "output_dir", "leniency", "invalid_threshold"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

    RunConfig c;
    if (j.contains("run_id")) c.run_id = get_as<std::string>(j, "run_id");
    if (c.run_id.empty()) throw ConfigError("run_id must not be empty");
    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
    if (j.contains("pool_seed")) c.pool_seed = get_as<std::uint64_t>(j, "pool_seed");
    if (j.contains("per_task")) c.per_task = get_as<std::size_t>(j, "per_task");
    if (c.per_task == 0) throw ConfigError("per_task must be positive");
    if (j.contains("tasks")) {
        const auto names = string_list(j, "tasks");
        if (!(names.size() == 1 && names[0] == "all")) {
            c.tasks.clear();
            for (const auto& n : names) {
                auto t = parse_task(n);
                if (!t) throw ConfigError("unknown task '" + n + "'");
                if (std::find(c.tasks.begin(), c.tasks.end(), *t) == c.tasks.end()) c.tasks.push_back(*t);
            }
        }
    }
    if (j.contains("flavors")) {
        const auto names = string_list(j, "flavors");
        if (!(names.size() == 1 && names[0] == "all")) {
            c.flavors.clear();
            for (const auto& n : names) {
                auto f = parse_flavor(n);
                if (!f) throw ConfigError("unknown flavor '" + n + "'");
                if (std::find(c.flavors.begin(), c.flavors.end(), *f) == c.flavors.end()) c.flavors.push_back(*f);
            }
        }
    }
    if (j.contains("formats")) {
        c.formats.clear();
        for (const auto& n : string_list(j, "formats")) {
            auto f = parse_format(n);
            if (!f) throw ConfigError("unknown format '" + n + "'");
            if (std::find(c.formats.begin(), c.formats.end(), *f) == c.formats.end()) c.formats.push_back(*f);
        }
    }
    if (j.contains("k_shots")) {
        c.k_shots = get_as<std::vector<int>>(j, "k_shots");
        for (int k : c.k_shots)
            if (k != 0 && k != 1 && k != 3 && k != 5) throw ConfigError("k_shots values must be 0, 1, 3 or 5");
    }
    if (c.tasks.empty() || c.flavors.empty() || c.formats.empty() || c.k_shots.empty())
        throw ConfigError("tasks, flavors, formats and k_shots must be non-empty");
    if (j.contains("pipeline")) {
        const auto p = get_as<std::string>(j, "pipeline");
        if (p == "bare") c.pipeline = PipelineKind::Bare;
        else if (p == "ehrmaster") c.pipeline = PipelineKind::EhrMaster;
        else throw ConfigError("pipeline must be 'bare' or 'ehrmaster'");
    }
    if (c.pipeline == PipelineKind::EhrMaster &&
        (c.formats != std::vector<InputFormat>{InputFormat::PlainText} || c.k_shots != std::vector<int>{0}))
        throw ConfigError("the ehrmaster pipeline runs with formats [\"plain\"] and k_shots [0] only");
    if (j.contains("backend")) {
        c.backend = j.at("backend");
        if (!c.backend.is_object() || !c.backend.contains("kind")) throw ConfigError("backend needs a 'kind'");
        if (c.backend.dump().find("\"api_key\"") != std::string::npos)
            throw ConfigError("credentials must come from an environment variable (use api_key_env)");
    }
    if (j.contains("executor")) {
        c.executor = j.at("executor");
        if (!c.executor.is_object() || !c.executor.contains("kind")) throw ConfigError("executor needs a 'kind'");
    }
    if (j.contains("model")) c.settings.model_name = get_as<std::string>(j, "model");
    if (j.contains("system_text")) c.settings.system_text = get_as<std::string>(j, "system_text");
    if (j.contains("decoding")) {
        const auto& d = j.at("decoding");
        if (!d.is_object()) throw ConfigError("decoding must be an object");
        for (const auto& [key, _] : d.items())
            if (key != "temperature" && key != "max_tokens") throw ConfigError("unknown decoding key '" + key + "'");
        if (d.contains("temperature")) c.settings.decoding.temperature = get_as<double>(d, "temperature");
        if (d.contains("max_tokens")) c.settings.decoding.max_tokens = get_as<int>(d, "max_tokens");
        if (c.settings.decoding.temperature < 0) throw ConfigError("temperature must be >= 0");
        if (c.settings.decoding.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    }
    if (j.contains("decision_mode")) {
        const auto m = get_as<std::string>(j, "decision_mode");
        if (m == "rule") c.decision_mode = DecisionMode::Rule;
        else if (m == "llm") c.decision_mode = DecisionMode::Llm;
        else throw ConfigError("decision_mode must be 'rule' or 'llm'");
    }
    if (j.contains("fallback")) c.fallback = get_as<bool>(j, "fallback");
    if (j.contains("retry")) c.retry = get_as<bool>(j, "retry");
    if (j.contains("exec_timeout_ms")) c.exec_timeout_ms = get_as<int>(j, "exec_timeout_ms");
    if (c.exec_timeout_ms <= 0) throw ConfigError("exec_timeout_ms must be positive");
    if (j.contains("concurrency")) c.concurrency = get_as<std::size_t>(j, "concurrency");
    if (c.concurrency == 0) throw ConfigError("concurrency must be positive");
    if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
    if (j.contains("leniency")) {
        const auto l = get_as<std::string>(j, "leniency");
        if (l == "strict") c.leniency = Leniency::Strict;
        else if (l == "standard") c.leniency = Leniency::Standard;
        else if (l == "loose") c.leniency = Leniency::Loose;
        else throw ConfigError("leniency must be strict, standard or loose");
    }
    if (j.contains("invalid_threshold")) c.metric_options.invalid_threshold = get_as<double>(j, "invalid_threshold");
    if (c.metric_options.invalid_threshold < 0 || c.metric_options.invalid_threshold > 1)
        throw ConfigError("invalid_threshold must lie in [0, 1]");
    return c;
}

json config_to_json(const RunConfig& c) {
    json tasks = json::array(), flavors = json::array(), formats = json::array();
    for (auto t : c.tasks) tasks.push_back(to_string(t));
    for (auto f : c.flavors) flavors.push_back(to_string(f));
    for (auto f : c.formats) formats.push_back(to_string(f));
    return json{{"run_id", c.run_id},
                {"seed", c.seed},
                {"pool_seed", c.pool_seed},
                {"per_task", c.per_task},
                {"tasks", tasks},
                {"flavors", flavors},
                {"formats", formats},
                {"k_shots", c.k_shots},
                {"pipeline", to_string(c.pipeline)},
                {"backend", c.backend},
                {"executor", c.executor},
                {"model", c.settings.model_name},
                {"system_text", c.settings.system_text},
                {"decoding",
                 {{"temperature", c.settings.decoding.temperature}, {"max_tokens", c.settings.decoding.max_tokens}}},
                {"decision_mode", c.decision_mode == DecisionMode::Rule ? "rule" : "llm"},
                {"fallback", c.fallback},
                {"retry", c.retry},
                {"exec_timeout_ms", c.exec_timeout_ms},
                {"concurrency", c.concurrency},
                {"output_dir", c.output_dir.string()},
                {"leniency", to_string(c.leniency)},
                {"invalid_threshold", c.metric_options.invalid_threshold}};
}

// ---- layout ----

fs::path instance_file(const fs::path& out, Flavor flavor, TaskId task) {
    return out / "instances" / std::string(to_string(flavor)) / (std::string(to_string(task)) + ".jsonl");
}

fs::path finetune_file(const fs::path& out, Flavor flavor, TaskId task) {
    return out / "finetune" / std::string(to_string(flavor)) / (std::string(to_string(task)) + ".jsonl");
}

fs::path run_log_path(const fs::path& out) { return out / "runs.jsonl"; }
fs::path trace_log_path(const fs::path& out) { return out / "traces.jsonl"; }

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw ConfigError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() || base.empty() ? p : base / p; }

}  // namespace

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> out;
    if (!fs::exists(path)) return out;
    const auto text = read_file(path);
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        const bool last = nl == std::string::npos;
        if (last) nl = text.size();
        ++line_no;
        const auto line = std::string_view(text).substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception&) {
            if (last) break;  // torn tail from an interrupted writer
            throw ConfigError("corrupt record in " + path.string() + " at line " + std::to_string(line_no));
        }
    }
    return out;
}

// ---- backends ----

std::shared_ptr<ChatBackend> make_backend(const json& spec, const std::vector<TaskInstance>& instances,
                                          const fs::path& base_dir) {
    try {
        const auto kind = spec.at("kind").get<std::string>();
        if (kind == "oracle") {
            OracleMockOptions o;
            o.error_rate = spec.value("error_rate", 0.0);
            return oracle_mock(instances, std::move(o));
        }
        if (kind == "mock") {
            auto m = std::make_shared<MockBackend>();
            if (spec.contains("script")) m->load_json(read_file(resolve(spec.at("script").get<std::string>(), base_dir)));
            json inline_rules = json::object();
            if (spec.contains("rules")) inline_rules["rules"] = spec.at("rules");
            if (spec.contains("default")) inline_rules["default"] = spec.at("default");
            if (!inline_rules.empty()) m->load_json(inline_rules.dump());
            return m;
        }
        if (kind == "http") {
            HttpConfig h;
            h.endpoint = spec.at("endpoint").get<std::string>();
            h.api_key_env = spec.value("api_key_env", "");
            h.max_retries = spec.value("max_retries", h.max_retries);
            h.backoff_ms = spec.value("backoff_ms", h.backoff_ms);
            h.timeout_ms = spec.value("timeout_ms", h.timeout_ms);
            h.max_concurrency = spec.value("max_concurrency", h.max_concurrency);
            if (h.max_retries < 0 || h.max_retries > 3) throw ConfigError("max_retries must be between 0 and 3");
            return std::make_shared<HttpBackend>(h);
        }
        if (kind == "replay") {
            std::shared_ptr<ChatBackend> fallback;
            if (spec.contains("fallback") && !spec.at("fallback").is_null())
                fallback = make_backend(spec.at("fallback"), instances, base_dir);
            const auto cache = resolve(spec.at("cache").get<std::string>(), base_dir);
            std::error_code ec;
            if (cache.has_parent_path()) fs::create_directories(cache.parent_path(), ec);
            return std::make_shared<ReplayBackend>(cache.string(), fallback);
        }
        throw ConfigError("unknown backend kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad backend spec: ") + e.what());
    } catch (const BackendError& e) {
        throw ConfigError(std::string("backend setup failed: ") + e.what());
    }
}

std::shared_ptr<Executor> make_executor(const json& spec) {
    try {
        const auto kind = spec.at("kind").get<std::string>();
        if (kind == "null") return std::make_shared<NullExecutor>();
        if (kind == "subprocess") {
            SubprocessConfig s;
            s.argv = spec.at("command").get<std::vector<std::string>>();
            if (s.argv.empty()) throw ConfigError("executor command is empty");
            s.pool_size = spec.value("pool_size", s.pool_size);
            s.grace_ms = spec.value("grace_ms", s.grace_ms);
            s.handshake_timeout_ms = spec.value("handshake_timeout_ms", s.handshake_timeout_ms);
            s.fresh_worker_per_request = spec.value("fresh_worker_per_request", false);
            return std::make_shared<SubprocessExecutor>(s);
        }
        throw ConfigError("unknown executor kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad executor spec: ") + e.what());
    }
}

// ---- gen / export ----

std::size_t cmd_gen(const RunConfig& c) {
    std::size_t total = 0;
    json files = json::object();
    for (auto f : c.flavors)
        for (auto t : c.tasks) {
            std::string content;
            const auto items = synthesize(t, f, c.seed, c.per_task);
            for (const auto& inst : items) content += instance_to_jsonl(inst) + "\n";
            const auto path = instance_file(c.output_dir, f, t);
            write_file(path, content);
            files[std::string(to_string(f)) + "/" + std::string(to_string(t)) + ".jsonl"] = {
                {"count", items.size()}, {"sha256", sha256_hex(content)}};
            total += items.size();
        }
    json manifest{{"seed", c.seed}, {"per_task", c.per_task}, {"total", total}, {"files", files}};
    write_file(c.output_dir / "instances" / "manifest.json", manifest.dump(2) + "\n");
    return total;
}

std::size_t cmd_export_finetune(const RunConfig& c) {
    std::set<std::string> eval_hashes;
    for (auto f : kAllFlavors)
        for (auto t : kAllTasks)
            for (const auto& inst : synthesize(t, f, c.seed, c.per_task)) eval_hashes.insert(table_hash(inst.table));
    std::size_t total = 0;
    for (auto f : c.flavors)
        for (auto t : c.tasks) {
            std::string content;
            const auto items = export_finetune_set(t, f, c.seed, eval_hashes);
            for (const auto& inst : items) content += finetune_to_jsonl(inst) + "\n";
            write_file(finetune_file(c.output_dir, f, t), content);
            total += items.size();
        }
    return total;
}

std::vector<TaskInstance> load_instances(const RunConfig& c) {
    std::vector<TaskInstance> out;
    for (auto f : c.flavors)
        for (auto t : c.tasks) {
            const auto path = instance_file(c.output_dir, f, t);
            if (!fs::exists(path)) throw ConfigError("missing instance file " + path.string() + " (run gen first)");
            std::istringstream in(read_file(path));
            std::string line;
            std::size_t n = 0;
            while (std::getline(in, line)) {
                ++n;
                if (line.empty()) continue;
                try {
                    out.push_back(instance_from_jsonl(line));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(path.string() + ":" + std::to_string(n) + ": " + e.what());
                }
            }
        }
    return out;
}

// ---- eval ----

namespace {

struct WorkItem {
    const TaskInstance* inst;
    InputFormat format;
    int k;
    std::string key;
};

std::string record_key(const RunConfig& c, const std::string& instance_id, InputFormat fmt, int k) {
    return c.run_id + "|" + instance_id + "|" + c.settings.model_name + "|" + std::string(to_string(fmt)) + "|k" +
           std::to_string(k) + "|" + std::string(to_string(c.pipeline));
}

/// Cuts a torn final line so appends start on a fresh line.
void repair_tail(const fs::path& path) {
    if (!fs::exists(path)) return;
    const auto text = read_file(path);
    if (text.empty() || text.back() == '\n') return;
    const auto nl = text.rfind('\n');
    fs::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
}

class LineSink {
public:
    explicit LineSink(const fs::path& path) {
        file_ = std::fopen(path.c_str(), "ab");
        if (!file_) throw ConfigError("cannot open " + path.string() + " for appending");
    }
    ~LineSink() {
        if (file_) {
            sync();
            std::fclose(file_);
        }
    }
    LineSink(const LineSink&) = delete;
    LineSink& operator=(const LineSink&) = delete;

    void write(const std::string& line) {
        std::fwrite(line.data(), 1, line.size(), file_);
        std::fputc('\n', file_);
        std::fflush(file_);
        if (++pending_ >= 32) sync();
    }
    void sync() {
        std::fflush(file_);
        ::fsync(::fileno(file_));
        pending_ = 0;
    }

private:
    std::FILE* file_ = nullptr;
    int pending_ = 0;
};

struct ItemResult {
    std::string record;
    std::optional<std::string> trace;
    bool failed = false;
};

ItemResult run_item(const RunConfig& c, const WorkItem& w, ChatBackend& backend, Executor* executor,
                    const ExemplarPool& pool) {
    const auto& inst = *w.inst;
    const auto start = std::chrono::steady_clock::now();
    std::string raw;
    ParsedAnswer parsed = Invalid{"not run"};
    std::optional<std::string> error;
    std::optional<std::string> trace_line;
    if (c.pipeline == PipelineKind::Bare) {
        try {
            raw = backend.complete(assemble(inst, w.k, pool, w.format, c.settings));
            parsed = parse_answer(inst.contract, raw, c.leniency);
        } catch (const BackendError& e) {
            error = "backend " + std::string(to_string(e.kind())) + ": " + e.what();
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (error) parsed = Invalid{*error};
    } else {
        PipelineOptions o;
        o.settings = c.settings;
        o.decision_mode = c.decision_mode;
        o.fallback = c.fallback;
        o.retry = c.retry;
        o.exec_timeout_ms = c.exec_timeout_ms;
        o.leniency = c.leniency;
        auto [answer, trace] = run_pipeline(inst, backend, executor, o);
        parsed = answer;
        raw = trace.raw_answer;
        error = trace.error;
        trace_line = json{{"key", w.key}, {"trace", trace_to_json(trace)}}.dump();
    }
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    Outcome outcome = Outcome::Invalid;
    try {
        outcome = grade(inst.gold, parsed).outcome;
    } catch (const ContractMismatch& e) {
        error = std::string("contract mismatch: ") + e.what();
    }
    const auto parsed_json = parsed_to_json(parsed);
    json rec{{"run_id", c.run_id},
             {"key", w.key},
             {"instance_id", inst.instance_id},
             {"task", to_string(inst.task)},
             {"flavor", to_string(inst.flavor)},
             {"model", c.settings.model_name},
             {"format", to_string(w.format)},
             {"k_shot", w.k},
             {"pipeline", to_string(c.pipeline)},
             {"contract", contract_tag(inst.contract)},
             {"gold", parsed_to_json(to_parsed(inst.gold))},
             {"raw_output", raw},
             {"parsed", parsed_json},
             {"parsed_tag", parsed_json.at("kind")},
             {"outcome", to_string(outcome)},
             {"latency_ms", latency},
             {"trace_ref", trace_line ? json(w.key) : json(nullptr)},
             {"error", error ? json(*error) : json(nullptr)}};
    return {rec.dump(), trace_line, error.has_value()};
}

}  // namespace

EvalSummary cmd_eval(const RunConfig& c, std::shared_ptr<ChatBackend> backend, std::shared_ptr<Executor> executor) {
    const auto instances = load_instances(c);
    if (!backend) backend = make_backend(c.backend, instances);
    if (!executor && c.pipeline == PipelineKind::EhrMaster) executor = make_executor(c.executor);

    ExemplarPool pool;
    if (std::any_of(c.k_shots.begin(), c.k_shots.end(), [](int k) { return k > 0; })) {
        std::set<std::string> hashes;
        for (const auto& inst : instances) hashes.insert(table_hash(inst.table));
        pool = build_pool(c.pool_seed, hashes);
    }

    const auto log = run_log_path(c.output_dir);
    const auto traces = trace_log_path(c.output_dir);
    repair_tail(log);
    repair_tail(traces);
    std::set<std::string> done;
    // records that failed are re-run; their earlier lines stay in the log
    for (const auto& rec : read_jsonl(log))
        if (rec.contains("key") && rec.value("error", json()).is_null()) done.insert(rec.at("key").get<std::string>());

    EvalSummary summary;
    std::vector<WorkItem> items;
    for (auto fmt : c.formats)
        for (int k : c.k_shots)
            for (const auto& inst : instances) {
                auto key = record_key(c, inst.instance_id, fmt, k);
                if (done.count(key)) {
                    ++summary.skipped;
                    continue;
                }
                items.push_back({&inst, fmt, k, std::move(key)});
            }
    if (items.empty()) return summary;

    LineSink log_sink(log);
    std::optional<LineSink> trace_sink;
    if (c.pipeline == PipelineKind::EhrMaster) trace_sink.emplace(traces);

    std::vector<std::optional<ItemResult>> results(items.size());
    std::mutex mutex;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= items.size()) return;
            ItemResult r;
            try {
                r = run_item(c, items[i], *backend, executor.get(), pool);
            } catch (const std::exception& e) {
                r.record = json{{"key", items[i].key}, {"error", e.what()}}.dump();
                r.failed = true;
            }
            std::lock_guard lock(mutex);
            results[i] = std::move(r);
            cv.notify_all();
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(c.concurrency, items.size()); ++t) threads.emplace_back(worker);

    for (std::size_t i = 0; i < items.size(); ++i) {
        ItemResult r;
        {
            std::unique_lock lock(mutex);
            cv.wait(lock, [&] { return results[i].has_value(); });
            r = std::move(*results[i]);
            results[i].reset();
        }
        if (r.trace && trace_sink) trace_sink->write(*r.trace);
        log_sink.write(r.record);
        ++summary.written;
        if (r.failed) ++summary.failures;
    }
    for (auto& t : threads) t.join();
    return summary;
}

// ---- report ----

namespace {

struct GroupKey {
    std::string flavor;
    std::string run_id;
    std::string model;
    std::string pipeline;
    std::string format;
    int k = 0;
    auto operator<=>(const GroupKey&) const = default;
};

std::string label_of(const GroupKey& g) {
    return g.run_id + "/" + (g.model.empty() ? std::string("-") : g.model) + "/" + g.pipeline + "/" + g.format + "/k=" +
           std::to_string(g.k);
}

std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
}

std::string pad_left(const std::string& s, std::size_t w) {
    const auto d = display_width(s);
    return d >= w ? s : std::string(w - d, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
    const auto d = display_width(s);
    return d >= w ? s : s + std::string(w - d, ' ');
}

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

GoldAnswer as_gold(const ParsedAnswer& p) {
    return std::visit(
        [](const auto& a) -> GoldAnswer {
            if constexpr (std::is_same_v<std::decay_t<decltype(a)>, Invalid>)
                throw std::invalid_argument("gold cannot be invalid");
            else
                return a;
        },
        p);
}

struct Cell {
    std::optional<TaskScore> score;
    std::string note;
};

constexpr std::size_t kCellWidth = 7;

}  // namespace

Report build_report(const std::vector<json>& records, const MetricOptions& options) {
    if (records.empty()) throw EmptyLog("run log has no records");

    struct Bucket {
        std::vector<GoldAnswer> golds;
        std::vector<ParsedAnswer> parsed;
    };
    // a key logged more than once was re-run after a failure; the latest record wins
    std::map<std::string, std::size_t> latest;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].contains("gold")) continue;
        auto [it, fresh] = latest.insert_or_assign(records[i].at("key").get<std::string>(), i);
        if (fresh) order.push_back(i);
    }
    std::map<GroupKey, std::map<TaskId, Bucket>> groups;
    for (auto first : order) {
        const auto& r = records[latest.at(records[first].at("key").get<std::string>())];
        GroupKey g{r.at("flavor").get<std::string>(), r.at("run_id").get<std::string>(), r.at("model").get<std::string>(),
                   r.at("pipeline").get<std::string>(), r.at("format").get<std::string>(), r.at("k_shot").get<int>()};
        auto task = parse_task(r.at("task").get<std::string>());
        if (!task) throw ConfigError("unknown task in run log");
        auto& b = groups[g][*task];
        b.golds.push_back(as_gold(parsed_from_json(r.at("gold"))));
        b.parsed.push_back(parsed_from_json(r.at("parsed")));
    }
    if (groups.empty()) throw EmptyLog("run log has no scorable records");

    std::map<GroupKey, std::map<TaskId, Cell>> cells;
    json jgroups = json::array();
    for (const auto& [g, tasks] : groups) {
        json jt = json::object();
        for (const auto& [task, b] : tasks) {
            Cell cell;
            json entry{{"metric", to_string(info(task).metric)}, {"n_total", b.golds.size()}};
            try {
                cell.score = score_answers(task, b.golds, b.parsed, options);
                entry["value"] = cell.score->value ? json(*cell.score->value) : json(nullptr);
                entry["n_invalid"] = cell.score->n_invalid;
                entry["no_valid_output"] = cell.score->no_valid_output();
            } catch (const MetricError& e) {
                cell.note = e.what();
                entry["value"] = nullptr;
                entry["note"] = e.what();
            }
            jt[std::string(to_string(task))] = entry;
            cells[g][task] = cell;
        }
        jgroups.push_back({{"flavor", g.flavor},
                           {"run_id", g.run_id},
                           {"model", g.model},
                           {"pipeline", g.pipeline},
                           {"format", g.format},
                           {"k_shot", g.k},
                           {"tasks", jt}});
    }

    std::ostringstream txt;
    txt << "EHR table benchmark report\n";
    txt << "ACC for Data-Driven tasks, AUC for Knowledge-Driven tasks, in percent.\n";
    txt << "D = Data-Driven, K = Knowledge-Driven, Und = Understanding. ✗ = no valid output, - = not run.\n";

    const auto render_cell = [](const std::map<TaskId, Cell>& row, TaskId t) -> std::string {
        auto it = row.find(t);
        if (it == row.end()) return "-";
        if (!it->second.score) return "n/a";
        if (it->second.score->no_valid_output()) return "✗";
        return fmt1(*it->second.score->value);
    };
    const std::vector<std::pair<std::string, std::vector<TaskId>>> blocks = {
        {"D-Und", {TaskId::DU1, TaskId::DU2}},
        {"D-Reasoning", {TaskId::DR1, TaskId::DR2, TaskId::DR3, TaskId::DR4, TaskId::DR5}},
        {"K-Und", {TaskId::KU1}},
        {"K-Reasoning", {TaskId::KR1, TaskId::KR2, TaskId::KR3}},
    };
    const auto table = [&](const std::vector<std::pair<std::string, std::map<TaskId, std::string>>>& rows,
                           const std::string& first_col) {
        std::size_t w0 = first_col.size();
        for (const auto& [label, _] : rows) w0 = std::max(w0, display_width(label));
        std::string h1 = pad_right("", w0), h2 = pad_right(first_col, w0);
        for (const auto& [name, tasks] : blocks) {
            h1 += " |" + pad_right(" " + name, tasks.size() * kCellWidth);
            h2 += " |";
            for (auto t : tasks) h2 += pad_left(std::string(to_string(t)), kCellWidth);
        }
        while (!h1.empty() && h1.back() == ' ') h1.pop_back();
        txt << h1 << "\n" << h2 << "\n" << std::string(display_width(h2), '-') << "\n";
        for (const auto& [label, vals] : rows) {
            std::string line = pad_right(label, w0);
            for (const auto& [_, tasks] : blocks) {
                line += " |";
                for (auto t : tasks) {
                    auto it = vals.find(t);
                    line += pad_left(it == vals.end() ? "-" : it->second, kCellWidth);
                }
            }
            txt << line << "\n";
        }
    };

    json jgains = json::array();
    std::set<std::string> flavors;
    for (const auto& [g, _] : cells) flavors.insert(g.flavor);
    for (const auto& flavor : flavors) {
        txt << "\n== " << flavor << " ==\n";
        std::vector<std::pair<std::string, std::map<TaskId, std::string>>> rows;
        for (const auto& [g, row] : cells) {
            if (g.flavor != flavor) continue;
            std::map<TaskId, std::string> vals;
            for (auto t : kAllTasks) vals[t] = render_cell(row, t);
            rows.emplace_back(label_of(g), vals);
        }
        table(rows, "run/model/pipeline/format/k");

        std::vector<std::pair<std::string, std::map<TaskId, std::string>>> gain_rows;
        for (const auto& [base, base_row] : cells) {
            if (base.flavor != flavor || base.pipeline != "bare" || base.format != "plain" || base.k != 0) continue;
            for (const auto& [g, row] : cells) {
                if (g.flavor != flavor || g.model != base.model || g == base) continue;
                std::map<TaskId, std::string> vals;
                json jg = json::object();
                for (auto t : kAllTasks) {
                    auto b = base_row.find(t);
                    auto m = row.find(t);
                    if (b == base_row.end() || m == row.end()) continue;
                    std::optional<double> gain;
                    if (b->second.score && m->second.score && b->second.score->value && m->second.score->value &&
                        *b->second.score->value < 100.0)
                        gain = relative_gain(*b->second.score, *m->second.score);
                    vals[t] = gain ? fmt1(*gain) : "n/a";
                    jg[std::string(to_string(t))] = gain ? json(*gain) : json(nullptr);
                }
                gain_rows.emplace_back(label_of(g), vals);
                jgains.push_back(
                    {{"flavor", flavor}, {"model", base.model}, {"base", label_of(base)}, {"method", label_of(g)}, {"gains", jg}});
            }
        }
        if (!gain_rows.empty()) {
            txt << "\nRelative gain over the zero-shot plain baseline (% of the gap to 100):\n";
            table(gain_rows, "method");
        }
    }
    return {json{{"groups", jgroups}, {"relative_gain", jgains}}, txt.str()};
}

Report cmd_report(const fs::path& out, const MetricOptions& options) {
    const auto records = read_jsonl(run_log_path(out));
    auto report = build_report(records, options);
    write_file(out / "report.json", report.scores.dump(2) + "\n");
    write_file(out / "report.txt", report.text);
    return report;
}

std::vector<json> cmd_trace(const fs::path& out, const std::string& instance_id) {
    std::vector<json> found;
    for (const auto& rec : read_jsonl(trace_log_path(out)))
        if (rec.contains("trace") && rec["trace"].value("instance_id", "") == instance_id) found.push_back(rec);
    return found;
}

}  // namespace ehrbench
