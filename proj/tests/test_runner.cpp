#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ehrbench/json_io.hpp"
#include "ehrbench/runner.hpp"

using namespace ehrbench;
using nlohmann::json;
namespace fs = std::filesystem;

#ifndef EHRBENCH_CLI_PATH
#error "EHRBENCH_CLI_PATH must be defined"
#endif

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ehrbench_runner_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string without_latency(const fs::path& log) {
    std::string out;
    for (auto rec : read_jsonl(log)) {
        rec.erase("latency_ms");
        out += rec.dump() + "\n";
    }
    return out;
}

RunConfig small_config(const fs::path& out) {
    RunConfig c;
    c.output_dir = out;
    c.per_task = 6;
    c.settings.model_name = "mock";
    return c;
}

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(EHRBENCH_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json record(const std::string& key, TaskId task, const std::string& format, bool correct) {
    const GoldAnswer gold = Number{Decimal{2, 0}};
    const ParsedAnswer parsed = correct ? ParsedAnswer{Number{Decimal{2, 0}}} : ParsedAnswer{Number{Decimal{3, 0}}};
    return json{{"key", key},          {"run_id", "r"},  {"instance_id", key},       {"task", to_string(task)},
                {"flavor", "synthea"}, {"model", "m"},   {"format", format},         {"k_shot", 0},
                {"pipeline", "bare"},  {"gold", parsed_to_json(to_parsed(gold))}, {"parsed", parsed_to_json(parsed)},
                {"error", nullptr}};
}

}  // namespace

TEST_CASE("config parsing and validation") {
    auto c = config_from_json(json::parse(R"({"tasks":["D-R1","K-R3"],"flavors":"eicu","formats":["nl","graph"],
        "k_shots":[0,5],"model":"x","decoding":{"temperature":0.2,"max_tokens":64},"concurrency":3})"));
    CHECK(c.tasks == std::vector<TaskId>{TaskId::DR1, TaskId::KR3});
    CHECK(c.flavors == std::vector<Flavor>{Flavor::Eicu});
    CHECK(c.formats == std::vector<InputFormat>{InputFormat::NaturalLanguage, InputFormat::GraphStructured});
    CHECK(c.k_shots == std::vector<int>{0, 5});
    CHECK(c.settings.decoding.max_tokens == 64);
    CHECK(config_from_json(config_to_json(c)).tasks == c.tasks);
    CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

    const auto defaults = config_from_json(json::object());
    CHECK(defaults.tasks.size() == 11);
    CHECK(defaults.flavors.size() == 2);
    CHECK(defaults.settings.decoding.temperature == 0.0);

    for (const char* bad : {R"({"taks":["D-R1"]})", R"({"tasks":["D-R9"]})", R"({"k_shots":[2]})",
                            R"({"formats":["xml"]})", R"({"pipeline":"fancy"})", R"({"concurrency":0})",
                            R"({"decoding":{"temperature":-1}})", R"({"decoding":{"top_p":1}})",
                            R"({"pipeline":"ehrmaster","k_shots":[0,1]})", R"({"seed":"abc"})",
                            R"({"backend":{"kind":"http","endpoint":"http://x","api_key":"sk-123"}})",
                            R"({"backend":{"endpoint":"http://x"}})", R"({"invalid_threshold":2})", R"([])"})
        CHECK_THROWS_AS(config_from_json(json::parse(bad)), ConfigError);
}

TEST_CASE("backend and executor factories") {
    CHECK_THROWS_AS(make_backend(json{{"kind", "carrier-pigeon"}}, {}), ConfigError);
    CHECK_THROWS_AS(make_backend(json{{"kind", "http"}}, {}), ConfigError);
    ::unsetenv("EHRBENCH_NO_SUCH_KEY");
    CHECK_THROWS_AS(make_backend(json{{"kind", "http"}, {"endpoint", "http://127.0.0.1:9/v1"},
                                      {"api_key_env", "EHRBENCH_NO_SUCH_KEY"}},
                                 {}),
                    ConfigError);
    auto mock = make_backend(json::parse(R"({"kind":"mock","rules":[{"user_contains":["D-R1"],"response":"D-R1: 2"}]})"), {});
    ChatRequest r;
    r.user_text = "any D-R1 request";
    CHECK(mock->complete(r) == "D-R1: 2");
    CHECK_FALSE(make_executor(json{{"kind", "null"}})->available());
    CHECK_THROWS_AS(make_executor(json{{"kind", "subprocess"}, {"command", json::array()}}), ConfigError);
    CHECK_THROWS_AS(make_executor(json{{"kind", "docker"}}), ConfigError);
}

TEST_CASE("gen writes the configured counts and is byte-identical on rerun") {
    const auto out = scratch("gen");
    auto c = small_config(out);
    CHECK(cmd_gen(c) == 6 * 22);
    const auto first = slurp(instance_file(out, Flavor::Eicu, TaskId::KR2));
    const auto manifest = slurp(out / "instances" / "manifest.json");
    CHECK(cmd_gen(c) == 6 * 22);
    CHECK(slurp(instance_file(out, Flavor::Eicu, TaskId::KR2)) == first);
    CHECK(slurp(out / "instances" / "manifest.json") == manifest);
    for (auto f : kAllFlavors)
        for (auto t : kAllTasks) CHECK(read_jsonl(instance_file(out, f, t)).size() == 6);
    CHECK(load_instances(c).size() == 132);
    fs::remove_all(out);
}

TEST_CASE("export-finetune writes 30 pairs per task") {
    const auto out = scratch("ft");
    auto c = small_config(out);
    CHECK(cmd_export_finetune(c) == 30 * 22);
    const auto lines = read_jsonl(finetune_file(out, Flavor::Synthea, TaskId::DR4));
    CHECK(lines.size() == 30);
    CHECK(lines.front().contains("instruction"));
    CHECK(lines.front().contains("response"));
    fs::remove_all(out);
}

TEST_CASE("oracle smoke run scores 100 everywhere and resumes idempotently") {
    const auto out = scratch("smoke");
    auto c = small_config(out);
    cmd_gen(c);
    auto s = cmd_eval(c);
    CHECK(s.written == 132);
    CHECK(s.failures == 0);
    const auto log_before = slurp(run_log_path(out));
    auto again = cmd_eval(c);
    CHECK(again.written == 0);
    CHECK(again.skipped == 132);
    CHECK(slurp(run_log_path(out)) == log_before);

    auto report = cmd_report(out);
    const auto& groups = report.scores.at("groups");
    REQUIRE(groups.size() == 2);
    std::size_t cells = 0;
    for (const auto& g : groups)
        for (const auto& [task, entry] : g.at("tasks").items()) {
            CHECK(entry.at("value").get<double>() == 100.0);
            ++cells;
        }
    CHECK(cells == 22);
    CHECK(report.text.find("100.0") != std::string::npos);
    CHECK(fs::exists(out / "report.json"));
    CHECK(slurp(out / "report.txt") == report.text);
    fs::remove_all(out);
}

TEST_CASE("interrupted log: torn tail is repaired and only missing records are added") {
    const auto out = scratch("resume");
    auto c = small_config(out);
    c.tasks = {TaskId::DR1, TaskId::KR1};
    cmd_gen(c);
    cmd_eval(c);
    const auto full = without_latency(run_log_path(out));
    // keep 5 whole lines plus half of the sixth
    const auto text = slurp(run_log_path(out));
    std::size_t cut = 0;
    for (int i = 0; i < 5; ++i) cut = text.find('\n', cut) + 1;
    const auto half = cut + (text.find('\n', cut) - cut) / 2;
    fs::resize_file(run_log_path(out), half);
    auto s = cmd_eval(c);
    CHECK(s.skipped == 5);
    CHECK(s.written == 24 - 5);
    CHECK(without_latency(run_log_path(out)) == full);
    fs::remove_all(out);
}

TEST_CASE("concurrency does not change the log order") {
    const auto a = scratch("seq");
    const auto b = scratch("par");
    auto ca = small_config(a);
    auto cb = small_config(b);
    ca.concurrency = 1;
    cb.concurrency = 8;
    ca.formats = cb.formats = {InputFormat::PlainText, InputFormat::NaturalLanguage};
    ca.k_shots = cb.k_shots = {0, 3};
    ca.backend = cb.backend = json{{"kind", "oracle"}, {"error_rate", 0.3}};
    cmd_gen(ca);
    cmd_gen(cb);
    cmd_eval(ca);
    cmd_eval(cb);
    CHECK(without_latency(run_log_path(a)) == without_latency(run_log_path(b)));
    CHECK(cmd_report(a).text == cmd_report(b).text);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("replay cache reproduces a run without the live backend") {
    const auto a = scratch("rec");
    const auto b = scratch("play");
    const auto cache = a / "cache.jsonl";
    auto ca = small_config(a);
    auto cb = small_config(b);
    ca.pipeline = cb.pipeline = PipelineKind::EhrMaster;
    ca.backend = json{{"kind", "replay"}, {"cache", cache.string()}, {"fallback", {{"kind", "oracle"}, {"error_rate", 0.2}}}};
    cb.backend = json{{"kind", "replay"}, {"cache", cache.string()}};
    ca.concurrency = 4;
    cb.concurrency = 2;
    cmd_gen(ca);
    cmd_gen(cb);
    CHECK(slurp(instance_file(a, Flavor::Synthea, TaskId::DU1)) == slurp(instance_file(b, Flavor::Synthea, TaskId::DU1)));
    cmd_eval(ca);
    int invalid = 0;
    for (const auto& r : read_jsonl(run_log_path(a))) invalid += r["outcome"] == "invalid";
    CHECK(invalid > 0);
    cmd_eval(cb);
    CHECK(without_latency(run_log_path(a)) == without_latency(run_log_path(b)));
    CHECK(cmd_report(a).text == cmd_report(b).text);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("failed records are retried on rerun") {
    const auto out = scratch("retry");
    auto c = small_config(out);
    c.tasks = {TaskId::DR2};
    c.flavors = {Flavor::Synthea};
    cmd_gen(c);
    auto down = std::make_shared<MockBackend>();
    auto s = cmd_eval(c, down);
    CHECK(s.failures == 6);
    auto report = cmd_report(out);
    CHECK(report.text.find("✗") != std::string::npos);
    auto again = cmd_eval(c);
    CHECK(again.written == 6);
    CHECK(again.failures == 0);
    CHECK(read_jsonl(run_log_path(out)).size() == 12);
    CHECK(cmd_report(out).scores["groups"][0]["tasks"]["D-R2"]["value"] == 100.0);
    fs::remove_all(out);
}

TEST_CASE("report: no-valid-output marker and relative gain") {
    std::vector<json> recs;
    for (int i = 0; i < 25; ++i) recs.push_back(record("b" + std::to_string(i), TaskId::DR1, "plain", i < 16));
    for (int i = 0; i < 50; ++i) recs.push_back(record("m" + std::to_string(i), TaskId::DR1, "nl", i < 49));
    auto inv = record("x", TaskId::DR2, "plain", false);
    inv["parsed"] = parsed_to_json(Invalid{"junk"});
    recs.push_back(inv);
    const auto report = build_report(recs);
    CHECK(report.text.find("94.4") != std::string::npos);
    CHECK(report.text.find("64.0") != std::string::npos);
    CHECK(report.text.find("98.0") != std::string::npos);
    CHECK(report.text.find("✗") != std::string::npos);
    const auto& gain = report.scores.at("relative_gain").at(0).at("gains").at("D-R1").get<double>();
    CHECK(gain == doctest::Approx(94.4).epsilon(0.0005));
    CHECK_THROWS_AS(build_report({}), EmptyLog);
}

TEST_CASE("trace lookup") {
    const auto out = scratch("trace");
    auto c = small_config(out);
    c.pipeline = PipelineKind::EhrMaster;
    c.tasks = {TaskId::DR3};
    cmd_gen(c);
    cmd_eval(c);
    const auto id = load_instances(c).front().instance_id;
    const auto found = cmd_trace(out, id);
    REQUIRE(found.size() == 1);
    CHECK(trace_from_json(found[0].at("trace")).instance_id == id);
    CHECK(cmd_trace(out, "nope").empty());
    fs::remove_all(out);
}

TEST_CASE("CLI exit codes") {
    const auto out = scratch("cli");
    const auto o = " -o " + out.string();
    CHECK(run_cli("gen" + o + " --per-task 3") == 0);
    CHECK(run_cli("eval" + o + " --per-task 3 --tasks D-R1 K-R1") == 0);
    CHECK(run_cli("report" + o) == 0);
    CHECK(fs::exists(out / "report.txt"));
    CHECK(run_cli("eval" + o + " --k-shots 2") == 2);
    CHECK(run_cli("eval" + o + " --tasks D-Q7") == 2);
    CHECK(run_cli("eval -o " + (out / "empty").string()) == 2);
    CHECK(run_cli("eval" + o + " --run-id down --tasks D-R1 --backend '{\"kind\":\"mock\"}'") == 1);
    CHECK(run_cli("report -o " + (out / "empty").string()) == 2);
    CHECK(run_cli("frobnicate") == 2);
    {
        std::ofstream cfg(out / "cfg.json");
        cfg << R"({"per_task": 3, "tasks": ["D-U1"], "flavors": ["eicu"], "formats": ["special"], "run_id": "cfg"})";
    }
    CHECK(run_cli("eval -c " + (out / "cfg.json").string() + o) == 0);
    bool seen = false;
    for (const auto& r : read_jsonl(run_log_path(out)))
        if (r["run_id"] == "cfg") seen = r["format"] == "special";
    CHECK(seen);
    fs::remove_all(out);
}
