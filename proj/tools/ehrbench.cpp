// ehrbench: generate instance sets, run evaluations, render reports.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehrbench/runner.hpp"

using namespace ehrbench;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfig = 2;

struct Overrides {
    std::string config_path;
    std::string out;
    std::string run_id;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> pool_seed;
    std::optional<std::size_t> per_task;
    std::vector<std::string> tasks;
    std::vector<std::string> flavors;
    std::vector<std::string> formats;
    std::vector<int> k_shots;
    std::string pipeline;
    std::string backend;
    std::string executor;
    std::string model;
    std::optional<std::size_t> concurrency;
    std::string leniency;
};

/// A value that is either inline JSON or a path to a JSON file.
json json_arg(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\n");
    if (first != std::string::npos && text[first] == '{') return json::parse(text);
    std::ifstream in(text);
    if (!in) throw ConfigError("cannot read " + text);
    return json::parse(in);
}

RunConfig build_config(const Overrides& o) {
    json j = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("cannot read config " + o.config_path);
        j = json::parse(in);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (!o.out.empty()) j["output_dir"] = o.out;
    if (!o.run_id.empty()) j["run_id"] = o.run_id;
    if (o.seed) j["seed"] = *o.seed;
    if (o.pool_seed) j["pool_seed"] = *o.pool_seed;
    if (o.per_task) j["per_task"] = *o.per_task;
    if (!o.tasks.empty()) j["tasks"] = o.tasks;
    if (!o.flavors.empty()) j["flavors"] = o.flavors;
    if (!o.formats.empty()) j["formats"] = o.formats;
    if (!o.k_shots.empty()) j["k_shots"] = o.k_shots;
    if (!o.pipeline.empty()) j["pipeline"] = o.pipeline;
    if (!o.backend.empty()) j["backend"] = json_arg(o.backend);
    if (!o.executor.empty()) j["executor"] = json_arg(o.executor);
    if (!o.model.empty()) j["model"] = o.model;
    if (o.concurrency) j["concurrency"] = *o.concurrency;
    if (!o.leniency.empty()) j["leniency"] = o.leniency;
    return config_from_json(j);
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file");
    cmd->add_option("-o,--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Evaluation seed");
    cmd->add_option("--per-task", o.per_task, "Instances per task and flavor");
    cmd->add_option("--tasks", o.tasks, "Task IDs, e.g. D-U1 K-R3, or 'all'");
    cmd->add_option("--flavors", o.flavors, "synthea and/or eicu");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured EHR table benchmark harness"};
    app.require_subcommand(1);
    Overrides o;

    auto* gen = app.add_subcommand("gen", "Generate evaluation instance files");
    add_common(gen, o);

    auto* fin = app.add_subcommand("export-finetune", "Write fine-tune question/answer pairs");
    add_common(fin, o);

    auto* eval = app.add_subcommand("eval", "Evaluate a backend over the instance files");
    add_common(eval, o);
    eval->add_option("--run-id", o.run_id, "Run identifier");
    eval->add_option("--pool-seed", o.pool_seed, "Exemplar pool seed");
    eval->add_option("--formats", o.formats, "plain special graph nl");
    eval->add_option("-k,--k-shots", o.k_shots, "Shots: 0 1 3 5");
    eval->add_option("--pipeline", o.pipeline, "bare or ehrmaster");
    eval->add_option("--backend", o.backend, "Backend spec: inline JSON or file");
    eval->add_option("--executor", o.executor, "Executor spec: inline JSON or file");
    eval->add_option("--model", o.model, "Model name sent with every request");
    eval->add_option("-j,--concurrency", o.concurrency, "Concurrent requests");
    eval->add_option("--leniency", o.leniency, "strict, standard or loose");

    auto* report = app.add_subcommand("report", "Score a run log");
    std::string report_dir;
    double threshold = MetricOptions{}.invalid_threshold;
    report->add_option("-o,--out", report_dir, "Output directory holding runs.jsonl")->required();
    report->add_option("--invalid-threshold", threshold, "Invalid share above which a task shows no valid output");

    auto* trace = app.add_subcommand("trace", "Print pipeline traces of one instance");
    std::string trace_dir, instance_id;
    trace->add_option("-o,--out", trace_dir, "Output directory holding traces.jsonl")->required();
    trace->add_option("-i,--instance", instance_id, "Instance ID")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*gen) {
            const auto c = build_config(o);
            const auto n = cmd_gen(c);
            std::cout << "wrote " << n << " instances to " << (c.output_dir / "instances").string() << "\n";
            return kOk;
        }
        if (*fin) {
            const auto c = build_config(o);
            const auto n = cmd_export_finetune(c);
            std::cout << "wrote " << n << " fine-tune pairs to " << (c.output_dir / "finetune").string() << "\n";
            return kOk;
        }
        if (*eval) {
            const auto c = build_config(o);
            const auto s = cmd_eval(c);
            std::cout << "records written: " << s.written << ", skipped: " << s.skipped
                      << ", failures: " << s.failures << "\n";
            return s.failures ? kPartial : kOk;
        }
        if (*report) {
            MetricOptions m;
            m.invalid_threshold = threshold;
            std::cout << cmd_report(report_dir, m).text;
            return kOk;
        }
        if (*trace) {
            const auto found = cmd_trace(trace_dir, instance_id);
            if (found.empty()) {
                std::cerr << "no trace for " << instance_id << "\n";
                return kPartial;
            }
            for (const auto& t : found) std::cout << t.dump(2) << "\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const EmptyLog& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPartial;
    }
    return kOk;
}
