#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/harness/bench.hpp"
#include "ptr/pipeline/config.hpp"
#include "ptr/pipeline/pipeline.hpp"
#include "ptr/pipeline/trace.hpp"
#include "ptr/semantic/http_provider.hpp"

namespace {

using nlohmann::json;

enum Exit { ok = 0, failure = 1, usage = 2, run_invalid = 3, budget_exceeded = 4 };

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ptr::Error("io_error", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ptr::Error("schema_error", path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ptr::Error("io_error", "cannot write " + path);
    out << text;
}

struct ModelSpec {
    bool scripted = true;
    std::string target; // script file or provider id
};

ModelSpec parse_model_spec(const std::string& spec) {
    if (spec == "scripted") return {true, ""};
    if (spec.rfind("scripted:", 0) == 0) return {true, spec.substr(9)};
    if (spec.rfind("provider:", 0) == 0) return {false, spec.substr(9)};
    throw CLI::ValidationError("--model", "expected scripted:<file> or provider:<id>, got " + spec);
}

std::unique_ptr<ptr::semantic::LanguageModel> make_provider(const ptr::pipeline::RunConfig& config,
                                                            const std::string& id) {
    if (!config.providers.contains(id)) throw ptr::Error("unknown_provider", "no provider '" + id + "' in config");
    return std::make_unique<ptr::semantic::HttpProvider>(ptr::semantic::ProviderConfig::from_json(id, config.providers[id]));
}

int cmd_run(const std::string& task_file, const std::string& metadata_file, const std::string& config_file,
            const std::string& model_spec, const std::string& trace_out) {
    ptr::Task task;
    ptr::Metadata metadata;
    ptr::from_json(read_json(task_file), task);
    ptr::from_json(read_json(metadata_file), metadata);
    const auto config = config_file.empty() ? ptr::pipeline::RunConfig{} : ptr::pipeline::RunConfig::load(config_file);
    const auto spec = parse_model_spec(model_spec);
    std::unique_ptr<ptr::semantic::LanguageModel> model;
    if (spec.scripted) {
        if (spec.target.empty()) throw CLI::ValidationError("--model", "run needs scripted:<script-file>");
        model = std::make_unique<ptr::semantic::ScriptedModel>(
            ptr::semantic::ScriptedModel::parse_script(read_json(spec.target)), config.prices);
    } else {
        model = make_provider(config, spec.target);
    }

    std::ofstream trace_file;
    std::unique_ptr<ptr::pipeline::TraceWriter> trace;
    if (!trace_out.empty()) {
        trace_file.open(trace_out, std::ios::binary);
        if (!trace_file) throw ptr::Error("io_error", "cannot write " + trace_out);
        trace = std::make_unique<ptr::pipeline::TraceWriter>(trace_file);
    }
    const auto registry = ptr::pipeline::build_registry(config);
    const auto report = ptr::pipeline::run_ptr(task, metadata, config, *model, registry, trace.get());
    std::cout << report.to_json(true).dump(2) << "\n";
    switch (report.outcome) {
    case ptr::pipeline::RunOutcome::completed: return ok;
    case ptr::pipeline::RunOutcome::run_invalid: return run_invalid;
    case ptr::pipeline::RunOutcome::budget_exceeded: return budget_exceeded;
    }
    return ok;
}

int cmd_replay(const std::string& trace_file, bool quiet) {
    const auto report = ptr::pipeline::replay_trace(ptr::pipeline::load_trace(trace_file));
    if (quiet) {
        if (report.match) {
            std::cout << "ok (" << report.stages_checked << " stages checked)\n";
        } else {
            std::cout << "divergence: " << report.divergence << "\n";
        }
    } else {
        std::cout << json{{"match", report.match},
                          {"divergence", report.divergence},
                          {"stages_checked", report.stages_checked}}
                         .dump(2)
                  << "\n";
    }
    return report.match ? ok : failure;
}

int cmd_bench(const std::string& suite_file, const std::string& config_file, const std::string& out,
              const std::string& table_out, const std::string& model_spec, unsigned jobs) {
    const auto suite = ptr::harness::Suite::load(suite_file);
    const auto config = config_file.empty() ? ptr::pipeline::RunConfig{} : ptr::pipeline::RunConfig::load(config_file);
    const auto spec = parse_model_spec(model_spec);

    ptr::harness::BenchOptions options;
    options.jobs = jobs;
    options.scripted = spec.scripted;
    options.model_label = spec.scripted ? "scripted" : spec.target;
    ptr::harness::ModelFactory models;
    if (spec.scripted) {
        if (!spec.target.empty()) throw CLI::ValidationError("--model", "bench uses the suite's bundled scripts");
        models = ptr::harness::scripted_models(suite, config);
    } else {
        models = [&config, id = spec.target](const std::string&, const std::string&) { return make_provider(config, id); };
    }
    const auto report = ptr::harness::run_bench(suite, config, models, options);
    write_file(out, report.to_json().dump(2) + "\n");
    const auto table = report.table();
    if (!table_out.empty()) write_file(table_out, table);
    std::cout << table;
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounded profile-then-reason agent runtime"};
    app.require_subcommand(1);

    std::string task_file, metadata_file, config_file, model_spec = "scripted", trace_out, trace_file, suite_file,
                                                        out_file, table_file;
    unsigned jobs = 1;

    auto* run = app.add_subcommand("run", "Run one task through the pipeline");
    run->add_option("--task-file", task_file, "Task JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--metadata", metadata_file, "Metadata JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--config", config_file, "Run configuration JSON")->check(CLI::ExistingFile);
    run->add_option("--model", model_spec, "scripted:<script-file> or provider:<id>")->required();
    run->add_option("--trace-out", trace_out, "Write the JSONL trace here");

    auto* replay = app.add_subcommand("replay", "Re-derive a recorded run and report the comparison");
    replay->add_option("--trace", trace_file, "JSONL trace")->required()->check(CLI::ExistingFile);

    auto* verify = app.add_subcommand("verify-trace", "Exit nonzero if replaying the trace diverges");
    verify->add_option("--trace", trace_file, "JSONL trace")->required()->check(CLI::ExistingFile);

    auto* bench = app.add_subcommand("bench", "Compare the pipeline against the reactive baseline on a suite");
    bench->add_option("--suite", suite_file, "Suite JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--config", config_file, "Run configuration JSON")->check(CLI::ExistingFile);
    bench->add_option("--out", out_file, "Results JSON")->required();
    bench->add_option("--table", table_file, "Also write the text table here");
    bench->add_option("--model", model_spec, "scripted (bundled scripts) or provider:<id>");
    bench->add_option("--jobs", jobs, "Items evaluated concurrently")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*run) return cmd_run(task_file, metadata_file, config_file, model_spec, trace_out);
        if (*replay) return cmd_replay(trace_file, false);
        if (*verify) return cmd_replay(trace_file, true);
        if (*bench) return cmd_bench(suite_file, config_file, out_file, table_file, model_spec, jobs);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const ptr::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return usage;
}
