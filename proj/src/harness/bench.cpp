#include "ptr/harness/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/harness/react.hpp"
#include "ptr/pipeline/pipeline.hpp"

namespace ptr::harness {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("schema_error", path.string() + ": " + e.what());
    }
}

/// An inline object, or a path string read relative to `base`.
json inline_or_file(const json& j, const std::filesystem::path& base) {
    if (j.is_string()) {
        std::filesystem::path path = j.get<std::string>();
        if (path.is_relative()) path = base / path;
        return read_json_file(path);
    }
    return j;
}

[[noreturn]] void schema_error(const std::string& what) {
    throw Error("schema_error", "suite: " + what);
}

SuiteItem read_item(const json& j, AnswerKind kind) {
    if (!j.is_object()) schema_error("item is not an object");
    SuiteItem out;
    out.item.kind = kind;
    try {
        out.item.id = j.at("id").get<std::string>();
        out.item.question = j.at("question").get<std::string>();
        const auto& gold = j.at("gold");
        if (gold.is_string()) {
            out.item.gold = {gold.get<std::string>()};
        } else {
            out.item.gold = gold.get<std::vector<std::string>>();
        }
        if (j.contains("context")) {
            KeyValueMap context;
            for (auto it = j["context"].begin(); it != j["context"].end(); ++it) context[it.key()] = it.value();
            out.context = std::move(context);
        }
    } catch (const json::exception& e) {
        schema_error(std::string("bad item: ") + e.what());
    }
    if (out.item.id.empty()) schema_error("item id is empty");
    if (out.item.gold.empty()) schema_error("item " + out.item.id + " has no gold answers");
    return out;
}

semantic::Usage usage_of(const json& ledger) {
    return {ledger.value("input_tokens", std::int64_t{0}), ledger.value("output_tokens", std::int64_t{0})};
}

using Clock = std::chrono::steady_clock;

void score(ItemResult& result, const BenchmarkItem& item) {
    result.em = exact_match(result.prediction, item);
    result.f1 = item_f1(result.prediction, item);
    if (result.outcome == "completed" && !normalize_answer(result.prediction, item.kind)) {
        result.extraction_failed = true;
        result.reason = "extraction_failed";
    }
}

ItemResult run_ptr_item(const SuiteItem& entry, const Metadata& metadata, const pipeline::RunConfig& config,
                        const ModelFactory& models) {
    ItemResult result;
    result.id = entry.item.id;
    const Task task{entry.item.question, std::nullopt, entry.context};
    const auto started = Clock::now();
    try {
        auto model = models(entry.item.id, "ptr");
        const auto registry = pipeline::build_registry(config);
        const auto report = pipeline::run_ptr(task, metadata, config, *model, registry);
        result.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        result.outcome = pipeline::to_string(report.outcome);
        result.reason = report.error;
        result.prediction = report.final_answer;
        result.model_calls = report.model_calls;
        result.tool_calls = report.tool_calls;
        result.usage = usage_of(report.ledger);
        result.cost_micros = report.ledger.value("cost_micros", std::int64_t{0});
        if (report.profile) result.route = router::to_string(report.route.mode);
        result.repaired = report.repaired;
    } catch (const Error& e) {
        result.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        result.outcome = "error";
        result.reason = e.code() + ": " + e.what();
    }
    score(result, entry.item);
    return result;
}

ItemResult run_react_item(const SuiteItem& entry, const Metadata& metadata, const pipeline::RunConfig& config,
                          const ModelFactory& models) {
    ItemResult result;
    result.id = entry.item.id;
    const Task task{entry.item.question, std::nullopt, entry.context};
    const auto started = Clock::now();
    try {
        auto model = models(entry.item.id, "react");
        const auto registry = pipeline::build_registry(config);
        const auto report = run_react_baseline(task, metadata, config, *model, registry);
        result.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        result.outcome = pipeline::to_string(report.outcome);
        result.reason = report.error;
        if (report.outcome == pipeline::RunOutcome::completed && !report.finished) result.reason = "iteration_cap";
        result.prediction = report.final_answer;
        result.model_calls = report.model_calls;
        result.tool_calls = report.tool_calls;
        result.usage = usage_of(report.ledger);
        result.cost_micros = report.ledger.value("cost_micros", std::int64_t{0});
    } catch (const Error& e) {
        result.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        result.outcome = "error";
        result.reason = e.code() + ": " + e.what();
    }
    score(result, entry.item);
    return result;
}

std::string fixed3(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", x);
    return buffer;
}

std::string signed3(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%+.3f", x);
    return buffer;
}

std::string dollars(std::int64_t micros) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "$%.6f", static_cast<double>(micros) / 1e6);
    return buffer;
}

} // namespace

std::size_t Suite::item_count() const {
    std::size_t n = 0;
    for (const auto& b : benchmarks) n += b.items.size();
    return n;
}

Suite Suite::from_json(const json& j, const std::filesystem::path& base) {
    if (!j.is_object()) schema_error("top level is not an object");
    Suite suite;
    suite.name = j.value("name", "suite");
    try {
        ptr::from_json(inline_or_file(j.at("metadata"), base), suite.metadata);
    } catch (const json::exception& e) {
        schema_error(std::string("bad metadata: ") + e.what());
    }
    if (!j.contains("benchmarks") || !j["benchmarks"].is_array()) schema_error("benchmarks must be an array");
    std::set<std::string> ids;
    for (const auto& b : j["benchmarks"]) {
        Benchmark benchmark;
        benchmark.name = b.value("name", "");
        const auto kind = answer_kind_from_string(b.value("answer_kind", ""));
        if (!kind) schema_error("benchmark " + benchmark.name + " has an unknown answer_kind");
        benchmark.kind = *kind;
        for (const auto& item : b.value("items", json::array())) {
            benchmark.items.push_back(read_item(item, *kind));
            if (!ids.insert(benchmark.items.back().item.id).second) {
                schema_error("duplicate item id " + benchmark.items.back().item.id);
            }
        }
        suite.benchmarks.push_back(std::move(benchmark));
    }
    if (suite.item_count() == 0) throw Error("empty_suite", "suite " + suite.name + " has no items");
    if (j.contains("scripts")) {
        const json scripts = inline_or_file(j["scripts"], base);
        if (!scripts.is_object()) schema_error("scripts must be an object keyed by item id");
        for (auto it = scripts.begin(); it != scripts.end(); ++it) {
            ItemScripts entry;
            entry.ptr = it.value().value("ptr", json::array());
            entry.react = it.value().value("react", json::array());
            suite.scripts[it.key()] = std::move(entry);
        }
    }
    return suite;
}

Suite Suite::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

void EvalResult::aggregate() {
    mean_em = mean_f1 = mean_model_calls = mean_latency_ms = 0.0;
    model_calls = 0;
    usage = {};
    cost_micros = 0;
    if (items.empty()) return;
    int hits = 0;
    double f1_sum = 0.0, latency_sum = 0.0;
    for (const auto& item : items) {
        hits += item.em;
        f1_sum += item.f1;
        latency_sum += item.latency_ms;
        model_calls += item.model_calls;
        usage.input_tokens += item.usage.input_tokens;
        usage.output_tokens += item.usage.output_tokens;
        cost_micros += item.cost_micros;
    }
    const auto n = static_cast<double>(items.size());
    mean_em = hits / n;
    mean_f1 = kind == AnswerKind::free_text ? f1_sum / n : mean_em;
    mean_model_calls = static_cast<double>(model_calls) / n;
    mean_latency_ms = latency_sum / n;
}

json EvalResult::to_json(bool include_latency) const {
    json rows = json::array();
    for (const auto& item : items) {
        json row = {{"id", item.id},
                     {"prediction", item.prediction},
                     {"em", item.em},
                     {"f1", item.f1},
                     {"extraction_failed", item.extraction_failed},
                     {"outcome", item.outcome},
                     {"reason", item.reason},
                     {"model_calls", item.model_calls},
                     {"tool_calls", item.tool_calls},
                     {"input_tokens", item.usage.input_tokens},
                     {"output_tokens", item.usage.output_tokens},
                     {"cost_micros", item.cost_micros}};
        if (framework == "ptr") {
            row["route"] = item.route;
            row["repaired"] = item.repaired;
        }
        if (include_latency) row["latency_ms"] = item.latency_ms;
        rows.push_back(std::move(row));
    }
    json out = {{"framework", framework},
                {"n", items.size()},
                {"mean_em", mean_em},
                {"mean_f1", mean_f1},
                {"model_calls", model_calls},
                {"mean_model_calls", mean_model_calls},
                {"input_tokens", usage.input_tokens},
                {"output_tokens", usage.output_tokens},
                {"cost_micros", cost_micros},
                {"items", rows}};
    if (include_latency) out["mean_latency_ms"] = mean_latency_ms;
    return out;
}

Comparison compare(double em_ptr, double em_react, std::int64_t cost_ptr_micros, std::int64_t cost_react_micros) {
    Comparison out;
    const long long delta_micro = std::llround(em_ptr * 1e6) - std::llround(em_react * 1e6);
    out.delta_em = static_cast<double>(delta_micro) / 1e6;
    out.advantage = delta_micro > 0 ? Advantage::ptr : delta_micro < 0 ? Advantage::react : Advantage::tie;
    if (cost_ptr_micros != 0) {
        out.cost_ratio = static_cast<double>(cost_react_micros) / static_cast<double>(cost_ptr_micros);
    }
    return out;
}

Comparison compare(const EvalResult& ptr, const EvalResult& react) {
    return compare(ptr.mean_em, react.mean_em, ptr.cost_micros, react.cost_micros);
}

const char* to_string(Advantage advantage) {
    switch (advantage) {
    case Advantage::ptr: return "PTR";
    case Advantage::react: return "ReAct";
    case Advantage::tie: return "tie";
    }
    return "tie";
}

json BenchReport::to_json() const {
    json rows = json::array();
    for (const auto& b : benchmarks) {
        rows.push_back({{"name", b.name},
                        {"answer_kind", harness::to_string(b.kind)},
                        {"ptr", b.ptr.to_json(!scripted)},
                        {"react", b.react.to_json(!scripted)},
                        {"comparison",
                         {{"delta_em", b.comparison.delta_em},
                          {"cost_ratio", b.comparison.cost_ratio ? json(*b.comparison.cost_ratio) : json()},
                          {"advantage", harness::to_string(b.comparison.advantage)}}}});
    }
    return {{"suite", suite}, {"model", model}, {"config_hash", config_hash}, {"benchmarks", rows}};
}

std::string BenchReport::table() const {
    const std::vector<std::string> header = {"Dataset", "Model",     "PTR",       "ReAct",      "Adv.",
                                             "dEM",     "PTR calls", "ReAct calls", "PTR cost", "ReAct cost"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& b : benchmarks) {
        char calls_ptr[32], calls_react[32];
        std::snprintf(calls_ptr, sizeof calls_ptr, "%.2f", b.ptr.mean_model_calls);
        std::snprintf(calls_react, sizeof calls_react, "%.2f", b.react.mean_model_calls);
        rows.push_back({b.name, model, fixed3(b.ptr.mean_em), fixed3(b.react.mean_em),
                        harness::to_string(b.comparison.advantage), signed3(b.comparison.delta_em), calls_ptr,
                        calls_react, dollars(b.ptr.cost_micros), dollars(b.react.cost_micros)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out += "  ";
            out += cells[c] + std::string(width[c] - cells[c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& row : rows) out += line(row);
    return out;
}

BenchReport run_bench(const Suite& suite, const pipeline::RunConfig& config, const ModelFactory& models,
                      const BenchOptions& options) {
    if (suite.item_count() == 0) throw Error("empty_suite", "suite " + suite.name + " has no items");
    BenchReport report;
    report.suite = suite.name;
    report.model = options.model_label;
    report.config_hash = config.hash();
    report.scripted = options.scripted;

    struct Job {
        const SuiteItem* item;
        ItemResult ptr;
        ItemResult react;
    };
    std::vector<Job> jobs;
    for (const auto& b : suite.benchmarks) {
        for (const auto& item : b.items) jobs.push_back({&item, {}, {}});
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            jobs[i].ptr = run_ptr_item(*jobs[i].item, suite.metadata, config, models);
            jobs[i].react = run_react_item(*jobs[i].item, suite.metadata, config, models);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(jobs.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }

    std::size_t cursor = 0;
    for (const auto& b : suite.benchmarks) {
        BenchmarkResult result;
        result.name = b.name;
        result.kind = b.kind;
        result.ptr.framework = "ptr";
        result.react.framework = "react";
        result.ptr.kind = result.react.kind = b.kind;
        for (std::size_t i = 0; i < b.items.size(); ++i, ++cursor) {
            result.ptr.items.push_back(std::move(jobs[cursor].ptr));
            result.react.items.push_back(std::move(jobs[cursor].react));
        }
        result.ptr.aggregate();
        result.react.aggregate();
        result.comparison = compare(result.ptr, result.react);
        report.benchmarks.push_back(std::move(result));
    }
    return report;
}

ModelFactory scripted_models(const Suite& suite, const pipeline::RunConfig& config) {
    return [&suite, prices = config.prices](const std::string& id, const std::string& framework)
               -> std::unique_ptr<semantic::LanguageModel> {
        auto it = suite.scripts.find(id);
        if (it == suite.scripts.end()) throw Error("script_exhausted", "no script for item " + id);
        const json& script = framework == "ptr" ? it->second.ptr : it->second.react;
        return std::make_unique<semantic::ScriptedModel>(semantic::ScriptedModel::parse_script(script), prices);
    };
}

} // namespace ptr::harness
