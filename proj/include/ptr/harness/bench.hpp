#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptr/core/types.hpp"
#include "ptr/harness/metrics.hpp"
#include "ptr/pipeline/config.hpp"
#include "ptr/semantic/model.hpp"

namespace ptr::harness {

struct SuiteItem {
    BenchmarkItem item;
    std::optional<KeyValueMap> context;
};

struct Benchmark {
    std::string name;
    AnswerKind kind = AnswerKind::free_text;
    std::vector<SuiteItem> items;
};

/// Per-item model scripts for the two frameworks.
struct ItemScripts {
    nlohmann::json ptr = nlohmann::json::array();
    nlohmann::json react = nlohmann::json::array();
};

struct Suite {
    std::string name;
    Metadata metadata;
    std::vector<Benchmark> benchmarks;
    std::map<std::string, ItemScripts> scripts; // by item id

    std::size_t item_count() const;

    /// {"name", "metadata": path|object, "scripts": path|object,
    ///  "benchmarks": [{"name", "answer_kind", "items": [{"id", "question",
    ///  "gold": [...], "context"?}]}]}. Paths resolve against `base`.
    /// Throws Error("schema_error"), Error("empty_suite").
    static Suite from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
    static Suite load(const std::filesystem::path& path);
};

struct ItemResult {
    std::string id;
    std::string prediction;
    int em = 0;
    double f1 = 0.0;
    bool extraction_failed = false;
    std::string outcome; // completed | run_invalid | budget_exceeded | error
    std::string reason;  // why the item scored 0 without a usable answer
    std::size_t model_calls = 0;
    std::size_t tool_calls = 0;
    semantic::Usage usage;
    std::int64_t cost_micros = 0;
    double latency_ms = 0.0;
    std::string route; // pipeline only: routed mode
    bool repaired = false;
};

struct EvalResult {
    std::string framework;
    AnswerKind kind = AnswerKind::free_text;
    std::vector<ItemResult> items;
    double mean_em = 0.0;
    double mean_f1 = 0.0; // equals mean_em for non-free-text kinds
    std::size_t model_calls = 0;
    double mean_model_calls = 0.0;
    semantic::Usage usage;
    std::int64_t cost_micros = 0;
    double mean_latency_ms = 0.0;

    /// Recomputes the aggregates from `items`.
    void aggregate();
    nlohmann::json to_json(bool include_latency) const;
};

enum class Advantage { ptr, react, tie };

struct Comparison {
    double delta_em = 0.0;
    std::optional<double> cost_ratio; // undefined when the PTR cost is zero
    Advantage advantage = Advantage::tie;
};

/// ΔEM is taken in whole micro-units of EM, so published three-decimal
/// values subtract exactly. The advantage follows the sign of ΔEM.
Comparison compare(double em_ptr, double em_react, std::int64_t cost_ptr_micros = 0,
                   std::int64_t cost_react_micros = 0);
Comparison compare(const EvalResult& ptr, const EvalResult& react);

const char* to_string(Advantage advantage);

/// Builds the model for one item and framework ("ptr" or "react").
using ModelFactory =
    std::function<std::unique_ptr<semantic::LanguageModel>(const std::string& item_id, const std::string& framework)>;

struct BenchmarkResult {
    std::string name;
    AnswerKind kind = AnswerKind::free_text;
    EvalResult ptr;
    EvalResult react;
    Comparison comparison;
};

struct BenchReport {
    std::string suite;
    std::string model;
    std::string config_hash;
    bool scripted = true;
    std::vector<BenchmarkResult> benchmarks;

    /// Latency is omitted in scripted mode so the file is byte-stable.
    nlohmann::json to_json() const;
    /// Plain-text table: Dataset, Model, PTR, ReAct, Adv., ΔEM, calls, cost.
    std::string table() const;
};

struct BenchOptions {
    std::string model_label = "scripted";
    bool scripted = true;
    unsigned jobs = 1;
};

/// Runs both frameworks on every item with a fresh registry per run.
/// Items may run concurrently; results keep item order.
BenchReport run_bench(const Suite& suite, const pipeline::RunConfig& config, const ModelFactory& models,
                      const BenchOptions& options = {});

/// Scripted models from the suite's bundled scripts.
ModelFactory scripted_models(const Suite& suite, const pipeline::RunConfig& config);

} // namespace ptr::harness
