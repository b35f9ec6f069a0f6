#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ptr/executor/executor.hpp"
#include "ptr/router/risk.hpp"
#include "ptr/semantic/model.hpp"
#include "ptr/tools/registry.hpp"
#include "ptr/verifier/verifier.hpp"

namespace ptr::pipeline {

struct ToolsConfig {
    /// Knowledge-base corpus held inline so traces are self-contained.
    nlohmann::json corpus = nlohmann::json::array();
    /// {tool_id: ["timeout", "pass", ...]} applied through the fault wrapper.
    nlohmann::json faults = nlohmann::json::object();
};

struct RunConfig {
    router::RiskWeights weights;
    router::RouteThresholds thresholds;
    std::optional<router::Mode> mode_override;
    verifier::PenaltyCoefficients coefficients;
    double theta_rep = 0.60;
    int n_rec = 2;
    std::size_t thin_output_threshold = 5;
    std::optional<std::int64_t> budget_limit_micros;
    std::int64_t seed = 0;
    double temperature = 0.0;
    semantic::PriceTable prices; // applied to scripted models
    ToolsConfig tools;
    nlohmann::json providers = nlohmann::json::object();

    /// Missing fields keep their defaults. Throws Error("schema_error") or the
    /// component errors (invalid_weights, invalid_thresholds, ...).
    static RunConfig from_json(const nlohmann::json& j);
    /// Reads a config file; a relative tools.kb path resolves against the
    /// file's directory and the corpus is loaded inline.
    static RunConfig load(const std::filesystem::path& path);

    nlohmann::json to_json() const;
    /// FNV-1a of the compact serialization.
    std::string hash() const;

    executor::ExecutionConfig execution(router::Mode mode) const;
    verifier::VerifierConfig verification(router::Mode mode) const;
};

/// Built-in tools over the configured corpus, with faults applied. A fresh
/// registry per run keeps fault cursors independent.
tools::ToolRegistry build_registry(const RunConfig& config);

} // namespace ptr::pipeline
