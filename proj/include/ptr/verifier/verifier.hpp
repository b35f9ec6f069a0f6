#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"

namespace ptr::verifier {

struct TraceCounters {
    int n_fail = 0;
    int n_empty = 0;
    int n_thin = 0;
    int n_branch = 0;
    double delta_diag = 0.0;
    bool hard_failure = false;

    bool operator==(const TraceCounters&) const = default;
};

/// Non-negative penalty weights; validate() throws Error("invalid_coefficients").
struct PenaltyCoefficients {
    double alpha_fail = 0.25;
    double alpha_empty = 0.10;
    double alpha_thin = 0.05;
    double alpha_branch = 0.05;
    double alpha_diag = 0.15;

    void validate() const;
};

enum class Status { ok, degraded, failed };

struct Issue {
    std::string kind; // failed_step, empty_output, thin_output, branch_fired, diagnostic,
                      // hard_failure, repair_eligible
    int step = 0;     // 0 when not tied to a step
    std::string detail;

    bool operator==(const Issue&) const = default;
};

struct VerificationObject {
    double trust = 1.0;
    Status status = Status::ok;
    std::vector<Issue> issues;
    std::vector<std::string> flags;
    bool repair_recommended = false;
    TraceCounters counters;

    bool operator==(const VerificationObject&) const = default;
};

/// Extra contradiction check over the result store; returning true sets
/// delta_diag to 1. None are registered by default.
using DiagnosticCheck = std::function<bool(const std::map<std::string, Value>& result_store)>;

struct VerifierConfig {
    PenaltyCoefficients coefficients;
    double theta_rep = 0.60;
    std::size_t thin_output_threshold = 5;
    std::vector<DiagnosticCheck> checks;
    /// Set when the run was routed repair_eligible; surfaces as an issue only.
    bool repair_eligible = false;
};

/// Counters from the final state. Diagnostic predicates from the metadata
/// rule set are evaluated against `state`; any that holds sets delta_diag.
TraceCounters extract_counters(const ExecutionState& state, const Metadata& metadata, const VerifierConfig& config);

/// max{0, 1 - sum of alpha * counter}.
double trust_score(const TraceCounters& counters, const PenaltyCoefficients& coefficients);

VerificationObject verify(const ExecutionState& state, const Metadata& metadata, const Profile& profile,
                          const VerifierConfig& config);

/// Assembles z from counters alone; verify() calls this after extraction.
VerificationObject assess(const TraceCounters& counters, const ExecutionState& state, const Profile& profile,
                          const VerifierConfig& config);

const char* to_string(Status status);
nlohmann::json to_json(const TraceCounters& counters);
nlohmann::json to_json(const VerificationObject& z);

} // namespace ptr::verifier
