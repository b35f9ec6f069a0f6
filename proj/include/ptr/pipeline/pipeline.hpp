#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"
#include "ptr/core/validation.hpp"
#include "ptr/pipeline/config.hpp"
#include "ptr/pipeline/trace.hpp"
#include "ptr/router/risk.hpp"
#include "ptr/semantic/model.hpp"
#include "ptr/tools/registry.hpp"
#include "ptr/verifier/verifier.hpp"

namespace ptr::pipeline {

enum class RunOutcome { completed, run_invalid, budget_exceeded };

struct StageTiming {
    double profile_ms = 0.0;
    double route_ms = 0.0;
    double execute_ms = 0.0;
    double verify_ms = 0.0;
    double repair_ms = 0.0;
    double reason_ms = 0.0;
};

struct RunReport {
    RunOutcome outcome = RunOutcome::completed;
    std::string error;        // abort reason when not completed
    std::string answer;       // raw reasoning output
    std::string final_answer; // text after the last "Answer:" marker
    std::optional<Profile> profile;
    std::optional<Profile> patched_profile;
    router::RouteMode route;
    std::optional<verifier::VerificationObject> initial_verification;
    std::optional<verifier::VerificationObject> verification; // final one
    ExecutionState final_state;
    bool repaired = false; // a repair call was made
    std::vector<std::string> flags;
    std::size_t model_calls = 0; // stage level
    std::size_t raw_model_calls = 0;
    std::size_t tool_calls = 0;
    std::size_t workflow_steps = 0;       // L
    std::size_t repair_workflow_steps = 0; // L#
    nlohmann::json ledger;
    StageTiming timing;

    nlohmann::json to_json(bool include_timing = true) const;
};

struct RepairResult {
    std::string raw;
    std::optional<Profile> patched;
    std::vector<AdmissibilityViolation> violations;
    /// "repair_parse_failed", "repair_rejected" or empty when admitted.
    std::string flag;
    std::string diagnostic;

    bool admitted() const { return patched.has_value() && flag.empty(); }
};

/// Builds the repair prompt, makes the single repair call, and re-admits the
/// patch. Parse failures get no retry. The ledger check may throw
/// Error("budget_exceeded").
RepairResult apply_repair(const Task& task, const Metadata& metadata, const Profile& profile,
                          const ExecutionState& state, const verifier::VerificationObject& z,
                          const std::function<semantic::ModelResponse(const std::string& prompt)>& call);

/// Full run: profile, route, execute, verify, optional single repair, reason.
/// run_invalid and budget_exceeded end the run early with a partial report;
/// other errors (script_exhausted, role_mismatch, provider_error) propagate.
RunReport run_ptr(const Task& task, const Metadata& metadata, const RunConfig& config, semantic::LanguageModel& model,
                  const tools::ToolRegistry& registry, TraceWriter* trace = nullptr);

using RegistryFactory = std::function<tools::ToolRegistry(const RunConfig&)>;

struct ReplayReport {
    bool match = true;
    std::string divergence; // first mismatch, empty on match
    std::size_t stages_checked = 0;
};

/// Recomputes routing, execution, verification and the repair/reason prompts
/// from the recorded header and profiles; compares them with the recorded
/// events, ignoring wall-clock fields. Throws Error("schema_mismatch") for
/// an unsupported schema version.
ReplayReport replay_trace(const std::vector<nlohmann::json>& events, const RegistryFactory& factory = build_registry);

/// z with one reader-facing caveat appended per run flag (repair_applied,
/// repair_rejected, repair_parse_failed); this is what the reasoner sees.
verifier::VerificationObject with_run_flags(verifier::VerificationObject z, const std::vector<std::string>& flags);

const char* to_string(RunOutcome outcome);

} // namespace ptr::pipeline
