#include "ptr/pipeline/pipeline.hpp"

#include <chrono>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/executor/executor.hpp"
#include "ptr/semantic/prompts.hpp"

namespace ptr::pipeline {

using nlohmann::json;
using semantic::Role;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string describe(const std::vector<AdmissibilityViolation>& violations) {
    std::string out = "profile is not admissible:";
    for (const auto& v : violations) {
        out += " [";
        if (v.step > 0) out += "step " + std::to_string(v.step) + " ";
        out += v.kind + ": " + v.detail + "]";
    }
    return out;
}

json violations_json(const std::vector<AdmissibilityViolation>& violations) {
    json out = json::array();
    for (const auto& v : violations) out.push_back({{"step", v.step}, {"kind", v.kind}, {"detail", v.detail}});
    return out;
}

json profile_json(const Profile& profile) {
    json out;
    to_json(out, profile);
    return out;
}

std::size_t count_tool_calls(const ExecutionState& state) {
    std::size_t n = 0;
    for (const auto& event : state.trace) n += event.attempts.size();
    return n;
}

void emit_steps(TraceWriter& trace, const ExecutionState& state, const char* phase) {
    for (const auto& event : state.trace) {
        json body;
        to_json(body, event);
        trace.emit("step", {{"phase", phase}, {"step_event", body}});
    }
}

struct Admission {
    std::optional<Profile> profile;
    std::vector<AdmissibilityViolation> violations;
    std::string diagnostic;
};

Admission admit(const std::string& text, const Metadata& metadata) {
    Admission out;
    Profile parsed;
    try {
        parsed = semantic::parse_profile_response(text);
    } catch (const Error& e) {
        out.diagnostic = e.what();
        return out;
    }
    auto report = check_admissibility(parsed, metadata);
    if (!report.admissible()) {
        out.violations = report.violations;
        out.diagnostic = describe(report.violations);
        return out;
    }
    out.profile = std::move(parsed);
    return out;
}

} // namespace

verifier::VerificationObject with_run_flags(verifier::VerificationObject z, const std::vector<std::string>& flags) {
    for (const auto& flag : flags) {
        if (flag == "repair_applied") {
            z.flags.push_back("A repair was applied; the evidence comes from the patched workflow.");
        } else if (flag == "repair_rejected") {
            z.flags.push_back("A proposed repair was rejected; the evidence comes from the original workflow.");
        } else if (flag == "repair_parse_failed") {
            z.flags.push_back("A repair was attempted but its output was unusable; the evidence comes from the "
                              "original workflow.");
        }
    }
    return z;
}

RepairResult apply_repair(const Task& task, const Metadata& metadata, const Profile& profile,
                          const ExecutionState& state, const verifier::VerificationObject& z,
                          const std::function<semantic::ModelResponse(const std::string& prompt)>& call) {
    RepairResult out;
    out.raw = call(semantic::build_repair_prompt(task, metadata, profile, state, z)).text;
    Profile patched;
    try {
        patched = semantic::parse_profile_response(out.raw);
    } catch (const Error& e) {
        out.flag = "repair_parse_failed";
        out.diagnostic = e.what();
        return out;
    }
    auto report = check_admissibility(patched, metadata);
    out.patched = std::move(patched);
    if (!report.admissible()) {
        out.flag = "repair_rejected";
        out.violations = report.violations;
        out.diagnostic = describe(report.violations);
    }
    return out;
}

RunReport run_ptr(const Task& task, const Metadata& metadata, const RunConfig& config, semantic::LanguageModel& model,
                  const tools::ToolRegistry& registry, TraceWriter* trace_out) {
    TraceWriter local;
    TraceWriter& trace = trace_out ? *trace_out : local;
    RunReport report;
    semantic::BudgetLedger ledger(config.budget_limit_micros);

    {
        json task_json, metadata_json;
        to_json(task_json, task);
        to_json(metadata_json, metadata);
        trace.emit("run_header", {{"task", task_json},
                                  {"metadata", metadata_json},
                                  {"config", config.to_json()},
                                  {"config_hash", config.hash()}});
    }

    auto call = [&](Role role, const std::string& prompt, int attempt) {
        semantic::ModelRequest request{role, prompt, {config.temperature, config.seed}};
        auto response = model.complete(request);
        trace.emit("model_call", {{"role", semantic::to_string(role)},
                                  {"attempt", attempt},
                                  {"prompt", prompt},
                                  {"response", response.text},
                                  {"usage",
                                   {{"input_tokens", response.usage.input_tokens},
                                    {"output_tokens", response.usage.output_tokens}}},
                                  {"cost_micros", response.cost_micros}});
        ledger.record_and_check(role, response, attempt);
        return response;
    };

    auto finish = [&]() {
        report.model_calls = ledger.stage_calls();
        report.raw_model_calls = ledger.raw_calls();
        report.ledger = ledger.summary();
        trace.emit("run_report", report.to_json());
        return report;
    };

    try {
        // Profile, with one error-correcting retry.
        auto started = Clock::now();
        auto first = call(Role::profile, semantic::build_profile_prompt(task, metadata), 1);
        auto admission = admit(first.text, metadata);
        std::string raw = first.text;
        int attempts = 1;
        if (!admission.profile) {
            auto retry = call(Role::profile,
                              semantic::build_profile_retry_prompt(task, metadata, first.text, admission.diagnostic), 2);
            raw = retry.text;
            attempts = 2;
            admission = admit(retry.text, metadata);
        }
        report.timing.profile_ms = elapsed_ms(started);
        trace.emit("profile", {{"raw", raw},
                               {"attempts", attempts},
                               {"parsed", admission.profile ? profile_json(*admission.profile) : json()},
                               {"admissible", admission.profile.has_value()},
                               {"diagnostic", admission.diagnostic},
                               {"violations", violations_json(admission.violations)}});
        if (!admission.profile) {
            report.outcome = RunOutcome::run_invalid;
            report.error = admission.diagnostic;
            trace.emit("abort", {{"reason", "run_invalid"}, {"detail", report.error}});
            return finish();
        }
        report.profile = admission.profile;
        const Profile& profile = *report.profile;
        report.workflow_steps = profile.workflow.steps.size();

        // Route.
        started = Clock::now();
        report.route = router::route_profile(metadata, profile, config.weights, config.thresholds);
        const auto routed = report.route.mode;
        if (config.mode_override) {
            report.route.mode = *config.mode_override;
            report.route.overridden = true;
        }
        const auto mode = report.route.mode;
        report.timing.route_ms = elapsed_ms(started);
        trace.emit("route", {{"components", report.route.breakdown.components.c},
                             {"total", report.route.breakdown.total},
                             {"routed_mode", router::to_string(routed)},
                             {"mode", router::to_string(mode)},
                             {"overridden", report.route.overridden}});

        // Execute and verify.
        started = Clock::now();
        auto state = executor::run_workflow(profile, metadata.constraints, config.execution(mode), registry,
                                            executor::initial_state(task));
        report.timing.execute_ms = elapsed_ms(started);
        emit_steps(trace, state, "initial");
        report.tool_calls = count_tool_calls(state);

        started = Clock::now();
        const auto verifier_config = config.verification(mode);
        auto z = verifier::verify(state, metadata, profile, verifier_config);
        report.timing.verify_ms = elapsed_ms(started);
        trace.emit("verification", {{"phase", "initial"}, {"z", verifier::to_json(z)}});
        report.initial_verification = z;

        // At most one repair.
        if (z.repair_recommended) {
            started = Clock::now();
            report.repaired = true;
            auto repair = apply_repair(task, metadata, profile, state, z, [&](const std::string& prompt) {
                return call(Role::repair, prompt, 1);
            });
            trace.emit("repair", {{"raw", repair.raw},
                                  {"patched", repair.patched ? profile_json(*repair.patched) : json()},
                                  {"admitted", repair.admitted()},
                                  {"flag", repair.flag},
                                  {"diagnostic", repair.diagnostic},
                                  {"violations", violations_json(repair.violations)}});
            if (repair.admitted()) {
                report.patched_profile = repair.patched;
                report.repair_workflow_steps = repair.patched->workflow.steps.size();
                state = executor::run_workflow(*repair.patched, metadata.constraints, config.execution(mode), registry,
                                               executor::initial_state(task));
                emit_steps(trace, state, "repair");
                report.tool_calls += count_tool_calls(state);
                z = verifier::verify(state, metadata, *repair.patched, verifier_config);
                trace.emit("verification", {{"phase", "repair"}, {"z", verifier::to_json(z)}});
                report.flags.push_back("repair_applied");
            } else {
                report.flags.push_back(repair.flag);
            }
            report.timing.repair_ms = elapsed_ms(started);
        }
        report.verification = z;
        report.final_state = state;

        // Reason over the final evidence.
        started = Clock::now();
        const auto shown = with_run_flags(z, report.flags);
        auto answer = call(Role::reason, semantic::build_reason_prompt(task, metadata, state, shown), 1);
        report.answer = answer.text;
        report.final_answer = semantic::extract_final_answer(answer.text);
        report.timing.reason_ms = elapsed_ms(started);
        trace.emit("reason", {{"answer", report.answer}, {"final_answer", report.final_answer}});
    } catch (const Error& e) {
        if (e.code() != "budget_exceeded") throw;
        report.outcome = RunOutcome::budget_exceeded;
        report.error = e.what();
        trace.emit("abort", {{"reason", "budget_exceeded"}, {"detail", report.error}});
    }
    return finish();
}

json RunReport::to_json(bool include_timing) const {
    json out;
    out["outcome"] = pipeline::to_string(outcome);
    out["error"] = error;
    out["answer"] = answer;
    out["final_answer"] = final_answer;
    out["route"] = {{"mode", router::to_string(route.mode)},
                    {"risk", route.breakdown.total},
                    {"components", route.breakdown.components.c},
                    {"overridden", route.overridden}};
    out["verification"] = verification ? verifier::to_json(*verification) : json();
    out["repaired"] = repaired;
    out["flags"] = flags;
    out["model_calls"] = model_calls;
    out["raw_model_calls"] = raw_model_calls;
    out["tool_calls"] = tool_calls;
    out["workflow_steps"] = workflow_steps;
    out["repair_workflow_steps"] = repair_workflow_steps;
    out["ledger"] = ledger;
    if (include_timing) {
        out["timing_ms"] = {{"profile", timing.profile_ms}, {"route", timing.route_ms},
                            {"execute", timing.execute_ms}, {"verify", timing.verify_ms},
                            {"repair", timing.repair_ms},   {"reason", timing.reason_ms}};
    }
    return out;
}

const char* to_string(RunOutcome outcome) {
    switch (outcome) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::run_invalid: return "run_invalid";
    case RunOutcome::budget_exceeded: return "budget_exceeded";
    }
    return "completed";
}

} // namespace ptr::pipeline
