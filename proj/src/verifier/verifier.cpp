#include "ptr/verifier/verifier.hpp"

#include <algorithm>
#include <set>

#include "ptr/core/error.hpp"
#include "ptr/ruledsl/evaluator.hpp"
#include "ptr/ruledsl/parser.hpp"

namespace ptr::verifier {

namespace dsl = ptr::ruledsl;

void PenaltyCoefficients::validate() const {
    for (double a : {alpha_fail, alpha_empty, alpha_thin, alpha_branch, alpha_diag}) {
        if (!(a >= 0.0)) throw Error("invalid_coefficients", "penalty coefficients must be non-negative");
    }
}

namespace {

bool holds_any(const std::vector<std::string>& sources, const ExecutionState& state) {
    for (const auto& source : sources) {
        try {
            if (dsl::eval_predicate(dsl::parse_predicate(source), state)) return true;
        } catch (const Error&) {
        }
    }
    return false;
}

std::size_t success_size(const StepEvent& event) {
    if (event.attempts.empty()) return 0;
    if (const auto* ok = std::get_if<ToolSuccess>(&event.attempts.back().outcome)) return ok->output_size;
    return 0;
}

} // namespace

TraceCounters extract_counters(const ExecutionState& state, const Metadata& metadata, const VerifierConfig& config) {
    TraceCounters c;
    for (const auto& event : state.trace) {
        if (event.status != StepStatus::success) {
            ++c.n_fail;
            continue;
        }
        auto stored = state.result_store.find(event.key);
        if (stored != state.result_store.end() && is_empty_value(stored->second)) ++c.n_empty;
        if (success_size(event) < config.thin_output_threshold) ++c.n_thin;
    }
    c.n_branch = static_cast<int>(state.branch_log.size());
    c.hard_failure = std::any_of(state.failure_log.begin(), state.failure_log.end(),
                                 [](const FailureLogEntry& f) { return f.severity == Severity::hard; });

    bool contradiction = holds_any(metadata.constraints.diagnostics, state);
    for (const auto& check : config.checks) {
        if (contradiction) break;
        contradiction = check(state.result_store);
    }
    c.delta_diag = contradiction ? 1.0 : 0.0;
    return c;
}

double trust_score(const TraceCounters& c, const PenaltyCoefficients& a) {
    const double kappa = 1.0 - a.alpha_fail * c.n_fail - a.alpha_empty * c.n_empty - a.alpha_thin * c.n_thin -
                         a.alpha_branch * c.n_branch - a.alpha_diag * c.delta_diag;
    return std::clamp(kappa, 0.0, 1.0);
}

VerificationObject assess(const TraceCounters& counters, const ExecutionState& state, const Profile& profile,
                          const VerifierConfig& config) {
    VerificationObject z;
    z.counters = counters;
    z.trust = trust_score(counters, config.coefficients);

    std::set<std::string> classes;
    auto add = [&](std::string kind, int step, std::string detail) {
        classes.insert(kind);
        z.issues.push_back({std::move(kind), step, std::move(detail)});
    };

    for (const auto& event : state.trace) {
        if (event.status == StepStatus::skipped) {
            add("failed_step", event.step, event.key + " was skipped after a hard failure");
        } else if (event.status == StepStatus::failure) {
            std::string detail = event.key + " failed";
            if (event.failure) detail += " with " + std::string(to_string(*event.failure));
            if (event.severity) detail += " (" + std::string(to_string(*event.severity)) + ")";
            add("failed_step", event.step, detail);
        } else {
            auto stored = state.result_store.find(event.key);
            if (stored != state.result_store.end() && is_empty_value(stored->second)) {
                add("empty_output", event.step, event.key + " returned an empty result");
            }
            if (success_size(event) < config.thin_output_threshold) {
                add("thin_output", event.step,
                    event.key + " returned " + std::to_string(success_size(event)) + " output tokens");
            }
        }
    }
    for (const auto& entry : state.branch_log) {
        add("branch_fired", entry.step, "branch rule " + std::to_string(entry.rule_index) + " fired");
    }
    if (counters.delta_diag > 0.0) add("diagnostic", 0, "a diagnostic contradiction holds on the final state");
    if (counters.hard_failure) add("hard_failure", 0, "a hard failure stopped the workflow");
    if (config.repair_eligible) add("repair_eligible", 0, "the run was routed to repair_eligible mode");

    // Counters passed in directly (tests, replay) may exceed what the trace shows.
    if (counters.n_fail > 0 && !classes.count("failed_step")) add("failed_step", 0, "failed steps recorded");
    if (counters.n_empty > 0 && !classes.count("empty_output")) add("empty_output", 0, "empty outputs recorded");
    if (counters.n_thin > 0 && !classes.count("thin_output")) add("thin_output", 0, "thin outputs recorded");
    if (counters.n_branch > 0 && !classes.count("branch_fired")) add("branch_fired", 0, "branch firings recorded");

    static const std::vector<std::pair<std::string, std::string>> caveats = {
        {"failed_step", "Some workflow steps failed or were skipped; their evidence is missing."},
        {"empty_output", "Some tool calls returned empty results."},
        {"thin_output", "Some tool outputs were very short and may be incomplete."},
        {"branch_fired", "Branch rules changed parameters during execution."},
        {"diagnostic", "Stored results contradict a domain diagnostic."},
        {"hard_failure", "Execution stopped early on a structural failure."},
        {"repair_eligible", "The plan was judged high-risk before execution."},
    };
    for (const auto& [kind, text] : caveats) {
        if (classes.count(kind)) z.flags.push_back(text);
    }
    for (const auto& condition : profile.replan_conditions) {
        try {
            if (dsl::eval_predicate(dsl::parse_predicate(condition), state)) {
                z.flags.push_back("Replan condition holds: " + condition);
            }
        } catch (const Error&) {
        }
    }

    z.repair_recommended = z.trust < config.theta_rep || counters.hard_failure;
    if (z.trust < config.theta_rep) {
        z.status = Status::failed;
    } else {
        z.status = z.issues.empty() ? Status::ok : Status::degraded;
    }
    return z;
}

VerificationObject verify(const ExecutionState& state, const Metadata& metadata, const Profile& profile,
                          const VerifierConfig& config) {
    return assess(extract_counters(state, metadata, config), state, profile, config);
}

const char* to_string(Status status) {
    switch (status) {
    case Status::ok: return "ok";
    case Status::degraded: return "degraded";
    case Status::failed: return "failed";
    }
    return "ok";
}

nlohmann::json to_json(const TraceCounters& c) {
    return {{"n_fail", c.n_fail},         {"n_empty", c.n_empty},       {"n_thin", c.n_thin},
            {"n_branch", c.n_branch},     {"delta_diag", c.delta_diag}, {"hard_failure", c.hard_failure}};
}

nlohmann::json to_json(const VerificationObject& z) {
    auto issues = nlohmann::json::array();
    for (const auto& issue : z.issues) {
        issues.push_back({{"kind", issue.kind}, {"step", issue.step}, {"detail", issue.detail}});
    }
    return {{"trust", z.trust},
            {"status", to_string(z.status)},
            {"issues", issues},
            {"flags", z.flags},
            {"repair_recommended", z.repair_recommended},
            {"counters", to_json(z.counters)}};
}

} // namespace ptr::verifier
