#include "ptr/executor/executor.hpp"

#include <chrono>

#include "ptr/core/error.hpp"
#include "ptr/ruledsl/evaluator.hpp"
#include "ptr/ruledsl/parser.hpp"

namespace ptr::executor {

namespace dsl = ptr::ruledsl;

CompiledRuleSet CompiledRuleSet::compile(const RuleSet& rules) {
    CompiledRuleSet out;
    for (const auto& rule : rules.auto_rules) {
        out.auto_rules.insert_or_assign(rule.id, dsl::parse_auto_rule(rule.id, rule.expr));
    }
    for (const auto& rule : rules.recovery_rules) {
        out.recovery_rules.push_back(dsl::parse_recovery_rule(rule.on, rule.modify));
    }
    for (const auto& source : rules.diagnostics) out.diagnostics.push_back(dsl::parse_predicate(source));
    return out;
}

std::vector<CompiledBranchRule> compile_branch_rules(const std::vector<BranchRule>& rules) {
    std::vector<CompiledBranchRule> out;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        out.push_back({static_cast<int>(i), rules[i].target_step, dsl::parse_predicate(rules[i].predicate),
                       dsl::parse_modifier(rules[i].modifier)});
    }
    return out;
}

ResolveResult resolve_step(const std::map<std::string, ParamValue>& params, const CompiledRuleSet& rules,
                           const ExecutionState& state) {
    ResolveResult out;
    for (const auto& [slot, value] : params) {
        if (const auto* literal = std::get_if<Value>(&value)) {
            out.params[slot] = *literal;
        } else if (const auto* marker = std::get_if<AutoMarker>(&value)) {
            auto rule = rules.auto_rules.find(marker->rule_id);
            if (rule == rules.auto_rules.end()) {
                out.failure = FailureReason::unresolved_auto;
                out.message = "slot '" + slot + "': auto rule '" + marker->rule_id + "' is not defined";
                return out;
            }
            try {
                out.params[slot] = dsl::eval_auto_rule(rule->second, state);
            } catch (const Error& e) {
                out.failure = FailureReason::unresolved_auto;
                out.message = "slot '" + slot + "': " + e.what();
                return out;
            }
        } else {
            const auto& ref = std::get<Placeholder>(value);
            std::optional<Value> resolved;
            try {
                auto path = dsl::parse_path(ref.path);
                if (path.root == dsl::PathRoot::result) resolved = dsl::lookup_path(path, state);
            } catch (const Error&) {
            }
            if (!resolved) {
                out.failure = FailureReason::missing_placeholder;
                out.message = "slot '" + slot + "': '" + ref.path + "' is not in the result store";
                return out;
            }
            out.params[slot] = std::move(*resolved);
        }
    }
    return out;
}

BranchResult branch_step(const ParamMap& params, int step, const std::vector<CompiledBranchRule>& rules,
                         router::Mode mode, ExecutionState& state, const ToolSpec* spec) {
    BranchResult out{params, {}, std::nullopt};
    if (mode == router::Mode::pure) return out;

    std::vector<const CompiledBranchRule*> firing;
    for (const auto& rule : rules) {
        if (rule.target_step == step && dsl::eval_predicate(rule.predicate, state)) firing.push_back(&rule);
    }
    for (const auto* rule : firing) {
        ParamMap before = out.params;
        try {
            out.params = dsl::apply_modifier(rule->modifier, out.params, state, spec ? &spec->param_schema : nullptr);
        } catch (const Error& e) {
            out.error = "branch rule " + std::to_string(rule->index) + ": " + e.what();
            return out;
        }
        out.fired.push_back(rule->index);
        state.branch_log.push_back({step, rule->index, std::move(before), out.params});
    }
    return out;
}

Severity classify(FailureReason reason) {
    switch (reason) {
    case FailureReason::timeout:
    case FailureReason::not_found:
    case FailureReason::empty_result:
    case FailureReason::rate_limited: return Severity::soft;
    default: return Severity::hard;
    }
}

namespace {

const dsl::RecoveryRule* find_recovery(ErrorClass error, const std::vector<dsl::RecoveryRule>& local,
                                       const std::vector<dsl::RecoveryRule>& global) {
    for (const auto& rule : local) {
        if (rule.matches(error)) return &rule;
    }
    for (const auto& rule : global) {
        if (rule.matches(error)) return &rule;
    }
    return nullptr;
}

void fail_step(StepEvent& event, ExecutionState& state, FailureReason reason, int attempt) {
    event.status = StepStatus::failure;
    event.failure = reason;
    event.severity = classify(reason);
    state.failure_log.push_back({event.step, reason, attempt, *event.severity});
}

} // namespace

bool execute_step(const WorkflowStep& step, int index, const std::string& key, const CompiledRuleSet& rules,
                  const std::vector<CompiledBranchRule>& branch_rules, const ExecutionConfig& config,
                  const tools::ToolRegistry& registry, ExecutionState& state) {
    const auto started = std::chrono::steady_clock::now();
    StepEvent event;
    event.step = index;
    event.tool_id = step.tool_id;
    event.key = key;

    auto finish = [&]() {
        event.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        const bool hard = event.severity == Severity::hard;
        state.trace.push_back(std::move(event));
        return hard;
    };

    const ToolSpec* spec = registry.spec(step.tool_id);
    if (!spec) {
        fail_step(event, state, FailureReason::unknown_tool, 0);
        return finish();
    }

    auto resolved = resolve_step(step.params, rules, state);
    event.resolved_params = resolved.params;
    if (resolved.failure) {
        fail_step(event, state, *resolved.failure, 0);
        return finish();
    }

    auto branched = branch_step(resolved.params, index, branch_rules, config.mode, state, spec);
    event.fired_rules = branched.fired;
    if (!branched.fired.empty() && branched.params != resolved.params) event.branched_params = branched.params;
    if (branched.error) {
        fail_step(event, state, FailureReason::modifier_error, 0);
        return finish();
    }

    const ParamMap& base = branched.params;
    ToolOutcome outcome = registry.invoke(step.tool_id, base, state);
    event.attempts.push_back({base, outcome});

    if (!succeeded(outcome)) {
        const ErrorClass first_error = std::get<ToolFailure>(outcome).error;
        std::vector<dsl::RecoveryRule> local;
        for (const auto& source : step.annotation.recovery) {
            try {
                local.push_back(dsl::parse_recovery_rule(source.on, source.modify));
            } catch (const Error&) {
            }
        }
        const dsl::RecoveryRule* rule = find_recovery(first_error, local, rules.recovery_rules);
        for (int k = 1; rule && k <= config.n_rec && !succeeded(outcome); ++k) {
            const auto error = std::get<ToolFailure>(outcome).error;
            state.failure_log.push_back({index, *as_failure_reason(error), k, Severity::soft});
            ParamMap retry;
            try {
                retry = dsl::apply_modifier(rule->modifier, base, state, &spec->param_schema);
            } catch (const Error&) {
                fail_step(event, state, FailureReason::modifier_error, k);
                return finish();
            }
            outcome = registry.invoke(step.tool_id, retry, state);
            event.attempts.push_back({std::move(retry), outcome});
        }
    }

    if (const auto* ok = std::get_if<ToolSuccess>(&outcome)) {
        event.status = StepStatus::success;
        state.result_store.emplace(key, ok->value);
    } else {
        const auto error = std::get<ToolFailure>(outcome).error;
        fail_step(event, state, *as_failure_reason(error), static_cast<int>(event.attempts.size()));
    }
    return finish();
}

ExecutionState run_workflow(const Profile& profile, const RuleSet& rules, const ExecutionConfig& config,
                            const tools::ToolRegistry& registry, ExecutionState state) {
    if (config.n_rec < 0) throw Error("invalid_config", "n_rec must be non-negative");
    const auto compiled = CompiledRuleSet::compile(rules);
    const auto branch_rules = compile_branch_rules(profile.branch_rules);
    const auto keys = step_keys(profile.workflow);
    const auto& steps = profile.workflow.steps;

    bool halted = false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int index = static_cast<int>(i) + 1;
        if (halted) {
            StepEvent skipped;
            skipped.step = index;
            skipped.tool_id = steps[i].tool_id;
            skipped.key = keys[i];
            skipped.status = StepStatus::skipped;
            state.trace.push_back(std::move(skipped));
            continue;
        }
        halted = execute_step(steps[i], index, keys[i], compiled, branch_rules, config, registry, state);
    }
    return state;
}

ExecutionState initial_state(const Task& task) {
    ExecutionState state;
    if (task.context) state.env = *task.context;
    return state;
}

} // namespace ptr::executor
