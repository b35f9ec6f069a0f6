#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"
#include "ptr/router/risk.hpp"
#include "ptr/ruledsl/ast.hpp"
#include "ptr/tools/registry.hpp"

namespace ptr::executor {

struct ExecutionConfig {
    int n_rec = 2;
    std::size_t thin_output_threshold = 5;
    router::Mode mode = router::Mode::pure;
};

/// Parsed form of the metadata rule set. Throws ruledsl::ParseError on bad
/// sources, which admission normally rules out beforehand.
struct CompiledRuleSet {
    std::map<std::string, ruledsl::AutoRule> auto_rules;
    std::vector<ruledsl::RecoveryRule> recovery_rules;
    std::vector<ruledsl::Predicate> diagnostics;

    static CompiledRuleSet compile(const RuleSet& rules);
};

struct CompiledBranchRule {
    int index = 0; // position in the profile's branch_rules
    int target_step = 1;
    ruledsl::Predicate predicate;
    ruledsl::Modifier modifier;
};

std::vector<CompiledBranchRule> compile_branch_rules(const std::vector<BranchRule>& rules);

struct ResolveResult {
    ParamMap params;
    std::optional<FailureReason> failure;
    std::string message;
};

/// Replaces placeholders with stored values and auto markers with their
/// rule's value. A missing reference stops resolution with a hard reason.
ResolveResult resolve_step(const std::map<std::string, ParamValue>& params, const CompiledRuleSet& rules,
                           const ExecutionState& state);

struct BranchResult {
    ParamMap params;
    std::vector<int> fired;
    std::optional<std::string> error; // modifier failure message
};

/// Identity in pure mode. Otherwise every rule targeting `step` whose
/// predicate holds on the pre-branch state fires, in listed order; each
/// firing is appended to the branch log.
BranchResult branch_step(const ParamMap& params, int step, const std::vector<CompiledBranchRule>& rules,
                         router::Mode mode, ExecutionState& state, const ToolSpec* spec);

/// Hard classification for a failure reason after retries are exhausted.
Severity classify(FailureReason reason);

/// Runs resolve, branch, invoke, recover and store for one step. Appends
/// exactly one StepEvent; returns true when the step failed hard.
bool execute_step(const WorkflowStep& step, int index, const std::string& key, const CompiledRuleSet& rules,
                  const std::vector<CompiledBranchRule>& branch_rules, const ExecutionConfig& config,
                  const tools::ToolRegistry& registry, ExecutionState& state);

/// Folds execute_step over the workflow. After a hard failure the remaining
/// steps are recorded as skipped.
ExecutionState run_workflow(const Profile& profile, const RuleSet& rules, const ExecutionConfig& config,
                            const tools::ToolRegistry& registry, ExecutionState initial);

/// Fresh s0 with env taken from the task context.
ExecutionState initial_state(const Task& task);

} // namespace ptr::executor
