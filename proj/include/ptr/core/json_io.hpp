#pragma once

#include <nlohmann/json.hpp>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"

// JSON mapping for the shared domain types. Field names follow the type
// fields in lowercase snake case; see docs/schemas.md.
//
// from_json throws ptr::Error("schema_error", ...) with a path-qualified
// message on any structural problem.

namespace ptr {

void to_json(nlohmann::json& j, const Task& task);
void from_json(const nlohmann::json& j, Task& task);

void to_json(nlohmann::json& j, const SlotDescriptor& slot);
void from_json(const nlohmann::json& j, SlotDescriptor& slot);
void to_json(nlohmann::json& j, const ToolSpec& spec);
void from_json(const nlohmann::json& j, ToolSpec& spec);
void to_json(nlohmann::json& j, const RuleSet& rules);
void from_json(const nlohmann::json& j, RuleSet& rules);
void to_json(nlohmann::json& j, const HistorySummary& history);
void from_json(const nlohmann::json& j, HistorySummary& history);
void to_json(nlohmann::json& j, const Metadata& metadata);
void from_json(const nlohmann::json& j, Metadata& metadata);

void to_json(nlohmann::json& j, const RecoveryRuleSource& rule);
void from_json(const nlohmann::json& j, RecoveryRuleSource& rule);
void to_json(nlohmann::json& j, const WorkflowStep& step);
void from_json(const nlohmann::json& j, WorkflowStep& step);
void to_json(nlohmann::json& j, const Workflow& workflow);
void from_json(const nlohmann::json& j, Workflow& workflow);
void to_json(nlohmann::json& j, const BranchRule& rule);
void from_json(const nlohmann::json& j, BranchRule& rule);
void to_json(nlohmann::json& j, const Profile& profile);
void from_json(const nlohmann::json& j, Profile& profile);

/// `{"$auto": id}` and `{"$ref": path}` encode markers; anything else is a literal.
nlohmann::json param_value_to_json(const ParamValue& value);
ParamValue param_value_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const ToolOutcome& outcome);
ToolOutcome tool_outcome_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const StepEvent& event);
StepEvent step_event_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const ExecutionState& state);

} // namespace ptr
