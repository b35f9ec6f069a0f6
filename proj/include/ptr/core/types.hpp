#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptr {

/// Structured value used for literals, tool outputs and the result store.
using Value = nlohmann::json;
using ParamMap = std::map<std::string, Value>;
using KeyValueMap = std::map<std::string, Value>;

struct Task {
    std::string objective;
    std::optional<std::string> data_ref;
    std::optional<KeyValueMap> context;

    bool operator==(const Task&) const = default;
};

enum class SlotType { text, number, boolean, list, object, any };

struct SlotDescriptor {
    SlotType type = SlotType::text;
    bool required = false;
    bool auto_resolvable = false;

    bool operator==(const SlotDescriptor&) const = default;
};

struct ToolSpec {
    std::string id;
    std::map<std::string, SlotDescriptor> param_schema;
    std::string output_kind;

    bool operator==(const ToolSpec&) const = default;
};

/// Source form of an auto-resolution rule: `<state path> [?? <literal>]`.
struct AutoRuleSource {
    std::string id;
    std::string expr;

    bool operator==(const AutoRuleSource&) const = default;
};

/// Source form of a recovery rule: error-class matcher plus a modifier.
struct RecoveryRuleSource {
    std::string on;
    std::string modify;

    bool operator==(const RecoveryRuleSource&) const = default;
};

/// Domain constraints and execution policies. Every entry is rule-DSL source.
struct RuleSet {
    std::vector<AutoRuleSource> auto_rules;
    std::vector<RecoveryRuleSource> recovery_rules;
    /// Predicates over the final state; any that holds marks a diagnostic
    /// contradiction for the verifier.
    std::vector<std::string> diagnostics;

    bool operator==(const RuleSet&) const = default;
};

struct HistorySummary {
    long long prior_run_count = 0;
    double prior_failure_rate = 0.0;

    bool operator==(const HistorySummary&) const = default;
};

struct Metadata {
    KeyValueMap schema;
    std::vector<ToolSpec> tool_catalog;
    RuleSet constraints;
    std::optional<HistorySummary> history;

    const ToolSpec* find_tool(const std::string& id) const;

    bool operator==(const Metadata&) const = default;
};

struct AutoMarker {
    std::string rule_id;

    bool operator==(const AutoMarker&) const = default;
};

/// Reference to a stored result, written as a `result.<key>[.field...]` path.
struct Placeholder {
    std::string path;

    bool operator==(const Placeholder&) const = default;
};

using ParamValue = std::variant<Value, AutoMarker, Placeholder>;

struct Annotation {
    std::string note;
    /// Step-local recovery rules, consulted before the metadata rule set.
    std::vector<RecoveryRuleSource> recovery;

    bool operator==(const Annotation&) const = default;
};

struct WorkflowStep {
    std::string tool_id;
    std::map<std::string, ParamValue> params;
    Annotation annotation;

    bool operator==(const WorkflowStep&) const = default;
};

struct Workflow {
    std::vector<WorkflowStep> steps;

    bool operator==(const Workflow&) const = default;
};

struct BranchRule {
    std::string predicate;
    std::string modifier;
    int target_step = 1; // 1-based

    bool operator==(const BranchRule&) const = default;
};

struct Profile {
    Workflow workflow;
    double confidence = 0.0;
    std::vector<std::string> assumptions;
    std::vector<std::string> fragile_points;
    std::vector<std::string> replan_conditions;
    std::vector<BranchRule> branch_rules;
    KeyValueMap aux_annotations;

    bool operator==(const Profile&) const = default;
};

const char* to_string(SlotType type);
std::optional<SlotType> slot_type_from_string(const std::string& name);

/// Semantic type tag of a literal value, as compared against slot descriptors.
SlotType slot_type_of(const Value& value);

/// Result-store key of every step: `<tool_id>_<k>`, k the 1-based occurrence
/// of that tool within the workflow.
std::vector<std::string> step_keys(const Workflow& workflow);

std::string trim(std::string_view text);

} // namespace ptr
