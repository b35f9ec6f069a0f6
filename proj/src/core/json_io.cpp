#include "ptr/core/json_io.hpp"

#include "ptr/core/error.hpp"

using nlohmann::json;

namespace ptr {
namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw Error("schema_error", where + ": " + what);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) schema_fail(where, "expected object");
}

const json* field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
}

const json& required_field(const json& j, const char* name, const std::string& where) {
    const json* value = field(j, name);
    if (!value) schema_fail(where, std::string("missing field '") + name + "'");
    return *value;
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) schema_fail(where, "expected string");
    return j.get<std::string>();
}

std::vector<std::string> as_string_list(const json& j, const std::string& where) {
    if (!j.is_array()) schema_fail(where, "expected array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

KeyValueMap as_map(const json& j, const std::string& where) {
    expect_object(j, where);
    KeyValueMap out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
    return out;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) schema_fail(where, "expected number");
    return j.get<double>();
}

// Direct calls sidestep nlohmann's implicit conversion, whose noexcept
// check recurses on aggregates with defaulted comparisons under C++20.
template <typename T>
json encode(const T& value) {
    json out;
    to_json(out, value);
    return out;
}

template <typename T>
json encode_all(const std::vector<T>& values) {
    json out = json::array();
    for (const auto& value : values) out.push_back(encode(value));
    return out;
}

json map_to_json(const KeyValueMap& map) {
    json out = json::object();
    for (const auto& [key, value] : map) out[key] = value;
    return out;
}

json params_to_json(const ParamMap& params) {
    return map_to_json(params);
}

ParamMap params_from_json(const json& j, const std::string& where) {
    return as_map(j, where);
}

} // namespace

void to_json(json& j, const Task& task) {
    j = json{{"objective", task.objective}};
    if (task.data_ref) j["data_ref"] = *task.data_ref;
    if (task.context) j["context"] = map_to_json(*task.context);
}

void from_json(const json& j, Task& task) {
    expect_object(j, "task");
    task.objective = as_string(required_field(j, "objective", "task"), "task.objective");
    if (trim(task.objective).empty()) schema_fail("task.objective", "must be non-empty");
    task.data_ref.reset();
    task.context.reset();
    if (const json* d = field(j, "data_ref")) task.data_ref = as_string(*d, "task.data_ref");
    if (const json* c = field(j, "context")) task.context = as_map(*c, "task.context");
}

void to_json(json& j, const SlotDescriptor& slot) {
    j = json{{"type", to_string(slot.type)},
             {"required", slot.required},
             {"auto", slot.auto_resolvable}};
}

void from_json(const json& j, SlotDescriptor& slot) {
    expect_object(j, "slot");
    const auto type_name = as_string(required_field(j, "type", "slot"), "slot.type");
    auto type = slot_type_from_string(type_name);
    if (!type) schema_fail("slot.type", "unknown semantic type '" + type_name + "'");
    slot.type = *type;
    slot.required = j.value("required", false);
    slot.auto_resolvable = j.value("auto", false);
}

void to_json(json& j, const ToolSpec& spec) {
    json schema = json::object();
    for (const auto& [name, slot] : spec.param_schema) schema[name] = encode(slot);
    j = json{{"id", spec.id}, {"param_schema", schema}, {"output_kind", spec.output_kind}};
}

void from_json(const json& j, ToolSpec& spec) {
    expect_object(j, "tool");
    spec.id = as_string(required_field(j, "id", "tool"), "tool.id");
    spec.output_kind = j.contains("output_kind") ? as_string(j["output_kind"], "tool.output_kind")
                                                 : std::string();
    spec.param_schema.clear();
    if (const json* schema = field(j, "param_schema")) {
        expect_object(*schema, "tool.param_schema");
        for (auto it = schema->begin(); it != schema->end(); ++it) {
            spec.param_schema[it.key()] = it.value().get<SlotDescriptor>();
        }
    }
}

void to_json(json& j, const RecoveryRuleSource& rule) {
    j = json{{"on", rule.on}, {"modify", rule.modify}};
}

void from_json(const json& j, RecoveryRuleSource& rule) {
    expect_object(j, "recovery_rule");
    rule.on = as_string(required_field(j, "on", "recovery_rule"), "recovery_rule.on");
    rule.modify = j.contains("modify") ? as_string(j["modify"], "recovery_rule.modify") : "";
}

void to_json(json& j, const RuleSet& rules) {
    json autos = json::array();
    for (const auto& rule : rules.auto_rules) autos.push_back({{"id", rule.id}, {"expr", rule.expr}});
    j = json{{"auto_rules", autos},
             {"recovery_rules", encode_all(rules.recovery_rules)},
             {"diagnostics", rules.diagnostics}};
}

void from_json(const json& j, RuleSet& rules) {
    expect_object(j, "constraints");
    rules = RuleSet{};
    if (const json* autos = field(j, "auto_rules")) {
        if (!autos->is_array()) schema_fail("constraints.auto_rules", "expected array");
        for (const auto& entry : *autos) {
            expect_object(entry, "constraints.auto_rules[]");
            rules.auto_rules.push_back(
                {as_string(required_field(entry, "id", "auto_rule"), "auto_rule.id"),
                 as_string(required_field(entry, "expr", "auto_rule"), "auto_rule.expr")});
        }
    }
    if (const json* recovery = field(j, "recovery_rules")) {
        if (!recovery->is_array()) schema_fail("constraints.recovery_rules", "expected array");
        for (const auto& entry : *recovery) rules.recovery_rules.push_back(entry.get<RecoveryRuleSource>());
    }
    if (const json* diagnostics = field(j, "diagnostics")) {
        rules.diagnostics = as_string_list(*diagnostics, "constraints.diagnostics");
    }
}

void to_json(json& j, const HistorySummary& history) {
    j = json{{"prior_run_count", history.prior_run_count},
             {"prior_failure_rate", history.prior_failure_rate}};
}

void from_json(const json& j, HistorySummary& history) {
    expect_object(j, "history");
    const json& count = required_field(j, "prior_run_count", "history");
    if (!count.is_number_integer() || count.get<long long>() < 0) {
        schema_fail("history.prior_run_count", "expected non-negative integer");
    }
    history.prior_run_count = count.get<long long>();
    history.prior_failure_rate =
        as_number(required_field(j, "prior_failure_rate", "history"), "history.prior_failure_rate");
    if (history.prior_failure_rate < 0.0 || history.prior_failure_rate > 1.0) {
        schema_fail("history.prior_failure_rate", "must lie in [0,1]");
    }
}

void to_json(json& j, const Metadata& metadata) {
    j = json{{"schema", map_to_json(metadata.schema)},
             {"tool_catalog", encode_all(metadata.tool_catalog)},
             {"constraints", encode(metadata.constraints)}};
    if (metadata.history) j["history"] = encode(*metadata.history);
}

void from_json(const json& j, Metadata& metadata) {
    expect_object(j, "metadata");
    metadata = Metadata{};
    if (const json* schema = field(j, "schema")) metadata.schema = as_map(*schema, "metadata.schema");
    const json& catalog = required_field(j, "tool_catalog", "metadata");
    if (!catalog.is_array()) schema_fail("metadata.tool_catalog", "expected array");
    for (const auto& entry : catalog) metadata.tool_catalog.push_back(entry.get<ToolSpec>());
    if (const json* constraints = field(j, "constraints")) metadata.constraints = constraints->get<RuleSet>();
    if (const json* history = field(j, "history")) metadata.history = history->get<HistorySummary>();
}

json param_value_to_json(const ParamValue& value) {
    if (const auto* marker = std::get_if<AutoMarker>(&value)) return json{{"$auto", marker->rule_id}};
    if (const auto* ref = std::get_if<Placeholder>(&value)) return json{{"$ref", ref->path}};
    return std::get<Value>(value);
}

ParamValue param_value_from_json(const json& j) {
    if (j.is_object() && j.size() == 1) {
        if (j.contains("$auto")) return AutoMarker{as_string(j["$auto"], "param.$auto")};
        if (j.contains("$ref")) return Placeholder{as_string(j["$ref"], "param.$ref")};
    }
    return Value(j);
}

void to_json(json& j, const WorkflowStep& step) {
    json params = json::object();
    for (const auto& [slot, value] : step.params) params[slot] = param_value_to_json(value);
    json annotation = json::object();
    if (!step.annotation.note.empty()) annotation["note"] = step.annotation.note;
    if (!step.annotation.recovery.empty()) annotation["recovery"] = encode_all(step.annotation.recovery);
    j = json{{"tool_id", step.tool_id}, {"params", params}, {"annotation", annotation}};
}

void from_json(const json& j, WorkflowStep& step) {
    expect_object(j, "step");
    step = WorkflowStep{};
    step.tool_id = as_string(required_field(j, "tool_id", "step"), "step.tool_id");
    if (const json* params = field(j, "params")) {
        expect_object(*params, "step.params");
        for (auto it = params->begin(); it != params->end(); ++it) {
            step.params[it.key()] = param_value_from_json(it.value());
        }
    }
    if (const json* annotation = field(j, "annotation")) {
        expect_object(*annotation, "step.annotation");
        if (const json* note = field(*annotation, "note")) step.annotation.note = as_string(*note, "annotation.note");
        if (const json* recovery = field(*annotation, "recovery")) {
            if (!recovery->is_array()) schema_fail("annotation.recovery", "expected array");
            for (const auto& rule : *recovery) step.annotation.recovery.push_back(rule.get<RecoveryRuleSource>());
        }
    }
}

void to_json(json& j, const Workflow& workflow) {
    j = json{{"steps", encode_all(workflow.steps)}};
}

void from_json(const json& j, Workflow& workflow) {
    expect_object(j, "workflow");
    const json& steps = required_field(j, "steps", "workflow");
    if (!steps.is_array()) schema_fail("workflow.steps", "expected array");
    workflow.steps.clear();
    for (const auto& step : steps) workflow.steps.push_back(step.get<WorkflowStep>());
}

void to_json(json& j, const BranchRule& rule) {
    j = json{{"predicate", rule.predicate}, {"modifier", rule.modifier}, {"target_step", rule.target_step}};
}

void from_json(const json& j, BranchRule& rule) {
    expect_object(j, "branch_rule");
    rule.predicate = as_string(required_field(j, "predicate", "branch_rule"), "branch_rule.predicate");
    rule.modifier = as_string(required_field(j, "modifier", "branch_rule"), "branch_rule.modifier");
    const json& target = required_field(j, "target_step", "branch_rule");
    if (!target.is_number_integer()) schema_fail("branch_rule.target_step", "expected integer");
    rule.target_step = target.get<int>();
}

void to_json(json& j, const Profile& profile) {
    j = json{{"workflow", encode(profile.workflow)},
             {"confidence", profile.confidence},
             {"assumptions", profile.assumptions},
             {"fragile_points", profile.fragile_points},
             {"replan_conditions", profile.replan_conditions},
             {"branch_rules", encode_all(profile.branch_rules)},
             {"aux_annotations", map_to_json(profile.aux_annotations)}};
}

void from_json(const json& j, Profile& profile) {
    expect_object(j, "profile");
    profile = Profile{};
    profile.workflow = required_field(j, "workflow", "profile").get<Workflow>();
    profile.confidence = as_number(required_field(j, "confidence", "profile"), "profile.confidence");
    if (profile.confidence < 0.0 || profile.confidence > 1.0) {
        schema_fail("profile.confidence", "must lie in [0,1]");
    }
    if (const json* a = field(j, "assumptions")) profile.assumptions = as_string_list(*a, "profile.assumptions");
    if (const json* g = field(j, "fragile_points")) profile.fragile_points = as_string_list(*g, "profile.fragile_points");
    if (const json* c = field(j, "replan_conditions")) {
        profile.replan_conditions = as_string_list(*c, "profile.replan_conditions");
    }
    if (const json* b = field(j, "branch_rules")) {
        if (!b->is_array()) schema_fail("profile.branch_rules", "expected array");
        for (const auto& rule : *b) profile.branch_rules.push_back(rule.get<BranchRule>());
    }
    if (const json* aux = field(j, "aux_annotations")) profile.aux_annotations = as_map(*aux, "profile.aux_annotations");
}

void to_json(json& j, const ToolOutcome& outcome) {
    if (const auto* ok = std::get_if<ToolSuccess>(&outcome)) {
        j = json{{"ok", true}, {"value", ok->value}, {"output_size", ok->output_size}};
    } else {
        const auto& failure = std::get<ToolFailure>(outcome);
        j = json{{"ok", false}, {"error_class", to_string(failure.error)}, {"message", failure.message}};
    }
}

ToolOutcome tool_outcome_from_json(const json& j) {
    expect_object(j, "outcome");
    if (required_field(j, "ok", "outcome").get<bool>()) {
        return ToolSuccess{j.value("value", json()), j.at("output_size").get<std::size_t>()};
    }
    const auto name = as_string(required_field(j, "error_class", "outcome"), "outcome.error_class");
    auto error = error_class_from_string(name);
    if (!error) schema_fail("outcome.error_class", "unknown error class '" + name + "'");
    return ToolFailure{*error, j.value("message", std::string())};
}

void to_json(json& j, const StepEvent& event) {
    json attempts = json::array();
    for (const auto& attempt : event.attempts) {
        attempts.push_back({{"params", params_to_json(attempt.params)}, {"outcome", encode(attempt.outcome)}});
    }
    j = json{{"step", event.step},
             {"tool_id", event.tool_id},
             {"key", event.key},
             {"status", to_string(event.status)},
             {"resolved_params", params_to_json(event.resolved_params)},
             {"fired_rules", event.fired_rules},
             {"attempts", attempts},
             {"wall_ms", event.wall_ms}};
    if (event.branched_params) j["branched_params"] = params_to_json(*event.branched_params);
    if (event.failure) j["failure"] = to_string(*event.failure);
    if (event.severity) j["severity"] = to_string(*event.severity);
}

StepEvent step_event_from_json(const json& j) {
    expect_object(j, "step_event");
    StepEvent event;
    event.step = j.at("step").get<int>();
    event.tool_id = j.at("tool_id").get<std::string>();
    event.key = j.at("key").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "success") event.status = StepStatus::success;
    else if (status == "failure") event.status = StepStatus::failure;
    else if (status == "skipped") event.status = StepStatus::skipped;
    else schema_fail("step_event.status", "unknown status '" + status + "'");
    event.resolved_params = params_from_json(j.at("resolved_params"), "step_event.resolved_params");
    if (const json* b = field(j, "branched_params")) event.branched_params = params_from_json(*b, "step_event.branched_params");
    event.fired_rules = j.value("fired_rules", std::vector<int>{});
    for (const auto& attempt : j.at("attempts")) {
        event.attempts.push_back({params_from_json(attempt.at("params"), "attempt.params"),
                                  tool_outcome_from_json(attempt.at("outcome"))});
    }
    if (const json* f = field(j, "failure")) {
        auto reason = failure_reason_from_string(f->get<std::string>());
        if (!reason) schema_fail("step_event.failure", "unknown failure reason");
        event.failure = *reason;
    }
    if (const json* s = field(j, "severity")) {
        event.severity = s->get<std::string>() == "hard" ? Severity::hard : Severity::soft;
    }
    event.wall_ms = j.value("wall_ms", 0.0);
    return event;
}

void to_json(json& j, const ExecutionState& state) {
    json store = json::object();
    for (const auto& [key, value] : state.result_store) store[key] = value;
    json branches = json::array();
    for (const auto& entry : state.branch_log) {
        branches.push_back({{"step", entry.step},
                            {"rule_index", entry.rule_index},
                            {"before", params_to_json(entry.before)},
                            {"after", params_to_json(entry.after)}});
    }
    json failures = json::array();
    for (const auto& entry : state.failure_log) {
        failures.push_back({{"step", entry.step},
                            {"reason", to_string(entry.reason)},
                            {"attempt", entry.attempt},
                            {"severity", to_string(entry.severity)}});
    }
    j = json{{"result_store", store},
             {"trace", encode_all(state.trace)},
             {"branch_log", branches},
             {"failure_log", failures},
             {"env", map_to_json(state.env)}};
}

} // namespace ptr
