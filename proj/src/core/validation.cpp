#include "ptr/core/validation.hpp"

#include <algorithm>
#include <set>

#include "ptr/ruledsl/parser.hpp"

namespace ptr {

namespace dsl = ptr::ruledsl;

std::vector<ValidationIssue> validate_metadata(const Metadata& metadata) {
    std::vector<ValidationIssue> issues;
    std::set<std::string> seen;
    for (const auto& tool : metadata.tool_catalog) {
        if (trim(tool.id).empty()) {
            issues.push_back({"empty_tool_id", "tool catalog entry with empty id"});
            continue;
        }
        if (!seen.insert(tool.id).second) {
            issues.push_back({"duplicate_tool_id", "tool id '" + tool.id + "' appears more than once"});
        }
    }

    std::set<std::string> rule_ids;
    for (const auto& rule : metadata.constraints.auto_rules) {
        if (!rule_ids.insert(rule.id).second) {
            issues.push_back({"duplicate_auto_rule", "auto rule id '" + rule.id + "' appears more than once"});
        }
        try {
            dsl::parse_auto_rule(rule.id, rule.expr);
        } catch (const dsl::ParseError& e) {
            issues.push_back({"bad_rule_syntax", "auto rule '" + rule.id + "': " + e.what()});
        }
    }
    for (const auto& rule : metadata.constraints.recovery_rules) {
        try {
            dsl::parse_recovery_rule(rule.on, rule.modify);
        } catch (const dsl::ParseError& e) {
            issues.push_back({"bad_rule_syntax", "recovery rule on '" + rule.on + "': " + e.what()});
        }
    }
    for (const auto& source : metadata.constraints.diagnostics) {
        try {
            dsl::parse_predicate(source);
        } catch (const dsl::ParseError& e) {
            issues.push_back({"bad_rule_syntax", "diagnostic '" + source + "': " + e.what()});
        }
    }
    return issues;
}

bool AdmissibilityReport::has(const std::string& kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const AdmissibilityViolation& v) { return v.kind == kind; });
}

namespace {

void check_placeholder(const Placeholder& ref, int step, const std::vector<std::string>& keys,
                       std::vector<AdmissibilityViolation>& out) {
    dsl::StatePath path;
    try {
        path = dsl::parse_path(ref.path);
    } catch (const dsl::ParseError& e) {
        out.push_back({step, "bad_placeholder", "'" + ref.path + "': " + e.what()});
        return;
    }
    if (path.root != dsl::PathRoot::result || path.segments.empty()) {
        out.push_back({step, "bad_placeholder", "'" + ref.path + "' must reference result.<step key>"});
        return;
    }
    const auto& key = path.segments.front();
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
        out.push_back({step, "bad_placeholder", "'" + ref.path + "' references unknown step key '" + key + "'"});
        return;
    }
    const int target = static_cast<int>(it - keys.begin()) + 1;
    if (target >= step) {
        out.push_back({step, "forward_placeholder",
                       "'" + ref.path + "' references step " + std::to_string(target) + ", not an earlier step"});
    }
}

} // namespace

AdmissibilityReport check_admissibility(const Profile& profile, const Metadata& metadata) {
    std::vector<AdmissibilityViolation> out;
    const auto& steps = profile.workflow.steps;
    const auto keys = step_keys(profile.workflow);

    if (!(profile.confidence >= 0.0 && profile.confidence <= 1.0)) {
        out.push_back({0, "confidence_out_of_range", "confidence must lie in [0,1]"});
    }
    if (steps.empty()) out.push_back({0, "empty_workflow", "workflow has no steps"});

    std::set<std::string> auto_rule_ids;
    for (const auto& rule : metadata.constraints.auto_rules) auto_rule_ids.insert(rule.id);

    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int step = static_cast<int>(i) + 1;
        const auto& ws = steps[i];
        const ToolSpec* spec = metadata.find_tool(ws.tool_id);
        if (!spec) {
            out.push_back({step, "unknown_tool", "tool '" + ws.tool_id + "' is not in the catalog"});
            continue;
        }
        for (const auto& [slot, value] : ws.params) {
            auto declared = spec->param_schema.find(slot);
            if (declared == spec->param_schema.end()) {
                out.push_back({step, "unknown_param", "slot '" + slot + "' is not declared by '" + spec->id + "'"});
                continue;
            }
            const SlotDescriptor& descriptor = declared->second;
            if (const auto* literal = std::get_if<Value>(&value)) {
                if (descriptor.type != SlotType::any && slot_type_of(*literal) != descriptor.type) {
                    out.push_back({step, "type_mismatch",
                                   "slot '" + slot + "' expects " + to_string(descriptor.type) + ", got " +
                                       to_string(slot_type_of(*literal))});
                }
            } else if (const auto* marker = std::get_if<AutoMarker>(&value)) {
                if (!descriptor.auto_resolvable) {
                    out.push_back({step, "auto_not_allowed", "slot '" + slot + "' is not auto-resolvable"});
                }
                if (!auto_rule_ids.count(marker->rule_id)) {
                    out.push_back({step, "unknown_auto_rule", "auto rule '" + marker->rule_id + "' is not defined"});
                }
            } else {
                check_placeholder(std::get<Placeholder>(value), step, keys, out);
            }
        }
        for (const auto& [slot, descriptor] : spec->param_schema) {
            if (descriptor.required && !ws.params.count(slot)) {
                out.push_back({step, "missing_required_param", "required slot '" + slot + "' is missing"});
            }
        }
        for (const auto& rule : ws.annotation.recovery) {
            try {
                auto parsed = dsl::parse_recovery_rule(rule.on, rule.modify);
                for (const auto& assignment : parsed.modifier.assignments) {
                    if (!spec->param_schema.count(assignment.slot)) {
                        out.push_back({step, "bad_recovery_rule", "recovery rule assigns undeclared slot '" +
                                                                      assignment.slot + "'"});
                    }
                }
            } catch (const dsl::ParseError& e) {
                out.push_back({step, "bad_recovery_rule", e.what()});
            }
        }
    }

    for (std::size_t r = 0; r < profile.branch_rules.size(); ++r) {
        const auto& rule = profile.branch_rules[r];
        const std::string label = "branch rule " + std::to_string(r);
        if (rule.target_step < 1 || rule.target_step > static_cast<int>(steps.size())) {
            out.push_back({0, "bad_branch_target", label + " targets missing step " + std::to_string(rule.target_step)});
            continue;
        }
        try {
            dsl::parse_predicate(rule.predicate);
        } catch (const dsl::ParseError& e) {
            out.push_back({rule.target_step, "unevaluable_branch_rule", label + " predicate: " + e.what()});
        }
        try {
            auto modifier = dsl::parse_modifier(rule.modifier);
            const ToolSpec* spec = metadata.find_tool(steps[rule.target_step - 1].tool_id);
            for (const auto& assignment : modifier.assignments) {
                if (spec && !spec->param_schema.count(assignment.slot)) {
                    out.push_back({rule.target_step, "unevaluable_branch_rule",
                                   label + " assigns undeclared slot '" + assignment.slot + "'"});
                }
            }
        } catch (const dsl::ParseError& e) {
            out.push_back({rule.target_step, "unevaluable_branch_rule", label + " modifier: " + e.what()});
        }
    }

    for (const auto& condition : profile.replan_conditions) {
        try {
            dsl::parse_predicate(condition);
        } catch (const dsl::ParseError& e) {
            out.push_back({0, "unevaluable_replan_condition", "'" + condition + "': " + e.what()});
        }
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const AdmissibilityViolation& a, const AdmissibilityViolation& b) { return a.step < b.step; });
    return AdmissibilityReport{std::move(out)};
}

} // namespace ptr
