#include "ptr/semantic/prompts.hpp"

#include <cstdio>
#include <sstream>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"

namespace ptr::semantic {

using nlohmann::json;

const std::string& profile_json_schema() {
    static const std::string schema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "Profile",
  "type": "object",
  "required": ["workflow", "confidence"],
  "properties": {
    "workflow": {
      "type": "object",
      "required": ["steps"],
      "properties": {
        "steps": {
          "type": "array",
          "minItems": 1,
          "items": {
            "type": "object",
            "required": ["tool_id"],
            "properties": {
              "tool_id": {"type": "string"},
              "params": {
                "type": "object",
                "additionalProperties": {
                  "description": "a literal, {\"$ref\": \"result.<key>.<field>\"} or {\"$auto\": \"<rule id>\"}"
                }
              },
              "annotation": {
                "type": "object",
                "properties": {
                  "note": {"type": "string"},
                  "recovery": {
                    "type": "array",
                    "items": {
                      "type": "object",
                      "required": ["on", "modify"],
                      "properties": {"on": {"type": "string"}, "modify": {"type": "string"}}
                    }
                  }
                }
              }
            }
          }
        }
      }
    },
    "confidence": {"type": "number", "minimum": 0, "maximum": 1},
    "assumptions": {"type": "array", "items": {"type": "string"}},
    "fragile_points": {"type": "array", "items": {"type": "string"}},
    "replan_conditions": {"type": "array", "items": {"type": "string"}},
    "branch_rules": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["predicate", "modifier", "target_step"],
        "properties": {
          "predicate": {"type": "string"},
          "modifier": {"type": "string"},
          "target_step": {"type": "integer", "minimum": 1}
        }
      }
    },
    "aux_annotations": {"type": "object"}
  }
}
)";
    return schema;
}

namespace {

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", value);
    return buffer;
}

void task_section(std::ostringstream& out, const Task& task) {
    out << "## Task\n";
    out << "Objective: " << task.objective << "\n";
    if (task.data_ref) out << "Data reference: " << *task.data_ref << "\n";
    if (task.context && !task.context->empty()) {
        json context = json::object();
        for (const auto& [key, value] : *task.context) context[key] = value;
        out << "Context: " << context.dump() << "\n";
    }
    out << "\n";
}

void catalog_section(std::ostringstream& out, const Metadata& metadata) {
    out << "## Tool catalog\n";
    for (const auto& tool : metadata.tool_catalog) {
        out << "- " << tool.id;
        if (!tool.output_kind.empty()) out << " (output: " << tool.output_kind << ")";
        out << "\n";
        for (const auto& [slot, descriptor] : tool.param_schema) {
            out << "  - " << slot << ": " << to_string(descriptor.type) << ", "
                << (descriptor.required ? "required" : "optional");
            if (descriptor.auto_resolvable) out << ", auto-resolvable";
            out << "\n";
        }
    }
    out << "\n";
}

void constraints_section(std::ostringstream& out, const Metadata& metadata) {
    const auto& rules = metadata.constraints;
    out << "## Domain constraints\n";
    if (rules.auto_rules.empty() && rules.recovery_rules.empty() && rules.diagnostics.empty()) {
        out << "None.\n\n";
        return;
    }
    if (!rules.auto_rules.empty()) {
        out << "Auto-resolution rules:\n";
        for (const auto& rule : rules.auto_rules) out << "- " << rule.id << ": " << rule.expr << "\n";
    }
    if (!rules.recovery_rules.empty()) {
        out << "Recovery rules:\n";
        for (const auto& rule : rules.recovery_rules) {
            out << "- on " << rule.on << ": " << (rule.modify.empty() ? "retry unchanged" : rule.modify) << "\n";
        }
    }
    if (!rules.diagnostics.empty()) {
        out << "Diagnostics:\n";
        for (const auto& source : rules.diagnostics) out << "- " << source << "\n";
    }
    out << "\n";
}

void format_section(std::ostringstream& out) {
    out << "## Output format\n"
        << "Step results are stored under keys <tool_id>_<k>, where k counts earlier uses of the same tool "
           "starting at 1.\n"
        << "A parameter is a literal, {\"$ref\": \"result.<key>.<field>\"} to reuse an earlier step's result, or "
           "{\"$auto\": \"<rule id>\"} to apply an auto-resolution rule.\n"
        << "Branch predicates use comparisons over result., trace., failure., branch. and env. paths, exists(...), "
           "failed(<key>), empty(<key>), not, and, or. Modifiers are `set <slot> = <expr>` statements joined by "
           "`;`.\n"
        << "Profile JSON schema:\n"
        << profile_json_schema() << "\n";
}

void trace_section(std::ostringstream& out, const ExecutionState& state) {
    out << "## Execution trace\n";
    if (state.trace.empty()) out << "No steps were executed.\n";
    for (const auto& event : state.trace) {
        out << "step " << event.step << " " << event.key << ": " << to_string(event.status);
        if (event.failure) {
            out << " (error_class: " << to_string(*event.failure);
            if (event.severity) out << ", " << to_string(*event.severity);
            out << ")";
        }
        if (!event.attempts.empty()) out << " after " << event.attempts.size() << " attempt(s)";
        out << "\n";
        for (std::size_t i = 0; i < event.attempts.size(); ++i) {
            const auto& attempt = event.attempts[i];
            json params = json::object();
            for (const auto& [slot, value] : attempt.params) params[slot] = value;
            out << "  attempt " << i + 1 << ": " << params.dump() << " -> ";
            if (const auto* ok = std::get_if<ToolSuccess>(&attempt.outcome)) {
                out << "ok, " << ok->output_size << " tokens\n";
            } else {
                const auto& failure = std::get<ToolFailure>(attempt.outcome);
                out << "error " << to_string(failure.error) << ": " << failure.message << "\n";
            }
        }
    }
    for (const auto& entry : state.branch_log) {
        out << "branch rule " << entry.rule_index << " fired at step " << entry.step << "\n";
    }
    out << "\n";
}

void verification_section(std::ostringstream& out, const verifier::VerificationObject& z, bool with_issues) {
    out << "## Verification\n";
    out << "Trust: " << format_number(z.trust) << " (" << verifier::to_string(z.status) << ")\n";
    if (with_issues) {
        out << "Issues:\n";
        if (z.issues.empty()) out << "- none\n";
        for (const auto& issue : z.issues) {
            out << "- " << issue.kind;
            if (issue.step > 0) out << " at step " << issue.step;
            out << ": " << issue.detail << "\n";
        }
    }
    out << "Caveats:\n";
    if (z.flags.empty()) out << "- none\n";
    for (const auto& flag : z.flags) out << "- " << flag << "\n";
    out << "\n";
}

} // namespace

std::string build_profile_prompt(const Task& task, const Metadata& metadata) {
    std::ostringstream out;
    out << "You are the planning stage of a tool-using agent. Write one execution profile for the task below: a "
           "complete tool workflow plus your confidence, assumptions, fragile points, replan conditions and branch "
           "rules. No tool will be called until the whole profile is fixed.\n\n";
    task_section(out, task);
    out << "## Schema descriptor\n";
    json schema = json::object();
    for (const auto& [key, value] : metadata.schema) schema[key] = value;
    out << schema.dump(2) << "\n\n";
    catalog_section(out, metadata);
    constraints_section(out, metadata);
    if (metadata.history) {
        out << "## History\n"
            << "Prior runs: " << metadata.history->prior_run_count << "\n"
            << "Prior failure rate: " << format_number(metadata.history->prior_failure_rate) << "\n\n";
    }
    format_section(out);
    out << "\nEmit only that JSON object, with no surrounding text.\n";
    return out.str();
}

std::string build_profile_retry_prompt(const Task& task, const Metadata& metadata, const std::string& previous,
                                       const std::string& diagnostic) {
    std::ostringstream out;
    out << build_profile_prompt(task, metadata);
    out << "\n## Correction\n"
        << "Your previous response could not be used: " << diagnostic << "\n"
        << "Previous response:\n"
        << previous << "\n\n"
        << "Return a corrected profile. Emit only the JSON object.\n";
    return out.str();
}

std::string build_repair_prompt(const Task& task, const Metadata& metadata, const Profile& profile,
                                const ExecutionState& state, const verifier::VerificationObject& z) {
    std::ostringstream out;
    out << "You are the repair stage of a tool-using agent. The workflow below was executed and the verifier "
           "found the evidence inadequate. Propose one patched profile that avoids the recorded failures.\n\n";
    task_section(out, task);
    catalog_section(out, metadata);
    constraints_section(out, metadata);
    out << "## Original profile\n";
    json original;
    to_json(original, profile);
    out << original.dump(2) << "\n\n";
    trace_section(out, state);
    verification_section(out, z, true);
    out << "## Instructions\n"
        << "Return a complete patched profile in the same JSON schema:\n"
        << profile_json_schema() << "\n"
        << "You are prohibited from generating a final answer. Emit only the JSON object.\n";
    return out.str();
}

std::string build_reason_prompt(const Task& task, const Metadata& metadata, const ExecutionState& state,
                                const verifier::VerificationObject& z) {
    (void)metadata;
    std::ostringstream out;
    out << "You are the reasoning stage of a tool-using agent. Answer the task using only the evidence recorded "
           "below.\n\n";
    task_section(out, task);
    out << "## Evidence\n";
    if (state.result_store.empty()) {
        out << "No evidence is available.\n";
    } else {
        for (const auto& [key, value] : state.result_store) out << "- " << key << ": " << value.dump() << "\n";
    }
    out << "\n";
    verification_section(out, z, false);
    out << "## Instructions\n"
        << "Support every claim with a stored result and cite its key. Carry every caveat listed above into your "
           "answer. Finish with one line of the form \"Answer: <answer>\".\n";
    return out.str();
}

namespace {

// End of the balanced object starting at `open`, honoring JSON strings.
std::size_t match_object(const std::string& text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string::npos;
}

} // namespace

Profile parse_profile_response(const std::string& text) {
    for (std::size_t open = text.find('{'); open != std::string::npos; open = text.find('{', open + 1)) {
        const std::size_t close = match_object(text, open);
        if (close == std::string::npos) continue;
        json candidate = json::parse(text.begin() + static_cast<std::ptrdiff_t>(open),
                                     text.begin() + static_cast<std::ptrdiff_t>(close) + 1, nullptr, false);
        if (candidate.is_discarded() || !candidate.is_object()) continue;
        try {
            Profile profile;
            from_json(candidate, profile);
            return profile;
        } catch (const Error& e) {
            throw Error("parse_error", e.what());
        } catch (const json::exception& e) {
            throw Error("parse_error", std::string("profile: ") + e.what());
        }
    }
    throw Error("parse_error", "response contains no JSON object");
}

std::string extract_final_answer(const std::string& text) {
    const std::string marker = "Answer:";
    const auto at = text.rfind(marker);
    std::string tail = at == std::string::npos ? text : text.substr(at + marker.size());
    const auto newline = tail.find('\n');
    if (at != std::string::npos && newline != std::string::npos) tail = tail.substr(0, newline);
    return trim(tail);
}

} // namespace ptr::semantic
