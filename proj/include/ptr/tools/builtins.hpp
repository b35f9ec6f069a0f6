#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ptr/tools/knowledge_base.hpp"
#include "ptr/tools/registry.hpp"

namespace ptr::tools {

inline constexpr long long kDefaultSearchLimit = 3;

/// Ranks articles by 2 x (distinct query tokens in the title) + (distinct
/// query tokens in the body), ties broken by ascending title. Success value:
/// {count, top_title, titles}.
ToolOutcome kb_search(const ParamMap& params, const KnowledgeBase& kb);

/// Case-insensitive exact title match. Success value: {title, body, links}.
ToolOutcome kb_lookup(const ParamMap& params, const KnowledgeBase& kb);

/// Evaluates a literal-only arithmetic expression. Success value: {value}.
ToolOutcome calc(const ParamMap& params);

ToolSpec kb_search_spec();
ToolSpec kb_lookup_spec();
ToolSpec calc_spec();
std::vector<ToolSpec> builtin_specs();

/// Registry with kb_search, kb_lookup and calc bound to `kb`.
ToolRegistry make_builtin_registry(std::shared_ptr<const KnowledgeBase> kb);

/// One scripted call: a failure to report, or nullopt to pass through.
using FaultStep = std::optional<ToolFailure>;

/// Returns scripted outcomes in order, then delegates to `inner`. Each
/// wrapper owns its own cursor, so build a fresh one per run.
/// Throws Error("invalid_fault_script") for an empty script.
ToolTransition fault_injecting_wrapper(ToolTransition inner, std::vector<FaultStep> script);

/// Parses ["timeout", "pass", ...] into a script.
std::vector<FaultStep> parse_fault_script(const nlohmann::json& script);

/// Applies {tool_id: script} to a registry.
void apply_faults(ToolRegistry& registry, const nlohmann::json& faults);

} // namespace ptr::tools
