#pragma once

#include <map>
#include <optional>

#include "ptr/core/error.hpp"
#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"
#include "ptr/ruledsl/ast.hpp"

namespace ptr::ruledsl {

/// Resolves a path against the state views:
///   result.<key>...   stored tool outputs
///   env.<name>...     auxiliary environment
///   trace.count, trace.<key>.{step,tool_id,status,attempts,failure,output_size}
///   failure.count, failure.<key>.{reason,attempts,severity}
///   branch.count, branch.<key>.{fired,rules}
/// Returns nullopt for any missing segment.
std::optional<Value> lookup_path(const StatePath& path, const ExecutionState& state);

/// Total on well-formed ASTs: missing paths make comparisons and exists() false.
bool eval_predicate(const Predicate& predicate, const ExecutionState& state);

/// Evaluates an expression. Slot references read `slots`; path references need
/// a state. Throws Error with code modifier_type_error, unresolved_path or
/// unknown_slot.
Value eval_expression(const Expr& expr, const ParamMap& slots, const ExecutionState* state);

/// Applies assignments in order to a copy of `params`. With a schema, assigned
/// slots must be declared there; without one they must already be present.
ParamMap apply_modifier(const Modifier& modifier, const ParamMap& params,
                        const ExecutionState& state,
                        const std::map<std::string, SlotDescriptor>* schema = nullptr);

/// Extracted value, else the fallback, else Error("unresolved_auto").
Value eval_auto_rule(const AutoRule& rule, const ExecutionState& state);

} // namespace ptr::ruledsl
