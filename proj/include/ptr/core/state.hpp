#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ptr/core/types.hpp"

namespace ptr {

/// Failure classes a tool transition may report.
enum class ErrorClass { timeout, not_found, empty_result, rate_limited, invalid_params };

/// Why a step ended without a stored result: a tool error class or one of the
/// structural reasons raised by the executor itself.
enum class FailureReason {
    timeout,
    not_found,
    empty_result,
    rate_limited,
    invalid_params,
    unresolved_auto,
    missing_placeholder,
    unknown_tool,
    modifier_error,
};

enum class Severity { soft, hard };
enum class StepStatus { success, failure, skipped };

struct ToolSuccess {
    Value value;
    std::size_t output_size = 0;

    bool operator==(const ToolSuccess&) const = default;
};

struct ToolFailure {
    ErrorClass error = ErrorClass::invalid_params;
    std::string message;

    bool operator==(const ToolFailure&) const = default;
};

using ToolOutcome = std::variant<ToolSuccess, ToolFailure>;

/// Success outcome with output_size set to the whitespace-token count of
/// `value` serialized on one line with ", " and ": " separators.
ToolOutcome tool_success(Value value);
ToolOutcome tool_failure(ErrorClass error, std::string message);

inline bool succeeded(const ToolOutcome& outcome) {
    return std::holds_alternative<ToolSuccess>(outcome);
}

std::size_t output_size_of(const Value& value);

/// Empty collection, empty string, null, or an object reporting `count == 0`.
bool is_empty_value(const Value& value);

struct Attempt {
    ParamMap params;
    ToolOutcome outcome;

    bool operator==(const Attempt&) const = default;
};

struct StepEvent {
    int step = 0; // 1-based
    std::string tool_id;
    std::string key;
    StepStatus status = StepStatus::skipped;
    ParamMap resolved_params;
    std::optional<ParamMap> branched_params;
    std::vector<int> fired_rules;
    std::vector<Attempt> attempts;
    std::optional<FailureReason> failure;
    std::optional<Severity> severity;
    double wall_ms = 0.0;

    /// Equality ignores wall_ms.
    bool operator==(const StepEvent& other) const;
};

struct BranchLogEntry {
    int step = 0;
    int rule_index = 0;
    ParamMap before;
    ParamMap after;

    bool operator==(const BranchLogEntry&) const = default;
};

struct FailureLogEntry {
    int step = 0;
    FailureReason reason = FailureReason::invalid_params;
    int attempt = 0; // 1-based; 0 when no tool call was made
    Severity severity = Severity::soft;

    bool operator==(const FailureLogEntry&) const = default;
};

struct ExecutionState {
    std::map<std::string, Value> result_store;
    std::vector<StepEvent> trace;
    std::vector<BranchLogEntry> branch_log;
    std::vector<FailureLogEntry> failure_log;
    KeyValueMap env;

    const StepEvent* find_step(const std::string& key) const;

    bool operator==(const ExecutionState&) const = default;
};

const char* to_string(ErrorClass error);
const char* to_string(FailureReason reason);
const char* to_string(Severity severity);
const char* to_string(StepStatus status);
std::optional<ErrorClass> error_class_from_string(const std::string& name);
std::optional<FailureReason> failure_reason_from_string(const std::string& name);
std::optional<FailureReason> as_failure_reason(ErrorClass error);

} // namespace ptr
