#include "ptr/core/state.hpp"

#include <cctype>

namespace ptr {

namespace {

// One-line serialization with ", " and ": " separators.
void spaced_dump(const Value& value, std::string& out) {
    if (value.is_object()) {
        out += '{';
        bool first = true;
        for (auto it = value.begin(); it != value.end(); ++it) {
            if (!first) out += ", ";
            out += Value(it.key()).dump();
            out += ": ";
            spaced_dump(it.value(), out);
            first = false;
        }
        out += '}';
    } else if (value.is_array()) {
        out += '[';
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (i) out += ", ";
            spaced_dump(value[i], out);
        }
        out += ']';
    } else {
        out += value.dump();
    }
}

} // namespace

std::size_t output_size_of(const Value& value) {
    std::string text;
    spaced_dump(value, text);
    std::size_t tokens = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++tokens;
        in_token = !space;
    }
    return tokens;
}

ToolOutcome tool_success(Value value) {
    const auto size = output_size_of(value);
    return ToolSuccess{std::move(value), size};
}

ToolOutcome tool_failure(ErrorClass error, std::string message) {
    return ToolFailure{error, std::move(message)};
}

bool is_empty_value(const Value& value) {
    if (value.is_null()) return true;
    if (value.is_string()) return value.get_ref<const std::string&>().empty();
    if (value.is_array()) return value.empty();
    if (value.is_object()) {
        if (value.empty()) return true;
        auto it = value.find("count");
        return it != value.end() && it->is_number() && it->get<double>() == 0.0;
    }
    return false;
}

bool StepEvent::operator==(const StepEvent& other) const {
    return step == other.step && tool_id == other.tool_id && key == other.key &&
           status == other.status && resolved_params == other.resolved_params &&
           branched_params == other.branched_params && fired_rules == other.fired_rules &&
           attempts == other.attempts && failure == other.failure && severity == other.severity;
}

const StepEvent* ExecutionState::find_step(const std::string& key) const {
    for (const auto& event : trace) {
        if (event.key == key) return &event;
    }
    return nullptr;
}

const char* to_string(ErrorClass error) {
    switch (error) {
    case ErrorClass::timeout: return "timeout";
    case ErrorClass::not_found: return "not_found";
    case ErrorClass::empty_result: return "empty_result";
    case ErrorClass::rate_limited: return "rate_limited";
    case ErrorClass::invalid_params: return "invalid_params";
    }
    return "invalid_params";
}

const char* to_string(FailureReason reason) {
    switch (reason) {
    case FailureReason::timeout: return "timeout";
    case FailureReason::not_found: return "not_found";
    case FailureReason::empty_result: return "empty_result";
    case FailureReason::rate_limited: return "rate_limited";
    case FailureReason::invalid_params: return "invalid_params";
    case FailureReason::unresolved_auto: return "unresolved_auto";
    case FailureReason::missing_placeholder: return "missing_placeholder";
    case FailureReason::unknown_tool: return "unknown_tool";
    case FailureReason::modifier_error: return "modifier_error";
    }
    return "invalid_params";
}

const char* to_string(Severity severity) {
    return severity == Severity::hard ? "hard" : "soft";
}

const char* to_string(StepStatus status) {
    switch (status) {
    case StepStatus::success: return "success";
    case StepStatus::failure: return "failure";
    case StepStatus::skipped: return "skipped";
    }
    return "skipped";
}

std::optional<ErrorClass> error_class_from_string(const std::string& name) {
    for (auto error : {ErrorClass::timeout, ErrorClass::not_found, ErrorClass::empty_result,
                       ErrorClass::rate_limited, ErrorClass::invalid_params}) {
        if (name == to_string(error)) return error;
    }
    return std::nullopt;
}

std::optional<FailureReason> failure_reason_from_string(const std::string& name) {
    for (auto reason :
         {FailureReason::timeout, FailureReason::not_found, FailureReason::empty_result,
          FailureReason::rate_limited, FailureReason::invalid_params,
          FailureReason::unresolved_auto, FailureReason::missing_placeholder,
          FailureReason::unknown_tool, FailureReason::modifier_error}) {
        if (name == to_string(reason)) return reason;
    }
    return std::nullopt;
}

std::optional<FailureReason> as_failure_reason(ErrorClass error) {
    return failure_reason_from_string(to_string(error));
}

} // namespace ptr
