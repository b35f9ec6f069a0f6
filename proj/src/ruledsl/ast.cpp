#include "ptr/ruledsl/ast.hpp"

namespace ptr::ruledsl {

bool RecoveryRule::matches(ErrorClass error) const {
    switch (on) {
    case ErrorMatcher::any: return true;
    case ErrorMatcher::timeout: return error == ErrorClass::timeout;
    case ErrorMatcher::not_found: return error == ErrorClass::not_found;
    case ErrorMatcher::empty_result: return error == ErrorClass::empty_result;
    case ErrorMatcher::rate_limited: return error == ErrorClass::rate_limited;
    case ErrorMatcher::invalid_params: return error == ErrorClass::invalid_params;
    }
    return false;
}

const char* to_string(PathRoot root) {
    switch (root) {
    case PathRoot::result: return "result";
    case PathRoot::trace: return "trace";
    case PathRoot::failure: return "failure";
    case PathRoot::branch: return "branch";
    case PathRoot::env: return "env";
    }
    return "result";
}

const char* to_string(CompareOp op) {
    switch (op) {
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    }
    return "==";
}

const char* to_string(ErrorMatcher matcher) {
    switch (matcher) {
    case ErrorMatcher::timeout: return "timeout";
    case ErrorMatcher::not_found: return "not_found";
    case ErrorMatcher::empty_result: return "empty_result";
    case ErrorMatcher::rate_limited: return "rate_limited";
    case ErrorMatcher::invalid_params: return "invalid_params";
    case ErrorMatcher::any: return "any";
    }
    return "any";
}

std::optional<PathRoot> path_root_from_string(std::string_view name) {
    for (auto root : {PathRoot::result, PathRoot::trace, PathRoot::failure, PathRoot::branch, PathRoot::env}) {
        if (name == to_string(root)) return root;
    }
    return std::nullopt;
}

std::optional<ErrorMatcher> error_matcher_from_string(std::string_view name) {
    for (auto matcher : {ErrorMatcher::timeout, ErrorMatcher::not_found, ErrorMatcher::empty_result,
                         ErrorMatcher::rate_limited, ErrorMatcher::invalid_params, ErrorMatcher::any}) {
        if (name == to_string(matcher)) return matcher;
    }
    return std::nullopt;
}

} // namespace ptr::ruledsl
