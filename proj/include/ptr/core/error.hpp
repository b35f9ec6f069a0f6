#pragma once

#include <stdexcept>
#include <string>

namespace ptr {

/// Base error for the runtime. `code()` is a stable snake_case identifier
/// (e.g. "duplicate_tool", "script_exhausted") that tests and the CLI match on.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace ptr
