#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ptr/core/error.hpp"
#include "ptr/ruledsl/ast.hpp"

namespace ptr::ruledsl {

/// Raised for unparseable sources. code() is "syntax_error" or
/// "path_root_error"; offset() is the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(std::string code, std::size_t offset, std::vector<std::string> expected,
               const std::string& message);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

Predicate parse_predicate(std::string_view source);
Modifier parse_modifier(std::string_view source);

/// Arithmetic expression. With `allow_references` false only literals and
/// operators are accepted (the calculator sub-grammar).
Expr parse_expression(std::string_view source, bool allow_references = true);

StatePath parse_path(std::string_view source);

/// `<path>` or `<path> ?? <literal>`.
AutoRule parse_auto_rule(std::string id, std::string_view source);
RecoveryRule parse_recovery_rule(std::string_view on, std::string_view modify);

} // namespace ptr::ruledsl
