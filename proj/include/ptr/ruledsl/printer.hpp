#pragma once

#include <string>

#include "ptr/ruledsl/ast.hpp"

namespace ptr::ruledsl {

// Canonical source form with minimal parentheses; parse(print(x)) == x.
std::string print(const StatePath& path);
std::string print(const Predicate& predicate);
std::string print(const Expr& expr);
std::string print(const Modifier& modifier);
std::string print(const AutoRule& rule);
std::string print_literal(const Value& literal);

// S-expression dumps used by the golden parser corpus.
std::string dump(const Predicate& predicate);
std::string dump(const Expr& expr);
std::string dump(const Modifier& modifier);

} // namespace ptr::ruledsl
