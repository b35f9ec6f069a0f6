#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"

namespace ptr::ruledsl {

/// Owning pointer with value semantics: copies deep-copy, == compares pointees.
template <typename T>
class Box {
public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;
    ~Box() = default;

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

enum class PathRoot { result, trace, failure, branch, env };

/// Dot-separated path into the execution state, e.g. `result.kb_search_1.count`.
struct StatePath {
    PathRoot root = PathRoot::result;
    std::vector<std::string> segments;

    bool operator==(const StatePath&) const = default;
};

enum class CompareOp { eq, ne, lt, le, gt, ge };

struct Comparison {
    StatePath path;
    CompareOp op = CompareOp::eq;
    Value literal; // number, string, boolean or null

    bool operator==(const Comparison&) const = default;
};

struct Exists {
    StatePath path;

    bool operator==(const Exists&) const = default;
};

enum class StepCheck { failed, empty };

/// `failed(key)` / `empty(key)` over a result-store step key.
struct StepTest {
    StepCheck check = StepCheck::failed;
    std::string key;

    bool operator==(const StepTest&) const = default;
};

struct Predicate;

struct Not {
    Box<Predicate> operand;

    bool operator==(const Not&) const = default;
};

enum class Connective { all, any }; // `and`, `or`

struct Junction {
    Connective op = Connective::all;
    Box<Predicate> lhs;
    Box<Predicate> rhs;

    bool operator==(const Junction&) const = default;
};

struct Predicate {
    std::variant<Comparison, Exists, StepTest, Not, Junction> node;

    bool operator==(const Predicate&) const = default;
};

struct Expr;

struct LiteralExpr {
    Value value;

    bool operator==(const LiteralExpr&) const = default;
};

struct PathExpr {
    StatePath path;

    bool operator==(const PathExpr&) const = default;
};

/// Current value of a parameter slot.
struct SlotExpr {
    std::string name;

    bool operator==(const SlotExpr&) const = default;
};

struct NegExpr {
    Box<Expr> operand;

    bool operator==(const NegExpr&) const = default;
};

enum class ArithOp { add, sub, mul };

struct ArithExpr {
    ArithOp op = ArithOp::add;
    Box<Expr> lhs;
    Box<Expr> rhs;

    bool operator==(const ArithExpr&) const = default;
};

struct Expr {
    std::variant<LiteralExpr, PathExpr, SlotExpr, NegExpr, ArithExpr> node;

    bool operator==(const Expr&) const = default;
};

struct Assignment {
    std::string slot;
    Expr value;

    bool operator==(const Assignment&) const = default;
};

/// Ordered `set <slot> = <expr>` assignments.
struct Modifier {
    std::vector<Assignment> assignments;

    bool operator==(const Modifier&) const = default;
};

struct AutoRule {
    std::string id;
    StatePath path;
    std::optional<Value> fallback;

    bool operator==(const AutoRule&) const = default;
};

enum class ErrorMatcher { timeout, not_found, empty_result, rate_limited, invalid_params, any };

struct RecoveryRule {
    ErrorMatcher on = ErrorMatcher::any;
    Modifier modifier;

    bool matches(ErrorClass error) const;
    bool operator==(const RecoveryRule&) const = default;
};

const char* to_string(PathRoot root);
const char* to_string(CompareOp op);
const char* to_string(ErrorMatcher matcher);
std::optional<PathRoot> path_root_from_string(std::string_view name);
std::optional<ErrorMatcher> error_matcher_from_string(std::string_view name);

} // namespace ptr::ruledsl
