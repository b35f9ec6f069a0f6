#include "ptr/ruledsl/evaluator.hpp"

#include <cctype>
#include <limits>

#include "ptr/ruledsl/printer.hpp"

namespace ptr::ruledsl {
namespace {

std::optional<Value> descend(const Value& start, const std::vector<std::string>& segments, std::size_t from) {
    const Value* current = &start;
    for (std::size_t i = from; i < segments.size(); ++i) {
        const auto& segment = segments[i];
        if (current->is_object()) {
            auto it = current->find(segment);
            if (it == current->end()) return std::nullopt;
            current = &*it;
        } else if (current->is_array()) {
            if (segment.empty() || segment.size() > 9) return std::nullopt;
            std::size_t index = 0;
            for (char c : segment) {
                if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
                index = index * 10 + static_cast<std::size_t>(c - '0');
            }
            if (index >= current->size()) return std::nullopt;
            current = &(*current)[index];
        } else {
            return std::nullopt;
        }
    }
    return std::optional<Value>(std::in_place, *current);
}

const StepEvent* step_by_index(const ExecutionState& state, int step) {
    for (const auto& event : state.trace) {
        if (event.step == step) return &event;
    }
    return nullptr;
}

Value trace_view(const ExecutionState& state) {
    Value view = Value::object();
    view["count"] = state.trace.size();
    for (const auto& event : state.trace) {
        Value summary = {{"step", event.step},
                         {"tool_id", event.tool_id},
                         {"status", to_string(event.status)},
                         {"attempts", event.attempts.size()}};
        if (event.failure) summary["failure"] = to_string(*event.failure);
        if (!event.attempts.empty()) {
            if (const auto* ok = std::get_if<ToolSuccess>(&event.attempts.back().outcome)) {
                summary["output_size"] = ok->output_size;
            }
        }
        view[event.key] = std::move(summary);
    }
    return view;
}

Value failure_view(const ExecutionState& state) {
    Value view = Value::object();
    view["count"] = state.failure_log.size();
    for (const auto& entry : state.failure_log) {
        const auto* event = step_by_index(state, entry.step);
        if (!event) continue;
        Value& slot = view[event->key];
        const int previous = slot.is_object() ? slot["attempts"].get<int>() : 0;
        slot = {{"reason", to_string(entry.reason)},
                {"attempts", previous + 1},
                {"severity", to_string(entry.severity)}};
    }
    return view;
}

Value branch_view(const ExecutionState& state) {
    Value view = Value::object();
    view["count"] = state.branch_log.size();
    for (const auto& entry : state.branch_log) {
        const auto* event = step_by_index(state, entry.step);
        // Branches fire before the step's event is appended; fall back to the
        // step index so the entry stays addressable mid-step.
        const std::string key = event ? event->key : "step_" + std::to_string(entry.step);
        Value& slot = view[key];
        if (!slot.is_object()) slot = {{"fired", 0}, {"rules", Value::array()}};
        slot["fired"] = slot["fired"].get<int>() + 1;
        slot["rules"].push_back(entry.rule_index);
    }
    return view;
}

template <typename Map>
std::optional<Value> lookup_in_map(const Map& map, const std::vector<std::string>& segments) {
    if (segments.empty()) {
        Value whole = Value::object();
        for (const auto& [key, value] : map) whole[key] = value;
        return std::optional<Value>(std::in_place, std::move(whole));
    }
    auto it = map.find(segments.front());
    if (it == map.end()) return std::nullopt;
    return descend(it->second, segments, 1);
}

bool compare(const Value& actual, CompareOp op, const Value& literal) {
    if (actual.is_number() && literal.is_number()) {
        if (actual.is_number_integer() && literal.is_number_integer()) {
            const auto a = actual.get<long long>();
            const auto b = literal.get<long long>();
            switch (op) {
            case CompareOp::eq: return a == b;
            case CompareOp::ne: return a != b;
            case CompareOp::lt: return a < b;
            case CompareOp::le: return a <= b;
            case CompareOp::gt: return a > b;
            case CompareOp::ge: return a >= b;
            }
        }
        const double a = actual.get<double>();
        const double b = literal.get<double>();
        switch (op) {
        case CompareOp::eq: return a == b;
        case CompareOp::ne: return a != b;
        case CompareOp::lt: return a < b;
        case CompareOp::le: return a <= b;
        case CompareOp::gt: return a > b;
        case CompareOp::ge: return a >= b;
        }
    }
    if (actual.is_string() && literal.is_string()) {
        const int c = actual.get_ref<const std::string&>().compare(literal.get_ref<const std::string&>());
        switch (op) {
        case CompareOp::eq: return c == 0;
        case CompareOp::ne: return c != 0;
        case CompareOp::lt: return c < 0;
        case CompareOp::le: return c <= 0;
        case CompareOp::gt: return c > 0;
        case CompareOp::ge: return c >= 0;
        }
    }
    // Booleans, null and mismatched types only support (in)equality.
    switch (op) {
    case CompareOp::eq: return actual == literal;
    case CompareOp::ne: return actual != literal;
    default: return false;
    }
}

[[noreturn]] void type_error(const std::string& message) {
    throw Error("modifier_type_error", message);
}

Value arithmetic(ArithOp op, const Value& lhs, const Value& rhs) {
    if (op == ArithOp::add && lhs.is_string() && rhs.is_string()) {
        return Value(lhs.get<std::string>() + rhs.get<std::string>());
    }
    if (!lhs.is_number() || !rhs.is_number()) {
        type_error("operator requires two numbers" +
                   std::string(op == ArithOp::add ? " or two strings" : "") + ", got " +
                   std::string(lhs.type_name()) + " and " + rhs.type_name());
    }
    if (lhs.is_number_integer() && rhs.is_number_integer()) {
        const auto a = lhs.get<long long>();
        const auto b = rhs.get<long long>();
        long long out = 0;
        bool overflow = false;
        switch (op) {
        case ArithOp::add: overflow = __builtin_add_overflow(a, b, &out); break;
        case ArithOp::sub: overflow = __builtin_sub_overflow(a, b, &out); break;
        case ArithOp::mul: overflow = __builtin_mul_overflow(a, b, &out); break;
        }
        if (!overflow) return Value(out);
    }
    const double a = lhs.get<double>();
    const double b = rhs.get<double>();
    switch (op) {
    case ArithOp::add: return Value(a + b);
    case ArithOp::sub: return Value(a - b);
    case ArithOp::mul: return Value(a * b);
    }
    return Value();
}

} // namespace

std::optional<Value> lookup_path(const StatePath& path, const ExecutionState& state) {
    switch (path.root) {
    case PathRoot::result: return lookup_in_map(state.result_store, path.segments);
    case PathRoot::env: return lookup_in_map(state.env, path.segments);
    case PathRoot::trace: return descend(trace_view(state), path.segments, 0);
    case PathRoot::failure: return descend(failure_view(state), path.segments, 0);
    case PathRoot::branch: return descend(branch_view(state), path.segments, 0);
    }
    return std::nullopt;
}

bool eval_predicate(const Predicate& predicate, const ExecutionState& state) {
    if (const auto* c = std::get_if<Comparison>(&predicate.node)) {
        auto actual = lookup_path(c->path, state);
        return actual && compare(*actual, c->op, c->literal);
    }
    if (const auto* e = std::get_if<Exists>(&predicate.node)) {
        return lookup_path(e->path, state).has_value();
    }
    if (const auto* t = std::get_if<StepTest>(&predicate.node)) {
        const auto* event = state.find_step(t->key);
        if (!event) return false;
        if (t->check == StepCheck::failed) return event->status != StepStatus::success;
        if (event->status == StepStatus::success) {
            auto it = state.result_store.find(t->key);
            return it != state.result_store.end() && is_empty_value(it->second);
        }
        return event->failure == FailureReason::empty_result;
    }
    if (const auto* n = std::get_if<Not>(&predicate.node)) {
        return !eval_predicate(*n->operand, state);
    }
    const auto& j = std::get<Junction>(predicate.node);
    if (j.op == Connective::all) return eval_predicate(*j.lhs, state) && eval_predicate(*j.rhs, state);
    return eval_predicate(*j.lhs, state) || eval_predicate(*j.rhs, state);
}

Value eval_expression(const Expr& expr, const ParamMap& slots, const ExecutionState* state) {
    if (const auto* l = std::get_if<LiteralExpr>(&expr.node)) return l->value;
    if (const auto* p = std::get_if<PathExpr>(&expr.node)) {
        if (!state) throw Error("unresolved_path", "state path '" + print(p->path) + "' used without a state");
        auto value = lookup_path(p->path, *state);
        if (!value) throw Error("unresolved_path", "state path '" + print(p->path) + "' is absent");
        return *value;
    }
    if (const auto* s = std::get_if<SlotExpr>(&expr.node)) {
        auto it = slots.find(s->name);
        if (it == slots.end()) throw Error("unknown_slot", "slot '" + s->name + "' has no value");
        return it->second;
    }
    if (const auto* n = std::get_if<NegExpr>(&expr.node)) {
        Value operand = eval_expression(*n->operand, slots, state);
        if (!operand.is_number()) type_error("unary minus requires a number");
        if (operand.is_number_integer() && operand.get<long long>() != std::numeric_limits<long long>::min()) {
            return Value(-operand.get<long long>());
        }
        return Value(-operand.get<double>());
    }
    const auto& a = std::get<ArithExpr>(expr.node);
    Value lhs = eval_expression(*a.lhs, slots, state);
    Value rhs = eval_expression(*a.rhs, slots, state);
    return arithmetic(a.op, lhs, rhs);
}

ParamMap apply_modifier(const Modifier& modifier, const ParamMap& params, const ExecutionState& state,
                        const std::map<std::string, SlotDescriptor>* schema) {
    ParamMap out = params;
    for (const auto& assignment : modifier.assignments) {
        const bool declared = schema ? schema->count(assignment.slot) > 0 : out.count(assignment.slot) > 0;
        if (!declared) throw Error("unknown_slot", "modifier assigns undeclared slot '" + assignment.slot + "'");
        out[assignment.slot] = eval_expression(assignment.value, out, &state);
    }
    return out;
}

Value eval_auto_rule(const AutoRule& rule, const ExecutionState& state) {
    if (auto value = lookup_path(rule.path, state)) return *value;
    if (rule.fallback) return *rule.fallback;
    throw Error("unresolved_auto", "auto rule '" + rule.id + "': path '" + print(rule.path) + "' is absent");
}

} // namespace ptr::ruledsl
