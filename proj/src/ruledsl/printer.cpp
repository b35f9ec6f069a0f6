#include "ptr/ruledsl/printer.hpp"

#include <charconv>

namespace ptr::ruledsl {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int precedence(const Predicate& p) {
    if (const auto* j = std::get_if<Junction>(&p.node)) return j->op == Connective::any ? 1 : 2;
    if (std::holds_alternative<Not>(p.node)) return 3;
    return 4;
}

int precedence(const Expr& e) {
    if (const auto* a = std::get_if<ArithExpr>(&e.node)) return a->op == ArithOp::mul ? 2 : 1;
    if (std::holds_alternative<NegExpr>(e.node)) return 3;
    return 4;
}

std::string wrap(std::string text, bool parens) {
    return parens ? "(" + text + ")" : text;
}

std::string quote(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

const char* to_symbol(ArithOp op) {
    switch (op) {
    case ArithOp::add: return "+";
    case ArithOp::sub: return "-";
    case ArithOp::mul: return "*";
    }
    return "+";
}

} // namespace

std::string print_literal(const Value& literal) {
    if (literal.is_string()) return quote(literal.get<std::string>());
    if (literal.is_boolean()) return literal.get<bool>() ? "true" : "false";
    if (literal.is_null()) return "null";
    if (literal.is_number_integer()) return literal.dump();
    if (literal.is_number_float()) {
        char buffer[64];
        auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, literal.get<double>());
        return std::string(buffer, end);
    }
    return literal.dump();
}

std::string print(const StatePath& path) {
    std::string out = to_string(path.root);
    for (const auto& segment : path.segments) out += "." + segment;
    return out;
}

std::string print(const Predicate& predicate) {
    return std::visit(
        overloaded{
            [](const Comparison& c) {
                return print(c.path) + " " + to_string(c.op) + " " + print_literal(c.literal);
            },
            [](const Exists& e) { return "exists(" + print(e.path) + ")"; },
            [](const StepTest& t) {
                return std::string(t.check == StepCheck::failed ? "failed(" : "empty(") + t.key + ")";
            },
            [](const Not& n) { return "not " + wrap(print(*n.operand), precedence(*n.operand) < 3); },
            [](const Junction& j) {
                const int own = j.op == Connective::any ? 1 : 2;
                return wrap(print(*j.lhs), precedence(*j.lhs) < own) +
                       (j.op == Connective::any ? " or " : " and ") +
                       wrap(print(*j.rhs), precedence(*j.rhs) <= own);
            },
        },
        predicate.node);
}

std::string print(const Expr& expr) {
    return std::visit(
        overloaded{
            [](const LiteralExpr& l) { return print_literal(l.value); },
            [](const PathExpr& p) { return print(p.path); },
            [](const SlotExpr& s) { return s.name; },
            [](const NegExpr& n) {
                const auto* literal = std::get_if<LiteralExpr>(&n.operand->node);
                const bool numeric = literal && literal->value.is_number();
                return "-" + wrap(print(*n.operand), numeric || precedence(*n.operand) < 3);
            },
            [](const ArithExpr& a) {
                const int own = a.op == ArithOp::mul ? 2 : 1;
                return wrap(print(*a.lhs), precedence(*a.lhs) < own) + " " + to_symbol(a.op) + " " +
                       wrap(print(*a.rhs), precedence(*a.rhs) <= own);
            },
        },
        expr.node);
}

std::string print(const Modifier& modifier) {
    std::string out;
    for (std::size_t i = 0; i < modifier.assignments.size(); ++i) {
        if (i) out += "; ";
        out += "set " + modifier.assignments[i].slot + " = " + print(modifier.assignments[i].value);
    }
    return out;
}

std::string print(const AutoRule& rule) {
    std::string out = print(rule.path);
    if (rule.fallback) out += " ?? " + print_literal(*rule.fallback);
    return out;
}

std::string dump(const Predicate& predicate) {
    return std::visit(
        overloaded{
            [](const Comparison& c) {
                return std::string("(cmp ") + to_string(c.op) + " " + print(c.path) + " " +
                       print_literal(c.literal) + ")";
            },
            [](const Exists& e) { return "(exists " + print(e.path) + ")"; },
            [](const StepTest& t) {
                return std::string(t.check == StepCheck::failed ? "(failed " : "(empty ") + t.key + ")";
            },
            [](const Not& n) { return "(not " + dump(*n.operand) + ")"; },
            [](const Junction& j) {
                return std::string(j.op == Connective::any ? "(or " : "(and ") + dump(*j.lhs) + " " +
                       dump(*j.rhs) + ")";
            },
        },
        predicate.node);
}

std::string dump(const Expr& expr) {
    return std::visit(
        overloaded{
            [](const LiteralExpr& l) { return "(lit " + print_literal(l.value) + ")"; },
            [](const PathExpr& p) { return "(path " + print(p.path) + ")"; },
            [](const SlotExpr& s) { return "(slot " + s.name + ")"; },
            [](const NegExpr& n) { return "(neg " + dump(*n.operand) + ")"; },
            [](const ArithExpr& a) {
                return std::string("(") + to_symbol(a.op) + " " + dump(*a.lhs) + " " + dump(*a.rhs) + ")";
            },
        },
        expr.node);
}

std::string dump(const Modifier& modifier) {
    std::string out = "(modifier";
    for (const auto& assignment : modifier.assignments) {
        out += " (set " + assignment.slot + " " + dump(assignment.value) + ")";
    }
    return out + ")";
}

} // namespace ptr::ruledsl
