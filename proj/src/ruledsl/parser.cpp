#include "ptr/ruledsl/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace ptr::ruledsl {

ParseError::ParseError(std::string code, std::size_t offset, std::vector<std::string> expected,
                       const std::string& message)
    : Error(std::move(code), message), offset_(offset), expected_(std::move(expected)) {}

namespace {

enum class Tok {
    ident,
    path,
    number,
    string,
    lparen,
    rparen,
    semicolon,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    assign,
    plus,
    minus,
    star,
    coalesce,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t offset = 0;
    Value literal; // numbers and strings
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_keyword(std::string_view word) {
    static constexpr std::string_view keywords[] = {"and",   "or",  "not",  "exists", "failed",
                                                    "empty", "set", "true", "false",  "null"};
    for (auto keyword : keywords) {
        if (word == keyword) return true;
    }
    return false;
}

[[noreturn]] void syntax_error(std::size_t offset, std::vector<std::string> expected,
                               std::string_view found) {
    std::ostringstream message;
    message << "syntax error at offset " << offset << ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        message << (i ? ", " : "") << expected[i];
    }
    message << "; found " << (found.empty() ? std::string("end of input") : "'" + std::string(found) + "'");
    throw ParseError("syntax_error", offset, std::move(expected), message.str());
}

Value parse_number_text(std::string_view text, std::size_t offset) {
    const bool integral = text.find_first_of(".eE") == std::string_view::npos;
    if (integral) {
        long long value = 0;
        auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc() && end == text.data() + text.size()) return Value(value);
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        syntax_error(offset, {"number"}, text);
    }
    return Value(value);
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto push = [&](Tok kind, std::size_t start, std::size_t length) {
        tokens.push_back(Token{kind, std::string(src.substr(start, length)), start, Value()});
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (is_ident_start(c)) {
            while (i < src.size() && is_ident_char(src[i])) ++i;
            bool dotted = false;
            while (i + 1 < src.size() && src[i] == '.' && is_ident_char(src[i + 1])) {
                dotted = true;
                ++i;
                while (i < src.size() && is_ident_char(src[i])) ++i;
            }
            push(dotted ? Tok::path : Tok::ident, start, i - start);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i + 1 < src.size() && src[i] == '.' && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                ++i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    i = j;
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                }
            }
            push(Tok::number, start, i - start);
            tokens.back().literal = parse_number_text(tokens.back().text, start);
            continue;
        }
        if (c == '"') {
            std::string value;
            ++i;
            bool closed = false;
            while (i < src.size()) {
                const char d = src[i++];
                if (d == '"') {
                    closed = true;
                    break;
                }
                if (d == '\\') {
                    if (i >= src.size()) break;
                    const char e = src[i++];
                    switch (e) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case 'r': value += '\r'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default: syntax_error(i - 2, {"escape sequence"}, src.substr(i - 2, 2));
                    }
                    continue;
                }
                value += d;
            }
            if (!closed) syntax_error(start, {"closing '\"'"}, src.substr(start));
            tokens.push_back(Token{Tok::string, std::string(src.substr(start, i - start)), start, Value(value)});
            continue;
        }
        auto two = src.substr(i, 2);
        if (two == "==") { push(Tok::eq, i, 2); i += 2; continue; }
        if (two == "!=") { push(Tok::ne, i, 2); i += 2; continue; }
        if (two == "<=") { push(Tok::le, i, 2); i += 2; continue; }
        if (two == ">=") { push(Tok::ge, i, 2); i += 2; continue; }
        if (two == "??") { push(Tok::coalesce, i, 2); i += 2; continue; }
        switch (c) {
        case '(': push(Tok::lparen, i, 1); break;
        case ')': push(Tok::rparen, i, 1); break;
        case ';': push(Tok::semicolon, i, 1); break;
        case '<': push(Tok::lt, i, 1); break;
        case '>': push(Tok::gt, i, 1); break;
        case '=': push(Tok::assign, i, 1); break;
        case '+': push(Tok::plus, i, 1); break;
        case '-': push(Tok::minus, i, 1); break;
        case '*': push(Tok::star, i, 1); break;
        default: syntax_error(i, {"token"}, src.substr(i, 1));
        }
        ++i;
    }
    tokens.push_back(Token{Tok::end, "", src.size(), Value()});
    return tokens;
}

class Parser {
public:
    Parser(std::string_view source, bool allow_references = true)
        : tokens_(tokenize(source)), allow_references_(allow_references) {}

    Predicate predicate() {
        auto result = parse_or();
        expect_end();
        return result;
    }

    Modifier modifier() {
        Modifier result;
        while (peek().kind != Tok::end) {
            expect_keyword("set");
            const Token& slot = peek();
            if (slot.kind != Tok::ident || is_keyword(slot.text)) syntax_error(slot.offset, {"slot name"}, slot.text);
            advance();
            expect(Tok::assign, "'='");
            Expr value = parse_additive();
            result.assignments.push_back({slot.text, std::move(value)});
            if (peek().kind == Tok::semicolon) {
                advance();
                continue;
            }
            if (peek().kind != Tok::end) syntax_error(peek().offset, {"';'", "end of input"}, peek().text);
        }
        check_roots();
        return result;
    }

    Expr expression() {
        auto result = parse_additive();
        expect_end();
        return result;
    }

    StatePath path() {
        auto result = parse_path_token();
        expect_end();
        return result;
    }

    AutoRule auto_rule(std::string id) {
        AutoRule rule;
        rule.id = std::move(id);
        rule.path = parse_path_token();
        if (peek().kind == Tok::coalesce) {
            advance();
            rule.fallback = parse_literal();
        }
        expect_end();
        return rule;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }

    const Token& advance() { return tokens_[pos_++]; }

    bool at_keyword(std::string_view word) const {
        return peek().kind == Tok::ident && peek().text == word;
    }

    void expect(Tok kind, const char* description) {
        if (peek().kind != kind) syntax_error(peek().offset, {description}, peek().text);
        advance();
    }

    void expect_keyword(std::string_view word) {
        if (!at_keyword(word)) syntax_error(peek().offset, {"'" + std::string(word) + "'"}, peek().text);
        advance();
    }

    void expect_end() {
        if (peek().kind != Tok::end) syntax_error(peek().offset, {"end of input"}, peek().text);
        check_roots();
    }

    void check_roots() const {
        if (bad_root_) {
            throw ParseError("path_root_error", bad_root_->first,
                             {"result", "trace", "failure", "branch", "env"},
                             "path root '" + bad_root_->second + "' at offset " +
                                 std::to_string(bad_root_->first) +
                                 " is not one of result, trace, failure, branch, env");
        }
    }

    StatePath make_path(const Token& token) {
        StatePath path;
        std::size_t start = 0;
        std::vector<std::string> parts;
        const std::string& text = token.text;
        while (true) {
            auto dot = text.find('.', start);
            parts.push_back(text.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        auto root = path_root_from_string(parts.front());
        if (!root) {
            if (!bad_root_) bad_root_ = {token.offset, parts.front()};
        } else {
            path.root = *root;
        }
        path.segments.assign(parts.begin() + 1, parts.end());
        return path;
    }

    StatePath parse_path_token() {
        const Token& token = peek();
        if (token.kind == Tok::path || (token.kind == Tok::ident && !is_keyword(token.text))) {
            advance();
            return make_path(token);
        }
        syntax_error(token.offset, {"state path"}, token.text);
    }

    Value parse_literal() {
        const Token& token = peek();
        if (token.kind == Tok::number || token.kind == Tok::string) {
            advance();
            return token.literal;
        }
        if (token.kind == Tok::minus && peek(1).kind == Tok::number) {
            advance();
            return negate(advance().literal);
        }
        if (token.kind == Tok::ident) {
            if (token.text == "true") { advance(); return Value(true); }
            if (token.text == "false") { advance(); return Value(false); }
            if (token.text == "null") { advance(); return Value(nullptr); }
        }
        syntax_error(token.offset, {"number", "string", "true", "false", "null"}, token.text);
    }

    static Value negate(const Value& number) {
        if (number.is_number_integer()) return Value(-number.get<long long>());
        return Value(-number.get<double>());
    }

    Predicate parse_or() {
        Predicate lhs = parse_and();
        while (at_keyword("or")) {
            advance();
            Predicate rhs = parse_and();
            lhs = Predicate{Junction{Connective::any, std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }

    Predicate parse_and() {
        Predicate lhs = parse_not();
        while (at_keyword("and")) {
            advance();
            Predicate rhs = parse_not();
            lhs = Predicate{Junction{Connective::all, std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }

    Predicate parse_not() {
        if (at_keyword("not")) {
            advance();
            return Predicate{Not{parse_not()}};
        }
        return parse_primary();
    }

    Predicate parse_primary() {
        const Token& token = peek();
        if (token.kind == Tok::lparen) {
            advance();
            Predicate inner = parse_or();
            expect(Tok::rparen, "')'");
            return inner;
        }
        if (at_keyword("exists")) {
            advance();
            expect(Tok::lparen, "'('");
            StatePath path = parse_path_token();
            expect(Tok::rparen, "')'");
            return Predicate{Exists{std::move(path)}};
        }
        if (at_keyword("failed") || at_keyword("empty")) {
            const StepCheck check = token.text == "failed" ? StepCheck::failed : StepCheck::empty;
            advance();
            expect(Tok::lparen, "'('");
            const Token& key = peek();
            if (key.kind != Tok::ident || is_keyword(key.text)) syntax_error(key.offset, {"step key"}, key.text);
            advance();
            expect(Tok::rparen, "')'");
            return Predicate{StepTest{check, key.text}};
        }
        if (token.kind == Tok::path || (token.kind == Tok::ident && !is_keyword(token.text))) {
            advance();
            StatePath path = make_path(token);
            CompareOp op;
            switch (peek().kind) {
            case Tok::eq: op = CompareOp::eq; break;
            case Tok::ne: op = CompareOp::ne; break;
            case Tok::lt: op = CompareOp::lt; break;
            case Tok::le: op = CompareOp::le; break;
            case Tok::gt: op = CompareOp::gt; break;
            case Tok::ge: op = CompareOp::ge; break;
            default:
                syntax_error(peek().offset, {"'=='", "'!='", "'<'", "'<='", "'>'", "'>='"}, peek().text);
            }
            advance();
            Value literal = parse_literal();
            return Predicate{Comparison{std::move(path), op, std::move(literal)}};
        }
        syntax_error(token.offset, {"'('", "'not'", "'exists'", "'failed'", "'empty'", "state path"},
                     token.text);
    }

    Expr parse_additive() {
        Expr lhs = parse_term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const ArithOp op = advance().kind == Tok::plus ? ArithOp::add : ArithOp::sub;
            Expr rhs = parse_term();
            lhs = Expr{ArithExpr{op, std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        while (peek().kind == Tok::star) {
            advance();
            Expr rhs = parse_factor();
            lhs = Expr{ArithExpr{ArithOp::mul, std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }

    Expr parse_factor() {
        const Token& token = peek();
        switch (token.kind) {
        case Tok::number:
        case Tok::string:
            advance();
            return Expr{LiteralExpr{token.literal}};
        case Tok::minus:
            if (peek(1).kind == Tok::number) {
                advance();
                return Expr{LiteralExpr{negate(advance().literal)}};
            }
            advance();
            return Expr{NegExpr{parse_factor()}};
        case Tok::lparen: {
            advance();
            Expr inner = parse_additive();
            expect(Tok::rparen, "')'");
            return inner;
        }
        case Tok::path:
            if (!allow_references_) break;
            advance();
            return Expr{PathExpr{make_path(token)}};
        case Tok::ident:
            if (token.text == "true" || token.text == "false" || token.text == "null") {
                return Expr{LiteralExpr{parse_literal()}};
            }
            if (!allow_references_ || is_keyword(token.text)) break;
            advance();
            if (path_root_from_string(token.text)) return Expr{PathExpr{make_path(token)}};
            return Expr{SlotExpr{token.text}};
        default:
            break;
        }
        if (allow_references_) {
            syntax_error(token.offset, {"number", "string", "true", "false", "null", "'('", "'-'", "state path", "slot name"},
                         token.text);
        }
        syntax_error(token.offset, {"number", "'('", "'-'"}, token.text);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    bool allow_references_ = true;
    std::optional<std::pair<std::size_t, std::string>> bad_root_;
};

} // namespace

Predicate parse_predicate(std::string_view source) {
    return Parser(source).predicate();
}

Modifier parse_modifier(std::string_view source) {
    return Parser(source).modifier();
}

Expr parse_expression(std::string_view source, bool allow_references) {
    return Parser(source, allow_references).expression();
}

StatePath parse_path(std::string_view source) {
    return Parser(source).path();
}

AutoRule parse_auto_rule(std::string id, std::string_view source) {
    return Parser(source).auto_rule(std::move(id));
}

RecoveryRule parse_recovery_rule(std::string_view on, std::string_view modify) {
    auto matcher = error_matcher_from_string(on);
    if (!matcher) {
        throw ParseError("syntax_error", 0,
                         {"timeout", "not_found", "empty_result", "rate_limited", "invalid_params", "any"},
                         "unknown error class '" + std::string(on) + "' in recovery rule");
    }
    return RecoveryRule{*matcher, parse_modifier(modify)};
}

} // namespace ptr::ruledsl
