#include "ptr/harness/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace ptr::harness {
namespace {

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string token; in >> token;) out.push_back(token);
    return out;
}

bool is_article(const std::string& token) {
    return token == "a" || token == "an" || token == "the";
}

bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

std::optional<std::string> extract_yes_no(const std::string& text) {
    for (const auto& token : split(normalize_text(text))) {
        if (token == "yes" || token == "no") return token;
    }
    return std::nullopt;
}

std::optional<std::string> extract_number(const std::string& text) {
    std::optional<std::string> last;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool starts_digit = is_digit(text[i]);
        const bool starts_point = text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]);
        if (!starts_digit && !starts_point) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (begin > 0 && text[begin - 1] == '-') --begin;
        std::size_t end = i;
        while (end < text.size() && (is_digit(text[end]) || (text[end] == ',' && end + 1 < text.size() &&
                                                             is_digit(text[end + 1])))) {
            ++end;
        }
        if (end + 1 < text.size() && text[end] == '.' && is_digit(text[end + 1])) {
            ++end;
            while (end < text.size() && is_digit(text[end])) ++end;
        }
        last = text.substr(begin, end - begin);
        i = end;
    }
    if (!last) return std::nullopt;
    return canonical_decimal(*last);
}

bool is_choice(char c) {
    return c >= 'A' && c <= 'E';
}

std::optional<std::string> extract_choice(const std::string& text) {
    // "(C)" anywhere, first occurrence.
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i + 1])));
        if (text[i] == '(' && is_choice(c) && text[i + 2] == ')') return std::string(1, c);
    }
    // "answer is C" / "answer: C".
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const std::string marker : {"answer is", "answer:"}) {
        auto at = lower.rfind(marker);
        if (at == std::string::npos) continue;
        std::size_t j = at + marker.size();
        while (j < text.size() && (std::isspace(static_cast<unsigned char>(text[j])) || text[j] == '(')) ++j;
        if (j < text.size()) {
            const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[j])));
            const bool bounded = j + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[j + 1]));
            if (is_choice(c) && bounded) return std::string(1, c);
        }
    }
    // The whole answer is one letter, possibly punctuated.
    std::string letters;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) letters += c;
    }
    if (letters.size() == 1) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(letters[0])));
        if (is_choice(c)) return std::string(1, c);
    }
    // Last standalone uppercase A-E.
    std::optional<std::string> last;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_choice(text[i])) continue;
        const bool left = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        const bool right = i + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (left && right) last = std::string(1, text[i]);
    }
    return last;
}

} // namespace

std::string normalize_text(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) continue;
        cleaned += static_cast<char>(std::tolower(u));
    }
    std::string out;
    for (const auto& token : split(cleaned)) {
        if (is_article(token)) continue;
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

std::optional<std::string> canonical_decimal(const std::string& literal) {
    std::string digits;
    for (char c : literal) {
        if (c != ',') digits += c;
    }
    bool negative = false;
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
        negative = digits[0] == '-';
        digits.erase(0, 1);
    }
    const auto point = digits.find('.');
    std::string whole = digits.substr(0, point);
    std::string fraction = point == std::string::npos ? "" : digits.substr(point + 1);
    if (whole.empty() && fraction.empty()) return std::nullopt;
    for (char c : whole + fraction) {
        if (!is_digit(c)) return std::nullopt;
    }
    whole.erase(0, std::min(whole.find_first_not_of('0'), whole.size()));
    if (whole.empty()) whole = "0";
    while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
    std::string out = whole;
    if (!fraction.empty()) out += "." + fraction;
    if (negative && out != "0") out = "-" + out;
    return out;
}

std::optional<std::string> normalize_answer(const std::string& text, AnswerKind kind) {
    switch (kind) {
    case AnswerKind::free_text: return normalize_text(text);
    case AnswerKind::yes_no: return extract_yes_no(text);
    case AnswerKind::numeric: return extract_number(text);
    case AnswerKind::choice_a_e: return extract_choice(text);
    }
    return std::nullopt;
}

int exact_match(const std::string& prediction, const BenchmarkItem& item) {
    const auto predicted = normalize_answer(prediction, item.kind);
    if (!predicted) return 0;
    for (const auto& alias : item.gold) {
        const auto gold = normalize_answer(alias, item.kind);
        if (gold && *gold == *predicted) return 1;
    }
    return 0;
}

double token_f1(const std::string& prediction, const std::string& gold) {
    const auto p = split(normalize_text(prediction));
    const auto g = split(normalize_text(gold));
    if (p.empty() && g.empty()) return 1.0;
    std::map<std::string, int> counts;
    for (const auto& token : g) ++counts[token];
    int common = 0;
    for (const auto& token : p) {
        auto it = counts.find(token);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(p.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

double item_f1(const std::string& prediction, const BenchmarkItem& item) {
    if (item.kind != AnswerKind::free_text) return exact_match(prediction, item);
    double best = 0.0;
    for (const auto& alias : item.gold) best = std::max(best, token_f1(prediction, alias));
    return best;
}

const char* to_string(AnswerKind kind) {
    switch (kind) {
    case AnswerKind::free_text: return "free_text";
    case AnswerKind::yes_no: return "yes_no";
    case AnswerKind::numeric: return "numeric";
    case AnswerKind::choice_a_e: return "choice_a_e";
    }
    return "free_text";
}

std::optional<AnswerKind> answer_kind_from_string(const std::string& name) {
    for (auto kind : {AnswerKind::free_text, AnswerKind::yes_no, AnswerKind::numeric, AnswerKind::choice_a_e}) {
        if (name == to_string(kind)) return kind;
    }
    return std::nullopt;
}

} // namespace ptr::harness
