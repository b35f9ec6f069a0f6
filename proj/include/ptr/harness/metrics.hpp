#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ptr::harness {

enum class AnswerKind { free_text, yes_no, numeric, choice_a_e };

struct BenchmarkItem {
    std::string id;
    std::string question;
    std::vector<std::string> gold; // accepted aliases, non-empty
    AnswerKind kind = AnswerKind::free_text;
};

/// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace.
std::string normalize_text(const std::string& text);

/// Kind-specific canonical form, or nullopt when extraction fails.
///   free_text  -> normalize_text
///   yes_no     -> first "yes"/"no" token after normalization
///   numeric    -> last number, commas removed, canonical decimal ("18.0" -> "18")
///   choice_a_e -> single letter A-E
std::optional<std::string> normalize_answer(const std::string& text, AnswerKind kind);

/// 1 iff the normalized prediction equals some normalized alias.
int exact_match(const std::string& prediction, const BenchmarkItem& item);

/// Multiset token F1 over normalized text; 0 when there is no overlap.
/// Two empty token lists score 1.
double token_f1(const std::string& prediction, const std::string& gold);

/// Best F1 over aliases for free text; equals exact_match for other kinds.
double item_f1(const std::string& prediction, const BenchmarkItem& item);

/// Canonical decimal for a numeric literal such as "-001,234.500" ("-1234.5").
std::optional<std::string> canonical_decimal(const std::string& literal);

const char* to_string(AnswerKind kind);
std::optional<AnswerKind> answer_kind_from_string(const std::string& name);

} // namespace ptr::harness
