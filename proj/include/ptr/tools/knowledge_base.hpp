#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptr::tools {

struct Article {
    std::string title;
    std::string body;
    std::vector<std::string> links;
};

/// Read-only article store keyed by title. Titles must be unique ignoring
/// case; iteration is in byte-wise title order.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Corpus is a JSON list of {title, body, links}. Throws
    /// Error("schema_error") or Error("duplicate_title").
    static KnowledgeBase from_json(const nlohmann::json& corpus);
    static KnowledgeBase load(const std::filesystem::path& path);

    const std::map<std::string, Article>& articles() const { return articles_; }
    /// Case-insensitive exact title match.
    const Article* find(const std::string& title) const;
    std::size_t size() const { return articles_.size(); }

    nlohmann::json to_json() const;
    /// FNV-1a over the canonical corpus serialization, as 16 hex digits.
    std::string content_hash() const;

private:
    std::map<std::string, Article> articles_;
    std::map<std::string, std::string> folded_; // lowercase title -> title
};

/// Lowercased ASCII alphanumeric runs.
std::vector<std::string> tokenize(const std::string& text);
std::string to_lower(std::string text);

} // namespace ptr::tools
