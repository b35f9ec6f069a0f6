#include "ptr/tools/knowledge_base.hpp"

#include <cctype>
#include <fstream>

#include "ptr/core/error.hpp"
#include "ptr/core/hash.hpp"

namespace ptr::tools {

std::string to_lower(std::string text) {
    for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return text;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& corpus) {
    if (!corpus.is_array()) throw Error("schema_error", "corpus: expected array of articles");
    KnowledgeBase kb;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& entry = corpus[i];
        const std::string where = "corpus[" + std::to_string(i) + "]";
        if (!entry.is_object() || !entry.contains("title") || !entry["title"].is_string()) {
            throw Error("schema_error", where + ": expected object with string title");
        }
        Article article;
        article.title = entry["title"].get<std::string>();
        if (article.title.empty()) throw Error("schema_error", where + ": empty title");
        if (entry.contains("body")) {
            if (!entry["body"].is_string()) throw Error("schema_error", where + ".body: expected string");
            article.body = entry["body"].get<std::string>();
        }
        if (entry.contains("links")) {
            if (!entry["links"].is_array()) throw Error("schema_error", where + ".links: expected array");
            for (const auto& link : entry["links"]) {
                if (!link.is_string()) throw Error("schema_error", where + ".links: expected strings");
                article.links.push_back(link.get<std::string>());
            }
        }
        auto folded = to_lower(article.title);
        if (kb.folded_.count(folded)) {
            throw Error("duplicate_title", "title '" + article.title + "' appears more than once (ignoring case)");
        }
        kb.folded_[folded] = article.title;
        auto title = article.title;
        kb.articles_.emplace(std::move(title), std::move(article));
    }
    return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open corpus file " + path.string());
    nlohmann::json corpus;
    try {
        in >> corpus;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("schema_error", path.string() + ": " + e.what());
    }
    return from_json(corpus);
}

const Article* KnowledgeBase::find(const std::string& title) const {
    auto it = folded_.find(to_lower(title));
    if (it == folded_.end()) return nullptr;
    return &articles_.at(it->second);
}

nlohmann::json KnowledgeBase::to_json() const {
    auto out = nlohmann::json::array();
    for (const auto& [title, article] : articles_) {
        out.push_back({{"title", article.title}, {"body", article.body}, {"links", article.links}});
    }
    return out;
}

std::string KnowledgeBase::content_hash() const {
    return fnv1a_hex(to_json().dump());
}

} // namespace ptr::tools
