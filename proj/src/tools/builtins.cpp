#include "ptr/tools/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ptr/core/error.hpp"
#include "ptr/ruledsl/evaluator.hpp"
#include "ptr/ruledsl/parser.hpp"

namespace ptr::tools {
namespace {

const Value* param(const ParamMap& params, const std::string& name) {
    auto it = params.find(name);
    return it == params.end() ? nullptr : &it->second;
}

std::optional<long long> as_limit(const Value& value) {
    if (value.is_number_integer()) return value.get<long long>();
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long long>(d);
    }
    return std::nullopt;
}

std::size_t overlap(const std::set<std::string>& query, const std::string& text) {
    std::set<std::string> seen;
    for (auto& token : tokenize(text)) {
        if (query.count(token)) seen.insert(std::move(token));
    }
    return seen.size();
}

} // namespace

ToolOutcome kb_search(const ParamMap& params, const KnowledgeBase& kb) {
    const Value* query = param(params, "query");
    if (!query || !query->is_string()) return tool_failure(ErrorClass::invalid_params, "query must be text");
    const auto tokens = tokenize(query->get<std::string>());
    if (tokens.empty()) return tool_failure(ErrorClass::invalid_params, "query is empty");

    long long limit = kDefaultSearchLimit;
    if (const Value* l = param(params, "limit")) {
        auto parsed = as_limit(*l);
        if (!parsed) return tool_failure(ErrorClass::invalid_params, "limit must be an integer");
        limit = *parsed;
    }
    if (limit < 1) return tool_failure(ErrorClass::invalid_params, "limit must be at least 1");

    const std::set<std::string> wanted(tokens.begin(), tokens.end());
    std::vector<std::pair<std::size_t, const std::string*>> ranked;
    for (const auto& [title, article] : kb.articles()) {
        const std::size_t score = 2 * overlap(wanted, title) + overlap(wanted, article.body);
        if (score > 0) ranked.emplace_back(score, &title);
    }
    if (ranked.empty()) {
        return tool_failure(ErrorClass::empty_result, "no article matches '" + query->get<std::string>() + "'");
    }
    // Titles arrive sorted, so a stable sort on score keeps the title tiebreak.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (ranked.size() > static_cast<std::size_t>(limit)) ranked.resize(static_cast<std::size_t>(limit));

    Value titles = Value::array();
    for (const auto& [score, title] : ranked) titles.push_back(*title);
    return tool_success({{"count", titles.size()}, {"top_title", *ranked.front().second}, {"titles", titles}});
}

ToolOutcome kb_lookup(const ParamMap& params, const KnowledgeBase& kb) {
    const Value* title = param(params, "title");
    if (!title || !title->is_string()) return tool_failure(ErrorClass::invalid_params, "title must be text");
    const Article* article = kb.find(title->get<std::string>());
    if (!article) return tool_failure(ErrorClass::not_found, "no article titled '" + title->get<std::string>() + "'");
    return tool_success({{"title", article->title}, {"body", article->body}, {"links", article->links}});
}

ToolOutcome calc(const ParamMap& params) {
    const Value* expression = param(params, "expression");
    if (!expression || !expression->is_string()) {
        return tool_failure(ErrorClass::invalid_params, "expression must be text");
    }
    try {
        auto expr = ruledsl::parse_expression(expression->get<std::string>(), false);
        Value result = ruledsl::eval_expression(expr, {}, nullptr);
        if (!result.is_number()) return tool_failure(ErrorClass::invalid_params, "expression is not numeric");
        return tool_success({{"value", result}});
    } catch (const Error& e) {
        return tool_failure(ErrorClass::invalid_params, e.what());
    }
}

ToolSpec kb_search_spec() {
    return {"kb_search",
            {{"query", {SlotType::text, true, true}}, {"limit", {SlotType::number, false, true}}},
            "search_hits"};
}

ToolSpec kb_lookup_spec() {
    return {"kb_lookup", {{"title", {SlotType::text, true, true}}}, "article"};
}

ToolSpec calc_spec() {
    return {"calc", {{"expression", {SlotType::text, true, true}}}, "number"};
}

std::vector<ToolSpec> builtin_specs() {
    return {kb_search_spec(), kb_lookup_spec(), calc_spec()};
}

ToolRegistry make_builtin_registry(std::shared_ptr<const KnowledgeBase> kb) {
    if (!kb) kb = std::make_shared<const KnowledgeBase>();
    ToolRegistry registry;
    registry.register_tool(kb_search_spec(),
                           [kb](const ParamMap& params, const ExecutionState&) { return kb_search(params, *kb); });
    registry.register_tool(kb_lookup_spec(),
                           [kb](const ParamMap& params, const ExecutionState&) { return kb_lookup(params, *kb); });
    registry.register_tool(calc_spec(), [](const ParamMap& params, const ExecutionState&) { return calc(params); });
    return registry;
}

ToolTransition fault_injecting_wrapper(ToolTransition inner, std::vector<FaultStep> script) {
    if (script.empty()) throw Error("invalid_fault_script", "fault script must not be empty");
    auto cursor = std::make_shared<std::size_t>(0);
    auto steps = std::make_shared<const std::vector<FaultStep>>(std::move(script));
    return [inner = std::move(inner), cursor, steps](const ParamMap& params, const ExecutionState& state) {
        if (*cursor < steps->size()) {
            const FaultStep& step = (*steps)[(*cursor)++];
            if (step) return ToolOutcome(*step);
        }
        return inner(params, state);
    };
}

std::vector<FaultStep> parse_fault_script(const nlohmann::json& script) {
    if (!script.is_array()) throw Error("schema_error", "fault script: expected array");
    std::vector<FaultStep> out;
    for (const auto& entry : script) {
        if (!entry.is_string()) throw Error("schema_error", "fault script: expected strings");
        const auto name = entry.get<std::string>();
        if (name == "pass") {
            out.emplace_back(std::nullopt);
            continue;
        }
        auto error = error_class_from_string(name);
        if (!error) throw Error("schema_error", "fault script: unknown error class '" + name + "'");
        out.emplace_back(ToolFailure{*error, "injected " + name});
    }
    return out;
}

void apply_faults(ToolRegistry& registry, const nlohmann::json& faults) {
    if (faults.is_null()) return;
    if (!faults.is_object()) throw Error("schema_error", "tools.faults: expected object");
    for (auto it = faults.begin(); it != faults.end(); ++it) {
        auto script = parse_fault_script(it.value());
        registry.wrap(it.key(), [&script](ToolTransition inner) {
            return fault_injecting_wrapper(std::move(inner), std::move(script));
        });
    }
}

} // namespace ptr::tools
