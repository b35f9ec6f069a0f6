#include "ptr/semantic/model.hpp"

#include <cmath>

#include "ptr/core/error.hpp"

namespace ptr::semantic {

std::int64_t PriceTable::cost(const Usage& usage) const {
    return usage.input_tokens * input_micros_per_token + usage.output_tokens * output_micros_per_token;
}

ModelResponse LanguageModel::complete(const ModelRequest& request) {
    ++calls_;
    return do_complete(request);
}

std::int64_t estimate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

ScriptedModel::ScriptedModel(std::vector<ScriptEntry> script, PriceTable prices)
    : script_(std::move(script)), prices_(prices) {}

std::vector<ScriptEntry> ScriptedModel::parse_script(const nlohmann::json& script) {
    if (!script.is_array()) throw Error("schema_error", "model script: expected array");
    std::vector<ScriptEntry> out;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const auto& entry = script[i];
        const std::string where = "model script[" + std::to_string(i) + "]";
        if (!entry.is_object() || !entry.contains("role") || !entry["role"].is_string()) {
            throw Error("schema_error", where + ": expected object with role");
        }
        auto role = role_from_string(entry["role"].get<std::string>());
        if (!role) throw Error("schema_error", where + ": unknown role '" + entry["role"].get<std::string>() + "'");
        ScriptEntry parsed;
        parsed.role = *role;
        if (entry.contains("text")) {
            if (!entry["text"].is_string()) throw Error("schema_error", where + ".text: expected string");
            parsed.text = entry["text"].get<std::string>();
        } else if (entry.contains("json")) {
            parsed.text = entry["json"].dump();
        } else {
            throw Error("schema_error", where + ": needs text or json");
        }
        parsed.optional = entry.value("optional", false);
        out.push_back(std::move(parsed));
    }
    return out;
}

std::size_t ScriptedModel::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - cursor_;
}

ModelResponse ScriptedModel::do_complete(const ModelRequest& request) {
    std::lock_guard lock(mutex_);
    while (cursor_ < script_.size() && script_[cursor_].optional && script_[cursor_].role != request.role) {
        ++cursor_;
    }
    if (cursor_ >= script_.size()) {
        throw Error("script_exhausted", std::string("no scripted response left for a ") + to_string(request.role) +
                                            " call");
    }
    const auto& entry = script_[cursor_];
    if (entry.role != request.role) {
        throw Error("role_mismatch", std::string("script expects a ") + to_string(entry.role) + " call, got " +
                                         to_string(request.role));
    }
    ++cursor_;
    ModelResponse response;
    response.text = entry.text;
    response.usage = {estimate_tokens(request.prompt), estimate_tokens(entry.text)};
    response.cost_micros = prices_.cost(response.usage);
    return response;
}

void BudgetLedger::record_and_check(Role role, const ModelResponse& response, int attempt) {
    entries_.push_back({role, attempt, response.usage, response.cost_micros});
    total_ += response.cost_micros;
    if (limit_ && total_ > *limit_) {
        throw Error("budget_exceeded", "cumulative cost " + std::to_string(total_) + " micro-dollars exceeds limit " +
                                           std::to_string(*limit_));
    }
}

Usage BudgetLedger::total_usage() const {
    Usage out;
    for (const auto& entry : entries_) {
        out.input_tokens += entry.usage.input_tokens;
        out.output_tokens += entry.usage.output_tokens;
    }
    return out;
}

std::size_t BudgetLedger::stage_calls(Role role) const {
    std::size_t n = 0;
    for (const auto& entry : entries_) {
        if (entry.role == role && entry.attempt == 1) ++n;
    }
    return n;
}

std::size_t BudgetLedger::stage_calls() const {
    std::size_t n = 0;
    for (const auto& entry : entries_) {
        if (entry.attempt == 1) ++n;
    }
    return n;
}

nlohmann::json BudgetLedger::summary() const {
    auto usage = total_usage();
    nlohmann::json out = {{"model_calls", stage_calls()},
                          {"raw_calls", raw_calls()},
                          {"input_tokens", usage.input_tokens},
                          {"output_tokens", usage.output_tokens},
                          {"cost_micros", total_}};
    out["limit_micros"] = limit_ ? nlohmann::json(*limit_) : nlohmann::json();
    nlohmann::json by_role = nlohmann::json::object();
    for (auto role : {Role::profile, Role::repair, Role::reason, Role::react_step}) {
        if (auto n = stage_calls(role)) by_role[to_string(role)] = n;
    }
    out["calls_by_role"] = by_role;
    return out;
}

const char* to_string(Role role) {
    switch (role) {
    case Role::profile: return "profile";
    case Role::repair: return "repair";
    case Role::reason: return "reason";
    case Role::react_step: return "react_step";
    }
    return "profile";
}

std::optional<Role> role_from_string(const std::string& name) {
    for (auto role : {Role::profile, Role::repair, Role::reason, Role::react_step}) {
        if (name == to_string(role)) return role;
    }
    return std::nullopt;
}

std::int64_t to_micros(double dollars) {
    return static_cast<std::int64_t>(std::llround(dollars * 1e6));
}

} // namespace ptr::semantic
