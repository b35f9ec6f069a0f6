#include "ptr/tools/registry.hpp"

#include "ptr/core/error.hpp"

namespace ptr::tools {

void ToolRegistry::register_tool(ToolSpec spec, ToolTransition transition) {
    if (entries_.count(spec.id)) throw Error("duplicate_tool", "tool '" + spec.id + "' is already registered");
    if (!transition) throw Error("invalid_tool", "tool '" + spec.id + "' has no transition");
    auto id = spec.id;
    entries_.emplace(std::move(id), Entry{std::move(spec), std::move(transition)});
}

bool ToolRegistry::contains(const std::string& id) const {
    return entries_.count(id) > 0;
}

const ToolSpec* ToolRegistry::spec(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second.spec;
}

std::vector<ToolSpec> ToolRegistry::specs() const {
    std::vector<ToolSpec> out;
    for (const auto& [id, entry] : entries_) out.push_back(entry.spec);
    return out;
}

ToolOutcome ToolRegistry::invoke(const std::string& id, const ParamMap& params, const ExecutionState& state) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) return tool_failure(ErrorClass::not_found, "no tool registered as '" + id + "'");
    return it->second.transition(params, state);
}

void ToolRegistry::wrap(const std::string& id, const std::function<ToolTransition(ToolTransition)>& wrapper) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error("unknown_tool", "cannot wrap unregistered tool '" + id + "'");
    it->second.transition = wrapper(std::move(it->second.transition));
}

} // namespace ptr::tools
