#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ptr/core/state.hpp"
#include "ptr/core/types.hpp"

namespace ptr::tools {

/// Deterministic state-transition operator of one tool. The state is read-only
/// here; the executor owns every write.
using ToolTransition = std::function<ToolOutcome(const ParamMap& params, const ExecutionState& state)>;

class ToolRegistry {
public:
    /// Throws Error("duplicate_tool") if the id is already registered.
    void register_tool(ToolSpec spec, ToolTransition transition);

    bool contains(const std::string& id) const;
    const ToolSpec* spec(const std::string& id) const;
    std::vector<ToolSpec> specs() const;

    /// Unregistered ids yield a not_found failure rather than an exception.
    ToolOutcome invoke(const std::string& id, const ParamMap& params, const ExecutionState& state) const;

    /// Replace the transition of a registered tool, e.g. to wrap it.
    /// Throws Error("unknown_tool") when the id is absent.
    void wrap(const std::string& id, const std::function<ToolTransition(ToolTransition)>& wrapper);

private:
    struct Entry {
        ToolSpec spec;
        ToolTransition transition;
    };
    std::map<std::string, Entry> entries_;
};

} // namespace ptr::tools
