#include "ptr/core/types.hpp"

#include <cctype>

namespace ptr {

const ToolSpec* Metadata::find_tool(const std::string& id) const {
    for (const auto& spec : tool_catalog) {
        if (spec.id == id) return &spec;
    }
    return nullptr;
}

const char* to_string(SlotType type) {
    switch (type) {
    case SlotType::text: return "text";
    case SlotType::number: return "number";
    case SlotType::boolean: return "boolean";
    case SlotType::list: return "list";
    case SlotType::object: return "object";
    case SlotType::any: return "any";
    }
    return "any";
}

std::optional<SlotType> slot_type_from_string(const std::string& name) {
    for (auto type : {SlotType::text, SlotType::number, SlotType::boolean, SlotType::list,
                      SlotType::object, SlotType::any}) {
        if (name == to_string(type)) return type;
    }
    return std::nullopt;
}

SlotType slot_type_of(const Value& value) {
    if (value.is_string()) return SlotType::text;
    if (value.is_number()) return SlotType::number;
    if (value.is_boolean()) return SlotType::boolean;
    if (value.is_array()) return SlotType::list;
    if (value.is_object()) return SlotType::object;
    return SlotType::any;
}

std::vector<std::string> step_keys(const Workflow& workflow) {
    std::map<std::string, int> occurrences;
    std::vector<std::string> keys;
    keys.reserve(workflow.steps.size());
    for (const auto& step : workflow.steps) {
        keys.push_back(step.tool_id + "_" + std::to_string(++occurrences[step.tool_id]));
    }
    return keys;
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

} // namespace ptr
