#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptr::pipeline {

inline constexpr int kTraceSchemaVersion = 1;

/// JSONL event stream. Each event carries "v" (schema version) and "event"
/// (its type). Events are kept in memory and optionally streamed.
class TraceWriter {
public:
    TraceWriter() = default;
    explicit TraceWriter(std::ostream& out) : out_(&out) {}

    void emit(const std::string& event, nlohmann::json body = nlohmann::json::object());

    const std::vector<nlohmann::json>& events() const { return events_; }
    void write_jsonl(std::ostream& out) const;

private:
    std::ostream* out_ = nullptr;
    std::vector<nlohmann::json> events_;
};

/// Throws Error("schema_error") on malformed lines.
std::vector<nlohmann::json> read_trace(std::istream& in);
std::vector<nlohmann::json> load_trace(const std::filesystem::path& path);

} // namespace ptr::pipeline
