#include "ptr/pipeline/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "ptr/core/error.hpp"

namespace ptr::pipeline {

void TraceWriter::emit(const std::string& event, nlohmann::json body) {
    body["v"] = kTraceSchemaVersion;
    body["event"] = event;
    if (out_) *out_ << body.dump() << '\n' << std::flush;
    events_.push_back(std::move(body));
}

void TraceWriter::write_jsonl(std::ostream& out) const {
    for (const auto& event : events_) out << event.dump() << '\n';
}

std::vector<nlohmann::json> read_trace(std::istream& in) {
    std::vector<nlohmann::json> events;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto event = nlohmann::json::parse(line, nullptr, false);
        if (event.is_discarded() || !event.is_object()) {
            throw Error("schema_error", "trace line " + std::to_string(number) + " is not a JSON object");
        }
        events.push_back(std::move(event));
    }
    return events;
}

std::vector<nlohmann::json> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open trace file " + path.string());
    return read_trace(in);
}

} // namespace ptr::pipeline
