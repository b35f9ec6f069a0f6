#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/executor/executor.hpp"
#include "ptr/pipeline/pipeline.hpp"
#include "ptr/semantic/prompts.hpp"

namespace ptr::pipeline {

using nlohmann::json;

namespace {

struct Divergence {
    std::string what;
};

[[noreturn]] void diverge(const std::string& what) {
    throw Divergence{what};
}

class Cursor {
public:
    explicit Cursor(const std::vector<json>& events) : events_(events) {}

    const json* peek() const { return pos_ < events_.size() ? &events_[pos_] : nullptr; }
    bool next_is(const std::string& type) const { return peek() && (*peek())["event"] == type; }
    const json& take(const std::string& type) {
        if (!next_is(type)) {
            diverge("expected a '" + type + "' event at position " + std::to_string(pos_) + ", found " +
                    (peek() ? (*peek())["event"].dump() : std::string("end of trace")));
        }
        return events_[pos_++];
    }
    /// Skips model_call events, returning the last one for `role`.
    const json* skip_calls(const std::string& role) {
        const json* last = nullptr;
        while (next_is("model_call")) {
            if (events_[pos_]["role"] == role) last = &events_[pos_];
            ++pos_;
        }
        return last;
    }

private:
    const std::vector<json>& events_;
    std::size_t pos_ = 0;
};

void compare_steps(Cursor& cursor, const ExecutionState& state, const std::string& phase) {
    for (const auto& replayed : state.trace) {
        if (!cursor.next_is("step")) {
            diverge(phase + " step " + std::to_string(replayed.step) + " (" + replayed.key + ") missing from trace");
        }
        const json& event = cursor.take("step");
        if (event.value("phase", "") != phase) diverge("step event phase mismatch, expected " + phase);
        StepEvent recorded;
        try {
            recorded = step_event_from_json(event.at("step_event"));
        } catch (const std::exception& e) {
            diverge(phase + " step " + std::to_string(replayed.step) + " unreadable: " + e.what());
        }
        if (!(recorded == replayed)) {
            json a, b;
            to_json(a, recorded);
            to_json(b, replayed);
            a.erase("wall_ms");
            b.erase("wall_ms");
            diverge(phase + " step " + std::to_string(replayed.step) + " (" + replayed.key + "): recorded " +
                    a.dump() + " but replay produced " + b.dump());
        }
    }
    if (cursor.next_is("step")) diverge(phase + " trace records more steps than the replay produced");
}

void compare_verification(Cursor& cursor, const verifier::VerificationObject& z, const std::string& phase) {
    const json& event = cursor.take("verification");
    if (event.value("phase", "") != phase) diverge("verification phase mismatch, expected " + phase);
    const json replayed = verifier::to_json(z);
    if (event.at("z") != replayed) {
        diverge(phase + " verification: recorded " + event.at("z").dump() + " but replay produced " +
                replayed.dump());
    }
}

void compare_prompt(const json* call, const std::string& prompt, const std::string& role) {
    if (!call) return;
    if ((*call)["prompt"] != prompt) diverge(role + " prompt differs from the replayed prompt");
}

} // namespace

ReplayReport replay_trace(const std::vector<json>& events, const RegistryFactory& factory) {
    for (const auto& event : events) {
        if (!event.contains("v") || event["v"] != kTraceSchemaVersion) {
            throw Error("schema_mismatch", "trace event has schema version " +
                                               (event.contains("v") ? event["v"].dump() : std::string("none")) +
                                               ", expected " + std::to_string(kTraceSchemaVersion));
        }
    }

    ReplayReport report;
    Cursor cursor(events);
    try {
        const json& header = cursor.take("run_header");
        Task task;
        Metadata metadata;
        from_json(header.at("task"), task);
        from_json(header.at("metadata"), metadata);
        const auto config = RunConfig::from_json(header.at("config"));
        if (config.hash() != header.value("config_hash", "")) diverge("config hash does not match the recorded config");
        ++report.stages_checked;

        cursor.skip_calls("profile");
        if (cursor.next_is("abort")) return report;
        const json& profile_event = cursor.take("profile");
        if (profile_event.at("parsed").is_null()) {
            cursor.take("abort");
            return report;
        }
        Profile profile;
        from_json(profile_event.at("parsed"), profile);
        if (!check_admissibility(profile, metadata).admissible()) diverge("recorded profile is not admissible");
        ++report.stages_checked;

        auto route = router::route_profile(metadata, profile, config.weights, config.thresholds);
        const auto routed = route.mode;
        if (config.mode_override) route.mode = *config.mode_override;
        const json& route_event = cursor.take("route");
        const json replayed_route = {{"components", route.breakdown.components.c},
                                     {"total", route.breakdown.total},
                                     {"routed_mode", router::to_string(routed)},
                                     {"mode", router::to_string(route.mode)},
                                     {"overridden", config.mode_override.has_value()}};
        for (const auto& key : {"components", "total", "routed_mode", "mode", "overridden"}) {
            if (route_event.at(key) != replayed_route.at(key)) {
                diverge(std::string("route ") + key + ": recorded " + route_event.at(key).dump() +
                        " but replay produced " + replayed_route.at(key).dump());
            }
        }
        ++report.stages_checked;

        const auto registry = factory(config);
        const auto exec_config = config.execution(route.mode);
        const auto verifier_config = config.verification(route.mode);
        auto state = executor::run_workflow(profile, metadata.constraints, exec_config, registry,
                                            executor::initial_state(task));
        compare_steps(cursor, state, "initial");
        ++report.stages_checked;
        auto z = verifier::verify(state, metadata, profile, verifier_config);
        compare_verification(cursor, z, "initial");
        ++report.stages_checked;

        std::vector<std::string> flags;
        if (z.repair_recommended) {
            const json* call = cursor.skip_calls("repair");
            if (!call && cursor.next_is("abort")) return report;
            if (!call) diverge("verification recommends repair but no repair call was recorded");
            compare_prompt(call, semantic::build_repair_prompt(task, metadata, profile, state, z), "repair");
            if (cursor.next_is("abort")) return report;
            const json& repair = cursor.take("repair");
            if (repair.at("admitted").get<bool>()) {
                Profile patched;
                from_json(repair.at("patched"), patched);
                if (!check_admissibility(patched, metadata).admissible()) diverge("recorded patch is not admissible");
                state = executor::run_workflow(patched, metadata.constraints, exec_config, registry,
                                               executor::initial_state(task));
                compare_steps(cursor, state, "repair");
                z = verifier::verify(state, metadata, patched, verifier_config);
                compare_verification(cursor, z, "repair");
                flags.push_back("repair_applied");
            } else {
                flags.push_back(repair.value("flag", ""));
            }
            ++report.stages_checked;
        } else if (cursor.next_is("repair")) {
            diverge("trace records a repair that verification does not recommend");
        }

        const json* reason_call = cursor.skip_calls("reason");
        if (!reason_call && cursor.next_is("abort")) return report;
        if (!reason_call) diverge("no reason call recorded");
        compare_prompt(reason_call,
                       semantic::build_reason_prompt(task, metadata, state, with_run_flags(z, flags)), "reason");
        if (cursor.next_is("abort")) return report;
        cursor.take("reason");
        ++report.stages_checked;
        cursor.take("run_report");
        if (cursor.peek()) diverge("unexpected events after the run report");
    } catch (const Divergence& d) {
        report.match = false;
        report.divergence = d.what;
    } catch (const Error& e) {
        report.match = false;
        report.divergence = std::string("unreadable trace: ") + e.what();
    } catch (const json::exception& e) {
        report.match = false;
        report.divergence = std::string("unreadable trace: ") + e.what();
    }
    return report;
}

} // namespace ptr::pipeline
