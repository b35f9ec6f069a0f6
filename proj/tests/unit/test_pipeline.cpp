#include <gtest/gtest.h>

#include <sstream>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/pipeline/pipeline.hpp"
#include "../support/scenarios.hpp"

namespace ptr::pipeline {
namespace {

using nlohmann::json;
using semantic::Role;
using semantic::ScriptEntry;

json good_profile() {
    return json::parse(R"({
      "workflow": {"steps": [
        {"tool_id": "kb_search", "params": {"query": "nile river africa"}},
        {"tool_id": "kb_lookup", "params": {"title": {"$auto": "top_title"}}}
      ]},
      "confidence": 0.9
    })");
}

Task nile_task() {
    Task t;
    t.objective = "Which continent does the Nile flow through?";
    return t;
}

struct Run {
    RunReport report;
    TraceWriter trace;
    std::size_t calls = 0;
};

Run run(const std::vector<ScriptEntry>& script, RunConfig config = testing::desk_config()) {
    Run out;
    semantic::ScriptedModel model(script, config.prices);
    out.report = run_ptr(nile_task(), testing::desk_metadata(), config, model, build_registry(config), &out.trace);
    out.calls = model.calls();
    return out;
}

ScriptEntry profile(const json& j) {
    return {Role::profile, j.dump(), false};
}

ScriptEntry reason(const std::string& text = "The Nile flows through Africa.\nAnswer: Africa") {
    return {Role::reason, text, false};
}

std::vector<std::string> event_types(const TraceWriter& trace) {
    std::vector<std::string> out;
    for (const auto& e : trace.events()) out.push_back(e["event"]);
    return out;
}

TEST(Run, CleanTwoCalls) {
    const auto r = run({profile(good_profile()), reason()});
    EXPECT_EQ(r.report.outcome, RunOutcome::completed);
    EXPECT_EQ(r.report.final_answer, "Africa");
    EXPECT_EQ(r.report.model_calls, 2u);
    EXPECT_EQ(r.calls, 2u);
    EXPECT_EQ(r.report.tool_calls, 2u);
    EXPECT_FALSE(r.report.repaired);
    EXPECT_EQ(r.report.verification->status, verifier::Status::ok);
    EXPECT_EQ(event_types(r.trace), (std::vector<std::string>{"run_header", "model_call", "profile", "route", "step",
                                                              "step", "verification", "model_call", "reason",
                                                              "run_report"}));
    for (const auto& e : r.trace.events()) EXPECT_EQ(e["v"], kTraceSchemaVersion);
}

TEST(Run, ProfileRetryCountsAsOneStage) {
    const auto r = run({{Role::profile, "I think we should search.", false}, profile(good_profile()), reason()});
    EXPECT_EQ(r.report.outcome, RunOutcome::completed);
    EXPECT_EQ(r.report.model_calls, 2u);
    EXPECT_EQ(r.report.raw_model_calls, 3u);
}

TEST(Run, InadmissibleProfileIsRetried) {
    auto bad = good_profile();
    bad["workflow"]["steps"][0]["tool_id"] = "web_search";
    const auto r = run({profile(bad), profile(good_profile()), reason()});
    EXPECT_EQ(r.report.outcome, RunOutcome::completed);
    EXPECT_NE(r.trace.events()[2]["prompt"].get<std::string>().find("unknown_tool"), std::string::npos);
}

TEST(Run, TwoBadProfilesAbort) {
    auto bad = good_profile();
    bad["workflow"]["steps"][0]["tool_id"] = "web_search";
    const auto r = run({profile(bad), {Role::profile, "still nothing", false}});
    EXPECT_EQ(r.report.outcome, RunOutcome::run_invalid);
    EXPECT_FALSE(r.report.error.empty());
    EXPECT_EQ(r.report.tool_calls, 0u);
    EXPECT_EQ(event_types(r.trace).back(), "run_report");
}

TEST(Run, HardFailureTriggersOneRepair) {
    auto config = testing::desk_config();
    config.tools.faults = {{"kb_search", {"invalid_params"}}};
    auto patch = good_profile();
    patch["workflow"]["steps"][0]["params"]["query"] = "nile";
    const auto r = run({profile(good_profile()), {Role::repair, patch.dump(), false}, reason()}, config);
    EXPECT_EQ(r.report.outcome, RunOutcome::completed);
    EXPECT_TRUE(r.report.repaired);
    EXPECT_EQ(r.report.model_calls, 3u);
    EXPECT_TRUE(r.report.initial_verification->repair_recommended);
    EXPECT_TRUE(r.report.initial_verification->counters.hard_failure);
    EXPECT_EQ(r.report.flags, (std::vector<std::string>{"repair_applied"}));
    EXPECT_EQ(r.report.verification->status, verifier::Status::ok);
    EXPECT_EQ(r.report.final_state.result_store.at("kb_lookup_1")["title"], "Nile");
    // one failed attempt plus the skipped lookup, then two calls after the patch
    EXPECT_EQ(r.report.tool_calls, 3u);
    EXPECT_LE(r.report.tool_calls, (r.report.workflow_steps + r.report.repair_workflow_steps) * (1 + config.n_rec));
}

TEST(Run, RejectedRepairKeepsOriginalEvidence) {
    auto config = testing::desk_config();
    config.tools.faults = {{"kb_search", {"invalid_params"}}};
    auto patch = good_profile();
    patch["workflow"]["steps"][0]["tool_id"] = "web_search";
    const auto r = run({profile(good_profile()), {Role::repair, patch.dump(), false}, reason()}, config);
    EXPECT_EQ(r.report.model_calls, 3u);
    EXPECT_EQ(r.report.flags, (std::vector<std::string>{"repair_rejected"}));
    EXPECT_TRUE(r.report.verification->counters.hard_failure);
    const auto& reason_prompt = r.trace.events()[r.trace.events().size() - 3]["prompt"].get<std::string>();
    EXPECT_NE(reason_prompt.find("A proposed repair was rejected"), std::string::npos);
}

TEST(Run, UnparseableRepairGetsNoRetry) {
    auto config = testing::desk_config();
    config.tools.faults = {{"kb_search", {"invalid_params"}}};
    const auto r = run({profile(good_profile()), {Role::repair, "sorry", false}, reason()}, config);
    EXPECT_EQ(r.report.model_calls, 3u);
    EXPECT_EQ(r.report.raw_model_calls, 3u);
    EXPECT_EQ(r.report.flags, (std::vector<std::string>{"repair_parse_failed"}));
}

TEST(Run, BudgetExceededStopsAtTheCall) {
    auto config = testing::desk_config();
    config.budget_limit_micros = 1;
    const auto r = run({profile(good_profile()), reason()}, config);
    EXPECT_EQ(r.report.outcome, RunOutcome::budget_exceeded);
    EXPECT_EQ(r.calls, 1u);
    EXPECT_EQ(r.report.raw_model_calls, 1u);
}

TEST(Run, ModeOverride) {
    auto config = testing::desk_config();
    config.mode_override = router::Mode::repair_eligible;
    const auto r = run({profile(good_profile()), reason()}, config);
    EXPECT_TRUE(r.report.route.overridden);
    EXPECT_EQ(r.report.route.mode, router::Mode::repair_eligible);
    EXPECT_FALSE(r.report.repaired);
}

TEST(Run, ScriptErrorsPropagate) {
    EXPECT_THROW(run({profile(good_profile())}), Error);
}

TEST(Replay, MatchesRecordedRun) {
    auto config = testing::desk_config();
    config.tools.faults = {{"kb_search", {"invalid_params"}}};
    auto patch = good_profile();
    patch["workflow"]["steps"][0]["params"]["query"] = "nile";
    const auto r = run({profile(good_profile()), {Role::repair, patch.dump(), false}, reason()}, config);
    const auto report = replay_trace(r.trace.events());
    EXPECT_TRUE(report.match) << report.divergence;
    EXPECT_EQ(report.stages_checked, 7u);
}

TEST(Replay, JsonlRoundTrip) {
    const auto r = run({profile(good_profile()), reason()});
    std::stringstream buffer;
    r.trace.write_jsonl(buffer);
    const auto events = read_trace(buffer);
    EXPECT_EQ(events, r.trace.events());
    EXPECT_TRUE(replay_trace(events).match);
}

TEST(Replay, DetectsTampering) {
    const auto r = run({profile(good_profile()), reason()});
    auto events = r.trace.events();
    for (auto& e : events) {
        if (e["event"] == "step") {
            e["step_event"]["status"] = "failure";
            break;
        }
    }
    const auto report = replay_trace(events);
    EXPECT_FALSE(report.match);
    EXPECT_NE(report.divergence.find("initial step 1"), std::string::npos);

    events = r.trace.events();
    events[0]["config"]["executor"]["n_rec"] = 5;
    EXPECT_FALSE(replay_trace(events).match);

    events = r.trace.events();
    events[0]["v"] = 99;
    EXPECT_THROW(replay_trace(events), Error);
}

TEST(Replay, AbortedRunsReplay) {
    const auto r = run({{Role::profile, "x", false}, {Role::profile, "y", false}});
    EXPECT_TRUE(replay_trace(r.trace.events()).match);
}

TEST(Config, RoundTripAndHash) {
    const auto config = testing::desk_config();
    const auto again = RunConfig::from_json(config.to_json());
    EXPECT_EQ(again.to_json(), config.to_json());
    EXPECT_EQ(again.hash(), config.hash());
    EXPECT_EQ(config.hash().size(), 16u);
    auto changed = config;
    changed.seed = 8;
    EXPECT_NE(changed.hash(), config.hash());
}

TEST(Config, LoadResolvesCorpus) {
    const auto config = RunConfig::load(testing::desk_dir() / "config.json");
    EXPECT_EQ(config.tools.corpus.size(), 13u);
    EXPECT_EQ(config.n_rec, 2);
    EXPECT_EQ(config.prices.output_micros_per_token, 4);
}

TEST(Config, Errors) {
    EXPECT_THROW(RunConfig::from_json(json::parse(R"({"router": {"theta1": 0.8, "theta2": 0.5}})")), Error);
    EXPECT_THROW(RunConfig::from_json(json::parse(R"({"router": {"mode_override": "bold"}})")), Error);
    EXPECT_THROW(RunConfig::from_json(json::parse(R"({"executor": {"n_rec": -1}})")), Error);
    EXPECT_THROW(RunConfig::from_json(json::parse(R"({"verifier": 3})")), Error);
}

TEST(Config, ModeSpecificViews) {
    const auto config = testing::desk_config();
    EXPECT_EQ(config.execution(router::Mode::guarded).mode, router::Mode::guarded);
    EXPECT_TRUE(config.verification(router::Mode::repair_eligible).repair_eligible);
    EXPECT_FALSE(config.verification(router::Mode::guarded).repair_eligible);
}

} // namespace
} // namespace ptr::pipeline
