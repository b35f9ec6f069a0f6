#include <gtest/gtest.h>

#include "ptr/core/json_io.hpp"
#include "ptr/executor/executor.hpp"
#include "ptr/tools/builtins.hpp"
#include "../support/scenarios.hpp"

namespace ptr::executor {
namespace {

using nlohmann::json;
using router::Mode;

Profile make_profile(const json& j) {
    Profile p;
    from_json(j, p);
    return p;
}

tools::ToolRegistry desk_registry(const json& faults = json::object()) {
    auto kb = std::make_shared<tools::KnowledgeBase>(tools::KnowledgeBase::from_json(testing::desk_corpus()));
    auto registry = tools::make_builtin_registry(kb);
    if (!faults.empty()) tools::apply_faults(registry, faults);
    return registry;
}

RuleSet desk_rules() {
    return testing::desk_metadata().constraints;
}

json lookup_profile() {
    return json::parse(R"({
      "workflow": {"steps": [
        {"tool_id": "kb_search", "params": {"query": "nile river africa"}},
        {"tool_id": "kb_lookup", "params": {"title": {"$ref": "result.kb_search_1.top_title"}}},
        {"tool_id": "calc", "params": {"expression": "6 * 7"}}
      ]},
      "confidence": 0.9
    })");
}

TEST(Resolve, LiteralsUnchanged) {
    const auto rules = CompiledRuleSet::compile(desk_rules());
    const auto r = resolve_step({{"expression", Value("1 + 1")}}, rules, ExecutionState{});
    EXPECT_FALSE(r.failure);
    EXPECT_EQ(r.params.at("expression"), json("1 + 1"));
}

TEST(Resolve, PlaceholderAndAuto) {
    const auto rules = CompiledRuleSet::compile(desk_rules());
    ExecutionState s;
    s.result_store["kb_search_1"] = json{{"count", 1}, {"top_title", "Paris"}};
    const auto r = resolve_step({{"title", Placeholder{"result.kb_search_1.top_title"}}}, rules, s);
    EXPECT_EQ(r.params.at("title"), json("Paris"));
    const auto a = resolve_step({{"title", AutoMarker{"top_title"}}}, rules, s);
    EXPECT_EQ(a.params.at("title"), json("Paris"));
}

TEST(Resolve, MissingReferencesFailHard) {
    const auto rules = CompiledRuleSet::compile(desk_rules());
    const ExecutionState empty;
    EXPECT_EQ(resolve_step({{"title", AutoMarker{"top_title"}}}, rules, empty).failure, FailureReason::unresolved_auto);
    EXPECT_EQ(resolve_step({{"title", Placeholder{"result.kb_search_1.top_title"}}}, rules, empty).failure,
              FailureReason::missing_placeholder);
    EXPECT_EQ(classify(FailureReason::unresolved_auto), Severity::hard);
    EXPECT_EQ(classify(FailureReason::missing_placeholder), Severity::hard);
    EXPECT_EQ(classify(FailureReason::invalid_params), Severity::hard);
    EXPECT_EQ(classify(FailureReason::modifier_error), Severity::hard);
    EXPECT_EQ(classify(FailureReason::unknown_tool), Severity::hard);
    EXPECT_EQ(classify(FailureReason::timeout), Severity::soft);
    EXPECT_EQ(classify(FailureReason::not_found), Severity::soft);
    EXPECT_EQ(classify(FailureReason::empty_result), Severity::soft);
    EXPECT_EQ(classify(FailureReason::rate_limited), Severity::soft);
}

TEST(Branch, PureModeIsIdentity) {
    const auto rules = compile_branch_rules({{"result.kb_search_1.count == 0", "set limit = limit * 2", 1}});
    ExecutionState s;
    s.result_store["kb_search_1"] = json{{"count", 0}};
    const auto out = branch_step({{"limit", 5}}, 1, rules, Mode::pure, s, nullptr);
    EXPECT_EQ(out.params.at("limit"), json(5));
    EXPECT_TRUE(s.branch_log.empty());
}

TEST(Branch, GuardedFiresAndLogs) {
    const auto rules = compile_branch_rules({{"result.kb_search_1.count == 0", "set limit = limit * 2", 1}});
    ExecutionState s;
    s.result_store["kb_search_1"] = json{{"count", 0}};
    const auto out = branch_step({{"limit", 5}}, 1, rules, Mode::guarded, s, nullptr);
    EXPECT_EQ(out.params.at("limit"), json(10));
    EXPECT_EQ(out.fired, (std::vector<int>{0}));
    ASSERT_EQ(s.branch_log.size(), 1u);
    EXPECT_EQ(s.branch_log[0].before.at("limit"), json(5));
    EXPECT_EQ(s.branch_log[0].after.at("limit"), json(10));
}

TEST(Branch, FalsePredicateOrOtherStep) {
    const auto rules = compile_branch_rules({{"result.kb_search_1.count == 0", "set limit = limit * 2", 2}});
    ExecutionState s;
    s.result_store["kb_search_1"] = json{{"count", 3}};
    EXPECT_EQ(branch_step({{"limit", 5}}, 2, rules, Mode::guarded, s, nullptr).params.at("limit"), json(5));
    s.result_store["kb_search_1"] = json{{"count", 0}};
    EXPECT_EQ(branch_step({{"limit", 5}}, 1, rules, Mode::guarded, s, nullptr).params.at("limit"), json(5));
    EXPECT_TRUE(s.branch_log.empty());
}

TEST(Workflow, AllSuccess) {
    const auto s = run_workflow(make_profile(lookup_profile()), desk_rules(), {}, desk_registry(), ExecutionState{});
    ASSERT_EQ(s.trace.size(), 3u);
    EXPECT_EQ(s.result_store.size(), 3u);
    EXPECT_EQ(s.result_store.at("kb_lookup_1")["title"], "Nile");
    EXPECT_EQ(s.result_store.at("calc_1")["value"], 42);
    for (const auto& e : s.trace) {
        EXPECT_EQ(e.status, StepStatus::success);
        EXPECT_EQ(e.attempts.size(), 1u);
    }
    EXPECT_TRUE(s.failure_log.empty());
}

TEST(Workflow, RetryWithRecoveryThenSuccess) {
    auto j = lookup_profile();
    j["workflow"]["steps"][2]["annotation"] = {{"recovery", {{{"on", "timeout"}, {"modify", "set expression = \"1 + 1\""}}}}};
    ExecutionConfig config;
    config.n_rec = 2;
    const auto s = run_workflow(make_profile(j), desk_rules(), config, desk_registry(json{{"calc", {"timeout"}}}),
                                ExecutionState{});
    const auto* calc = s.find_step("calc_1");
    ASSERT_NE(calc, nullptr);
    ASSERT_EQ(calc->attempts.size(), 2u);
    EXPECT_EQ(calc->attempts[1].params.at("expression"), json("1 + 1"));
    EXPECT_EQ(calc->status, StepStatus::success);
    EXPECT_EQ(s.result_store.at("calc_1")["value"], 2);
    ASSERT_EQ(s.failure_log.size(), 1u);
    EXPECT_EQ(s.failure_log[0].attempt, 1);
}

TEST(Workflow, NoMatchingRecoveryRuleMeansNoRetry) {
    ExecutionConfig config;
    config.n_rec = 2;
    const auto s = run_workflow(make_profile(lookup_profile()), desk_rules(), config,
                                desk_registry(json{{"kb_lookup", {"timeout", "timeout", "timeout"}}}), ExecutionState{});
    EXPECT_EQ(s.find_step("kb_lookup_1")->attempts.size(), 1u);
    EXPECT_EQ(s.find_step("kb_lookup_1")->severity, Severity::soft);
}

TEST(Workflow, ExhaustedSoftFailureContinues) {
    auto j = lookup_profile();
    j["workflow"]["steps"][1]["annotation"] = {{"recovery", {{{"on", "timeout"}, {"modify", "set title = \"Nile\""}}}}};
    ExecutionConfig config;
    config.n_rec = 2;
    const auto s = run_workflow(make_profile(j), desk_rules(), config,
                                desk_registry(json{{"kb_lookup", {"timeout", "timeout", "timeout"}}}), ExecutionState{});
    const auto* lookup = s.find_step("kb_lookup_1");
    ASSERT_NE(lookup, nullptr);
    EXPECT_EQ(lookup->attempts.size(), 3u);
    EXPECT_EQ(lookup->status, StepStatus::failure);
    EXPECT_EQ(lookup->severity, Severity::soft);
    EXPECT_EQ(s.find_step("calc_1")->status, StepStatus::success);
}

TEST(Workflow, HardFailureSkipsRest) {
    auto j = lookup_profile();
    j["workflow"]["steps"][1]["params"]["title"] = {{"$ref", "result.kb_search_1.nope"}};
    const auto s = run_workflow(make_profile(j), desk_rules(), {}, desk_registry(), ExecutionState{});
    ASSERT_EQ(s.trace.size(), 3u);
    EXPECT_EQ(s.trace[1].failure, FailureReason::missing_placeholder);
    EXPECT_EQ(s.trace[1].severity, Severity::hard);
    EXPECT_TRUE(s.trace[1].attempts.empty());
    EXPECT_EQ(s.trace[2].status, StepStatus::skipped);
    EXPECT_EQ(s.result_store.count("calc_1"), 0u);
}

TEST(Workflow, RepeatedToolsGetSuffixes) {
    auto j = lookup_profile();
    j["workflow"]["steps"][1] = {{"tool_id", "kb_search"}, {"params", {{"query", "eiffel tower"}}}};
    const auto s = run_workflow(make_profile(j), desk_rules(), {}, desk_registry(), ExecutionState{});
    EXPECT_EQ(s.trace[0].key, "kb_search_1");
    EXPECT_EQ(s.trace[1].key, "kb_search_2");
    EXPECT_TRUE(s.result_store.count("kb_search_2"));
}

TEST(Workflow, DeterministicAndBounded) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto sc = testing::make_scenario(seed);
        Profile p;
        std::mt19937_64 rng(seed);
        from_json(testing::random_profile(rng, 1 + static_cast<int>(seed % 8)), p);
        ExecutionConfig config;
        config.n_rec = sc.config.n_rec;
        config.mode = seed % 2 ? Mode::guarded : Mode::pure;
        auto run = [&] {
            return run_workflow(p, sc.metadata.constraints, config, pipeline::build_registry(sc.config),
                                initial_state(sc.task));
        };
        const auto a = run();
        const auto b = run();
        ASSERT_EQ(a, b) << "seed " << seed;
        for (const auto& e : a.trace) EXPECT_LE(e.attempts.size(), static_cast<std::size_t>(1 + config.n_rec));
        if (config.mode == Mode::pure) EXPECT_TRUE(a.branch_log.empty());
    }
}

TEST(InitialState, EnvFromContext) {
    Task t;
    t.objective = "x";
    t.context = KeyValueMap{{"mode", "strict"}};
    EXPECT_EQ(initial_state(t).env.at("mode"), json("strict"));
    EXPECT_TRUE(initial_state(t).trace.empty());
}

} // namespace
} // namespace ptr::executor
