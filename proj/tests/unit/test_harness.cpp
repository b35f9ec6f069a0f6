#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <regex>

#include "ptr/core/error.hpp"
#include "ptr/harness/bench.hpp"
#include "ptr/harness/metrics.hpp"
#include "ptr/harness/react.hpp"
#include "ptr/tools/builtins.hpp"
#include "../support/scenarios.hpp"

namespace ptr::harness {
namespace {

using nlohmann::json;
using semantic::Role;

BenchmarkItem item(std::vector<std::string> gold, AnswerKind kind = AnswerKind::free_text) {
    return {"x", "q", std::move(gold), kind};
}

// Independent normalizer for the oracle checks.
std::string oracle_normalize(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    s = std::regex_replace(s, std::regex("[!-/:-@\\[-`{-~]"), "");
    s = std::regex_replace(s, std::regex("\\b(a|an|the)\\b"), " ");
    s = std::regex_replace(s, std::regex("\\s+"), " ");
    s = std::regex_replace(s, std::regex("^ | $"), "");
    return s;
}

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize_answer("The Answer.", AnswerKind::free_text), "answer");
    EXPECT_EQ(normalize_answer("18.0", AnswerKind::numeric), "18");
    EXPECT_EQ(normalize_answer("The answer is (C).", AnswerKind::choice_a_e), "C");
    EXPECT_EQ(normalize_text("  A   tale of\tTwo Cities!! "), "tale of two cities");
}

TEST(Normalize, YesNo) {
    EXPECT_EQ(normalize_answer("Yes, it does.", AnswerKind::yes_no), "yes");
    EXPECT_EQ(normalize_answer("No; yes would be wrong", AnswerKind::yes_no), "no");
    EXPECT_EQ(normalize_answer("Nobody knows", AnswerKind::yes_no), std::nullopt);
}

TEST(Normalize, Numeric) {
    EXPECT_EQ(normalize_answer("It costs $1,234.50 in total", AnswerKind::numeric), "1234.5");
    EXPECT_EQ(normalize_answer("From 3 to -7", AnswerKind::numeric), "-7");
    EXPECT_EQ(normalize_answer("0.50", AnswerKind::numeric), "0.5");
    EXPECT_EQ(normalize_answer("007", AnswerKind::numeric), "7");
    EXPECT_EQ(normalize_answer("none", AnswerKind::numeric), std::nullopt);
    EXPECT_EQ(canonical_decimal("-0.0"), "0");
    EXPECT_EQ(canonical_decimal("abc"), std::nullopt);
}

TEST(Normalize, Choice) {
    EXPECT_EQ(normalize_answer("answer: d", AnswerKind::choice_a_e), "D");
    EXPECT_EQ(normalize_answer("b.", AnswerKind::choice_a_e), "B");
    EXPECT_EQ(normalize_answer("Between A and E I pick E", AnswerKind::choice_a_e), "E");
    EXPECT_EQ(normalize_answer("I cannot tell", AnswerKind::choice_a_e), std::nullopt);
    EXPECT_EQ(normalize_answer("(F)", AnswerKind::choice_a_e), std::nullopt);
}

TEST(ExactMatch, Aliases) {
    const auto nyc = item({"New York City", "NYC", "New York"});
    EXPECT_EQ(exact_match("NYC", nyc), 1);
    EXPECT_EQ(exact_match("new york city.", nyc), 1);
    EXPECT_EQ(exact_match("Boston", nyc), 0);
    EXPECT_EQ(exact_match("same words", item({"same words"})), 1);
    EXPECT_EQ(exact_match("18", item({"18.0"}, AnswerKind::numeric)), 1);
    EXPECT_EQ(exact_match("no idea", item({"3"}, AnswerKind::numeric)), 0);
}

TEST(TokenF1, Examples) {
    EXPECT_DOUBLE_EQ(token_f1("new york city", "york city"), 0.8);
    EXPECT_DOUBLE_EQ(token_f1("the same thing", "Same thing!"), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("alpha", "beta"), 0.0);
    EXPECT_DOUBLE_EQ(token_f1("", ""), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("word", ""), 0.0);
    // multiset: a repeated token counts once per gold occurrence
    EXPECT_DOUBLE_EQ(token_f1("paris paris", "paris"), 2.0 * 0.5 * 1.0 / 1.5);
}

TEST(ItemF1, NonFreeTextEqualsEm) {
    const auto yn = item({"yes"}, AnswerKind::yes_no);
    EXPECT_EQ(item_f1("Yes.", yn), 1.0);
    EXPECT_EQ(item_f1("yes and no", item({"no"}, AnswerKind::yes_no)), 0.0);
    EXPECT_DOUBLE_EQ(item_f1("new york city", item({"Boston", "york city"})), 0.8);
}

TEST(Properties, InvariancesAndBruteForceOracle) {
    const std::vector<std::string> vocab = {"the", "a", "new", "york", "city", "nyc", "Paris", "river", "an", "Nile"};
    const std::vector<std::string> noise = {"", ".", "!", "  ", "?", " ,"};
    std::mt19937_64 rng(99);
    auto phrase = [&](int max_tokens) {
        std::string out;
        const int n = std::uniform_int_distribution<int>(1, max_tokens)(rng);
        for (int i = 0; i < n; ++i) {
            if (i) out += ' ';
            out += vocab[rng() % vocab.size()];
        }
        return out;
    };
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> aliases;
        const int n_alias = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int i = 0; i < n_alias; ++i) aliases.push_back(phrase(3));
        // bias toward hits
        const std::string prediction = trial % 3 == 0 ? aliases[rng() % aliases.size()] : phrase(6);

        int oracle = 0;
        for (const auto& alias : aliases) oracle |= oracle_normalize(alias) == oracle_normalize(prediction);
        const auto it = item(aliases);
        ASSERT_EQ(exact_match(prediction, it), oracle) << prediction;

        auto shuffled = aliases;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(exact_match(prediction, item(shuffled)), oracle);
        EXPECT_EQ(exact_match(prediction + noise[rng() % noise.size()], it), oracle);

        const auto other = phrase(6);
        EXPECT_DOUBLE_EQ(token_f1(prediction, other), token_f1(other, prediction));
    }
}

TEST(Compare, PublishedPairs) {
    const auto a = compare(0.660, 0.160);
    EXPECT_EQ(a.delta_em, 0.5);
    EXPECT_EQ(a.advantage, Advantage::ptr);
    const auto b = compare(0.320, 0.780);
    EXPECT_EQ(b.delta_em, -0.46);
    EXPECT_EQ(b.advantage, Advantage::react);
    EXPECT_EQ(compare(0.5, 0.5).advantage, Advantage::tie);
    EXPECT_EQ(compare(0.5, 0.5).delta_em, 0.0);
}

TEST(Compare, FullResultsTableAdvantages) {
    // (ptr EM, react EM, PTR holds the advantage)
    const std::vector<std::tuple<double, double, bool>> rows = {
        {0.660, 0.160, true},  {0.760, 0.580, true},  {0.780, 0.700, true},  {0.820, 0.520, true},
        {0.260, 0.060, true},  {0.300, 0.020, true},  {0.469, 0.160, true},  {0.380, 0.000, true},
        {0.580, 0.360, true},  {0.720, 0.780, false}, {0.820, 0.780, true},  {0.800, 0.720, true},
        {0.837, 0.380, true},  {0.960, 0.900, true},  {0.660, 0.860, false}, {0.980, 0.780, true},
        {0.180, 0.061, true},  {0.860, 0.880, false}, {0.320, 0.780, false}, {0.780, 0.900, false},
        {0.120, 0.080, true},  {0.020, 0.265, false}, {0.122, 0.360, false}, {0.080, 0.167, false}};
    int ptr_wins = 0;
    for (const auto& [p, r, ptr_adv] : rows) {
        const auto c = compare(p, r);
        EXPECT_EQ(c.advantage, ptr_adv ? Advantage::ptr : Advantage::react) << p << " vs " << r;
        ptr_wins += c.advantage == Advantage::ptr;
    }
    EXPECT_EQ(ptr_wins, 16);
}

TEST(Compare, CostRatio) {
    EXPECT_FALSE(compare(1, 0, 0, 100).cost_ratio.has_value());
    EXPECT_DOUBLE_EQ(*compare(1, 0, 200, 500).cost_ratio, 2.5);
    EXPECT_EQ(to_string(Advantage::ptr), std::string("PTR"));
    EXPECT_EQ(to_string(Advantage::react), std::string("ReAct"));
    EXPECT_EQ(to_string(Advantage::tie), std::string("tie"));
}

TEST(Eval, AggregateSingletonAndMeans) {
    EvalResult one;
    one.kind = AnswerKind::free_text;
    ItemResult r;
    r.em = 1;
    r.f1 = 1.0;
    r.model_calls = 3;
    r.cost_micros = 17;
    one.items = {r};
    one.aggregate();
    EXPECT_EQ(one.mean_em, 1.0);
    EXPECT_EQ(one.mean_f1, 1.0);
    EXPECT_EQ(one.mean_model_calls, 3.0);
    EXPECT_EQ(one.cost_micros, 17);

    EvalResult two = one;
    two.kind = AnswerKind::numeric;
    r.em = 0;
    r.f1 = 0.0;
    r.model_calls = 2;
    two.items.push_back(r);
    two.aggregate();
    EXPECT_EQ(two.mean_em, 0.5);
    EXPECT_EQ(two.mean_f1, two.mean_em);
    EXPECT_EQ(two.model_calls, 5u);
    EXPECT_FALSE(two.to_json(false).contains("mean_latency_ms"));
}

class React : public ::testing::Test {
protected:
    ReactReport run(std::vector<semantic::ScriptEntry> script) {
        auto config = testing::desk_config();
        semantic::ScriptedModel model(std::move(script), config.prices);
        auto report = run_react_baseline(task_, testing::desk_metadata(), config, model, pipeline::build_registry(config));
        calls_ = model.calls();
        return report;
    }
    static semantic::ScriptEntry say(const std::string& text) { return {Role::react_step, text, false}; }

    Task task_{"Which river flows through Africa?", std::nullopt, std::nullopt};
    std::size_t calls_ = 0;
};

TEST_F(React, TwoIterations) {
    const auto r = run({say("Thought: search.\nAction: kb_search[nile river]"),
                        say("Thought: found it.\nAction: finish[the Nile]")});
    EXPECT_TRUE(r.finished);
    EXPECT_EQ(r.final_answer, "the Nile");
    EXPECT_EQ(r.model_calls, 2u);
    EXPECT_EQ(calls_, 2u);
    EXPECT_EQ(r.tool_calls, 1u);
    EXPECT_NE(r.steps[0].observation.find("Nile"), std::string::npos);
}

TEST_F(React, CapAtEight) {
    std::vector<semantic::ScriptEntry> script;
    for (int i = 0; i < 12; ++i) script.push_back(say("Action: kb_lookup[Nile]"));
    const auto r = run(script);
    EXPECT_FALSE(r.finished);
    EXPECT_EQ(r.model_calls, 8u);
    EXPECT_EQ(calls_, 8u);
    EXPECT_EQ(r.steps.size(), 8u);
    EXPECT_EQ(r.final_answer, "Nile");
}

TEST_F(React, MalformedThenFinish) {
    const auto r = run({say("I am not sure what to do."), say("Action: finish[Nile]")});
    EXPECT_EQ(r.model_calls, 2u);
    EXPECT_EQ(r.format_errors, 1u);
    EXPECT_TRUE(r.steps[0].format_error);
    EXPECT_EQ(r.steps[0].observation.rfind("Error (format)", 0), 0u);
    EXPECT_EQ(r.final_answer, "Nile");
}

TEST_F(React, ToolErrorsBecomeObservations) {
    const auto r = run({say("Action: web_search[nile]"), say("Action: kb_search[{\"limit\": 2}]"),
                        say("Action: calc[2 +]"), say("Action: finish[x]")});
    EXPECT_EQ(r.steps[0].observation.rfind("Error (unknown_tool)", 0), 0u);
    EXPECT_EQ(r.steps[1].observation.rfind("Error (invalid_params)", 0), 0u);
    EXPECT_NE(r.steps[2].observation.find("invalid_params"), std::string::npos);
    // the JSON-object call and the calc call both reach their tools
    EXPECT_EQ(r.tool_calls, 2u);
}

TEST_F(React, PromptCarriesTranscript) {
    ReactStep step;
    step.response = "Action: kb_search[nile]";
    step.observation = "obs text";
    const auto prompt = build_react_prompt(task_, testing::desk_metadata(), {step});
    EXPECT_NE(prompt.find("## Question\nWhich river flows through Africa?"), std::string::npos);
    EXPECT_NE(prompt.find("Observation: obs text"), std::string::npos);
    EXPECT_EQ(prompt.find("## Context"), std::string::npos);
}

TEST(ReactAction, Parsing) {
    auto a = parse_react_action("Thought: x\nAction: kb_search[turing machine]\n");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->name, "kb_search");
    EXPECT_EQ(a->args, "turing machine");
    a = parse_react_action("Action: kb_search[a]\nAction: finish[b]");
    EXPECT_EQ(a->name, "finish");
    a = parse_react_action("let me think\nfinish[42]\nmore");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->args, "42");
    EXPECT_FALSE(parse_react_action("Action: finish[unclosed"));
    EXPECT_FALSE(parse_react_action("nothing here"));
}

json tiny_suite() {
    return json::parse(R"({
      "name": "tiny",
      "metadata": {"tool_catalog": []},
      "scripts": {},
      "benchmarks": [{"name": "b", "answer_kind": "numeric", "items": [{"id": "i1", "question": "q", "gold": ["4"]}]}]
    })");
}

TEST(Suite, ParsingAndErrors) {
    const auto suite = Suite::from_json(tiny_suite());
    EXPECT_EQ(suite.item_count(), 1u);
    EXPECT_EQ(suite.benchmarks[0].kind, AnswerKind::numeric);

    auto empty = tiny_suite();
    empty["benchmarks"] = json::array();
    try {
        Suite::from_json(empty);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty_suite");
    }
    auto dup = tiny_suite();
    dup["benchmarks"][0]["items"].push_back(dup["benchmarks"][0]["items"][0]);
    EXPECT_THROW(Suite::from_json(dup), Error);
    auto no_gold = tiny_suite();
    no_gold["benchmarks"][0]["items"][0]["gold"] = json::array();
    EXPECT_THROW(Suite::from_json(no_gold), Error);
}

TEST(Bench, SingletonMeansEqualItem) {
    auto j = tiny_suite();
    j["metadata"] = testing::read_json(testing::desk_dir() / "metadata.json");
    j["scripts"] = json::parse(R"({"i1": {
      "ptr": [{"role": "profile", "json": {"workflow": {"steps": [{"tool_id": "calc", "params": {"expression": "2 + 2"}}]},
               "confidence": 0.9}},
              {"role": "reason", "text": "Answer: 4"}],
      "react": [{"role": "react_step", "text": "Action: calc[2 * 3]"}, {"role": "react_step", "text": "Action: finish[6]"}]
    }})");
    const auto suite = Suite::from_json(j);
    const auto config = testing::desk_config();
    const auto report = run_bench(suite, config, scripted_models(suite, config));
    ASSERT_EQ(report.benchmarks.size(), 1u);
    const auto& b = report.benchmarks[0];
    EXPECT_EQ(b.ptr.mean_em, 1.0);
    EXPECT_EQ(b.ptr.items[0].em, 1);
    EXPECT_EQ(b.react.mean_em, 0.0);
    EXPECT_EQ(b.comparison.advantage, Advantage::ptr);
    EXPECT_EQ(b.ptr.mean_model_calls, 2.0);
    EXPECT_EQ(b.react.model_calls, 2u);
}

TEST(Bench, MissingScriptIsRecordedAsError) {
    auto j = tiny_suite();
    j["metadata"] = testing::read_json(testing::desk_dir() / "metadata.json");
    const auto suite = Suite::from_json(j);
    const auto config = testing::desk_config();
    const auto report = run_bench(suite, config, scripted_models(suite, config));
    EXPECT_EQ(report.benchmarks[0].ptr.items[0].outcome, "error");
    EXPECT_EQ(report.benchmarks[0].ptr.items[0].em, 0);
}

TEST(Bench, DeskSuiteStableAcrossJobs) {
    const auto suite = Suite::load(testing::desk_dir() / "suite.json");
    const auto config = testing::desk_config();
    BenchOptions serial;
    BenchOptions parallel;
    parallel.jobs = 4;
    const auto a = run_bench(suite, config, scripted_models(suite, config), serial).to_json().dump();
    const auto b = run_bench(suite, config, scripted_models(suite, config), parallel).to_json().dump();
    EXPECT_EQ(a, b);
    EXPECT_EQ(suite.item_count(), 10u);
}

} // namespace
} // namespace ptr::harness
