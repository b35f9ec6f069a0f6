#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/executor/executor.hpp"
#include "ptr/semantic/http_provider.hpp"
#include "ptr/semantic/prompts.hpp"
#include "ptr/tools/builtins.hpp"
#include "../support/scenarios.hpp"

namespace ptr::semantic {
namespace {

using nlohmann::json;

bool updating() {
    return std::getenv("PTR_UPDATE_GOLDEN") != nullptr;
}

void expect_golden(const std::string& name, const std::string& actual) {
    const auto path = testing::source_dir() / "tests/golden/prompts" / name;
    if (updating()) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    EXPECT_EQ(actual, testing::read_text(path)) << "golden " << name << " differs";
}

Task desk_task() {
    Task t;
    t.objective = "Who formalized the Turing machine?";
    return t;
}

Profile desk_profile() {
    Profile p;
    from_json(json::parse(R"({
      "workflow": {"steps": [
        {"tool_id": "kb_search", "params": {"query": "turing machine"}},
        {"tool_id": "kb_lookup", "params": {"title": {"$auto": "top_title"}}, "annotation": {"note": "read the top hit"}}
      ]},
      "confidence": 0.7,
      "fragile_points": ["search ranking"],
      "replan_conditions": ["result.kb_search_1.count == 0"]
    })"),
              p);
    return p;
}

ExecutionState desk_state(const json& faults = json::object()) {
    auto kb = std::make_shared<tools::KnowledgeBase>(tools::KnowledgeBase::from_json(testing::desk_corpus()));
    auto registry = tools::make_builtin_registry(kb);
    if (!faults.empty()) tools::apply_faults(registry, faults);
    executor::ExecutionConfig config;
    config.n_rec = 1;
    return executor::run_workflow(desk_profile(), testing::desk_metadata().constraints, config, registry,
                                  executor::initial_state(desk_task()));
}

TEST(Prompts, ProfileGolden) {
    const auto prompt = build_profile_prompt(desk_task(), testing::desk_metadata());
    EXPECT_NE(prompt.find(profile_json_schema()), std::string::npos);
    expect_golden("profile.txt", prompt);
    expect_golden("profile_retry.txt", build_profile_retry_prompt(desk_task(), testing::desk_metadata(), "not json",
                                                                  "no JSON object found"));
}

TEST(Prompts, RepairAndReasonGolden) {
    const auto metadata = testing::desk_metadata();
    const auto state = desk_state(json{{"kb_lookup", {"timeout", "timeout"}}});
    const auto z = verifier::verify(state, metadata, desk_profile(), {});
    expect_golden("repair.txt", build_repair_prompt(desk_task(), metadata, desk_profile(), state, z));
    expect_golden("reason.txt", build_reason_prompt(desk_task(), metadata, state, z));
}

TEST(Prompts, Deterministic) {
    const auto metadata = testing::desk_metadata();
    const auto state = desk_state();
    const auto z = verifier::verify(state, metadata, desk_profile(), {});
    EXPECT_EQ(build_reason_prompt(desk_task(), metadata, state, z), build_reason_prompt(desk_task(), metadata, state, z));
}

TEST(Prompts, SchemaDocMatches) {
    EXPECT_NO_THROW(static_cast<void>(json::parse(profile_json_schema())));
    const auto path = testing::source_dir() / "docs/profile.schema.json";
    if (updating()) std::ofstream(path, std::ios::binary) << profile_json_schema();
    EXPECT_EQ(testing::read_text(path), profile_json_schema());
}

TEST(ParseProfile, ToleratesProseAndFences) {
    json body;
    to_json(body, desk_profile());
    const auto text = "Here is the plan:\n```json\n" + body.dump(2) + "\n```\nDone {not json}";
    EXPECT_EQ(parse_profile_response(text), desk_profile());
}

TEST(ParseProfile, Errors) {
    for (const std::string bad : {"no object here", "{\"workflow\": ", "{\"confidence\": 0.5}", "[1, 2]"}) {
        try {
            parse_profile_response(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "parse_error") << bad;
        }
    }
}

TEST(FinalAnswer, LastMarker) {
    EXPECT_EQ(extract_final_answer("Reasoning...\nAnswer: Alan Turing\n"), "Alan Turing");
    EXPECT_EQ(extract_final_answer("Answer: x\nAnswer: y"), "y");
    EXPECT_EQ(extract_final_answer("  just this  "), "just this");
}

TEST(Scripted, InOrderWithRoles) {
    ScriptedModel model({{Role::profile, "p", false}, {Role::repair, "r", true}, {Role::reason, "Answer: a", false}},
                        PriceTable{1, 4});
    const auto first = model.complete({Role::profile, "12345678", {}});
    EXPECT_EQ(first.text, "p");
    EXPECT_EQ(first.usage.input_tokens, 2);
    EXPECT_EQ(first.usage.output_tokens, 1);
    EXPECT_EQ(first.cost_micros, 2 + 4);
    // optional repair entry skipped for a reason call
    EXPECT_EQ(model.complete({Role::reason, "q", {}}).text, "Answer: a");
    EXPECT_EQ(model.calls(), 2u);
    try {
        model.complete({Role::reason, "q", {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "script_exhausted");
    }
}

TEST(Scripted, RoleMismatch) {
    ScriptedModel model({{Role::profile, "p", false}});
    try {
        model.complete({Role::reason, "q", {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "role_mismatch");
    }
}

TEST(Scripted, ParseScript) {
    const auto script = ScriptedModel::parse_script(
        json::parse(R"([{"role": "profile", "json": {"a": 1}}, {"role": "reason", "text": "t", "optional": true}])"));
    ASSERT_EQ(script.size(), 2u);
    EXPECT_EQ(script[0].text, "{\"a\":1}");
    EXPECT_TRUE(script[1].optional);
    EXPECT_THROW(ScriptedModel::parse_script(json::parse(R"([{"role": "critic", "text": ""}])")), Error);
}

TEST(Tokens, Estimate) {
    EXPECT_EQ(estimate_tokens(""), 0);
    EXPECT_EQ(estimate_tokens("abcd"), 1);
    EXPECT_EQ(estimate_tokens("abcde"), 2);
    EXPECT_EQ(to_micros(0.000002), 2);
    EXPECT_EQ(to_micros(1.25), 1250000);
}

TEST(Ledger, CountsAndBudget) {
    BudgetLedger ledger(10);
    ledger.record_and_check(Role::profile, {"", {1, 1}, 4}, 1);
    ledger.record_and_check(Role::profile, {"", {1, 1}, 4}, 2);
    EXPECT_EQ(ledger.stage_calls(), 1u);
    EXPECT_EQ(ledger.raw_calls(), 2u);
    try {
        ledger.record_and_check(Role::reason, {"", {1, 1}, 4}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "budget_exceeded");
    }
    EXPECT_EQ(ledger.total_micros(), 12);
    EXPECT_EQ(ledger.raw_calls(), 3u);
    EXPECT_EQ(ledger.stage_calls(Role::reason), 1u);
    EXPECT_EQ(ledger.total_usage(), (Usage{3, 3}));
}

TEST(Ledger, ExactLimitIsAllowed) {
    BudgetLedger ledger(8);
    ledger.record_and_check(Role::profile, {"", {}, 4});
    EXPECT_NO_THROW(ledger.record_and_check(Role::reason, {"", {}, 4}));
}

class LocalEndpoint : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_body_ = json::parse(req.body);
            last_auth_ = req.get_header_value("Authorization");
            if (last_body_["messages"][0]["content"] == "fail") {
                res.status = 500;
                return;
            }
            res.set_content(R"({"choices":[{"message":{"content":"Answer: 42"}}],"usage":{"prompt_tokens":7,"completion_tokens":3}})",
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }
    ProviderConfig config() const {
        ProviderConfig c;
        c.id = "local";
        c.base_url = "http://127.0.0.1:" + std::to_string(port_);
        c.model = "m";
        c.api_key_env = "PTR_TEST_PROVIDER_KEY";
        c.prices = {2, 5};
        c.timeout_seconds = 5;
        return c;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    json last_body_;
    std::string last_auth_;
};

TEST_F(LocalEndpoint, SendsPromptAndReadsUsage) {
    setenv("PTR_TEST_PROVIDER_KEY", "secret-value", 1);
    HttpProvider provider(config());
    const auto response = provider.complete({Role::reason, "hello", {0.0, 7}});
    EXPECT_EQ(response.text, "Answer: 42");
    EXPECT_EQ(response.usage, (Usage{7, 3}));
    EXPECT_EQ(response.cost_micros, 7 * 2 + 3 * 5);
    EXPECT_EQ(last_body_["model"], "m");
    EXPECT_EQ(last_body_["seed"], 7);
    EXPECT_EQ(last_auth_, "Bearer secret-value");
}

TEST_F(LocalEndpoint, HttpErrorsAndMissingKey) {
    setenv("PTR_TEST_PROVIDER_KEY", "secret-value", 1);
    HttpProvider provider(config());
    try {
        provider.complete({Role::reason, "fail", {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "provider_error");
        EXPECT_EQ(std::string(e.what()).find("secret-value"), std::string::npos);
    }
    unsetenv("PTR_TEST_PROVIDER_KEY");
    EXPECT_THROW(provider.complete({Role::reason, "hello", {}}), Error);
}

TEST(ProviderConfig, FromJson) {
    const auto c = ProviderConfig::from_json(
        "p", json::parse(R"({"base_url":"http://x","model":"m","api_key_env":"K","prices":{"input_micros_per_token":3}})"));
    EXPECT_EQ(c.path, "/v1/chat/completions");
    EXPECT_EQ(c.prices.input_micros_per_token, 3);
    EXPECT_THROW(ProviderConfig::from_json("p", json{{"model", "m"}}), Error);
}

} // namespace
} // namespace ptr::semantic
