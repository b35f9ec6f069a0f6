#include <gtest/gtest.h>

#include <cmath>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/router/risk.hpp"
#include "../support/scenarios.hpp"

namespace ptr::router {
namespace {

using nlohmann::json;

Profile make_profile(const json& j) {
    Profile p;
    from_json(j, p);
    return p;
}

json base_profile() {
    return json::parse(R"({
      "workflow": {"steps": [
        {"tool_id": "kb_search", "params": {"query": "nile", "limit": {"$auto": "top_title"}}},
        {"tool_id": "kb_lookup", "params": {"title": {"$ref": "result.kb_search_1.top_title"}}},
        {"tool_id": "calc", "params": {"expression": "1 + 1"}},
        {"tool_id": "calc", "params": {"expression": "2 + 2"}}
      ]},
      "confidence": 0.5,
      "fragile_points": ["a", "b"],
      "replan_conditions": ["failure.count > 0"],
      "branch_rules": [
        {"predicate": "failure.count > 0", "modifier": "set expression = \"3\"", "target_step": 3},
        {"predicate": "failure.count > 1", "modifier": "set expression = \"4\"", "target_step": 3}
      ]
    })");
}

TEST(Components, HandComputed) {
    auto metadata = testing::desk_metadata();
    metadata.history = HistorySummary{10, 0.3};
    const auto c = compute_components(metadata, make_profile(base_profile()));
    // 2 deferred of 5 slots.
    EXPECT_DOUBLE_EQ(c.schema(), 2.0 / 5.0);
    // 0.6*0.5 + 0.2*2/5 + 0.2*1/5
    EXPECT_NEAR(c.planning(), 0.3 + 0.08 + 0.04, 1e-12);
    // one distinct target step of four
    EXPECT_DOUBLE_EQ(c.method(), 0.25);
    EXPECT_DOUBLE_EQ(c.scale(), 0.4);
    EXPECT_DOUBLE_EQ(c.history(), 0.3);
}

TEST(Components, PlanningEndpoints) {
    auto j = base_profile();
    j["confidence"] = 1.0;
    j["fragile_points"] = json::array();
    j["replan_conditions"] = json::array();
    EXPECT_EQ(compute_components(testing::desk_metadata(), make_profile(j)).planning(), 0.0);
    j["confidence"] = 0.0;
    j["fragile_points"] = {"1", "2", "3", "4", "5"};
    j["replan_conditions"] = json::array();
    for (int i = 0; i < 5; ++i) j["replan_conditions"].push_back("failure.count > " + std::to_string(i));
    EXPECT_DOUBLE_EQ(compute_components(testing::desk_metadata(), make_profile(j)).planning(), 1.0);
}

TEST(Components, NoHistoryIsNeutral) {
    auto metadata = testing::desk_metadata();
    metadata.history.reset();
    EXPECT_EQ(compute_components(metadata, make_profile(base_profile())).history(), 0.5);
}

TEST(Components, ScaleSaturatesAtTenSteps) {
    auto j = base_profile();
    j["branch_rules"] = json::array();
    for (int i = 0; i < 8; ++i) j["workflow"]["steps"].push_back({{"tool_id", "calc"}, {"params", {{"expression", "1"}}}});
    EXPECT_EQ(compute_components(testing::desk_metadata(), make_profile(j)).scale(), 1.0);
}

TEST(Risk, WeightedSum) {
    const RiskWeights equal;
    EXPECT_EQ(compute_risk(RiskComponents{{0, 0, 0, 0, 0}}, equal), 0.0);
    EXPECT_NEAR(compute_risk(RiskComponents{{1, 1, 1, 1, 1}}, RiskWeights({0.1, 0.2, 0.3, 0.15, 0.25})), 1.0, 1e-12);
    EXPECT_NEAR(compute_risk(RiskComponents{{0.4, 0.1, 0.0, 0.2, 0.3}}, equal), 0.20, 1e-12);
}

TEST(Risk, InvalidWeightsAndThresholds) {
    EXPECT_THROW(RiskWeights({0.5, 0.5, 0.0, 0.0, 0.0}), Error);
    EXPECT_THROW(RiskWeights({0.3, 0.3, 0.3, 0.3, 0.3}), Error);
    EXPECT_THROW(RouteThresholds(0.7, 0.35), Error);
    EXPECT_THROW(RouteThresholds(0.0, 0.5), Error);
    EXPECT_THROW(RouteThresholds(0.5, 1.0), Error);
}

TEST(Route, BoundariesAreInclusiveFromBelow) {
    const RouteThresholds t;
    EXPECT_EQ(route(0.0, t), Mode::pure);
    EXPECT_EQ(route(std::nextafter(0.35, 0.0), t), Mode::pure);
    EXPECT_EQ(route(0.35, t), Mode::guarded);
    EXPECT_EQ(route(std::nextafter(0.70, 0.0), t), Mode::guarded);
    EXPECT_EQ(route(0.70, t), Mode::repair_eligible);
    EXPECT_EQ(route(1.0, t), Mode::repair_eligible);
}

TEST(Route, ModeNames) {
    for (auto m : {Mode::pure, Mode::guarded, Mode::repair_eligible}) EXPECT_EQ(mode_from_string(to_string(m)), m);
    EXPECT_FALSE(mode_from_string("reckless"));
}

TEST(Route, ProfileEndToEnd) {
    auto metadata = testing::desk_metadata();
    metadata.history = HistorySummary{10, 0.3};
    const auto r = route_profile(metadata, make_profile(base_profile()), RiskWeights{}, RouteThresholds{});
    const double expected = 0.2 * (0.4 + 0.42 + 0.25 + 0.4 + 0.3);
    EXPECT_NEAR(r.breakdown.total, expected, 1e-12);
    EXPECT_EQ(r.mode, Mode::guarded);
    EXPECT_FALSE(r.overridden);
}

} // namespace
} // namespace ptr::router
