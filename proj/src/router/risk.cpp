#include "ptr/router/risk.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ptr/core/error.hpp"

namespace ptr::router {

RiskWeights::RiskWeights(const std::array<double, 5>& weights) : weights_(weights) {
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw Error("invalid_weights", "risk weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("invalid_weights", "risk weights must sum to 1");
}

RouteThresholds::RouteThresholds(double theta1, double theta2) : theta1_(theta1), theta2_(theta2) {
    if (!(0.0 < theta1 && theta1 < theta2 && theta2 < 1.0)) {
        throw Error("invalid_thresholds", "route thresholds must satisfy 0 < theta1 < theta2 < 1");
    }
}

RiskComponents compute_components(const Metadata& metadata, const Profile& profile) {
    RiskComponents out;
    const auto& steps = profile.workflow.steps;

    std::size_t slots = 0;
    std::size_t deferred = 0;
    for (const auto& step : steps) {
        for (const auto& [name, value] : step.params) {
            ++slots;
            if (!std::holds_alternative<Value>(value)) ++deferred;
        }
    }
    out.c[0] = slots == 0 ? 0.0 : static_cast<double>(deferred) / static_cast<double>(slots);

    const double fragile = static_cast<double>(std::min<std::size_t>(profile.fragile_points.size(), 5)) / 5.0;
    const double replan = static_cast<double>(std::min<std::size_t>(profile.replan_conditions.size(), 5)) / 5.0;
    out.c[1] = std::clamp(0.6 * (1.0 - profile.confidence) + 0.2 * fragile + 0.2 * replan, 0.0, 1.0);

    std::set<int> branched;
    for (const auto& rule : profile.branch_rules) {
        if (rule.target_step >= 1 && rule.target_step <= static_cast<int>(steps.size())) {
            branched.insert(rule.target_step);
        }
    }
    out.c[2] = steps.empty() ? 0.0 : static_cast<double>(branched.size()) / static_cast<double>(steps.size());

    out.c[3] = static_cast<double>(std::min<std::size_t>(steps.size(), 10)) / 10.0;

    out.c[4] = metadata.history ? std::clamp(metadata.history->prior_failure_rate, 0.0, 1.0) : 0.5;
    return out;
}

double compute_risk(const RiskComponents& components, const RiskWeights& weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) total += weights[i] * components.c[i];
    return std::clamp(total, 0.0, 1.0);
}

Mode route(double risk, const RouteThresholds& thresholds) {
    if (risk < thresholds.theta1()) return Mode::pure;
    if (risk < thresholds.theta2()) return Mode::guarded;
    return Mode::repair_eligible;
}

RouteMode route_profile(const Metadata& metadata, const Profile& profile, const RiskWeights& weights,
                        const RouteThresholds& thresholds) {
    RouteMode out;
    out.breakdown.components = compute_components(metadata, profile);
    out.breakdown.total = compute_risk(out.breakdown.components, weights);
    out.mode = route(out.breakdown.total, thresholds);
    return out;
}

const char* to_string(Mode mode) {
    switch (mode) {
    case Mode::pure: return "pure";
    case Mode::guarded: return "guarded";
    case Mode::repair_eligible: return "repair_eligible";
    }
    return "pure";
}

std::optional<Mode> mode_from_string(const std::string& name) {
    for (auto mode : {Mode::pure, Mode::guarded, Mode::repair_eligible}) {
        if (name == to_string(mode)) return mode;
    }
    return std::nullopt;
}

} // namespace ptr::router
