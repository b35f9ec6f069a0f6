#pragma once

#include <array>
#include <optional>
#include <string>

#include "ptr/core/types.hpp"

namespace ptr::router {

/// Positive weights summing to one (within 1e-9).
class RiskWeights {
public:
    RiskWeights() : weights_{0.2, 0.2, 0.2, 0.2, 0.2} {}
    /// Throws Error("invalid_weights") when a weight is non-positive or the sum is off.
    explicit RiskWeights(const std::array<double, 5>& weights);

    double operator[](std::size_t i) const { return weights_[i]; }
    const std::array<double, 5>& values() const { return weights_; }

private:
    std::array<double, 5> weights_;
};

/// Schema, planning, method, scale and history risk, each in [0,1].
struct RiskComponents {
    std::array<double, 5> c{};

    double schema() const { return c[0]; }
    double planning() const { return c[1]; }
    double method() const { return c[2]; }
    double scale() const { return c[3]; }
    double history() const { return c[4]; }
};

struct RiskBreakdown {
    RiskComponents components;
    double total = 0.0;
};

enum class Mode { pure, guarded, repair_eligible };

/// 0 < theta1 < theta2 < 1.
class RouteThresholds {
public:
    RouteThresholds() = default;
    /// Throws Error("invalid_thresholds") unless 0 < theta1 < theta2 < 1.
    RouteThresholds(double theta1, double theta2);

    double theta1() const { return theta1_; }
    double theta2() const { return theta2_; }

private:
    double theta1_ = 0.35;
    double theta2_ = 0.70;
};

struct RouteMode {
    Mode mode = Mode::pure;
    RiskBreakdown breakdown;
    bool overridden = false;
};

/// c1 = share of param slots that are auto-marked or placeholders
/// c2 = clamp(0.6(1-confidence) + 0.2 min(|fragile|,5)/5 + 0.2 min(|replan|,5)/5)
/// c3 = share of steps targeted by at least one branch rule
/// c4 = min(L,10)/10
/// c5 = prior failure rate, or 0.5 without history
RiskComponents compute_components(const Metadata& metadata, const Profile& profile);

/// Sum of w_i c_i, clamped into [0,1] against rounding.
double compute_risk(const RiskComponents& components, const RiskWeights& weights);

Mode route(double risk, const RouteThresholds& thresholds);

/// Full routing map: components, risk and mode for (metadata, profile).
RouteMode route_profile(const Metadata& metadata, const Profile& profile, const RiskWeights& weights,
                        const RouteThresholds& thresholds);

const char* to_string(Mode mode);
std::optional<Mode> mode_from_string(const std::string& name);

} // namespace ptr::router
