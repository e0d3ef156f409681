#include "fracobs/penalty.hpp"

#include "fracobs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace fracobs {

PenaltyFunction::PenaltyFunction(std::string name, std::function<double(double)> theta,
                                 std::function<double(double)> derivative, double lipschitz,
                                 double c_theta, std::optional<double> saturation)
    : name_(std::move(name)),
      theta_(std::move(theta)),
      derivative_(std::move(derivative)),
      lipschitz_(lipschitz),
      c_theta_(c_theta),
      saturation_(saturation) {
    if (!theta_ || !derivative_) {
        throw UsageError("penalty function needs theta and its derivative");
    }
    if (!(lipschitz_ >= 0.0) || !(c_theta_ >= 0.0)) {
        throw UsageError("penalty constants must be nonnegative");
    }
}

PenaltyFunction PenaltyFunction::rational() {
    return PenaltyFunction(
        "rational", [](double t) { return t <= 0.0 ? 0.0 : t / (1.0 + t); },
        [](double t) { return t < 0.0 ? 0.0 : 1.0 / ((1.0 + t) * (1.0 + t)); }, 1.0, 1.0,
        std::nullopt);
}

PenaltyFunction PenaltyFunction::arctangent() {
    constexpr double k = 2.0 / std::numbers::pi;
    return PenaltyFunction(
        "arctan", [](double t) { return t <= 0.0 ? 0.0 : k * std::atan(t); },
        [](double t) { return t < 0.0 ? 0.0 : k / (1.0 + t * t); }, k, k, std::nullopt);
}

PenaltyFunction PenaltyFunction::clipped_ramp() {
    return PenaltyFunction(
        "ramp", [](double t) { return std::clamp(t, 0.0, 1.0); },
        [](double t) { return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0; }, 1.0, 0.25, 1.0);
}

PenaltyFunction PenaltyFunction::by_name(const std::string& name) {
    if (name == "rational") {
        return rational();
    }
    if (name == "arctan") {
        return arctangent();
    }
    if (name == "ramp") {
        return clipped_ramp();
    }
    throw UsageError("unknown penalty function '" + name + "' (available: rational, arctan, ramp)");
}

PenaltyCheck check_penalty(const PenaltyFunction& theta, int samples) {
    PenaltyCheck check;
    const int m = std::max(samples, 2);
    double prev = -1.0;
    for (int k = 0; k < m; ++k) {
        const double t = -10.0 + 20.0 * static_cast<double>(k) / static_cast<double>(m - 1);
        const double v = theta(t);
        if (t <= 0.0 && v != 0.0) {
            check.vanishes_on_negatives = false;
        }
        if (v < 0.0 || v > 1.0) {
            check.bounded_01 = false;
        }
        if (k > 0 && v < prev) {
            check.nondecreasing = false;
        }
        prev = v;
        if (t > 0.0) {
            const double g = (1.0 - v) * t;
            check.sampled_sup_one_minus_theta_t = std::max(check.sampled_sup_one_minus_theta_t, g);
            if (g > theta.c_theta() * (1.0 + 1e-12)) {
                check.c_theta_holds = false;
            }
        }
    }
    return check;
}

}  // namespace fracobs
