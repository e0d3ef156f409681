#pragma once

#include <functional>
#include <optional>
#include <string>

namespace fracobs {

/// Bounded penalty profile theta: R -> [0,1] used by the penalised obstacle problems.
/// theta vanishes on (-inf, 0], is nondecreasing and Lipschitz, and
/// (1 - theta(t)) t <= C_theta for t > 0.
class PenaltyFunction {
public:
    PenaltyFunction(std::string name, std::function<double(double)> theta,
                    std::function<double(double)> derivative, double lipschitz, double c_theta,
                    std::optional<double> saturation);

    /// theta(t) = t / (1 + t) on t >= 0; C_theta = 1.
    static PenaltyFunction rational();
    /// theta(t) = (2/pi) arctan t on t >= 0; C_theta = 2/pi.
    static PenaltyFunction arctangent();
    /// theta(t) = min(max(t, 0), 1); saturates at t = 1, C_theta = 1/4.
    static PenaltyFunction clipped_ramp();
    /// Lookup by name ("rational", "arctan", "ramp"); throws UsageError otherwise.
    static PenaltyFunction by_name(const std::string& name);

    double operator()(double t) const { return theta_(t); }
    /// Generalised derivative (one-sided value at kinks).
    double derivative(double t) const { return derivative_(t); }

    const std::string& name() const { return name_; }
    double lipschitz() const { return lipschitz_; }
    double c_theta() const { return c_theta_; }
    std::optional<double> saturation() const { return saturation_; }

private:
    std::string name_;
    std::function<double(double)> theta_;
    std::function<double(double)> derivative_;
    double lipschitz_;
    double c_theta_;
    std::optional<double> saturation_;
};

/// Result of sampling the penalty axioms on a uniform grid of [-10, 10].
struct PenaltyCheck {
    bool vanishes_on_negatives = true;
    bool nondecreasing = true;
    bool bounded_01 = true;
    bool c_theta_holds = true;
    double sampled_sup_one_minus_theta_t = 0.0;

    bool ok() const { return vanishes_on_negatives && nondecreasing && bounded_01 && c_theta_holds; }
};

PenaltyCheck check_penalty(const PenaltyFunction& theta, int samples = 20001);

}  // namespace fracobs
