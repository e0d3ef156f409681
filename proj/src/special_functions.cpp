#include "fracobs/special_functions.hpp"

#include "fracobs/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace fracobs {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

void require_order(double s) {
    if (!(s > 0.0 && s < 1.0)) {
        throw DomainError("fractional order s must lie in (0,1), got " + std::to_string(s));
    }
}

}  // namespace

double lanczos_gamma(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("gamma: non-finite argument");
    }
    if (x <= 0.0 && x == std::floor(x)) {
        throw DomainError("gamma: pole at non-positive integer " + std::to_string(x));
    }
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
    }
    const double z = x - 1.0;
    double acc = kLanczosCoeff[0];
    for (std::size_t k = 1; k < kLanczosCoeff.size(); ++k) {
        acc += kLanczosCoeff[k] / (z + static_cast<double>(k));
    }
    const double t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

double riesz_constant(int d, double s) {
    require_order(s);
    if (d < 1) {
        throw DomainError("riesz_constant: dimension must be positive");
    }
    const double dd = static_cast<double>(d);
    return std::pow(2.0, s) * std::pow(std::numbers::pi, -0.5 * dd) *
           lanczos_gamma(0.5 * (dd + s + 1.0)) / lanczos_gamma(0.5 * (1.0 - s));
}

double fractional_laplacian_constant(double s) {
    require_order(s);
    return std::pow(4.0, s) * lanczos_gamma(0.5 + s) /
           (std::sqrt(std::numbers::pi) * std::abs(lanczos_gamma(-s)));
}

double ds_energy_profile(double s) {
    const double c = riesz_constant(1, s);
    return fractional_laplacian_constant(s) / (c * c);
}

}  // namespace fracobs
