#include "doctest.h"

#include "fracobs/errors.hpp"
#include "fracobs/quadrature.hpp"
#include "fracobs/special_functions.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

using namespace fracobs;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

double hp_gamma(double x) { return static_cast<double>(boost::multiprecision::tgamma(big(x))); }

double hp_riesz(double s) {
    const big bs(s);
    const big pi = boost::math::constants::pi<big>();
    big v = boost::multiprecision::pow(big(2), bs) / boost::multiprecision::sqrt(pi) *
            boost::multiprecision::tgamma((bs + 2) / 2) / boost::multiprecision::tgamma((1 - bs) / 2);
    return static_cast<double>(v);
}

}  // namespace

TEST_CASE("lanczos gamma against 50-digit gamma") {
    for (double x = -4.75; x <= 12.0; x += 0.0625) {
        if (x <= 0.0 && x == std::floor(x)) {
            continue;
        }
        const double ref = hp_gamma(x);
        CHECK(std::abs(lanczos_gamma(x) - ref) <= 1e-13 * std::abs(ref));
    }
    CHECK_THROWS_AS(lanczos_gamma(0.0), DomainError);
    CHECK_THROWS_AS(lanczos_gamma(-3.0), DomainError);
}

TEST_CASE("riesz constant values") {
    CHECK(riesz_constant(1, 0.8) == doctest::Approx(0.0916138548990571).epsilon(1e-13));
    CHECK(riesz_constant(1, 0.5) == doctest::Approx(0.199471140200716).epsilon(1e-13));
    for (double s = 0.01; s < 1.0; s += 0.0137) {
        CHECK(riesz_constant(1, s) == doctest::Approx(hp_riesz(s)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(riesz_constant(1, 0.0), DomainError);
    CHECK_THROWS_AS(riesz_constant(1, 1.0), DomainError);
    CHECK_THROWS_AS(riesz_constant(1, -0.2), DomainError);
    CHECK_THROWS_AS(riesz_constant(0, 0.5), DomainError);
}

TEST_CASE("riesz constant general dimension") {
    // d = 3, s = 0.5: 2^{1/2} pi^{-3/2} Gamma(9/4) / Gamma(1/4)
    const double ref = std::sqrt(2.0) * std::pow(M_PI, -1.5) * hp_gamma(2.25) / hp_gamma(0.25);
    CHECK(riesz_constant(3, 0.5) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("riesz constant decreases to zero as s approaches one") {
    double prev = riesz_constant(1, 0.9);
    for (double s = 0.901; s <= 0.999 + 1e-12; s += 0.001) {
        const double c = riesz_constant(1, s);
        CHECK(c > 0.0);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(riesz_constant(1, 0.999999) < 1e-5);
}

TEST_CASE("D^s energy profile") {
    CHECK(ds_energy_profile(0.5) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(ds_energy_profile(0.8) == doctest::Approx(31.869004494).epsilon(1e-9));
    CHECK(ds_energy_profile(0.3) == doctest::Approx(3.55146).epsilon(1e-5));
}

TEST_CASE("gauss jacobi rules integrate weighted monomials exactly") {
    for (double gamma : {-0.6, -0.2, 0.0, 0.4, 1.3}) {
        const QuadratureRule r = gauss_jacobi01(7, gamma);
        for (int k = 0; k < 14; ++k) {
            double acc = 0.0;
            for (std::size_t q = 0; q < r.size(); ++q) {
                acc += r.weights[q] * std::pow(r.nodes[q], k);
            }
            CHECK(acc == doctest::Approx(1.0 / (k + gamma + 1.0)).epsilon(1e-12));
        }
        const QuadratureRule folded = singular_rule01(7, gamma);
        double acc = 0.0;
        for (std::size_t q = 0; q < folded.size(); ++q) {
            acc += folded.weights[q] * std::pow(folded.nodes[q], gamma + 3.0);
        }
        CHECK(acc == doctest::Approx(1.0 / (gamma + 4.0)).epsilon(1e-12));
    }
}

TEST_CASE("gauss legendre and graded rules") {
    const QuadratureRule gl = gauss_legendre01(5);
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
        acc += gl.weights[q] * std::pow(gl.nodes[q], 9);
    }
    CHECK(acc == doctest::Approx(0.1).epsilon(1e-14));

    // int_0^2 t^a (2-t)^b dt = 2^{a+b+1} B(a+1, b+1)
    auto graded = [](double a, double b) {
        std::vector<double> p;
        std::vector<double> w;
        append_graded_rule(0.0, 2.0, true, true, p, w);
        double v = 0.0;
        for (std::size_t q = 0; q < p.size(); ++q) {
            v += w[q] * std::pow(p[q], a) * std::pow(2.0 - p[q], b);
        }
        return v;
    };
    auto exact = [](double a, double b) {
        return std::pow(2.0, a + b + 1.0) * boost::math::beta(a + 1.0, b + 1.0);
    };
    CHECK(graded(0.1, 0.7) == doctest::Approx(exact(0.1, 0.7)).epsilon(1e-8));
    CHECK(graded(0.5, 0.01) == doctest::Approx(exact(0.5, 0.01)).epsilon(1e-8));
    CHECK(graded(-0.5, 0.3) == doctest::Approx(exact(-0.5, 0.3)).epsilon(1e-4));
}

TEST_CASE("adaptive integration on a half line") {
    double err = 0.0;
    const double v = integrate_adaptive([](double t) { return std::exp(-t); }, 0.0,
                                        std::numeric_limits<double>::infinity(), 1e-12, &err);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(err < 1e-9);
}
