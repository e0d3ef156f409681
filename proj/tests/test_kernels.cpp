#include "doctest.h"

#include "fracobs/errors.hpp"
#include "fracobs/kernels.hpp"
#include "fracobs/special_functions.hpp"

#include <cmath>

using namespace fracobs;

TEST_CASE("fractional Laplacian kernel") {
    const Kernel k = fractional_laplacian_kernel(0.5);
    const double c = riesz_constant(1, 0.5);
    CHECK(k(0.0, 1.0) == doctest::Approx(c * c));
    CHECK(k(0.2, -0.3) == doctest::Approx(c * c * std::pow(0.5, -2.0)));
    CHECK(k.profile(0.1, 0.7) == doctest::Approx(1.0));
    CHECK_THROWS_AS(k(0.3, 0.3), DomainError);
    CHECK(check_kernel(k).ok());
    const Kernel twice = k.scaled(2.0);
    CHECK(twice(0.0, 0.5) == doctest::Approx(2.0 * k(0.0, 0.5)));
    CHECK(twice.a_upper() == 2.0);
}

TEST_CASE("D^s energy kernel carries the fractional-Laplacian constant") {
    const Kernel k = ds_energy_kernel(0.5);
    CHECK(k(0.0, 1.0) == doctest::Approx(fractional_laplacian_constant(0.5)));
    CHECK(k.profile(0.0, 1.0) == doctest::Approx(8.0));
}

TEST_CASE("perturbed kernels: band, symmetry claims and positivity") {
    const Kernel sym = perturbed_kernel(0.4, [](double x, double y) { return 2.0 + std::cos(x + y); }, true);
    const KernelCheck c = check_kernel(sym);
    CHECK(c.symmetry_ok);
    CHECK(c.max_asymmetry < 1e-12);
    CHECK(sym.a_lower() >= 1.0 - 1e-12);
    CHECK(sym.a_upper() <= 3.0 + 1e-12);
    CHECK_THROWS_AS(perturbed_kernel(0.4, [](double x, double y) { return 2.0 + std::sin(x - y); }, true),
                    UsageError);
    CHECK_THROWS_AS(perturbed_kernel(0.4, [](double x, double) { return x; }, false), DomainError);
    const Kernel skew = perturbed_kernel(0.4, [](double x, double y) { return 2.0 + std::sin(x - y); }, false);
    CHECK(!skew.symmetric());
    CHECK(check_kernel(skew, -1.0, 1.0).band_ok);
}

TEST_CASE("kappa integrand values") {
    CHECK(kappa_integrand(-0.5, 0.5, 0.9, 0.8) == doctest::Approx(-2.839629).epsilon(1e-6));
    CHECK(kappa_integrand(-0.5, 0.5, 1.5, 0.8) == doctest::Approx(-0.287175).epsilon(1e-5));
    CHECK_THROWS_AS(kappa_integrand(-0.5, 0.5, 0.5, 0.8), DomainError);
}

TEST_CASE("principal value of kappa equals C/c^2 times the distance power") {
    CHECK(kappa_pv_integral(-0.5, 0.5, 0.8) == doctest::Approx(31.869004494).epsilon(1e-8));
    CHECK(kappa_pv_integral(-0.5, 0.5, 0.5) == doctest::Approx(8.0).epsilon(1e-8));
    CHECK(kappa_pv_integral(0.0, 0.3, 0.5) == doctest::Approx(8.0 / 0.09).epsilon(1e-8));
    CHECK(kappa_pv_integral(0.1, 0.1 + 1e-3, 0.3) ==
          doctest::Approx(ds_energy_profile(0.3) * std::pow(1e-3, -1.6)).epsilon(1e-7));
}

TEST_CASE("k_A for a constant field and for the counterexample field") {
    const double s = 0.6;
    const double c2 = std::pow(riesz_constant(1, s), 2);
    const auto e = ka_evaluate(CoefficientField::constant_field(1.7), -0.2, 0.35, s);
    CHECK(e.value == doctest::Approx(1.7 * c2 * ds_energy_profile(s) * std::pow(0.55, -2.2)).epsilon(1e-8));

    const CoefficientField a = CoefficientField::counterexample();
    CHECK(a(1.2) == doctest::Approx(50.01));
    CHECK(a(0.0) == doctest::Approx(0.01));
    CHECK(smooth_bump(0.9) == 0.0);
    CHECK(smooth_bump(1.0) == 1.0);
    CHECK(smooth_bump(1.6) == 0.0);
    const auto neg = ka_evaluate(a, -0.5, 0.5, 0.8);
    CHECK(neg.value < 0.0);
    CHECK(neg.value == doctest::Approx(-0.19584).epsilon(1e-4));
}

TEST_CASE("band scan and k_A kernel") {
    const std::vector<std::pair<double, double>> pairs = {{-0.5, 0.5}, {-0.9, 0.1}, {0.2, 0.25}};
    const auto scan = ka_band_scan(CoefficientField::counterexample(), 0.8, pairs);
    CHECK(scan.violations >= 1);
    CHECK_THROWS_AS(ka_kernel(CoefficientField::counterexample(), 0.8, pairs), DomainError);
    const Kernel k = ka_kernel(CoefficientField::constant_field(2.0), 0.5, pairs);
    CHECK(k.symmetric());
    CHECK(k.a_lower() == doctest::Approx(16.0).epsilon(2e-6));
    CHECK(k.a_upper() == doctest::Approx(16.0).epsilon(2e-6));
}
