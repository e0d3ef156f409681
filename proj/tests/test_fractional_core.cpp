#include "doctest.h"

#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/penalty.hpp"
#include "fracobs/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracobs;

namespace {

Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = dist(rng);
    }
    return v;
}

}  // namespace

TEST_CASE("fractional params") {
    const FractionalParams p = FractionalParams::make(1, 0.8);
    CHECK_NOTHROW(p.validate());
    FractionalParams bad = p;
    bad.c_ds *= 1.0 + 1e-9;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(FractionalParams::make(1, 1.5), DomainError);
}

TEST_CASE("piecewise linear function is zero outside the domain") {
    const Mesh m(-1.0, 1.0, 9);
    const PiecewiseLinearFn u(m, Eigen::VectorXd::Constant(9, 2.0));
    CHECK(u(-1.0) == 0.0);
    CHECK(u(1.0) == 0.0);
    CHECK(u(-3.0) == 0.0);
    CHECK(u(7.0) == 0.0);
    CHECK(u(0.0) == doctest::Approx(2.0));
    CHECK(u(-0.9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(PiecewiseLinearFn(m, Eigen::VectorXd::Zero(4)), UsageError);
    CHECK_THROWS_AS(Mesh(1.0, 0.0, 3), UsageError);
    CHECK_THROWS_AS(Mesh(0.0, 1.0, 0), UsageError);
}

TEST_CASE("seminorm of a hat against a one-dimensional difference-variable oracle") {
    // [phi, phi]_s written as 2 int_0^inf r^{-1-2s} int (phi(y+r)-phi(y))^2 dy dr
    struct Case {
        double h;
        double s;
        double ref;
    };
    const Case cases[] = {{0.1, 0.5, 5.54517744447956247},
                          {0.1, 0.3, 2.52377758585825787},
                          {0.25, 0.8, 23.2642899846326562},
                          {0.1, 0.1, 2.33048817008517251}};
    for (const auto& c : cases) {
        const int n = static_cast<int>(std::lround(2.0 / c.h)) - 1;
        const Mesh m(-1.0, 1.0, n);
        const auto phi = PiecewiseLinearFn::hat(m, n / 2);
        const double v = gagliardo_seminorm_sq(phi, phi, c.s);
        CHECK(v == doctest::Approx(c.ref).epsilon(1e-6));
        // the value does not depend on where the hat sits
        const auto edge = PiecewiseLinearFn::hat(m, 0);
        CHECK(gagliardo_seminorm_sq(edge, edge, c.s) == doctest::Approx(c.ref).epsilon(1e-6));
    }
}

TEST_CASE("seminorm is bilinear, symmetric and zero on zero") {
    const Mesh m(0.0, 1.0, 15);
    std::mt19937 rng(7);
    const PiecewiseLinearFn u(m, random_vector(15, rng));
    const PiecewiseLinearFn v(m, random_vector(15, rng));
    const PiecewiseLinearFn w(m, random_vector(15, rng));
    const PiecewiseLinearFn vw(m, v.values + w.values);
    const double s = 0.35;
    const double lhs = gagliardo_seminorm_sq(u, vw, s);
    const double rhs = gagliardo_seminorm_sq(u, v, s) + gagliardo_seminorm_sq(u, w, s);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    CHECK(gagliardo_seminorm_sq(u, v, s) == doctest::Approx(gagliardo_seminorm_sq(v, u, s)).epsilon(1e-12));
    CHECK(gagliardo_seminorm_sq(PiecewiseLinearFn::zero(m), v, s) == 0.0);
    CHECK_THROWS_AS(gagliardo_seminorm_sq(u, PiecewiseLinearFn::zero(Mesh(0.0, 1.0, 14)), s), UsageError);
}

TEST_CASE("seminorm positivity and Cauchy-Schwarz on random pairs") {
    const Mesh m(-1.0, 1.0, 12);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const double s = 0.05 + 0.9 * (trial % 10) / 10.0;
        const PiecewiseLinearFn u(m, random_vector(12, rng));
        const PiecewiseLinearFn v(m, random_vector(12, rng));
        const double uu = gagliardo_seminorm_sq(u, u, s);
        const double vv = gagliardo_seminorm_sq(v, v, s);
        const double uv = gagliardo_seminorm_sq(u, v, s);
        CHECK(uu > 0.0);
        CHECK(uv * uv <= uu * vv * (1.0 + 1e-12));
    }
}

TEST_CASE("ds_norm_sq") {
    const Mesh m(-1.0, 1.0, 19);
    const auto phi = PiecewiseLinearFn::hat(m, 9);
    const double c = riesz_constant(1, 0.5);
    CHECK(ds_norm_sq(phi, 0.5) == doctest::Approx(0.5 * c * c * 5.54517744447956247).epsilon(1e-6));
    CHECK(ds_norm_sq(PiecewiseLinearFn::zero(m), 0.5) == 0.0);
    std::mt19937 rng(3);
    const PiecewiseLinearFn u(m, random_vector(19, rng));
    const PiecewiseLinearFn u3(m, -3.0 * u.values);
    CHECK(ds_norm_sq(u3, 0.7) == doctest::Approx(9.0 * ds_norm_sq(u, 0.7)).epsilon(1e-12));
}

TEST_CASE("pointwise D^s of a hat against a quadrature oracle") {
    // hat of half-width 0.2 centred at 0
    const Mesh m(-1.0, 1.0, 9);
    const int centre = 4;
    CHECK(m.dof_x(centre) == doctest::Approx(0.0));
    struct Case {
        double x;
        double s;
        double ref;
    };
    const Case cases[] = {{0.05, 0.5, -1.33450952223836604},
                          {0.33, 0.3, -0.239249819438889409},
                          {-0.1, 0.8, 3.16889159815},
                          {-1.7, 0.4, 0.0218249645224029613}};
    for (const auto& c : cases) {
        const double v = ds_gradient_hat(m, centre, c.x, c.s);
        CHECK(v == doctest::Approx(c.ref).epsilon(1e-8));
        const double w = ds_gradient_at(PiecewiseLinearFn::hat(m, centre), c.x, c.s);
        CHECK(w == doctest::Approx(c.ref).epsilon(1e-8));
    }
    // evaluation exactly at the outer node of the support (binary-exact mesh)
    const Mesh q(-1.0, 1.0, 7);
    CHECK(ds_gradient_hat(q, 3, 0.25, 0.6) == doctest::Approx(-1.08897689159319163).epsilon(1e-12));
}

TEST_CASE("D^s is linear and odd for even functions") {
    const Mesh m(-1.0, 1.0, 15);
    std::mt19937 rng(5);
    Eigen::VectorXd even = random_vector(15, rng);
    for (int i = 0; i < 15; ++i) {
        even(14 - i) = even(i);
    }
    const PiecewiseLinearFn u(m, even);
    for (double x : {0.013, 0.25, 0.5, 0.77, 0.999, 1.3, 4.0}) {
        const double a = ds_gradient_at(u, x, 0.45);
        const double b = ds_gradient_at(u, -x, 0.45);
        CHECK(std::abs(a + b) <= 1e-6 * std::max(1.0, std::abs(a)));
    }
    CHECK(ds_gradient_at(PiecewiseLinearFn::zero(m), 0.3, 0.45) == 0.0);
    double sum = 0.0;
    for (int i = 0; i < 15; ++i) {
        sum += even(i) * ds_gradient_hat(m, i, 0.31, 0.45);
    }
    CHECK(sum == doctest::Approx(ds_gradient_at(u, 0.31, 0.45)).epsilon(1e-12));
}

TEST_CASE("the D^s gram matrix equals the fractional-Laplacian constant times the seminorm") {
    // int D^s u D^s v = (C_{1,s}/2) [u, v]_s
    for (double s : {0.25, 0.5, 0.8}) {
        const Mesh m(-1.0, 1.0, 7);
        const Eigen::MatrixXd g = ds_gradient_gram(m, s);
        const Eigen::MatrixXd sem = *seminorm_gram(m, s);
        const Eigen::MatrixXd ref = 0.5 * fractional_laplacian_constant(s) * sem;
        for (int i = 0; i < 7; ++i) {
            for (int j = 0; j < 7; ++j) {
                CHECK(std::abs(g(i, j) - ref(i, j)) <= 1e-6 * std::abs(ref(i, j)));
            }
        }
    }
}

TEST_CASE("penalty catalogue") {
    const auto rational = PenaltyFunction::rational();
    const auto arctan = PenaltyFunction::arctangent();
    const auto ramp = PenaltyFunction::clipped_ramp();
    for (const auto* th : {&rational, &arctan, &ramp}) {
        const PenaltyCheck chk = check_penalty(*th, 20001);
        CHECK(chk.ok());
    }
    // sampled maxima of (1 - theta(t)) t approach the analytic constants
    CHECK(check_penalty(rational).sampled_sup_one_minus_theta_t == doctest::Approx(10.0 / 11.0).epsilon(1e-9));
    CHECK(check_penalty(ramp).sampled_sup_one_minus_theta_t == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(rational.c_theta() == 1.0);
    CHECK(ramp.c_theta() == 0.25);
    CHECK(ramp.saturation().value() == 1.0);
    CHECK(arctan.c_theta() == doctest::Approx(2.0 / std::numbers::pi));
    CHECK(rational(-1.0) == 0.0);
    CHECK(ramp(0.4) == doctest::Approx(0.4));
    CHECK_THROWS_AS(PenaltyFunction::by_name("tanh"), UsageError);

    // a profile that is not allowed: negative values on t < 0
    const PenaltyFunction bad("bad", [](double t) { return 0.5 + 0.5 * std::tanh(t); },
                              [](double t) { return 0.5 / std::pow(std::cosh(t), 2); }, 0.5, 1.0,
                              std::nullopt);
    CHECK_FALSE(check_penalty(bad).ok());
}
