#include "doctest.h"

#include "fracobs/discretization.hpp"
#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/kernels.hpp"
#include "fracobs/vi_solvers.hpp"

#include <map>
#include <random>

using namespace fracobs;

namespace {

const Eigen::MatrixXd& stiffness(int n, double s) {
    static std::map<std::pair<int, double>, Eigen::MatrixXd> cache;
    auto it = cache.find({n, s});
    if (it == cache.end()) {
        const Mesh m(-1.0, 1.0, n);
        it = cache.emplace(std::make_pair(n, s), assemble_stiffness_symmetric(m, fractional_laplacian_kernel(s)))
                 .first;
    }
    return it->second;
}

DiscreteSystem system_with(int n, double s, const Eigen::VectorXd& f) {
    const Mesh m(-1.0, 1.0, n);
    return make_system(m, fractional_laplacian_kernel(s), stiffness(n, s), m.h() * f);
}

Eigen::VectorXd uniform(int n, double lo, double hi, std::mt19937& rng) {
    std::uniform_real_distribution<double> d(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = d(rng);
    }
    return v;
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("unconstrained zero problem") {
    const auto sys = system_with(16, 0.5, Eigen::VectorXd::Zero(16));
    const auto r = solve_psor(sys, ObstacleSet::one_sided(Eigen::VectorXd::Constant(16, -1e6)));
    CHECK(r.converged);
    CHECK(max_abs(r.u) == 0.0);
    CHECK(r.active_lower.empty());
}

TEST_CASE("scalar problem has the closed form max(b/A, psi)") {
    for (double psi : {-3.0, 0.0, 0.7, 5.0}) {
        const auto sys = system_with(1, 0.6, Eigen::VectorXd::Constant(1, 0.4));
        const Eigen::VectorXd u = lcp_oracle(sys, ObstacleSet::one_sided(Eigen::VectorXd::Constant(1, psi)));
        CHECK(u(0) == doctest::Approx(std::max(sys.load(0) / sys.stiffness(0, 0), psi)).epsilon(1e-14));
    }
}

TEST_CASE("oracle with inactive obstacle reduces to the linear solve") {
    std::mt19937 rng(3);
    const auto sys = system_with(7, 0.4, uniform(7, -1, 1, rng));
    const Eigen::VectorXd lin = sys.stiffness.partialPivLu().solve(sys.load);
    const Eigen::VectorXd u = lcp_oracle(sys, ObstacleSet::unconstrained(7));
    CHECK(max_abs(u - lin) < 1e-12 * (1.0 + max_abs(lin)));
}

TEST_CASE("oracle reports infeasible problems") {
    DiscreteSystem sys;
    sys.mesh = Mesh(-1.0, 1.0, 2);
    sys.stiffness = Eigen::MatrixXd{{1.0, -1.0}, {-1.0, 1.0}};
    sys.load = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(lcp_oracle(sys, ObstacleSet::one_sided(Eigen::VectorXd::Zero(2))), NumericalFailure);
}

TEST_CASE("empty admissible set is a usage error") {
    const auto sys = system_with(4, 0.5, Eigen::VectorXd::Zero(4));
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd hi = Eigen::VectorXd::Zero(4);
    hi(2) = -0.1;
    CHECK_THROWS_AS(solve_psor(sys, ObstacleSet::two_sided(lo, hi)), UsageError);
    PsorOptions bad;
    bad.omega = 2.0;
    CHECK_THROWS_AS(solve_psor(sys, ObstacleSet::one_sided(lo), bad), UsageError);
}

TEST_CASE("psor matches both oracle pivot orders on random one-obstacle problems") {
    std::mt19937 rng(11);
    for (int seed = 0; seed < 20; ++seed) {
        const int n = 3 + seed % 6;
        const double s = 0.3 + 0.1 * (seed % 6);
        const auto sys = system_with(n, s, uniform(n, -2, 2, rng));
        const ObstacleSet obs = ObstacleSet::one_sided(uniform(n, -0.2, 0.0, rng));
        const auto r = solve_psor(sys, obs);
        REQUIRE(r.converged);
        const Eigen::VectorXd a = lcp_oracle(sys, obs, PivotOrder::forward);
        const Eigen::VectorXd b = lcp_oracle(sys, obs, PivotOrder::reverse);
        CHECK(max_abs(a - b) < 1e-12);
        CHECK(max_abs(r.u - a) < 1e-8);
    }
}

TEST_CASE("two-obstacle psor matches the three-state oracle") {
    std::mt19937 rng(12);
    for (int seed = 0; seed < 20; ++seed) {
        const int n = 2 + seed % 7;
        const auto sys = system_with(n, 0.5, uniform(n, -3, 3, rng));
        const Eigen::VectorXd lo = uniform(n, -0.3, 0.0, rng);
        const Eigen::VectorXd hi = lo + uniform(n, 0.0, 0.4, rng);
        const ObstacleSet obs = ObstacleSet::two_sided(lo, hi);
        const auto r = solve_two_obstacles(sys, obs, TwoObstacleMethod::psor);
        REQUIRE(r.converged);
        CHECK(max_abs(r.u - lcp_oracle(sys, obs)) < 1e-8);
        CHECK(max_abs(r.u - lcp_oracle(sys, obs, PivotOrder::reverse)) < 1e-8);
    }
}

TEST_CASE("psor complementarity and disjoint active sets") {
    std::mt19937 rng(5);
    const int n = 32;
    const auto sys = system_with(n, 0.6, uniform(n, -4, 4, rng));
    const Eigen::VectorXd lo = uniform(n, -0.2, 0.0, rng);
    const Eigen::VectorXd hi = lo.array() + 0.1;
    const auto r = solve_psor(sys, ObstacleSet::two_sided(lo, hi));
    REQUIRE(r.converged);
    const double tol = 1e-7;
    for (int i = 0; i < n; ++i) {
        CHECK(r.u(i) >= lo(i));
        CHECK(r.u(i) <= hi(i));
        if (r.u(i) < hi(i) - 1e-9) {
            CHECK(r.residual(i) >= -tol);
        }
        if (r.u(i) > lo(i) + 1e-9) {
            CHECK(r.residual(i) <= tol);
        }
    }
    for (int i : r.active_lower) {
        CHECK(std::find(r.active_upper.begin(), r.active_upper.end(), i) == r.active_upper.end());
    }
}

TEST_CASE("nonnegative load gives a nonnegative solution") {
    const auto sys = system_with(24, 0.7, Eigen::VectorXd::Ones(24));
    const auto r = solve_psor(sys, ObstacleSet::one_sided(Eigen::VectorXd::Constant(24, -1e6)));
    REQUIRE(r.converged);
    CHECK(r.u.minCoeff() >= 0.0);
}

TEST_CASE("order properties on random instances") {
    std::mt19937 rng(21);
    for (int t = 0; t < 10; ++t) {
        const int n = 20;
        const double s = 0.3 + 0.05 * t;
        const Eigen::VectorXd f = uniform(n, -2, 2, rng);
        const Eigen::VectorXd psi = uniform(n, -0.3, 0.1, rng);
        const Eigen::VectorXd f_hat = f - uniform(n, 0, 1, rng);
        const Eigen::VectorXd psi_hat = psi - uniform(n, 0, 0.1, rng);
        const auto u = solve_psor(system_with(n, s, f), ObstacleSet::one_sided(psi));
        const auto u_hat = solve_psor(system_with(n, s, f_hat), ObstacleSet::one_sided(psi_hat));
        CHECK((u.u - u_hat.u).minCoeff() >= -1e-8);

        const auto same_f = solve_psor(system_with(n, s, f), ObstacleSet::one_sided(psi_hat));
        CHECK(max_abs(u.u - same_f.u) <= max_abs(psi - psi_hat) + 1e-8);

        const Eigen::VectorXd neg = -uniform(n, 0, 1, rng);
        const auto w = solve_psor(system_with(n, s, neg), ObstacleSet::one_sided(psi));
        CHECK(w.u.maxCoeff() <= std::max(0.0, psi.maxCoeff()) + 1e-8);

        PsorOptions other;
        other.initial = uniform(n, 0, 3, rng);
        const auto u2 = solve_psor(system_with(n, s, f), ObstacleSet::one_sided(psi), other);
        CHECK(max_abs(u.u - u2.u) < 1e-7);
    }
}

TEST_CASE("upper bound far away reproduces the one-obstacle solution") {
    std::mt19937 rng(8);
    const int n = 20;
    const auto sys = system_with(n, 0.5, uniform(n, -2, 2, rng));
    const Eigen::VectorXd psi = uniform(n, -0.2, 0.0, rng);
    const auto one = solve_psor(sys, ObstacleSet::one_sided(psi));
    const auto two = solve_two_obstacles(sys, ObstacleSet::two_sided(psi, Eigen::VectorXd::Constant(n, 1e6)),
                                         TwoObstacleMethod::psor);
    CHECK(max_abs(one.u - two.u) < 1e-8);
}

TEST_CASE("penalization with inactive obstacle solves the linear system") {
    std::mt19937 rng(2);
    const int n = 16;
    const auto sys = system_with(n, 0.5, uniform(n, -1, 1, rng));
    const Eigen::VectorXd psi = Eigen::VectorXd::Constant(n, -1e6);
    PenalizationConfig cfg;
    cfg.epsilon = 1.0;
    cfg.zeta = minimal_zeta(sys, psi);
    const Eigen::VectorXd lin = sys.stiffness.partialPivLu().solve(sys.load);
    const auto up = solve_penalized(sys, psi, cfg);
    const auto down = solve_penalized_lower(sys, psi, cfg);
    REQUIRE(up.converged);
    REQUIRE(down.converged);
    CHECK(max_abs(up.u - lin) < 1e-9);
    CHECK(max_abs(down.u - lin) < 1e-9);
}

TEST_CASE("inadmissible zeta is rejected") {
    const int n = 8;
    const auto sys = system_with(n, 0.5, Eigen::VectorXd::Zero(n));
    const Eigen::VectorXd psi = Eigen::VectorXd::Constant(n, 0.2);
    PenalizationConfig cfg;
    cfg.zeta = Eigen::VectorXd::Zero(n);
    CHECK_THROWS_AS(solve_penalized(sys, psi, cfg), UsageError);
    cfg.zeta = minimal_zeta(sys, psi);
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(solve_penalized(sys, psi, cfg), UsageError);
}

TEST_CASE("penalized approximations: monotonicity, sandwich and energy bound") {
    const int n = 32;
    const double s = 0.6;
    const Mesh mesh(-1.0, 1.0, n);
    Eigen::VectorXd f(n);
    Eigen::VectorXd psi(n);
    for (int i = 0; i < n; ++i) {
        const double x = mesh.dof_x(i);
        f(i) = 3.0 * std::cos(3.0 * x) - 1.0;
        psi(i) = 0.15 - x * x;
    }
    const auto sys = system_with(n, s, f);
    const auto exact = solve_psor(sys, ObstacleSet::one_sided(psi));
    REQUIRE(exact.converged);
    for (const auto& theta : {PenaltyFunction::rational(), PenaltyFunction::arctangent(),
                              PenaltyFunction::clipped_ramp()}) {
        PenalizationConfig cfg;
        cfg.theta = theta;
        cfg.zeta = minimal_zeta(sys, psi);
        const double zeta_l1 = mesh.h() * cfg.zeta.sum();
        Eigen::VectorXd prev;
        double prev_err = 1e300;
        for (double eps : {0.1, 0.05, 0.025}) {
            cfg.epsilon = eps;
            const auto ue = solve_penalized(sys, psi, cfg);
            REQUIRE(ue.converged);
            CHECK((ue.u - exact.u).minCoeff() >= -1e-8);
            if (prev.size() > 0) {
                CHECK((prev - ue.u).minCoeff() >= -1e-8);
            }
            const double err = ds_norm_sq(mesh, ue.u - exact.u, s);
            CHECK(err <= eps * theta.c_theta() / sys.a_lower * zeta_l1 * (1.0 + 1e-3));
            CHECK(err <= prev_err * (1.0 + 1e-9) + 1e-20);
            prev_err = err;
            prev = ue.u;
            if (theta.saturation()) {
                const auto lower = solve_penalized_lower(sys, psi, cfg);
                REQUIRE(lower.converged);
                CHECK((exact.u - lower.u).minCoeff() >= -1e-8);
                CHECK((ue.u - lower.u).minCoeff() >= -1e-8);
                CHECK((ue.u - lower.u).maxCoeff() <= eps + 1e-8);
            }
        }
    }
}

TEST_CASE("penalized two obstacles stay within the relaxed band") {
    std::mt19937 rng(4);
    const int n = 24;
    const auto sys = system_with(n, 0.5, uniform(n, -6, 6, rng));
    const Eigen::VectorXd psi = uniform(n, -0.2, -0.1, rng);
    const Eigen::VectorXd phi = uniform(n, 0.05, 0.1, rng);
    const ObstacleSet obs = ObstacleSet::two_sided(psi, phi);
    const auto exact = solve_two_obstacles(sys, obs, TwoObstacleMethod::psor);
    for (double eps : {0.05, 0.01}) {
        PenalizationConfig cfg;
        cfg.theta = PenaltyFunction::clipped_ramp();
        cfg.epsilon = eps;
        cfg.zeta = minimal_zeta(sys, psi);
        cfg.zeta_upper = minimal_zeta_upper(sys, phi);
        const auto r = solve_two_obstacles(sys, obs, TwoObstacleMethod::penalized, {}, cfg);
        REQUIRE(r.converged);
        CHECK((r.u - psi).minCoeff() >= -1e-8);
        CHECK((phi - r.u).minCoeff() >= -eps - 1e-8);
        CHECK(max_abs(r.u - exact.u) <= 2.0 * eps);
    }
}

TEST_CASE("membrane weights") {
    const std::vector<Eigen::VectorXd> f = {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)};
    const Eigen::MatrixXd z = membrane_weights(f);
    CHECK(z(0, 0) == 1.0);
    CHECK(z(1, 0) == 0.0);
    CHECK(z(2, 0) == 1.0);
}

TEST_CASE("two membranes with equal loads coincide with the free problem") {
    std::mt19937 rng(9);
    const int n = 6;
    const auto sys = system_with(n, 0.5, uniform(n, -2, 2, rng));
    const auto r = solve_n_membranes(sys, {sys.load, sys.load}, MembraneMethod::gauss_seidel);
    REQUIRE(r.converged);
    const Eigen::VectorXd single = lcp_oracle(sys, ObstacleSet::unconstrained(n));
    CHECK(max_abs(r.u_stack.row(0).transpose() - single) < 1e-8);
    CHECK(max_abs(r.u_stack.row(1).transpose() - single) < 1e-8);
}

TEST_CASE("membranes are ordered and the penalized stack approaches the Gauss-Seidel one") {
    const int n = 24;
    const Mesh mesh(-1.0, 1.0, n);
    std::vector<Eigen::VectorXd> loads;
    for (double c : {1.0, -0.5, 2.0}) {
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) {
            f(i) = c + std::sin(4.0 * mesh.dof_x(i));
        }
        loads.push_back(mesh.h() * f);
    }
    const auto sys = system_with(n, 0.6, Eigen::VectorXd::Zero(n));
    const auto gs = solve_n_membranes(sys, loads, MembraneMethod::gauss_seidel);
    REQUIRE(gs.converged);
    for (int i = 0; i + 1 < 3; ++i) {
        CHECK((gs.u_stack.row(i) - gs.u_stack.row(i + 1)).minCoeff() >= -1e-10);
    }
    MembraneOptions opt;
    double prev = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        opt.epsilon = eps;
        const auto pen = solve_n_membranes(sys, loads, MembraneMethod::penalized, opt);
        REQUIRE(pen.converged);
        const double d = (pen.u_stack - gs.u_stack).cwiseAbs().maxCoeff();
        CHECK(d <= 3.0 * eps);
        CHECK(d <= prev);
        prev = d;
    }
}
