#include "doctest.h"

#include "fracobs/capacity.hpp"
#include "fracobs/errors.hpp"

#include <cmath>

using namespace fracobs;

namespace {

DiscreteSystem laplacian(int n, double s) {
    return make_system(Mesh(-1.0, 1.0, n), fractional_laplacian_kernel(s), LoadData::constant(0.0));
}

Kernel skew_kernel(double s) {
    return perturbed_kernel(
        s, [](double x, double y) { return 1.5 + 0.3 * std::tanh(x - 0.5 * y) + 0.05 * std::sin(x * y); },
        false, "skew", std::make_pair(1.1, 1.9));
}

}  // namespace

TEST_CASE("compact set validation and snapping") {
    const Mesh m(-1.0, 1.0, 15);  // h = 0.125
    CHECK_THROWS_AS(CompactSet1D{}.validate(m), UsageError);
    CHECK_THROWS_AS(CompactSet1D::interval(-1.0, 0.0).validate(m), UsageError);
    CHECK_THROWS_AS((CompactSet1D{{{0.0, 0.3}, {0.2, 0.5}}}).validate(m), UsageError);
    const CompactSet1D k = CompactSet1D::interval(-0.3, 0.2);
    const auto nodes = k.nodes(m);
    REQUIRE(nodes.size() == 6);
    CHECK(m.dof_x(nodes.front()) == doctest::Approx(-0.375));
    CHECK(m.dof_x(nodes.back()) == doctest::Approx(0.25));
    const CompactSet1D sn = k.snapped(m);
    CHECK(sn.intervals.front().first == doctest::Approx(-0.375));
    CHECK(sn.intervals.front().second == doctest::Approx(0.25));
    CHECK(CompactSet1D::point(0.25).nodes(m).size() == 1);
    CHECK(k.distance(0.5) == doctest::Approx(0.3));
}

TEST_CASE("capacity of an interval: identities, bounds and support") {
    const auto sys = laplacian(48, 0.5);
    const CompactSet1D k = CompactSet1D::interval(-0.25, 0.25);
    const CapacityResult c = capacitary_potential(sys, k);
    REQUIRE(c.converged);
    CHECK(c.capacity > 0.0);
    CHECK(std::abs(c.capacity - c.measure_total) <= 1e-6 * c.capacity);
    CHECK(std::abs(c.capacity - c.measure_on_set) <= 1e-6 * c.capacity);
    CHECK(c.potential.minCoeff() >= -1e-8);
    CHECK(c.potential.maxCoeff() <= 1.0 + 1e-8);
    for (int i : c.set_nodes) {
        CHECK(std::abs(c.potential(i) - 1.0) <= 1e-10);
    }
    double far = 0.0;
    double total = 0.0;
    for (int i = 0; i < sys.n(); ++i) {
        CHECK(c.measure(i) >= -1e-8);
        total += std::abs(c.measure(i));
        if (c.snapped.distance(sys.mesh.dof_x(i)) > sys.mesh.h()) {
            far += std::abs(c.measure(i));
        }
    }
    CHECK(far <= 1e-6 * total);
}

TEST_CASE("single-node set concentrates the measure") {
    const auto sys = laplacian(15, 0.6);
    const CapacityResult c = capacitary_potential(sys, CompactSet1D::point(0.0));
    REQUIRE(c.set_nodes.size() == 1);
    CHECK(c.capacity > 0.0);
    const int i0 = c.set_nodes.front();
    CHECK(std::abs(c.measure(i0) - c.capacity) <= 1e-8 * c.capacity);
}

TEST_CASE("capacity is monotone in the set and stabilises under refinement") {
    const auto sys = laplacian(32, 0.5);
    const double small = capacitary_potential(sys, CompactSet1D::interval(-0.1, 0.1)).capacity;
    const double big = capacitary_potential(sys, CompactSet1D::interval(-0.3, 0.3)).capacity;
    const double split =
        capacitary_potential(sys, CompactSet1D{{{-0.3, -0.1}, {0.1, 0.3}}}).capacity;
    CHECK(small <= big + 1e-8);
    CHECK(split <= big + 1e-8);

    std::vector<double> caps;
    for (int n : {15, 31, 63}) {
        caps.push_back(capacitary_potential(laplacian(n, 0.5), CompactSet1D::interval(-0.25, 0.25)).capacity);
    }
    CHECK(std::abs(caps[2] - caps[1]) < std::abs(caps[1] - caps[0]));
}

TEST_CASE("capacity comparison for constant and perturbed kernels") {
    const Mesh m(-1.0, 1.0, 24);
    const CompactSet1D k = CompactSet1D::interval(-0.25, 0.25);
    const auto same = capacity_bounds_check(k, fractional_laplacian_kernel(0.5), m);
    CHECK(same.pass);
    CHECK(same.c_s_a == doctest::Approx(same.c_s).epsilon(1e-12));
    const auto twice = capacity_bounds_check(k, constant_kernel(0.5, 2.0), m);
    CHECK(twice.pass);
    CHECK(twice.c_s_a == doctest::Approx(2.0 * twice.c_s).epsilon(1e-8));
    CHECK(twice.upper_bound == doctest::Approx(2.0 * twice.c_s));
    const auto skew = capacity_bounds_check(k, skew_kernel(0.5), m);
    CHECK(skew.pass);
    CHECK(skew.lower_margin > 0.0);
    CHECK(skew.upper_margin > 0.0);
}

TEST_CASE("obstacle capacity estimate") {
    const auto sys = laplacian(32, 0.5);
    const CompactSet1D k = CompactSet1D::interval(-0.25, 0.25);
    const Eigen::VectorXd neg = Eigen::VectorXd::Constant(32, -0.3);
    const auto trivial = obstacle_capacity_estimate(sys, neg, k);
    CHECK(trivial.measure_on_set == 0.0);
    CHECK(trivial.pass);

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(32);
    for (int i : k.nodes(sys.mesh)) {
        psi(i) = 0.5;
    }
    const auto r = obstacle_capacity_estimate(sys, psi, k);
    CHECK(r.pass);
    CHECK(r.energy_pass);
    CHECK(r.measure_on_set > 0.0);
    const auto r2 = obstacle_capacity_estimate(sys, 2.0 * psi, k);
    CHECK(r2.pass);
    CHECK(r2.measure_on_set <= 2.0 * r.measure_on_set * (1.0 + 1e-8));
    CHECK(r2.bound == doctest::Approx(2.0 * r.bound));
}
