#include "doctest.h"

#include "fracobs/discretization.hpp"
#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"

#include <cmath>
#include <random>

using namespace fracobs;

TEST_CASE("stiffness of the fractional Laplacian kernel is c^2/2 times the seminorm gram") {
    for (double s : {0.3, 0.5, 0.8}) {
        const Mesh m(-1.0, 1.0, 12);
        const Kernel k = fractional_laplacian_kernel(s);
        const Eigen::MatrixXd a = assemble_stiffness_symmetric(m, k);
        const Eigen::MatrixXd g = *seminorm_gram(m, s);
        CHECK((a - 0.5 * k.c_squared() * g).cwiseAbs().maxCoeff() <= 1e-10 * a.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("symmetric and nonsymmetric assembly paths agree") {
    const Mesh m(-1.0, 1.0, 10);
    for (const Kernel& k : {fractional_laplacian_kernel(0.6),
                            perturbed_kernel(0.45, [](double x, double y) { return 1.5 + 0.4 * std::cos(2 * x * y); }, true)}) {
        const Eigen::MatrixXd as = assemble_stiffness_symmetric(m, k);
        const Eigen::MatrixXd an = assemble_stiffness(m, k);
        CHECK((as - an).cwiseAbs().maxCoeff() <= 1e-5 * as.cwiseAbs().maxCoeff());
    }
    const Kernel skew = perturbed_kernel(0.5, [](double x, double y) { return 1.5 + 0.3 * std::tanh(x - y); }, false);
    CHECK_THROWS_AS(assemble_stiffness_symmetric(m, skew), UsageError);
}

TEST_CASE("assembly report: Z-matrix, row sums and asymmetry") {
    const Mesh m(-1.0, 1.0, 16);
    AssemblyReport rep;
    const Kernel skew = perturbed_kernel(0.6, [](double x, double y) { return 1.5 + 0.3 * std::tanh(x - y); }, false);
    const Eigen::MatrixXd a = assemble_stiffness(m, skew, &rep);
    CHECK(rep.path == "nonsymmetric");
    CHECK(rep.z_violations == 0);
    CHECK(rep.min_row_sum > 0.0);
    CHECK(rep.asymmetry > 0.0);
    CHECK(rep.clamp_total <= 1e-6 * rep.norm_max);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
            if (i != j) {
                CHECK(a(i, j) <= 0.0);
            }
        }
    }
}

TEST_CASE("coercivity and boundedness on random finite element functions") {
    const Mesh m(-1.0, 1.0, 14);
    const double s = 0.5;
    const Kernel k = perturbed_kernel(s, [](double x, double y) { return 1.5 + 0.4 * std::cos(x + y); }, true);
    const Eigen::MatrixXd a = assemble_stiffness_symmetric(m, k);
    std::mt19937 rng(5);
    std::normal_distribution<double> d;
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd u(14);
        Eigen::VectorXd v(14);
        for (int i = 0; i < 14; ++i) {
            u(i) = d(rng);
            v(i) = d(rng);
        }
        const double nu = ds_norm_sq(m, u, s);
        const double nv = ds_norm_sq(m, v, s);
        CHECK(u.dot(a * u) >= k.a_lower() * nu * (1 - 1e-8));
        CHECK(std::abs(v.dot(a * u)) <= k.a_upper() * std::sqrt(nu * nv) * (1 + 1e-8));
    }
}

TEST_CASE("load vector") {
    const Mesh m(-1.0, 1.0, 9);
    const Eigen::VectorXd b = assemble_load(m, LoadData::constant(2.0), 0.5);
    CHECK(b.cwiseAbs().maxCoeff() == doctest::Approx(2.0 * m.h()));
    CHECK(b.minCoeff() == doctest::Approx(2.0 * m.h()));
    Eigen::VectorXd nodal = Eigen::VectorXd::LinSpaced(9, 1.0, 9.0);
    const Eigen::VectorXd bn = assemble_load(m, LoadData::nodal(nodal), 0.5);
    CHECK((bn - m.h() * nodal).cwiseAbs().maxCoeff() < 1e-14);
    // D^s of a hat is odd about its centre, so an even vector field gives an odd load
    LoadData vec;
    vec.f_sharp = [](double) { return 0.0; };
    vec.f_vec = [](double x) { return std::cos(x); };
    const Eigen::VectorXd bv = assemble_load(m, vec, 0.5);
    CHECK(std::abs(bv(4)) < 1e-10);
    CHECK(bv(0) == doctest::Approx(-bv(8)).epsilon(1e-8));
}

TEST_CASE("mass term and classical system") {
    const Mesh m(-1.0, 1.0, 7);
    const DiscreteSystem sys = make_system(m, fractional_laplacian_kernel(0.5), LoadData::constant(1.0));
    const DiscreteSystem with = add_mass(sys, 3.0);
    CHECK((with.stiffness - sys.stiffness).diagonal().minCoeff() == doctest::Approx(3.0 * m.h()));
    CHECK(with.lambda == 3.0);
    CHECK_THROWS_AS(add_mass(sys, -1.0), DomainError);
    const DiscreteSystem cl = make_classical_system(m, LoadData::constant(1.0));
    CHECK(cl.stiffness(0, 0) == doctest::Approx(2.0 / m.h()));
    CHECK(cl.stiffness(0, 1) == doctest::Approx(-1.0 / m.h()));
    CHECK(cl.s == 1.0);
    CHECK(sys.s == 0.5);
}
