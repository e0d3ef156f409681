#pragma once

#include "fracobs/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace fracobs::detail {

// Kernel in profile form: a(x,y) = c^2 * profile(x,y) * |x-y|^{-1-2s}.
// Everything below integrates profile(x,y) |x-y|^{-1-2s}; callers multiply by c^2.
struct PairProfile {
    double s = 0.5;
    std::function<double(double, double)> profile;
    std::optional<double> constant;
    double lower = 1.0;
    double upper = 1.0;
};

struct PairOptions {
    int singular_order = 10;
    int angular_order = 10;
    int element_order = 10;
    double tail_cutoff_factor = 10.0;
    double tail_rel_tol = 1e-9;
};

// 1/2 int_{Omega^2} (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) k(x,y); profile must be symmetric.
Eigen::MatrixXd pair_form_symmetric(const Mesh& mesh, const PairProfile& kernel,
                                    const PairOptions& options = {});

// int_{Omega^2} phi_i(x) (phi_j(x)-phi_j(y)) k(x,y) as a principal value.
Eigen::MatrixXd pair_form_nonsymmetric(const Mesh& mesh, const PairProfile& kernel,
                                       const PairOptions& options = {});

struct TailReport {
    double cutoff_bound = 0.0;
    double quadrature_error = 0.0;
};

// int_Omega phi_i phi_j tau with tau(x) = int_{R \ Omega} k(x,y) dy.
Eigen::MatrixXd tail_mass(const Mesh& mesh, const PairProfile& kernel, TailReport* report,
                          const PairOptions& options = {});

// tau(x) for x inside the domain.
double tail_density(const Mesh& mesh, const PairProfile& kernel, double x, double cutoff,
                    double rel_tol, TailReport* report);

}  // namespace fracobs::detail

namespace fracobs::detail {

// Composite rule on [x_lo - W, x_hi + W], W = 2 (x_hi - x_lo), graded towards every mesh node.
// With `infinite_tails`, mapped Gauss-Jacobi points covering the rest of the line are appended;
// they integrate functions decaying like |x|^{-2-2s}.
void ds_window_rule(const Mesh& mesh, double s, bool infinite_tails, std::vector<double>& points,
                    std::vector<double>& weights);

}  // namespace fracobs::detail
