#pragma once

#include "fracobs/discretization.hpp"
#include "fracobs/penalty.hpp"
#include "fracobs/vi_solvers.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace fracobs {

struct LSReport {
    std::string label;
    double lower_violation = 0.0;  // max (lower_i - r_i)^+
    double upper_violation = 0.0;  // max (r_i - upper_i)^+
    double tol = 0.0;
    bool pass = false;
};

/// b_i - tol <= (A u)_i <= max(b_i, (A psi)_i) + tol. UsageError on a non-converged result.
LSReport check_ls_one(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                      const SolveResult& result, double tol);

/// min(b_i, (A phi)_i) - tol <= (A u)_i <= max(b_i, (A psi)_i) + tol.
LSReport check_ls_two(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                      const Eigen::VectorXd& phi, const SolveResult& result, double tol);

/// Membrane j: min(b^1..b^j)_i - tol <= (A u_j)_i <= max(b^j..b^N)_i + tol.
std::vector<LSReport> check_ls_membranes(const DiscreteSystem& system,
                                         const std::vector<Eigen::VectorXd>& loads,
                                         const SolveResult& result, double tol);

/// Exact two-membrane solution from the decoupling sigma = u_1 + u_2, d = u_1 - u_2 >= 0 (n <= 10).
Eigen::MatrixXd two_membrane_oracle(const DiscreteSystem& system, const Eigen::VectorXd& b1,
                                    const Eigen::VectorXd& b2);

struct PenalizationRow {
    double epsilon = 0.0;
    double error = 0.0;  // ds_norm_sq(u - u_eps)
    double bound = 0.0;  // eps C_theta / a_* ||zeta||_1
    bool converged = false;
};

struct PenalizationStudy {
    std::vector<PenalizationRow> rows;
    double zeta_l1 = 0.0;
    bool bounded = false;
    bool monotone = false;
    bool pass() const { return bounded && monotone; }
};

/// Minimal zeta; errors against the PSOR solution. Relative slack 1e-3 on the bound.
PenalizationStudy penalization_error_study(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                                           const PenaltyFunction& theta,
                                           const std::vector<double>& eps_list);

struct SweepRecord {
    double s = 0.0;
    Eigen::VectorXd u;
    double l2_distance = 0.0;
    double max_distance = 0.0;
    double h = 0.0;
    bool converged = false;
};

struct SToOneStudy {
    std::vector<SweepRecord> records;
    Eigen::VectorXd classical;
    bool classical_converged = false;
    bool endpoints_decrease = false;  // distance at the last s below the first
    bool interior_monotone = false;   // reported only
};

/// L2 norm of the P1 function with the given interior nodal values.
double p1_l2_norm(const Mesh& mesh, const Eigen::VectorXd& v);

/// Fractional problems use the D^s-energy kernel C_{1,s}|x-y|^{-1-2s}; the reference is the
/// classical obstacle problem for -u''.
SToOneStudy s_to_one_study(const Mesh& mesh, const std::function<double(double)>& psi,
                           const std::function<double(double)>& f, const std::vector<double>& s_list);

Eigen::VectorXd nodal_values(const Mesh& mesh, const std::function<double(double)>& g);

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Fixed-seed invariant suite used by the `verify` command.
std::vector<CheckRow> run_invariant_suite();

}  // namespace fracobs
