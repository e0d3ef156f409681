#pragma once

#include "fracobs/discretization.hpp"
#include "fracobs/penalty.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fracobs {

/// Encoding of absent bounds. Values with magnitude >= kInfiniteThreshold are treated as infinite.
constexpr double kInfinity = 1e18;
constexpr double kInfiniteThreshold = 1e17;

inline bool is_finite_bound(double v) { return std::abs(v) < kInfiniteThreshold; }

struct ObstacleSet {
    Eigen::VectorXd lower;                 // psi_h, entries may be -kInfinity
    std::optional<Eigen::VectorXd> upper;  // phi_h, entries may be +kInfinity

    static ObstacleSet one_sided(Eigen::VectorXd lower);
    static ObstacleSet two_sided(Eigen::VectorXd lower, Eigen::VectorXd upper);
    static ObstacleSet unconstrained(int n);

    double lower_at(int i) const { return lower(i); }
    double upper_at(int i) const { return upper ? (*upper)(i) : kInfinity; }
    /// UsageError on size mismatch or lower > upper somewhere.
    void validate(int n) const;
};

struct SolveResult {
    Eigen::VectorXd u;
    Eigen::VectorXd residual;        // A u - b
    Eigen::MatrixXd u_stack;         // membranes: row j = u_{j+1}
    Eigen::MatrixXd residual_stack;  // membranes: row j = A u_{j+1} - b^{j+1}
    std::vector<int> active_lower;
    std::vector<int> active_upper;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;     // max update (or residual norm) per iteration
    std::string method;
    std::string note;
};

struct PsorOptions {
    double omega = 1.5;
    double tol = 1e-10;
    int max_iter = 200000;
    double act_tol = 1e-9;
    std::optional<Eigen::VectorXd> initial;
};

/// Projected SOR for  lower <= u <= upper,  complementarity with A u - b.
/// Falls back to projected Richardson (step 1/||A||_inf) when the sweeps diverge.
SolveResult solve_psor(const DiscreteSystem& system, const ObstacleSet& obstacles,
                       const PsorOptions& options = {});

struct PenalizationConfig {
    PenaltyFunction theta = PenaltyFunction::rational();
    double epsilon = 0.1;
    Eigen::VectorXd zeta;                   // density, h zeta_i >= (A psi - b)_i^+
    std::optional<Eigen::VectorXd> zeta_upper;  // two obstacles: h zeta_i >= (A phi - b)_i^-

    /// UsageError unless epsilon > 0 and zeta is admissible for psi (and phi).
    void validate(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                  const std::optional<Eigen::VectorXd>& phi = std::nullopt) const;
};

/// Smallest admissible densities: (A psi - b)^+ / h and (A phi - b)^- / h.
Eigen::VectorXd minimal_zeta(const DiscreteSystem& system, const Eigen::VectorXd& psi);
Eigen::VectorXd minimal_zeta_upper(const DiscreteSystem& system, const Eigen::VectorXd& phi);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 200;
    int max_halvings = 30;
};

/// A u + h zeta theta((u - psi)/eps) = b + h zeta, by damped Newton (nonlinear Gauss-Seidel
/// as fallback). Approximates the obstacle solution from above.
SolveResult solve_penalized(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                            const PenalizationConfig& config, const NewtonOptions& options = {});

/// Same with theta_bar(t) = 1 - theta(-t/eps): approximation from below.
SolveResult solve_penalized_lower(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                                  const PenalizationConfig& config,
                                  const NewtonOptions& options = {});

enum class TwoObstacleMethod { psor, penalized };

/// psi <= u <= phi. The penalized variant solves
///   A u + h zeta_psi theta((u-psi)/eps) - h zeta_phi theta((phi-u)/eps) = b + h zeta_psi - h zeta_phi.
SolveResult solve_two_obstacles(const DiscreteSystem& system, const ObstacleSet& obstacles,
                                TwoObstacleMethod method, const PsorOptions& psor = {},
                                const std::optional<PenalizationConfig>& penalization = std::nullopt,
                                const NewtonOptions& newton = {});

enum class MembraneMethod { gauss_seidel, penalized };

struct MembraneOptions {
    double tol = 1e-10;
    int max_sweeps = 200000;  // nodal sweeps
    PsorOptions inner;
    PenaltyFunction theta = PenaltyFunction::clipped_ramp();
    double epsilon = 1e-3;
    NewtonOptions newton;
};

/// Penalisation weights at every node from the load densities f^i = b^i / h:
/// zeta_0 = max_i (f^1+...+f^i)/i, zeta_i = i zeta_0 - (f^1+...+f^i). Row i holds zeta_i.
Eigen::MatrixXd membrane_weights(const std::vector<Eigen::VectorXd>& densities);

/// u_1 >= u_2 >= ... >= u_N with loads b^i (already assembled vectors).
/// gauss_seidel: projected relaxation sweeping the nodes, each node updating all N membranes
/// at once with the ordering restored by pool-adjacent-violators (omega from options.inner).
/// penalized: damped Newton on the coupled bounded penalization with weights membrane_weights.
SolveResult solve_n_membranes(const DiscreteSystem& system, const std::vector<Eigen::VectorXd>& loads,
                              MembraneMethod method, const MembraneOptions& options = {});

enum class PivotOrder { forward, reverse };

/// Exact solution by enumerating lower-active / free / upper-active states (n <= 10).
/// NumericalFailure if no state satisfies the complementarity conditions.
Eigen::VectorXd lcp_oracle(const DiscreteSystem& system, const ObstacleSet& obstacles,
                           PivotOrder order = PivotOrder::forward);

/// Active sets of u with respect to the obstacles.
void fill_active_sets(const ObstacleSet& obstacles, const Eigen::VectorXd& u, double act_tol,
                      SolveResult& result);

}  // namespace fracobs
