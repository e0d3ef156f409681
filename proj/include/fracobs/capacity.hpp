#pragma once

#include "fracobs/discretization.hpp"
#include "fracobs/kernels.hpp"
#include "fracobs/mesh.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace fracobs {

/// Finite union of disjoint closed intervals strictly inside the domain.
struct CompactSet1D {
    std::vector<std::pair<double, double>> intervals;

    static CompactSet1D interval(double a, double b) { return CompactSet1D{{{a, b}}}; }
    static CompactSet1D point(double x) { return CompactSet1D{{{x, x}}}; }

    /// UsageError if empty, not sorted/disjoint, or touching the boundary of the mesh domain.
    void validate(const Mesh& mesh) const;
    /// Dofs whose nodes lie in K after snapping every interval outward to mesh nodes.
    std::vector<int> nodes(const Mesh& mesh) const;
    /// Snapped intervals, node-aligned.
    CompactSet1D snapped(const Mesh& mesh) const;
    double distance(double x) const;
    std::string describe() const;
};

struct CapacityResult {
    Eigen::VectorXd potential;
    double capacity = 0.0;       // u^T A u
    Eigen::VectorXd measure;     // A u
    double measure_on_set = 0.0; // sum of the measure over the nodes of K
    double measure_total = 0.0;
    CompactSet1D set;
    CompactSet1D snapped;
    std::vector<int> set_nodes;
    bool converged = false;
    int iterations = 0;
};

/// Capacitary potential: obstacle 1 on the nodes of K, no obstacle elsewhere, zero load
/// (the load of the system is ignored).
CapacityResult capacitary_potential(const DiscreteSystem& system, const CompactSet1D& set,
                                    double tol = 1e-12);

struct CapacityBoundsReport {
    double c_s = 0.0;        // fractional-Laplacian capacity
    double c_s_a = 0.0;      // capacity for the given kernel
    double a_lower = 0.0;
    double a_upper = 0.0;
    double lower_bound = 0.0;  // a_* C_s
    double upper_bound = 0.0;  // a^*^2 / a_* C_s
    double lower_margin = 0.0;
    double upper_margin = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// a_* C_s(K) <= C_s^a(K) <= (a^*^2 / a_*) C_s(K), relative tolerance 1e-8.
CapacityBoundsReport capacity_bounds_check(const CompactSet1D& set, const Kernel& kernel,
                                           const Mesh& mesh);
/// Same with both systems already assembled on the same mesh.
CapacityBoundsReport capacity_bounds_check(const CompactSet1D& set, const DiscreteSystem& kernel_system,
                                           const DiscreteSystem& laplacian_system);

struct ObstacleCapacityReport {
    double measure_on_set = 0.0;   // mu(K) for the psi-obstacle solution
    double capacity = 0.0;         // C_s^a(K)
    double psi_norm = 0.0;         // H^s norm of the interpolant of psi^+
    double u_norm = 0.0;
    double ratio = 0.0;            // mu(K) / sqrt(C_s^a(K))
    double bound = 0.0;            // (a^*^2 / a_*^{3/2}) psi_norm sqrt(C_s^a(K))
    double energy_bound = 0.0;     // (a^* / a_*) psi_norm
    double slack = 0.0;
    bool pass = false;
    bool energy_pass = false;
};

/// mu(K) <= (a^*^2 / a_*^{3/2}) ||psi^+|| C_s^a(K)^{1/2} and ||u|| <= (a^*/a_*) ||psi^+||,
/// with the interpolant norm as upper proxy for ||psi^+||.
ObstacleCapacityReport obstacle_capacity_estimate(const DiscreteSystem& system,
                                                  const Eigen::VectorXd& psi,
                                                  const CompactSet1D& set);

}  // namespace fracobs
