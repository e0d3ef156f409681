#include "fracobs/capacity.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/vi_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fracobs {

namespace {

std::pair<int, int> node_range(const Mesh& mesh, double a, double b) {
    const double h = mesh.h();
    int k0 = static_cast<int>(std::floor((a - mesh.x_lo) / h + 1e-9));
    int k1 = static_cast<int>(std::ceil((b - mesh.x_lo) / h - 1e-9));
    k0 = std::max(k0, 1);
    k1 = std::min(k1, mesh.n);
    return {k0, k1};
}

}  // namespace

void CompactSet1D::validate(const Mesh& mesh) const {
    if (intervals.empty()) {
        throw UsageError("compact set has no intervals");
    }
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        const auto [a, b] = intervals[j];
        if (!(a <= b)) {
            throw UsageError("compact set interval has a > b");
        }
        if (!(a > mesh.x_lo && b < mesh.x_hi)) {
            throw UsageError("compact set " + describe() + " is not inside the domain");
        }
        if (j > 0 && !(intervals[j - 1].second < a)) {
            throw UsageError("compact set intervals must be sorted and disjoint");
        }
    }
}

std::vector<int> CompactSet1D::nodes(const Mesh& mesh) const {
    validate(mesh);
    std::vector<int> out;
    for (const auto& [a, b] : intervals) {
        const auto [k0, k1] = node_range(mesh, a, b);
        for (int k = k0; k <= k1; ++k) {
            if (out.empty() || out.back() < k - 1) {
                out.push_back(k - 1);
            }
        }
    }
    return out;
}

CompactSet1D CompactSet1D::snapped(const Mesh& mesh) const {
    validate(mesh);
    CompactSet1D out;
    for (const auto& [a, b] : intervals) {
        const auto [k0, k1] = node_range(mesh, a, b);
        const double lo = mesh.node(k0);
        const double hi = mesh.node(k1);
        if (!out.intervals.empty() && out.intervals.back().second >= lo) {
            out.intervals.back().second = std::max(out.intervals.back().second, hi);
        } else {
            out.intervals.emplace_back(lo, hi);
        }
    }
    return out;
}

double CompactSet1D::distance(double x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : intervals) {
        d = std::min(d, x < a ? a - x : (x > b ? x - b : 0.0));
    }
    return d;
}

std::string CompactSet1D::describe() const {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        os << (j ? "u" : "") << "[" << intervals[j].first << ";" << intervals[j].second << "]";
    }
    return os.str();
}

CapacityResult capacitary_potential(const DiscreteSystem& system, const CompactSet1D& set,
                                    double tol) {
    const Mesh& mesh = system.mesh;
    CapacityResult out;
    out.set = set;
    out.snapped = set.snapped(mesh);
    out.set_nodes = set.nodes(mesh);
    const int n = system.n();
    Eigen::VectorXd psi = Eigen::VectorXd::Constant(n, -kInfinity);
    for (int i : out.set_nodes) {
        psi(i) = 1.0;
    }
    DiscreteSystem zero = system;
    zero.load = Eigen::VectorXd::Zero(n);
    PsorOptions opt;
    opt.tol = tol;
    const SolveResult r = solve_psor(zero, ObstacleSet::one_sided(psi), opt);
    out.converged = r.converged;
    out.iterations = r.iterations;
    out.potential = r.u;
    out.measure = system.stiffness * r.u;
    out.capacity = r.u.dot(out.measure);
    out.measure_total = out.measure.sum();
    for (int i : out.set_nodes) {
        out.measure_on_set += out.measure(i);
    }
    return out;
}

CapacityBoundsReport capacity_bounds_check(const CompactSet1D& set,
                                           const DiscreteSystem& kernel_system,
                                           const DiscreteSystem& laplacian_system) {
    if (!(kernel_system.mesh == laplacian_system.mesh)) {
        throw UsageError("capacity comparison needs both systems on the same mesh");
    }
    const CapacityResult ca = capacitary_potential(kernel_system, set);
    const CapacityResult c = capacitary_potential(laplacian_system, set);
    if (!ca.converged || !c.converged) {
        throw NumericalFailure("capacitary potential solve did not converge");
    }
    CapacityBoundsReport rep;
    rep.c_s = c.capacity;
    rep.c_s_a = ca.capacity;
    rep.a_lower = kernel_system.a_lower;
    rep.a_upper = kernel_system.a_upper;
    rep.lower_bound = rep.a_lower * rep.c_s;
    rep.upper_bound = rep.a_upper * rep.a_upper / rep.a_lower * rep.c_s;
    rep.lower_margin = rep.c_s_a - rep.lower_bound;
    rep.upper_margin = rep.upper_bound - rep.c_s_a;
    rep.tol = 1e-8 * std::max(rep.c_s, rep.c_s_a);
    rep.pass = rep.lower_margin >= -rep.tol && rep.upper_margin >= -rep.tol;
    return rep;
}

CapacityBoundsReport capacity_bounds_check(const CompactSet1D& set, const Kernel& kernel,
                                           const Mesh& mesh) {
    const LoadData zero = LoadData::constant(0.0);
    const DiscreteSystem ks = make_system(mesh, kernel, zero);
    const DiscreteSystem ls = make_system(mesh, fractional_laplacian_kernel(kernel.s()), zero);
    return capacity_bounds_check(set, ks, ls);
}

ObstacleCapacityReport obstacle_capacity_estimate(const DiscreteSystem& system,
                                                  const Eigen::VectorXd& psi,
                                                  const CompactSet1D& set) {
    const int n = system.n();
    if (psi.size() != n) {
        throw UsageError("obstacle has wrong size");
    }
    if (!(system.s > 0.0 && system.s < 1.0)) {
        throw UsageError("obstacle capacity estimate needs a fractional system");
    }
    const CapacityResult cap = capacitary_potential(system, set);
    DiscreteSystem zero = system;
    zero.load = Eigen::VectorXd::Zero(n);
    PsorOptions opt;
    opt.tol = 1e-12;
    const SolveResult r = solve_psor(zero, ObstacleSet::one_sided(psi), opt);
    if (!r.converged || !cap.converged) {
        throw NumericalFailure("obstacle capacity solve did not converge");
    }
    const Eigen::VectorXd mu = system.stiffness * r.u;
    ObstacleCapacityReport rep;
    for (int i : cap.set_nodes) {
        rep.measure_on_set += mu(i);
    }
    rep.capacity = cap.capacity;
    rep.psi_norm = std::sqrt(ds_norm_sq(system.mesh, psi.cwiseMax(0.0), system.s));
    rep.u_norm = std::sqrt(std::max(0.0, ds_norm_sq(system.mesh, r.u, system.s)));
    rep.ratio = rep.capacity > 0.0 ? rep.measure_on_set / std::sqrt(rep.capacity) : 0.0;
    const double al = system.a_lower;
    const double au = system.a_upper;
    rep.bound = au * au / std::pow(al, 1.5) * rep.psi_norm * std::sqrt(std::max(rep.capacity, 0.0));
    rep.energy_bound = au / al * rep.psi_norm;
    const double tol = 1e-8 * (1.0 + rep.bound);
    rep.slack = rep.bound - rep.measure_on_set;
    rep.pass = rep.slack >= -tol;
    rep.energy_pass = rep.u_norm <= rep.energy_bound + 1e-8 * (1.0 + rep.energy_bound);
    return rep;
}

}  // namespace fracobs
