#include "fracobs/analysis.hpp"

#include "fracobs/capacity.hpp"
#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace fracobs {

namespace {

void require_converged(const SolveResult& r) {
    if (!r.converged) {
        throw UsageError("Lewy-Stampacchia check refused: solver result did not converge");
    }
}

LSReport bounds_report(std::string label, const Eigen::VectorXd& r, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, double tol) {
    LSReport rep;
    rep.label = std::move(label);
    rep.tol = tol;
    rep.lower_violation = (lo - r).cwiseMax(0.0).maxCoeff();
    rep.upper_violation = (r - hi).cwiseMax(0.0).maxCoeff();
    rep.pass = rep.lower_violation <= tol && rep.upper_violation <= tol;
    return rep;
}

}  // namespace

LSReport check_ls_one(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                      const SolveResult& result, double tol) {
    require_converged(result);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (!is_finite_bound(psi(i))) {
            throw UsageError("Lewy-Stampacchia check needs a finite obstacle");
        }
    }
    const Eigen::VectorXd& b = system.load;
    const Eigen::VectorXd r = system.stiffness * result.u;
    return bounds_report("one-obstacle", r, b, b.cwiseMax(system.stiffness * psi), tol);
}

LSReport check_ls_two(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                      const Eigen::VectorXd& phi, const SolveResult& result, double tol) {
    require_converged(result);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (!is_finite_bound(psi(i)) || !is_finite_bound(phi(i))) {
            throw UsageError("Lewy-Stampacchia check needs finite obstacles");
        }
    }
    const Eigen::VectorXd& b = system.load;
    const Eigen::VectorXd r = system.stiffness * result.u;
    return bounds_report("two-obstacle", r, b.cwiseMin(system.stiffness * phi),
                         b.cwiseMax(system.stiffness * psi), tol);
}

std::vector<LSReport> check_ls_membranes(const DiscreteSystem& system,
                                         const std::vector<Eigen::VectorXd>& loads,
                                         const SolveResult& result, double tol) {
    require_converged(result);
    const int count = static_cast<int>(loads.size());
    if (result.u_stack.rows() != count) {
        throw UsageError("membrane result does not match the number of loads");
    }
    std::vector<LSReport> out;
    for (int j = 0; j < count; ++j) {
        Eigen::VectorXd lo = loads[0];
        for (int i = 1; i <= j; ++i) {
            lo = lo.cwiseMin(loads[static_cast<std::size_t>(i)]);
        }
        Eigen::VectorXd hi = loads[static_cast<std::size_t>(j)];
        for (int i = j + 1; i < count; ++i) {
            hi = hi.cwiseMax(loads[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd r = system.stiffness * result.u_stack.row(j).transpose();
        out.push_back(bounds_report("membrane " + std::to_string(j + 1), r, lo, hi, tol));
    }
    return out;
}

Eigen::MatrixXd two_membrane_oracle(const DiscreteSystem& system, const Eigen::VectorXd& b1,
                                    const Eigen::VectorXd& b2) {
    const int n = system.n();
    DiscreteSystem sum = system;
    sum.load = b1 + b2;
    const Eigen::VectorXd sigma = lcp_oracle(sum, ObstacleSet::unconstrained(n));
    DiscreteSystem diff = system;
    diff.load = b1 - b2;
    const Eigen::VectorXd d = lcp_oracle(diff, ObstacleSet::one_sided(Eigen::VectorXd::Zero(n)));
    Eigen::MatrixXd u(2, n);
    u.row(0) = (0.5 * (sigma + d)).transpose();
    u.row(1) = (0.5 * (sigma - d)).transpose();
    return u;
}

PenalizationStudy penalization_error_study(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                                           const PenaltyFunction& theta,
                                           const std::vector<double>& eps_list) {
    if (!(system.s > 0.0 && system.s < 1.0)) {
        throw UsageError("penalization study needs a fractional system");
    }
    PsorOptions popt;
    popt.tol = 1e-13;
    const SolveResult exact = solve_psor(system, ObstacleSet::one_sided(psi), popt);
    if (!exact.converged) {
        throw NumericalFailure("reference obstacle solve did not converge");
    }
    PenalizationConfig cfg;
    cfg.theta = theta;
    cfg.zeta = minimal_zeta(system, psi);
    PenalizationStudy study;
    study.zeta_l1 = system.mesh.h() * cfg.zeta.sum();
    study.bounded = true;
    study.monotone = true;
    std::vector<double> sorted = eps_list;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (double eps : sorted) {
        cfg.epsilon = eps;
        const SolveResult ue = solve_penalized(system, psi, cfg);
        PenalizationRow row;
        row.epsilon = eps;
        row.converged = ue.converged;
        row.error = ds_norm_sq(system.mesh, exact.u - ue.u, system.s);
        row.bound = eps * theta.c_theta() / system.a_lower * study.zeta_l1;
        if (!ue.converged || row.error > row.bound * (1.0 + 1e-3) + 1e-14) {
            study.bounded = false;
        }
        if (!study.rows.empty() && row.error > study.rows.back().error * (1.0 + 1e-9) + 1e-20) {
            study.monotone = false;
        }
        study.rows.push_back(row);
    }
    return study;
}

double p1_l2_norm(const Mesh& mesh, const Eigen::VectorXd& v) {
    const double h = mesh.h();
    double acc = 0.0;
    double prev = 0.0;
    for (Eigen::Index i = 0; i <= v.size(); ++i) {
        const double cur = i < v.size() ? v(i) : 0.0;
        acc += h / 3.0 * (prev * prev + prev * cur + cur * cur);
        prev = cur;
    }
    return std::sqrt(acc);
}

Eigen::VectorXd nodal_values(const Mesh& mesh, const std::function<double(double)>& g) {
    Eigen::VectorXd v(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
        v(i) = g(mesh.dof_x(i));
    }
    return v;
}

SToOneStudy s_to_one_study(const Mesh& mesh, const std::function<double(double)>& psi,
                           const std::function<double(double)>& f, const std::vector<double>& s_list) {
    if (s_list.empty()) {
        throw UsageError("s list is empty");
    }
    LoadData data;
    data.f_sharp = f;
    const Eigen::VectorXd psi_h = nodal_values(mesh, psi);
    const ObstacleSet obs = ObstacleSet::one_sided(psi_h);
    PsorOptions popt;
    popt.tol = 1e-12;

    SToOneStudy study;
    const DiscreteSystem classical = make_classical_system(mesh, data);
    const SolveResult ref = solve_psor(classical, obs, popt);
    study.classical = ref.u;
    study.classical_converged = ref.converged;
    for (double s : s_list) {
        const DiscreteSystem sys = make_system(mesh, ds_energy_kernel(s), data);
        const SolveResult r = solve_psor(sys, obs, popt);
        SweepRecord rec;
        rec.s = s;
        rec.u = r.u;
        rec.h = mesh.h();
        rec.converged = r.converged;
        rec.l2_distance = p1_l2_norm(mesh, r.u - ref.u);
        rec.max_distance = (r.u - ref.u).cwiseAbs().maxCoeff();
        study.records.push_back(std::move(rec));
    }
    study.endpoints_decrease = study.records.back().l2_distance < study.records.front().l2_distance;
    study.interior_monotone = true;
    for (std::size_t k = 1; k < study.records.size(); ++k) {
        if (study.records[k].l2_distance > study.records[k - 1].l2_distance) {
            study.interior_monotone = false;
        }
    }
    return study;
}

namespace {

Eigen::VectorXd random_vector(int n, double lo, double hi, std::mt19937& rng) {
    std::uniform_real_distribution<double> d(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = d(rng);
    }
    return v;
}

std::string sci(double v) { return fmt::format("{:.6e}", v); }

}  // namespace

std::vector<CheckRow> run_invariant_suite() {
    std::vector<CheckRow> rows;
    std::mt19937 rng(20240611u);

    // oracle equivalence
    {
        double worst = 0.0;
        for (int seed = 0; seed < 10; ++seed) {
            const int n = 6;
            const Mesh mesh(-1.0, 1.0, n);
            DiscreteSystem sys = make_system(mesh, fractional_laplacian_kernel(0.5),
                                             LoadData::nodal(random_vector(n, -3, 3, rng)));
            const Eigen::VectorXd lo = random_vector(n, -0.3, 0.0, rng);
            const Eigen::VectorXd hi = lo + random_vector(n, 0.0, 0.3, rng);
            const auto one = solve_psor(sys, ObstacleSet::one_sided(lo));
            const auto two = solve_two_obstacles(sys, ObstacleSet::two_sided(lo, hi), TwoObstacleMethod::psor);
            worst = std::max(worst, (one.u - lcp_oracle(sys, ObstacleSet::one_sided(lo))).cwiseAbs().maxCoeff());
            worst = std::max(worst, (two.u - lcp_oracle(sys, ObstacleSet::two_sided(lo, hi), PivotOrder::reverse))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        rows.push_back({"psor matches enumeration oracle (n=6)", worst <= 1e-8, "max deviation " + sci(worst)});
    }

    const int n = 24;
    const Mesh mesh(-1.0, 1.0, n);
    const double s = 0.6;
    const Kernel lap = fractional_laplacian_kernel(s);
    const DiscreteSystem base = make_system(mesh, lap, LoadData::constant(0.0));
    auto with_load = [&](const Eigen::VectorXd& f) {
        DiscreteSystem sys = base;
        sys.load = mesh.h() * f;
        return sys;
    };

    // Lewy-Stampacchia
    {
        double worst = 0.0;
        bool ok = true;
        for (int t = 0; t < 5; ++t) {
            const auto sys = with_load(random_vector(n, -4, 4, rng));
            const double tol = 1e-6 * sys.load.cwiseAbs().maxCoeff();
            const Eigen::VectorXd psi = nodal_values(mesh, [](double x) { return 0.2 - x * x; }) +
                                        random_vector(n, -0.05, 0.05, rng);
            const Eigen::VectorXd phi = psi.array() + 0.3;
            const auto r1 = solve_psor(sys, ObstacleSet::one_sided(psi));
            const auto r2 = solve_two_obstacles(sys, ObstacleSet::two_sided(psi, phi), TwoObstacleMethod::psor);
            const auto l1 = check_ls_one(sys, psi, r1, tol);
            const auto l2 = check_ls_two(sys, psi, phi, r2, tol);
            std::vector<Eigen::VectorXd> loads;
            for (int k = 0; k < 3; ++k) {
                loads.push_back(mesh.h() * random_vector(n, -3, 3, rng));
            }
            const auto rm = solve_n_membranes(sys, loads, MembraneMethod::gauss_seidel);
            const auto lm = check_ls_membranes(sys, loads, rm, tol);
            ok = ok && l1.pass && l2.pass;
            worst = std::max({worst, l1.lower_violation, l1.upper_violation, l2.lower_violation,
                              l2.upper_violation});
            for (const auto& rep : lm) {
                ok = ok && rep.pass;
                worst = std::max({worst, rep.lower_violation, rep.upper_violation});
            }
        }
        rows.push_back({"Lewy-Stampacchia one/two/membranes", ok, "max violation " + sci(worst)});
    }

    // order properties
    {
        double comp = 0.0;
        double maxp = 0.0;
        double linf = 0.0;
        double elam = 0.0;
        for (int t = 0; t < 5; ++t) {
            const Eigen::VectorXd f = random_vector(n, -2, 2, rng);
            const Eigen::VectorXd psi = random_vector(n, -0.3, 0.1, rng);
            const Eigen::VectorXd f_hat = f - random_vector(n, 0, 1, rng);
            const Eigen::VectorXd psi_hat = psi - random_vector(n, 0, 0.1, rng);
            const auto u = solve_psor(with_load(f), ObstacleSet::one_sided(psi));
            const auto uh = solve_psor(with_load(f_hat), ObstacleSet::one_sided(psi_hat));
            comp = std::max(comp, (uh.u - u.u).maxCoeff());
            const auto us = solve_psor(with_load(f), ObstacleSet::one_sided(psi_hat));
            linf = std::max(linf, (u.u - us.u).cwiseAbs().maxCoeff() - (psi - psi_hat).cwiseAbs().maxCoeff());
            const auto w = solve_psor(with_load(-random_vector(n, 0, 1, rng)), ObstacleSet::one_sided(psi));
            maxp = std::max(maxp, w.u.maxCoeff() - std::max(0.0, psi.maxCoeff()));
            const double lambda = 2.0;
            const DiscreteSystem sl = add_mass(with_load(f), lambda);
            const auto ul = solve_psor(sl, ObstacleSet::one_sided(psi));
            const double upper = std::max({0.0, psi.maxCoeff(), f.maxCoeff() / lambda});
            const double lower = std::min(0.0, f.minCoeff() / lambda);
            elam = std::max({elam, ul.u.maxCoeff() - upper, lower - ul.u.minCoeff()});
        }
        rows.push_back({"comparison principle", comp <= 1e-8, "max violation " + sci(std::max(comp, 0.0))});
        rows.push_back({"weak maximum principle", maxp <= 1e-8, "max excess " + sci(std::max(maxp, 0.0))});
        rows.push_back({"L-infinity obstacle dependence", linf <= 1e-8, "max excess " + sci(std::max(linf, 0.0))});
        rows.push_back({"E_lambda bounds", elam <= 1e-8, "max excess " + sci(std::max(elam, 0.0))});
    }

    // penalization
    {
        const auto sys = with_load(nodal_values(mesh, [](double x) { return 3.0 * std::cos(3.0 * x) - 1.0; }));
        const Eigen::VectorXd psi = nodal_values(mesh, [](double x) { return 0.15 - x * x; });
        const auto study = penalization_error_study(sys, psi, PenaltyFunction::rational(), {0.1, 0.05, 0.025});
        double worst_ratio = 0.0;
        for (const auto& r : study.rows) {
            worst_ratio = std::max(worst_ratio, r.bound > 0.0 ? r.error / r.bound : 0.0);
        }
        rows.push_back({"penalization error bound", study.pass(), "max error/bound " + sci(worst_ratio)});
    }

    // capacity
    {
        const CompactSet1D k = CompactSet1D::interval(-0.25, 0.25);
        const auto cap = capacitary_potential(base, k);
        const double rel = std::abs(cap.capacity - cap.measure_on_set) / cap.capacity;
        const bool bounds_ok = cap.potential.minCoeff() >= -1e-8 && cap.potential.maxCoeff() <= 1.0 + 1e-8;
        rows.push_back({"capacity identity and potential bounds", cap.converged && rel <= 1e-6 && bounds_ok,
                        "relative gap " + sci(rel)});
        const auto twice = capacity_bounds_check(k, constant_kernel(s, 2.0), mesh);
        rows.push_back({"capacity comparison (constant kernel)", twice.pass,
                        "C_s^a/C_s " + sci(twice.c_s_a / twice.c_s)});
    }

    // assembly
    {
        const Mesh m(-1.0, 1.0, 12);
        const Kernel k = perturbed_kernel(
            0.5, [](double x, double y) { return 1.5 + 0.3 * std::cos(x + y); }, true, "cos-sum",
            std::make_pair(1.2, 1.8));
        AssemblyReport rs;
        AssemblyReport rn;
        const Eigen::MatrixXd as = assemble_stiffness_symmetric(m, k, &rs);
        const Eigen::MatrixXd an = assemble_stiffness(m, k, &rn);
        const double rel = (as - an).cwiseAbs().maxCoeff() / as.cwiseAbs().maxCoeff();
        rows.push_back({"symmetric vs nonsymmetric assembly", rel <= 1e-5, "relative deviation " + sci(rel)});
        rows.push_back({"Z-matrix clamp total", rs.clamp_total <= 1e-6 * rs.norm_max && rn.clamp_total <= 1e-6 * rn.norm_max,
                        "clamped " + std::to_string(rs.clamp_count + rn.clamp_count)});
    }

    // k_A counterexample
    {
        const auto e = ka_evaluate(CoefficientField::counterexample(), -0.5, 0.5, 0.8);
        rows.push_back({"k_A counterexample is negative", e.value < 0.0, "k_A(-0.5,0.5) " + sci(e.value)});
    }
    return rows;
}

}  // namespace fracobs
