// Acceptance suite: one line per criterion, exit status 1 if any criterion fails.

#include "fracobs/analysis.hpp"
#include "fracobs/capacity.hpp"
#include "fracobs/discretization.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/kernels.hpp"
#include "fracobs/special_functions.hpp"
#include "fracobs/vi_solvers.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef FRACOBS_BINARY
#define FRACOBS_BINARY "fracobs"
#endif

using namespace fracobs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Eigen::VectorXd random_vector(Rng& rng, int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = uniform(rng, lo, hi);
    }
    return v;
}

// smooth random density: a0 + sum_k a_k cos(k x) + b_k sin(k x)
Eigen::VectorXd random_density(Rng& rng, const Mesh& mesh, double amplitude) {
    const double a0 = uniform(rng, -amplitude, amplitude);
    double a[3];
    double b[3];
    for (int k = 0; k < 3; ++k) {
        a[k] = uniform(rng, -amplitude, amplitude);
        b[k] = uniform(rng, -amplitude, amplitude);
    }
    return nodal_values(mesh, [&](double x) {
        double v = a0;
        for (int k = 0; k < 3; ++k) {
            v += a[k] * std::cos((k + 1) * x) + b[k] * std::sin((k + 1) * x);
        }
        return v;
    });
}

Eigen::VectorXd random_parabola(Rng& rng, const Mesh& mesh) {
    const double top = uniform(rng, 0.02, 0.3);
    const double curv = uniform(rng, 0.3, 2.0);
    const double shift = uniform(rng, -0.3, 0.3);
    return nodal_values(mesh, [&](double x) { return top - curv * (x - shift) * (x - shift); });
}

DiscreteSystem with_density(const DiscreteSystem& base, const Eigen::VectorXd& f) {
    DiscreteSystem sys = base;
    sys.load = base.mesh.h() * f;
    return sys;
}

const DiscreteSystem& laplacian_base(int n, double s) {
    static std::map<std::pair<int, double>, DiscreteSystem> cache;
    auto it = cache.find({n, s});
    if (it == cache.end()) {
        const Mesh mesh(-1.0, 1.0, n);
        it = cache.emplace(std::make_pair(n, s), make_system(mesh, fractional_laplacian_kernel(s), LoadData::constant(0.0)))
                 .first;
    }
    return it->second;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::string sci(double v) { return fmt::format("{:.3e}", v); }

// 1
Outcome counterexample() {
    const double s = 0.8;
    const double k09 = kappa_integrand(-0.5, 0.5, 0.9, s);
    const double k15 = kappa_integrand(-0.5, 0.5, 1.5, s);
    const double pv = kappa_pv_integral(-0.5, 0.5, s);
    const KAEvaluation ka = ka_evaluate(CoefficientField::counterexample(), -0.5, 0.5, s);
    const bool ok09 = std::abs(k09 - (-2.839)) <= 0.005;
    const bool ok15 = std::abs(k15 - (-0.287)) <= 0.005;
    const bool okpv = std::abs(pv - 30.0) <= 1.0;
    const bool okka = ka.value < 0.0;
    return {ok09 && ok15 && okpv && okka,
            fmt::format("kappa(0.9)={:.4f} [{}] kappa(1.5)={:.4f} [{}] PV={:.6f} vs 30+-1 [{}] k_A={:.5f} [{}]", k09,
                        ok09 ? "ok" : "off", k15, ok15 ? "ok" : "off", pv, okpv ? "ok" : "off", ka.value,
                        okka ? "ok" : "off")};
}

// 2
Outcome penalization_bound() {
    Rng rng(2002);
    const std::vector<double> eps = {0.1, 0.05, 0.025};
    const double svals[3] = {0.4, 0.6, 0.8};
    int failures = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < 20; ++t) {
        const double s = svals[t % 3];
        const DiscreteSystem& base = laplacian_base(64, s);
        const DiscreteSystem sys = with_density(base, random_density(rng, base.mesh, 3.0));
        const Eigen::VectorXd psi = random_parabola(rng, base.mesh);
        const PenalizationStudy st = penalization_error_study(sys, psi, PenaltyFunction::rational(), eps);
        bool converged = true;
        for (const auto& r : st.rows) {
            converged = converged && r.converged;
            worst_ratio = std::max(worst_ratio, r.bound > 0.0 ? r.error / r.bound : 0.0);
        }
        if (!st.pass() || !converged) {
            ++failures;
        }
    }
    return {failures == 0, fmt::format("20 instances, {} failing, max error/bound {}", failures, sci(worst_ratio))};
}

// 3
Outcome lewy_stampacchia() {
    Rng rng(3003);
    int failures = 0;
    double worst = 0.0;
    auto note = [&](const LSReport& r) {
        worst = std::max({worst, r.lower_violation, r.upper_violation});
        failures += r.pass ? 0 : 1;
    };
    for (int t = 0; t < 50; ++t) {
        const double s = uniform(rng, 0.3, 0.9);
        const DiscreteSystem& base = laplacian_base(48, s);
        const Mesh& mesh = base.mesh;
        const DiscreteSystem sys = with_density(base, random_density(rng, mesh, 4.0));
        const double tol = 1e-6 * max_abs(sys.load);
        const Eigen::VectorXd psi = random_parabola(rng, mesh);
        const SolveResult r1 = solve_psor(sys, ObstacleSet::one_sided(psi));
        note(check_ls_one(sys, psi, r1, tol));

        const Eigen::VectorXd phi = psi + random_vector(rng, mesh.n, 0.02, 0.4);
        const SolveResult r2 = solve_two_obstacles(sys, ObstacleSet::two_sided(psi, phi), TwoObstacleMethod::psor);
        note(check_ls_two(sys, psi, phi, r2, tol));

        const int count = 2 + t % 3;
        std::vector<Eigen::VectorXd> loads;
        double scale = 0.0;
        for (int k = 0; k < count; ++k) {
            loads.push_back(mesh.h() * random_density(rng, mesh, 4.0));
            scale = std::max(scale, max_abs(loads.back()));
        }
        const SolveResult rm = solve_n_membranes(sys, loads, MembraneMethod::gauss_seidel);
        for (const auto& rep : check_ls_membranes(sys, loads, rm, 1e-6 * scale)) {
            note(rep);
        }
    }

    // exact agreement with enumeration at n = 6
    double dev = 0.0;
    int mismatched_sets = 0;
    for (int seed = 0; seed < 50; ++seed) {
        Rng r(30000 + seed);
        const double s = uniform(r, 0.3, 0.9);
        const DiscreteSystem& base = laplacian_base(6, s);
        const DiscreteSystem sys = with_density(base, random_vector(r, 6, -4.0, 4.0));
        const Eigen::VectorXd psi = random_vector(r, 6, -0.3, 0.1);
        const Eigen::VectorXd phi = psi + random_vector(r, 6, 0.0, 0.3);
        for (int two = 0; two < 2; ++two) {
            const ObstacleSet obs = two ? ObstacleSet::two_sided(psi, phi) : ObstacleSet::one_sided(psi);
            const SolveResult res =
                two ? solve_two_obstacles(sys, obs, TwoObstacleMethod::psor) : solve_psor(sys, obs);
            const Eigen::VectorXd exact = lcp_oracle(sys, obs);
            dev = std::max(dev, max_abs(res.u - exact));
            SolveResult ref;
            fill_active_sets(obs, exact, PsorOptions{}.act_tol, ref);
            mismatched_sets += (ref.active_lower != res.active_lower || ref.active_upper != res.active_upper) ? 1 : 0;
        }
        const Eigen::VectorXd b1 = base.mesh.h() * random_vector(r, 6, -4.0, 4.0);
        const Eigen::VectorXd b2 = base.mesh.h() * random_vector(r, 6, -4.0, 4.0);
        const SolveResult rm = solve_n_membranes(sys, {b1, b2}, MembraneMethod::gauss_seidel);
        const Eigen::MatrixXd exact = two_membrane_oracle(sys, b1, b2);
        dev = std::max(dev, (rm.u_stack - exact).cwiseAbs().maxCoeff());
    }
    const bool ok = failures == 0 && dev <= 1e-8 && mismatched_sets == 0;
    return {ok, fmt::format("150 LS suites: {} failing reports, max violation {}; n=6 oracle: max deviation {}, "
                            "{} active-set mismatches",
                            failures, sci(worst), sci(dev), mismatched_sets)};
}

// 4
Outcome oracle_equivalence() {
    double one = 0.0;
    double two = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(4000 + seed);
        const int n = 1 + seed % 8;
        const double s = uniform(rng, 0.3, 0.9);
        const Mesh mesh(-1.0, 1.0, n);
        const Kernel kernel =
            seed % 2 ? fractional_laplacian_kernel(s)
                     : perturbed_kernel(s, [](double x, double y) { return 1.5 + 0.3 * std::cos(x + y); }, true,
                                        "cos-sum", std::make_pair(1.2, 1.8));
        const DiscreteSystem sys = make_system(mesh, kernel, LoadData::nodal(random_vector(rng, n, -5.0, 5.0)));
        const Eigen::VectorXd psi = random_vector(rng, n, -0.4, 0.1);
        const Eigen::VectorXd phi = psi + random_vector(rng, n, 0.0, 0.4);
        const PivotOrder order = seed % 3 ? PivotOrder::forward : PivotOrder::reverse;
        const auto o1 = ObstacleSet::one_sided(psi);
        const auto o2 = ObstacleSet::two_sided(psi, phi);
        one = std::max(one, max_abs(solve_psor(sys, o1).u - lcp_oracle(sys, o1, order)));
        two = std::max(two, max_abs(solve_two_obstacles(sys, o2, TwoObstacleMethod::psor).u - lcp_oracle(sys, o2, order)));
    }
    return {one <= 1e-8 && two <= 1e-8,
            fmt::format("100 seeds, n<=8: one-sided max dev {}, two-sided max dev {}", sci(one), sci(two))};
}

// 5
Outcome order_properties() {
    Rng rng(5005);
    const double slack = 1e-8;
    double comp = 0.0;
    double maxp = 0.0;
    double linf = 0.0;
    double elam = 0.0;
    for (int t = 0; t < 25; ++t) {
        const double s = uniform(rng, 0.3, 0.9);
        const DiscreteSystem& base = laplacian_base(32, s);
        const Mesh& mesh = base.mesh;
        const int n = mesh.n;
        const Eigen::VectorXd f = random_density(rng, mesh, 3.0);
        const Eigen::VectorXd psi = random_parabola(rng, mesh);
        const Eigen::VectorXd f_lo = f - random_vector(rng, n, 0.0, 2.0);
        const Eigen::VectorXd psi_lo = psi - random_vector(rng, n, 0.0, 0.2);
        const auto u = solve_psor(with_density(base, f), ObstacleSet::one_sided(psi)).u;
        const auto u_lo = solve_psor(with_density(base, f_lo), ObstacleSet::one_sided(psi_lo)).u;
        comp = std::max(comp, (u_lo - u).maxCoeff());

        const Eigen::VectorXd psi_other = random_parabola(rng, mesh) + random_vector(rng, n, -0.05, 0.05);
        const auto u_other = solve_psor(with_density(base, f), ObstacleSet::one_sided(psi_other)).u;
        linf = std::max(linf, max_abs(u - u_other) - max_abs(psi - psi_other));

        const Eigen::VectorXd f_neg = -random_vector(rng, n, 0.0, 3.0);
        const auto w = solve_psor(with_density(base, f_neg), ObstacleSet::one_sided(psi)).u;
        maxp = std::max(maxp, w.maxCoeff() - std::max(0.0, psi.maxCoeff()));

        const double lambda = uniform(rng, 0.5, 5.0);
        const auto ul = solve_psor(add_mass(with_density(base, f), lambda), ObstacleSet::one_sided(psi)).u;
        const double upper = std::max({0.0, psi.maxCoeff(), f.maxCoeff() / lambda});
        const double lower = std::min(0.0, f.minCoeff() / lambda);
        elam = std::max({elam, ul.maxCoeff() - upper, lower - ul.minCoeff()});
    }
    const bool ok = comp <= slack && maxp <= slack && linf <= slack && elam <= slack;
    return {ok, fmt::format("25 instances: comparison {}, max principle {}, L-inf dependence {}, E_lambda {}",
                            sci(std::max(comp, 0.0)), sci(std::max(maxp, 0.0)), sci(std::max(linf, 0.0)),
                            sci(std::max(elam, 0.0)))};
}

// 6
Outcome assembly_cross_validation() {
    double path_dev = 0.0;
    double clamp_ratio = 0.0;
    double coer = 0.0;
    double bound = 0.0;
    Rng rng(6006);
    for (double s : {0.3, 0.5, 0.7}) {
        const Mesh mesh(-1.0, 1.0, 24);
        const Kernel sym = perturbed_kernel(
            s, [](double x, double y) { return 1.5 + 0.3 * std::cos(x + y); }, true, "cos-sum", std::make_pair(1.2, 1.8));
        const Kernel nonsym = perturbed_kernel(
            s, [](double x, double y) { return 1.5 + 0.4 * std::sin(x) * std::cos(y); }, false, "sin-cos",
            std::make_pair(1.1, 1.9));
        AssemblyReport rs;
        AssemblyReport rn;
        const Eigen::MatrixXd as = assemble_stiffness_symmetric(mesh, sym, &rs);
        const Eigen::MatrixXd an = assemble_stiffness(mesh, sym, &rn);
        path_dev = std::max(path_dev, (as - an).cwiseAbs().maxCoeff() / as.cwiseAbs().maxCoeff());
        for (const auto* r : {&rs, &rn}) {
            clamp_ratio = std::max(clamp_ratio, r->clamp_total / r->norm_max);
        }
        struct Case {
            Eigen::MatrixXd a;
            double lo;
            double hi;
        };
        AssemblyReport rl;
        AssemblyReport ru;
        const std::vector<Case> cases = {{as, 1.2, 1.8},
                                         {assemble_stiffness(mesh, nonsym, &ru), 1.1, 1.9},
                                         {assemble_stiffness_symmetric(mesh, fractional_laplacian_kernel(s), &rl), 1.0, 1.0}};
        clamp_ratio = std::max({clamp_ratio, rl.clamp_total / rl.norm_max, ru.clamp_total / ru.norm_max});
        for (const auto& c : cases) {
            for (int t = 0; t < 100; ++t) {
                const Eigen::VectorXd u = random_vector(rng, mesh.n, -1.0, 1.0);
                const Eigen::VectorXd v = random_vector(rng, mesh.n, -1.0, 1.0);
                const double nu = ds_norm_sq(mesh, u, s);
                const double nv = ds_norm_sq(mesh, v, s);
                coer = std::max(coer, c.lo * nu - 1e-6 - u.dot(c.a * u));
                bound = std::max(bound, std::abs(v.dot(c.a * u)) - c.hi * std::sqrt(nu * nv) - 1e-6);
            }
        }
    }
    const bool ok = path_dev <= 1e-5 && clamp_ratio <= 1e-6 && coer <= 0.0 && bound <= 0.0;
    return {ok, fmt::format("sym/nonsym rel dev {}, clamp total/norm {}, coercivity excess {}, boundedness excess {}",
                            sci(path_dev), sci(clamp_ratio), sci(coer), sci(bound))};
}

// 7
Outcome ka_form_identity() {
    const double s = 0.6;
    const double alpha = 2.5;
    const Mesh mesh(-1.0, 1.0, 20);
    std::vector<std::pair<double, double>> band;
    for (int k = 1; k <= 5; ++k) {
        band.emplace_back(-0.1 * k, 0.15 * k);
    }
    const Kernel k = ka_kernel(CoefficientField::constant_field(alpha), s, band);
    const Eigen::MatrixXd a = assemble_stiffness(mesh, k);
    const Eigen::MatrixXd g = alpha * ds_gradient_gram(mesh, s);
    const double rel = (a - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd lap = assemble_stiffness_symmetric(mesh, fractional_laplacian_kernel(s));
    const double ratio = a(10, 10) / (alpha * lap(10, 10));
    return {rel <= 5e-3, fmt::format("n=20, s=0.6, alpha=2.5: max rel dev from alpha*int D^s phi_i D^s phi_j {} "
                                     "(ratio to the c^2-kernel matrix {:.4f})",
                                     sci(rel), ratio)};
}

// 8
Outcome s_to_one() {
    auto psi = [](double x) { return 0.2 - x * x; };
    auto f = [](double) { return -1.0; };
    const Mesh mesh(-1.0, 1.0, 48);
    const SToOneStudy st = s_to_one_study(mesh, psi, f, {0.6, 0.7, 0.8, 0.9, 0.95, 0.99});
    bool converged = st.classical_converged;
    for (const auto& r : st.records) {
        converged = converged && r.converged;
    }

    // classical reference against enumeration on a coarse mesh, plus a complementarity certificate
    const Mesh coarse(-1.0, 1.0, 9);
    const DiscreteSystem cs = make_classical_system(coarse, LoadData::constant(-1.0));
    const auto obs = ObstacleSet::one_sided(nodal_values(coarse, psi));
    const double oracle_dev = max_abs(solve_psor(cs, obs).u - lcp_oracle(cs, obs));
    const DiscreteSystem full = make_classical_system(mesh, LoadData::constant(-1.0));
    const Eigen::VectorXd p = nodal_values(mesh, psi);
    const Eigen::VectorXd r = full.stiffness * st.classical - full.load;
    double kkt = 0.0;
    for (int i = 0; i < mesh.n; ++i) {
        const double gap = st.classical(i) - p(i);
        kkt = std::max({kkt, -gap, -r(i), std::abs(gap * r(i))});
    }
    const double first = st.records.front().l2_distance;
    const double last = st.records.back().l2_distance;
    const bool ok = converged && last < first && oracle_dev <= 1e-8 && kkt <= 1e-8;
    return {ok, fmt::format("L2 distance s=0.6: {:.6f}, s=0.99: {:.6f}; classical oracle dev {}, KKT residual {}",
                            first, last, sci(oracle_dev), sci(kkt))};
}

// 9
Outcome capacity() {
    const double s = 0.6;
    const Mesh mesh(-1.0, 1.0, 64);
    const DiscreteSystem lap = make_system(mesh, fractional_laplacian_kernel(s), LoadData::constant(0.0));
    const std::vector<Kernel> kernels = {
        constant_kernel(s, 2.0),
        perturbed_kernel(s, [](double x, double y) { return 1.5 + 0.3 * std::cos(x + y); }, true, "cos-sum",
                         std::make_pair(1.2, 1.8)),
        perturbed_kernel(s, [](double x, double y) { return 1.5 + 0.4 * std::sin(x) * std::cos(y); }, false,
                         "sin-cos", std::make_pair(1.1, 1.9))};
    CompactSet1D two;
    two.intervals = {{-0.6, -0.4}, {0.3, 0.5}};
    const std::vector<CompactSet1D> sets = {CompactSet1D::interval(-0.25, 0.25), two, CompactSet1D::point(0.1)};
    double identity = 0.0;
    double support = 0.0;
    double below = 0.0;
    double above = 0.0;
    int sandwich_failures = 0;
    bool converged = true;
    for (const auto& k : kernels) {
        const DiscreteSystem ks = make_system(mesh, k, LoadData::constant(0.0));
        for (const auto& set : sets) {
            const CapacityBoundsReport rep = capacity_bounds_check(set, ks, lap);
            sandwich_failures += rep.pass ? 0 : 1;
            const CapacityResult cap = capacitary_potential(ks, set);
            converged = converged && cap.converged;
            const double energy = cap.potential.dot(ks.stiffness * cap.potential);
            identity = std::max({identity, std::abs(cap.capacity - energy) / energy,
                                 std::abs(cap.measure_on_set - energy) / energy});
            below = std::max(below, -cap.potential.minCoeff());
            above = std::max(above, cap.potential.maxCoeff() - 1.0);
            const double scale = max_abs(cap.measure);
            for (int i = 0; i < mesh.n; ++i) {
                if (std::find(cap.set_nodes.begin(), cap.set_nodes.end(), i) == cap.set_nodes.end()) {
                    support = std::max(support, std::abs(cap.measure(i)) / scale);
                }
            }
        }
    }
    const bool ok = converged && identity <= 1e-6 && sandwich_failures == 0 && below <= 0.0 && above <= 1e-8 &&
                    support <= 1e-8;
    return {ok, fmt::format("3 kernels x 3 sets: identity rel gap {}, {} sandwich failures, min u {}, max u - 1 {}, "
                            "off-set measure {}",
                            sci(identity), sandwich_failures, sci(-below), sci(above), sci(support))};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 10
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / fmt::format("fracobs_acceptance_{}", ::getpid());
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "verify.json");
        cfg << "{\"command\": \"verify\"}\n";
    }
    std::vector<std::string> outputs;
    int status = 0;
    for (const char* run : {"first", "second"}) {
        const fs::path dir = root / run;
        const std::string cmd = fmt::format("\"{}\" verify --config \"{}\" --out \"{}\" --threads 1 > \"{}\" 2>&1",
                                            FRACOBS_BINARY, (root / "verify.json").string(), dir.string(),
                                            (root / fmt::format("{}.stdout", run)).string());
        status = std::max(status, std::system(cmd.c_str()));
        std::string all = slurp(root / fmt::format("{}.stdout", run));
        for (const char* file : {"verify.csv", "metadata.json"}) {
            all += "\n--" + std::string(file) + "--\n" + slurp(dir / file);
        }
        outputs.push_back(all);
    }
    fs::remove_all(root);
    const bool same = outputs[0] == outputs[1];
    return {same && status == 0 && outputs[0].size() > 100,
            fmt::format("two verify runs: exit status {}, outputs {} ({} bytes)", status,
                        same ? "byte-identical" : "DIFFER", outputs[0].size())};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"counterexample reproduction", counterexample},
        {"penalization bound", penalization_bound},
        {"Lewy-Stampacchia suites", lewy_stampacchia},
        {"oracle equivalence", oracle_equivalence},
        {"order-theoretic properties", order_properties},
        {"assembly cross-validation", assembly_cross_validation},
        {"k_alphaI form identity", ka_form_identity},
        {"s->1 convergence", s_to_one},
        {"capacity identities and bounds", capacity},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += o.pass ? 0 : 1;
        fmt::print("[{}] {:>2}. {} ({:.1f} s): {}\n", o.pass ? "PASS" : "FAIL", index, c.name, secs, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
