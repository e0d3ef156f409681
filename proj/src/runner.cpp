#include "fracobs/runner.hpp"

#include "fracobs/analysis.hpp"
#include "fracobs/capacity.hpp"
#include "fracobs/discretization.hpp"
#include "fracobs/expression.hpp"
#include "fracobs/kernels.hpp"
#include "fracobs/parallel.hpp"
#include "fracobs/special_functions.hpp"
#include "fracobs/vi_solvers.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fracobs {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Csv {
public:
    explicit Csv(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) {
            throw UsageError("cannot write " + path.string());
        }
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            out_ << (k ? "," : "") << cells[k];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

CoefficientField make_field(const std::string& text) {
    if (text == "counterexample") {
        return CoefficientField::counterexample();
    }
    const Expression e = Expression::parse(text, {"z"});
    CoefficientField a;
    a.alpha = [e](double z) { return e(z); };
    a.description = text;
    return a;
}

std::vector<std::pair<double, double>> band_pairs(const ExperimentConfig& c) {
    std::vector<std::pair<double, double>> out;
    const double lo = c.domain[0];
    const double len = c.domain[1] - c.domain[0];
    for (int a = 0; a < 6; ++a) {
        for (int b = a + 1; b < 6; ++b) {
            out.emplace_back(lo + (a + 0.5) * len / 6.0, lo + (b + 0.5) * len / 6.0);
        }
    }
    for (const auto& p : c.pairs) {
        out.emplace_back(p[0], p[1]);
    }
    return out;
}

Kernel make_kernel(const ExperimentConfig& c, const std::string& name, double s) {
    const KernelSpec& k = c.kernel;
    if (name == "fractional_laplacian") {
        return fractional_laplacian_kernel(s);
    }
    if (name == "constant") {
        return constant_kernel(s, k.value);
    }
    if (name == "ds_energy") {
        return ds_energy_kernel(s);
    }
    if (name == "perturbed") {
        const Expression e = Expression::parse(k.profile, {"x", "y"});
        std::optional<std::pair<double, double>> band;
        if (k.band) {
            band = std::make_pair((*k.band)[0], (*k.band)[1]);
        }
        return perturbed_kernel(s, [e](double x, double y) { return e(x, y); }, k.symmetric, "perturbed", band);
    }
    if (name == "ka") {
        return ka_kernel(make_field(k.field), s, band_pairs(c));
    }
    throw UsageError("unknown kernel '" + name + "'");
}

Eigen::VectorXd nodal(const Mesh& mesh, const DataField& d, double minus_inf, double plus_inf) {
    Eigen::VectorXd v(mesh.n);
    if (std::holds_alternative<std::vector<double>>(d)) {
        const auto& a = std::get<std::vector<double>>(d);
        for (int i = 0; i < mesh.n; ++i) {
            v(i) = a[static_cast<std::size_t>(i)];
        }
        return v;
    }
    const Expression e = Expression::parse(std::get<std::string>(d), {"x"});
    for (int i = 0; i < mesh.n; ++i) {
        const double x = e(mesh.dof_x(i));
        if (std::isnan(x)) {
            throw DomainError("expression \"" + e.text() + "\" is NaN at x = " + num(mesh.dof_x(i)));
        }
        v(i) = std::isinf(x) ? (x < 0 ? minus_inf : plus_inf) : x;
    }
    return v;
}

LoadData make_load(const DataField& f, const std::optional<std::string>& f_vec) {
    LoadData data;
    if (std::holds_alternative<std::vector<double>>(f)) {
        const auto& a = std::get<std::vector<double>>(f);
        data = LoadData::nodal(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
    } else {
        const Expression e = Expression::parse(std::get<std::string>(f), {"x"});
        data.f_sharp = [e](double x) { return e(x); };
    }
    if (f_vec) {
        const Expression e = Expression::parse(*f_vec, {"x"});
        data.f_vec = [e](double x) { return e(x); };
    }
    return data;
}

std::function<double(double)> as_function(const DataField& d, const char* what) {
    if (!std::holds_alternative<std::string>(d)) {
        throw UsageError(std::string(what) + " must be an expression for sweep-s");
    }
    const Expression e = Expression::parse(std::get<std::string>(d), {"x"});
    return [e](double x) { return e(x); };
}

Json report_json(const AssemblyReport& r) {
    Json j;
    j["path"] = r.path;
    j["clamp_count"] = r.clamp_count;
    j["clamp_total"] = r.clamp_total;
    j["clamp_max"] = r.clamp_max;
    j["z_violations"] = r.z_violations;
    j["max_positive_offdiag"] = r.max_positive_offdiag;
    j["min_row_sum"] = r.min_row_sum;
    j["asymmetry"] = r.asymmetry;
    j["norm_max"] = r.norm_max;
    j["tail_cutoff_bound"] = r.tail_cutoff_bound;
    j["tail_quadrature_error"] = r.tail_quadrature_error;
    return j;
}

Json ls_json(const LSReport& r) {
    Json j;
    j["label"] = r.label;
    j["lower_violation"] = r.lower_violation;
    j["upper_violation"] = r.upper_violation;
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    return j;
}

Json solve_json(const SolveResult& r) {
    Json j;
    j["method"] = r.method;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["final_update"] = r.history.empty() ? 0.0 : r.history.back();
    j["note"] = r.note;
    return j;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct Context {
    const ExperimentConfig& c;
    const RunOptions& opt;
    std::filesystem::path dir;
    Json meta;
    Json timings;
    bool converged = true;
    bool checks_pass = true;
};

PsorOptions psor_options(const SolverSpec& sv) {
    PsorOptions p;
    p.omega = sv.omega;
    p.tol = sv.tol;
    p.max_iter = sv.max_iter;
    p.act_tol = sv.act_tol;
    return p;
}

DiscreteSystem build_system(Context& ctx, const Mesh& mesh) {
    Timer t;
    const Kernel k = make_kernel(ctx.c, ctx.c.kernel.name, ctx.c.s);
    DiscreteSystem sys = make_system(mesh, k, make_load(ctx.c.f, ctx.c.f_vec));
    sys = add_mass(std::move(sys), ctx.c.lambda);
    ctx.timings["assembly_seconds"] = t.seconds();
    ctx.meta["assembly"] = report_json(sys.report);
    ctx.meta["kernel_band"] = {sys.a_lower, sys.a_upper};
    if (ctx.opt.dump) {
        write_matrix_csv((ctx.dir / "stiffness.csv").string(), sys.stiffness);
        write_vector_csv((ctx.dir / "load.csv").string(), sys.load, "b");
    }
    return sys;
}

bool all_finite(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!is_finite_bound(v(i))) {
            return false;
        }
    }
    return true;
}

std::string flag(const std::vector<int>& set, int i) {
    return std::find(set.begin(), set.end(), i) != set.end() ? "1" : "0";
}

void run_solve(Context& ctx, bool two) {
    const ExperimentConfig& c = ctx.c;
    const Mesh mesh(c.domain[0], c.domain[1], c.n);
    const DiscreteSystem sys = build_system(ctx, mesh);
    const Eigen::VectorXd psi =
        c.lower ? nodal(mesh, *c.lower, -kInfinity, kInfinity) : Eigen::VectorXd::Constant(c.n, -kInfinity);
    const Eigen::VectorXd phi =
        c.upper ? nodal(mesh, *c.upper, -kInfinity, kInfinity) : Eigen::VectorXd::Constant(c.n, kInfinity);
    Timer t;
    SolveResult r;
    const bool penalized = c.solver.method == "penalized";
    if (penalized) {
        PenalizationConfig pc;
        pc.theta = PenaltyFunction::by_name(c.solver.theta);
        pc.epsilon = c.solver.epsilon.front();
        pc.zeta = minimal_zeta(sys, psi);
        NewtonOptions no;
        no.tol = c.solver.tol;
        if (two) {
            pc.zeta_upper = minimal_zeta_upper(sys, phi);
            r = solve_two_obstacles(sys, ObstacleSet::two_sided(psi, phi), TwoObstacleMethod::penalized,
                                    psor_options(c.solver), pc, no);
        } else {
            r = solve_penalized(sys, psi, pc, no);
        }
    } else if (two) {
        r = solve_two_obstacles(sys, ObstacleSet::two_sided(psi, phi), TwoObstacleMethod::psor,
                                psor_options(c.solver));
    } else {
        ObstacleSet obs = ObstacleSet::one_sided(psi);
        if (c.upper) {
            obs.upper = phi;
        }
        r = solve_psor(sys, obs, psor_options(c.solver));
    }
    ctx.timings["solve_seconds"] = t.seconds();
    ctx.meta["solver"] = solve_json(r);
    ctx.converged = r.converged;
    spdlog::info("{}: {} after {} iterations", r.method, r.converged ? "converged" : "not converged",
                 r.iterations);

    Csv csv(ctx.dir / "result.csv");
    if (two) {
        csv.row({"x", "u", "residual", "psi", "phi", "active_lower", "active_upper"});
    } else {
        csv.row({"x", "u", "residual", "psi", "active_lower"});
    }
    for (int i = 0; i < c.n; ++i) {
        std::vector<std::string> row = {num(mesh.dof_x(i)), num(r.u(i)), num(r.residual(i)), num(psi(i))};
        if (two) {
            row.push_back(num(phi(i)));
        }
        row.push_back(flag(r.active_lower, i));
        if (two) {
            row.push_back(flag(r.active_upper, i));
        }
        csv.row(row);
    }
    if (r.converged && !penalized && all_finite(psi)) {
        const double tol = 1e-6 * std::max(sys.load.cwiseAbs().maxCoeff(), 1e-300);
        if (two && all_finite(phi)) {
            ctx.meta["lewy_stampacchia"] = ls_json(check_ls_two(sys, psi, phi, r, tol));
        } else if (!two && !c.upper) {
            ctx.meta["lewy_stampacchia"] = ls_json(check_ls_one(sys, psi, r, tol));
        }
    }
}

void run_membranes(Context& ctx) {
    const ExperimentConfig& c = ctx.c;
    const Mesh mesh(c.domain[0], c.domain[1], c.n);
    DiscreteSystem sys = build_system(ctx, mesh);
    std::vector<Eigen::VectorXd> loads;
    for (const auto& d : c.loads) {
        loads.push_back(assemble_load(mesh, make_load(d, std::nullopt), c.s));
    }
    MembraneOptions mo;
    mo.tol = c.solver.tol;
    mo.max_sweeps = c.solver.max_iter;
    mo.inner = psor_options(c.solver);
    mo.theta = PenaltyFunction::by_name(c.solver.theta);
    mo.epsilon = c.solver.epsilon.front();
    Timer t;
    const SolveResult r = solve_n_membranes(
        sys, loads, c.solver.method == "penalized" ? MembraneMethod::penalized : MembraneMethod::gauss_seidel, mo);
    ctx.timings["solve_seconds"] = t.seconds();
    ctx.meta["solver"] = solve_json(r);
    ctx.converged = r.converged;
    const int count = static_cast<int>(loads.size());
    Csv csv(ctx.dir / "result.csv");
    std::vector<std::string> head = {"x"};
    for (int j = 1; j <= count; ++j) {
        head.push_back("u" + std::to_string(j));
    }
    for (int j = 1; j <= count; ++j) {
        head.push_back("r" + std::to_string(j));
    }
    csv.row(head);
    for (int i = 0; i < c.n; ++i) {
        std::vector<std::string> row = {num(mesh.dof_x(i))};
        for (int j = 0; j < count; ++j) {
            row.push_back(num(r.u_stack(j, i)));
        }
        for (int j = 0; j < count; ++j) {
            row.push_back(num(r.residual_stack(j, i)));
        }
        csv.row(row);
    }
    if (r.converged && c.solver.method != "penalized") {
        double scale = 0.0;
        for (const auto& b : loads) {
            scale = std::max(scale, b.cwiseAbs().maxCoeff());
        }
        Json reps = Json::array();
        for (const auto& rep : check_ls_membranes(sys, loads, r, 1e-6 * scale)) {
            reps.push_back(ls_json(rep));
        }
        ctx.meta["lewy_stampacchia"] = reps;
    }
}

void run_penalize(Context& ctx) {
    const ExperimentConfig& c = ctx.c;
    const Mesh mesh(c.domain[0], c.domain[1], c.n);
    const DiscreteSystem sys = build_system(ctx, mesh);
    const Eigen::VectorXd psi = nodal(mesh, *c.lower, -kInfinity, kInfinity);
    Timer t;
    const PenalizationStudy st =
        penalization_error_study(sys, psi, PenaltyFunction::by_name(c.solver.theta), c.solver.epsilon);
    ctx.timings["solve_seconds"] = t.seconds();
    Csv csv(ctx.dir / "penalization.csv");
    csv.row({"epsilon", "error", "bound", "converged"});
    for (const auto& row : st.rows) {
        csv.row({num(row.epsilon), num(row.error), num(row.bound), row.converged ? "1" : "0"});
        ctx.converged = ctx.converged && row.converged;
    }
    ctx.meta["zeta_l1"] = st.zeta_l1;
    ctx.meta["bounded"] = st.bounded;
    ctx.meta["monotone"] = st.monotone;
    ctx.checks_pass = st.pass();
}

void run_sweep(Context& ctx) {
    const ExperimentConfig& c = ctx.c;
    const Mesh mesh(c.domain[0], c.domain[1], c.n);
    const auto psi = c.lower ? as_function(*c.lower, "lower") : [](double) { return -kInfinity; };
    Timer t;
    const SToOneStudy st = s_to_one_study(mesh, psi, as_function(c.f, "f"), c.s_list);
    ctx.timings["solve_seconds"] = t.seconds();
    Csv csv(ctx.dir / "sweep.csv");
    csv.row({"s", "h", "l2_distance", "max_distance", "converged"});
    for (const auto& r : st.records) {
        csv.row({num(r.s), num(r.h), num(r.l2_distance), num(r.max_distance), r.converged ? "1" : "0"});
        ctx.converged = ctx.converged && r.converged;
    }
    ctx.converged = ctx.converged && st.classical_converged;
    Csv sol(ctx.dir / "solutions.csv");
    std::vector<std::string> head = {"x", "classical"};
    for (const auto& r : st.records) {
        head.push_back("s=" + num(r.s));
    }
    sol.row(head);
    for (int i = 0; i < c.n; ++i) {
        std::vector<std::string> row = {num(mesh.dof_x(i)), num(st.classical(i))};
        for (const auto& r : st.records) {
            row.push_back(num(r.u(i)));
        }
        sol.row(row);
    }
    ctx.meta["endpoints_decrease"] = st.endpoints_decrease;
    ctx.meta["interior_monotone"] = st.interior_monotone;
    ctx.checks_pass = st.endpoints_decrease || st.records.size() < 2;
}

void run_kernel_ka(Context& ctx) {
    const ExperimentConfig& c = ctx.c;
    const CoefficientField a = make_field(c.kernel.field);
    Timer t;
    Csv csv(ctx.dir / "kernel_ka.csv");
    csv.row({"x", "y", "value", "normalized", "est_abs_error", "kappa_pv", "negative"});
    const double c2 = std::pow(riesz_constant(1, c.s), 2);
    bool any_negative = false;
    for (const auto& p : c.pairs) {
        const KAEvaluation e = ka_evaluate(a, p[0], p[1], c.s);
        const double normalized = e.value * std::pow(std::abs(p[0] - p[1]), 1.0 + 2.0 * c.s);
        const double pv = kappa_pv_integral(p[0], p[1], c.s);
        any_negative = any_negative || e.value < 0.0;
        csv.row({num(p[0]), num(p[1]), num(e.value), num(normalized), num(e.est_abs_error), num(pv),
                 e.value < 0.0 ? "1" : "0"});
    }
    ctx.timings["solve_seconds"] = t.seconds();
    ctx.meta["c_squared"] = c2;
    ctx.meta["field"] = a.description;
    ctx.meta["negative_value_found"] = any_negative;
}

void run_capacity(Context& ctx) {
    const ExperimentConfig& c = ctx.c;
    const Mesh mesh(c.domain[0], c.domain[1], c.n);
    CompactSet1D set;
    for (const auto& iv : c.set) {
        set.intervals.emplace_back(iv[0], iv[1]);
    }
    Timer t;
    const DiscreteSystem lap = make_system(mesh, fractional_laplacian_kernel(c.s), LoadData::constant(0.0));
    Csv csv(ctx.dir / "capacity.csv");
    csv.row({"set", "h", "s", "kernel", "C_s", "C_s_a", "mu_K", "lower_margin", "upper_margin", "pass"});
    Json snapped;
    for (const auto& name : c.capacity_kernels) {
        const DiscreteSystem ks = make_system(mesh, make_kernel(c, name, c.s), LoadData::constant(0.0));
        const CapacityBoundsReport rep = capacity_bounds_check(set, ks, lap);
        const CapacityResult cap = capacitary_potential(ks, set);
        csv.row({set.describe(), num(mesh.h()), num(c.s), name, num(rep.c_s), num(rep.c_s_a),
                 num(cap.measure_on_set), num(rep.lower_margin), num(rep.upper_margin), rep.pass ? "1" : "0"});
        ctx.checks_pass = ctx.checks_pass && rep.pass;
        ctx.converged = ctx.converged && cap.converged;
        snapped = cap.snapped.describe();
    }
    ctx.timings["solve_seconds"] = t.seconds();
    ctx.meta["snapped_set"] = snapped;
}

void run_verify(Context& ctx) {
    Timer t;
    const auto rows = run_invariant_suite();
    ctx.timings["solve_seconds"] = t.seconds();
    Csv csv(ctx.dir / "verify.csv");
    csv.row({"check", "pass", "detail"});
    for (const auto& r : rows) {
        csv.row({"\"" + r.name + "\"", r.pass ? "1" : "0", "\"" + r.detail + "\""});
        ctx.checks_pass = ctx.checks_pass && r.pass;
        if (ctx.opt.console) {
            *ctx.opt.console << fmt::format("{:<45} {}  {}\n", r.name, r.pass ? "PASS" : "FAIL", r.detail);
        }
    }
    if (ctx.opt.console) {
        *ctx.opt.console << (ctx.checks_pass ? "all checks passed\n" : "some checks FAILED\n");
    }
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    Timer total;
    set_thread_count(options.threads);
    Context ctx{config, options, std::filesystem::path(options.out_dir), Json(), Json()};
    std::error_code ec;
    std::filesystem::create_directories(ctx.dir, ec);
    if (ec || !std::filesystem::is_directory(ctx.dir)) {
        spdlog::error("cannot create output directory {}: {}", ctx.dir.string(), ec ? ec.message() : "not a directory");
        return kExitValidation;
    }
    ctx.meta["tool"] = "fracobs";
    ctx.meta["version"] = kVersion;
    ctx.meta["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    ctx.meta["command"] = config.command;
    ctx.meta["threads"] = options.threads;
    ctx.meta["config"] = Json::parse(emit_config(config));
    ctx.meta["defaulted"] = config.defaulted;

    int code = kExitOk;
    std::string error;
    try {
        const auto problems = validate_config(config);
        if (!problems.empty()) {
            throw ConfigError(problems);
        }
        spdlog::info("running {} with {} thread(s)", config.command, options.threads);
        if (config.command == "solve") {
            run_solve(ctx, false);
        } else if (config.command == "solve2") {
            run_solve(ctx, true);
        } else if (config.command == "membranes") {
            run_membranes(ctx);
        } else if (config.command == "penalize") {
            run_penalize(ctx);
        } else if (config.command == "sweep-s") {
            run_sweep(ctx);
        } else if (config.command == "kernel-ka") {
            run_kernel_ka(ctx);
        } else if (config.command == "capacity") {
            run_capacity(ctx);
        } else {
            run_verify(ctx);
        }
        if (!ctx.converged || !ctx.checks_pass) {
            code = kExitNotConverged;
        }
    } catch (const NumericalFailure& e) {
        code = kExitNumerical;
        error = e.what();
    } catch (const std::invalid_argument& e) {  // UsageError, ConfigError
        code = kExitValidation;
        error = e.what();
    } catch (const std::domain_error& e) {
        code = kExitValidation;
        error = e.what();
    }
    if (!error.empty()) {
        spdlog::error("{}", error);
    }
    ctx.meta["converged"] = ctx.converged;
    ctx.meta["checks_pass"] = ctx.checks_pass;
    ctx.meta["exit_code"] = code;
    ctx.meta["error"] = error.empty() ? Json(nullptr) : Json(error);
    write_json(ctx.dir / "metadata.json", ctx.meta);
    ctx.timings["total_seconds"] = total.seconds();
    write_json(ctx.dir / "timings.json", ctx.timings);
    return code;
}

}  // namespace fracobs
