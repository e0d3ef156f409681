#include "fracobs/vi_solvers.hpp"

#include "fracobs/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace fracobs {

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void check_square(const DiscreteSystem& system) {
    const auto n = system.stiffness.rows();
    if (n != system.stiffness.cols() || n != system.load.size() || n < 1) {
        throw UsageError("discrete system has inconsistent sizes");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(system.stiffness(i, i) > 0.0)) {
            throw UsageError("stiffness diagonal must be strictly positive");
        }
    }
}

void check_finite_psi(const Eigen::VectorXd& psi, const char* what) {
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (!is_finite_bound(psi(i))) {
            throw UsageError(std::string(what) + " must be finite for penalization");
        }
    }
}

// F(u) = A u + P(u) - rhs with P acting coordinatewise but possibly coupling coordinates.
struct Semilinear {
    const Eigen::MatrixXd& a;
    Eigen::VectorXd rhs;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> penalty;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> penalty_jacobian;
    // value and derivative of P_k when u_k is replaced by t
    std::function<std::pair<double, double>(int, double, const Eigen::VectorXd&)> penalty_at;
    double penalty_bound;  // sup |P_k| over all arguments

    Eigen::VectorXd residual(const Eigen::VectorXd& u) const { return a * u + penalty(u) - rhs; }
};

bool damped_newton(const Semilinear& p, Eigen::VectorXd& u, const NewtonOptions& opt,
                   SolveResult& out) {
    const double scale = 1.0 + max_abs(p.rhs) + p.penalty_bound;
    Eigen::VectorXd f = p.residual(u);
    double fnorm = f.norm();
    for (int it = 0; it < opt.max_iter; ++it) {
        const Eigen::MatrixXd j = p.a + p.penalty_jacobian(u);
        const Eigen::VectorXd du = j.partialPivLu().solve(-f);
        if (!du.allFinite()) {
            return false;
        }
        double step = 1.0;
        Eigen::VectorXd trial = u + du;
        Eigen::VectorXd ft = p.residual(trial);
        int halvings = 0;
        while (ft.norm() >= fnorm && halvings < opt.max_halvings) {
            step *= 0.5;
            ++halvings;
            trial = u + step * du;
            ft = p.residual(trial);
        }
        const double update = step * max_abs(du);
        ++out.iterations;
        out.history.push_back(update);
        if (ft.norm() >= fnorm && fnorm > 0.0) {
            // no descent even after all halvings
            if (max_abs(f) <= opt.tol * scale) {
                return true;
            }
            return false;
        }
        u = trial;
        f = std::move(ft);
        fnorm = f.norm();
        if (update <= opt.tol && max_abs(f) <= opt.tol * scale) {
            return true;
        }
        if (max_abs(f) <= 1e-2 * opt.tol * scale) {
            return true;
        }
    }
    return false;
}

bool nonlinear_gauss_seidel(const Semilinear& p, Eigen::VectorXd& u, const NewtonOptions& opt,
                            int max_sweeps, SolveResult& out) {
    const auto m = static_cast<int>(u.size());
    const double scale = 1.0 + max_abs(p.rhs) + p.penalty_bound;
    boost::math::tools::eps_tolerance<double> tol(50);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double update = 0.0;
        for (int k = 0; k < m; ++k) {
            const double akk = p.a(k, k);
            const double off = p.a.row(k).dot(u) - akk * u(k) - p.rhs(k);
            auto g = [&](double t) { return akk * t + p.penalty_at(k, t, u).first + off; };
            // g is increasing with |g(t) - akk t - off| <= penalty_bound
            double lo = (-off - p.penalty_bound) / akk - 1e-12 * (1.0 + std::abs(off / akk));
            double hi = (-off + p.penalty_bound) / akk + 1e-12 * (1.0 + std::abs(off / akk));
            double glo = g(lo);
            double ghi = g(hi);
            while (glo > 0.0) {
                lo -= (hi - lo) + 1.0;
                glo = g(lo);
            }
            while (ghi < 0.0) {
                hi += (hi - lo) + 1.0;
                ghi = g(hi);
            }
            double root = 0.0;
            if (glo == 0.0) {
                root = lo;
            } else if (ghi == 0.0) {
                root = hi;
            } else {
                std::uintmax_t iters = 200;
                const auto br = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
                root = 0.5 * (br.first + br.second);
            }
            update = std::max(update, std::abs(root - u(k)));
            u(k) = root;
        }
        ++out.iterations;
        out.history.push_back(update);
        if (!std::isfinite(update)) {
            return false;
        }
        if (update <= opt.tol && max_abs(p.residual(u)) <= opt.tol * scale * 1e2) {
            return true;
        }
    }
    return false;
}

SolveResult solve_semilinear(const Semilinear& p, Eigen::VectorXd u0, const NewtonOptions& opt,
                             const std::string& method) {
    SolveResult out;
    out.method = method;
    Eigen::VectorXd u = u0;
    bool ok = damped_newton(p, u, opt, out);
    if (!ok) {
        out.note = "newton stagnated; nonlinear Gauss-Seidel fallback";
        u = u0;
        ok = nonlinear_gauss_seidel(p, u, opt, 20000, out);
        out.method += "+gauss-seidel";
    }
    out.converged = ok;
    out.u = std::move(u);
    return out;
}

}  // namespace

ObstacleSet ObstacleSet::one_sided(Eigen::VectorXd lower) {
    ObstacleSet o;
    o.lower = std::move(lower);
    return o;
}

ObstacleSet ObstacleSet::two_sided(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    ObstacleSet o;
    o.lower = std::move(lower);
    o.upper = std::move(upper);
    return o;
}

ObstacleSet ObstacleSet::unconstrained(int n) {
    return one_sided(Eigen::VectorXd::Constant(n, -kInfinity));
}

void ObstacleSet::validate(int n) const {
    if (lower.size() != n) {
        throw UsageError("lower obstacle has " + std::to_string(lower.size()) + " entries, expected " +
                         std::to_string(n));
    }
    if (upper && upper->size() != n) {
        throw UsageError("upper obstacle has " + std::to_string(upper->size()) +
                         " entries, expected " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) {
        if (std::isnan(lower(i)) || (upper && std::isnan((*upper)(i)))) {
            throw UsageError("obstacle contains NaN");
        }
        if (lower(i) >= kInfiniteThreshold) {
            throw UsageError("lower obstacle is +infinite at dof " + std::to_string(i));
        }
        if (upper && (*upper)(i) <= -kInfiniteThreshold) {
            throw UsageError("upper obstacle is -infinite at dof " + std::to_string(i));
        }
        if (lower_at(i) > upper_at(i)) {
            throw UsageError("empty admissible set: lower > upper at dof " + std::to_string(i));
        }
    }
}

void fill_active_sets(const ObstacleSet& obstacles, const Eigen::VectorXd& u, double act_tol,
                      SolveResult& result) {
    result.active_lower.clear();
    result.active_upper.clear();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double lo = obstacles.lower_at(static_cast<int>(i));
        const double hi = obstacles.upper_at(static_cast<int>(i));
        if (is_finite_bound(lo) && std::abs(u(i) - lo) <= act_tol) {
            result.active_lower.push_back(static_cast<int>(i));
        } else if (is_finite_bound(hi) && std::abs(hi - u(i)) <= act_tol) {
            result.active_upper.push_back(static_cast<int>(i));
        }
    }
}

SolveResult solve_psor(const DiscreteSystem& system, const ObstacleSet& obstacles,
                       const PsorOptions& options) {
    check_square(system);
    const int n = system.n();
    obstacles.validate(n);
    if (!(options.omega > 0.0 && options.omega < 2.0)) {
        throw UsageError("relaxation parameter omega must lie in (0,2)");
    }
    if (!(options.tol > 0.0) || options.max_iter < 1) {
        throw UsageError("psor needs tol > 0 and max_iter >= 1");
    }
    const Eigen::MatrixXd& a = system.stiffness;
    const Eigen::VectorXd& b = system.load;
    Eigen::VectorXd lo(n);
    Eigen::VectorXd hi(n);
    for (int i = 0; i < n; ++i) {
        lo(i) = is_finite_bound(obstacles.lower_at(i)) ? obstacles.lower_at(i)
                                                        : -std::numeric_limits<double>::infinity();
        hi(i) = is_finite_bound(obstacles.upper_at(i)) ? obstacles.upper_at(i)
                                                        : std::numeric_limits<double>::infinity();
    }
    auto project = [&](int i, double v) { return std::clamp(v, lo(i), hi(i)); };

    SolveResult out;
    out.method = "psor";
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) {
        u(i) = project(i, options.initial ? (*options.initial)(i) : 0.0);
    }
    const Eigen::VectorXd start = u;

    bool diverged = false;
    for (int it = 0; it < options.max_iter; ++it) {
        double update = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = b(i) - a.row(i).dot(u);
            const double v = project(i, u(i) + options.omega * r / a(i, i));
            update = std::max(update, std::abs(v - u(i)));
            u(i) = v;
        }
        ++out.iterations;
        out.history.push_back(update);
        if (update <= options.tol) {
            out.converged = true;
            break;
        }
        const auto k = out.history.size();
        if (!std::isfinite(update) ||
            (k > 50 && update > 10.0 * out.history[k - 51] && update > 1.0)) {
            diverged = true;
            break;
        }
    }

    if (diverged) {
        out.method = "psor+richardson";
        out.note = "psor diverged; projected Richardson fallback";
        const double step = 1.0 / a.cwiseAbs().rowwise().sum().maxCoeff();
        u = start;
        out.converged = false;
        for (int it = 0; it < options.max_iter; ++it) {
            const Eigen::VectorXd r = a * u - b;
            double update = 0.0;
            for (int i = 0; i < n; ++i) {
                const double v = project(i, u(i) - step * r(i));
                update = std::max(update, std::abs(v - u(i)));
                u(i) = v;
            }
            ++out.iterations;
            out.history.push_back(update);
            if (update <= options.tol * step) {
                out.converged = true;
                break;
            }
        }
    }

    out.u = u;
    out.residual = a * u - b;
    fill_active_sets(obstacles, u, options.act_tol, out);
    return out;
}

void PenalizationConfig::validate(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                                  const std::optional<Eigen::VectorXd>& phi) const {
    if (!(epsilon > 0.0)) {
        throw UsageError("penalization epsilon must be positive");
    }
    const int n = system.n();
    if (zeta.size() != n) {
        throw UsageError("zeta has wrong size");
    }
    const Eigen::VectorXd need = minimal_zeta(system, psi);
    for (int i = 0; i < n; ++i) {
        if (zeta(i) < need(i) - 1e-10 * (1.0 + std::abs(need(i)))) {
            throw UsageError("zeta is not admissible at dof " + std::to_string(i));
        }
    }
    if (phi) {
        if (!zeta_upper || zeta_upper->size() != n) {
            throw UsageError("two-obstacle penalization needs zeta_upper");
        }
        const Eigen::VectorXd need_up = minimal_zeta_upper(system, *phi);
        for (int i = 0; i < n; ++i) {
            if ((*zeta_upper)(i) < need_up(i) - 1e-10 * (1.0 + std::abs(need_up(i)))) {
                throw UsageError("zeta_upper is not admissible at dof " + std::to_string(i));
            }
        }
    }
}

Eigen::VectorXd minimal_zeta(const DiscreteSystem& system, const Eigen::VectorXd& psi) {
    check_finite_psi(psi, "lower obstacle");
    const double h = system.mesh.h();
    return ((system.stiffness * psi - system.load).cwiseMax(0.0)) / h;
}

Eigen::VectorXd minimal_zeta_upper(const DiscreteSystem& system, const Eigen::VectorXd& phi) {
    check_finite_psi(phi, "upper obstacle");
    const double h = system.mesh.h();
    return ((system.load - system.stiffness * phi).cwiseMax(0.0)) / h;
}

namespace {

SolveResult penalized_one(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                          const PenalizationConfig& config, const NewtonOptions& options,
                          bool from_below) {
    check_square(system);
    if (psi.size() != system.n()) {
        throw UsageError("obstacle has wrong size");
    }
    config.validate(system, psi);
    const double h = system.mesh.h();
    const double eps = config.epsilon;
    const Eigen::VectorXd hz = h * config.zeta;
    const PenaltyFunction& th = config.theta;
    // from above: theta(t/eps); from below: 1 - theta(-t/eps)
    auto t_val = [&](double t) { return from_below ? 1.0 - th(-t / eps) : th(t / eps); };
    auto t_der = [&](double t) { return from_below ? th.derivative(-t / eps) / eps : th.derivative(t / eps) / eps; };

    Semilinear p{system.stiffness, system.load + hz, {}, {}, {}, max_abs(hz)};
    p.penalty = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd out(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            out(i) = hz(i) * t_val(u(i) - psi(i));
        }
        return out;
    };
    p.penalty_jacobian = [&](const Eigen::VectorXd& u) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(u.size(), u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            j(i, i) = hz(i) * t_der(u(i) - psi(i));
        }
        return j;
    };
    p.penalty_at = [&](int k, double t, const Eigen::VectorXd&) {
        return std::make_pair(hz(k) * t_val(t - psi(k)), hz(k) * t_der(t - psi(k)));
    };
    Eigen::VectorXd u0 = psi.cwiseMax(0.0);
    SolveResult out = solve_semilinear(p, u0, options, from_below ? "penalized-lower" : "penalized");
    out.residual = system.stiffness * out.u - system.load;
    fill_active_sets(ObstacleSet::one_sided(psi), out.u, eps, out);
    return out;
}

}  // namespace

SolveResult solve_penalized(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                            const PenalizationConfig& config, const NewtonOptions& options) {
    return penalized_one(system, psi, config, options, false);
}

SolveResult solve_penalized_lower(const DiscreteSystem& system, const Eigen::VectorXd& psi,
                                  const PenalizationConfig& config, const NewtonOptions& options) {
    return penalized_one(system, psi, config, options, true);
}

SolveResult solve_two_obstacles(const DiscreteSystem& system, const ObstacleSet& obstacles,
                                TwoObstacleMethod method, const PsorOptions& psor,
                                const std::optional<PenalizationConfig>& penalization,
                                const NewtonOptions& newton) {
    check_square(system);
    const int n = system.n();
    obstacles.validate(n);
    if (!obstacles.upper) {
        throw UsageError("two-obstacle problem needs an upper obstacle");
    }
    if (method == TwoObstacleMethod::psor) {
        SolveResult out = solve_psor(system, obstacles, psor);
        out.method = "two-obstacle-" + out.method;
        return out;
    }
    if (!penalization) {
        throw UsageError("penalized two-obstacle solve needs a penalization config");
    }
    const Eigen::VectorXd& psi = obstacles.lower;
    const Eigen::VectorXd& phi = *obstacles.upper;
    const PenalizationConfig& cfg = *penalization;
    cfg.validate(system, psi, phi);
    const double h = system.mesh.h();
    const double eps = cfg.epsilon;
    const Eigen::VectorXd hz = h * cfg.zeta;
    const Eigen::VectorXd hw = h * (*cfg.zeta_upper);
    const PenaltyFunction& th = cfg.theta;

    Semilinear p{system.stiffness, system.load + hz - hw, {}, {}, {}, max_abs(hz) + max_abs(hw)};
    p.penalty = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd out(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            out(i) = hz(i) * th((u(i) - psi(i)) / eps) - hw(i) * th((phi(i) - u(i)) / eps);
        }
        return out;
    };
    p.penalty_jacobian = [&](const Eigen::VectorXd& u) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(u.size(), u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            j(i, i) = (hz(i) * th.derivative((u(i) - psi(i)) / eps) +
                       hw(i) * th.derivative((phi(i) - u(i)) / eps)) /
                      eps;
        }
        return j;
    };
    p.penalty_at = [&](int k, double t, const Eigen::VectorXd&) {
        const double v = hz(k) * th((t - psi(k)) / eps) - hw(k) * th((phi(k) - t) / eps);
        const double d = (hz(k) * th.derivative((t - psi(k)) / eps) +
                          hw(k) * th.derivative((phi(k) - t) / eps)) /
                         eps;
        return std::make_pair(v, d);
    };
    const Eigen::VectorXd u0 = 0.5 * (psi + phi);
    SolveResult out = solve_semilinear(p, u0, newton, "two-obstacle-penalized");
    out.residual = system.stiffness * out.u - system.load;
    fill_active_sets(obstacles, out.u, eps, out);
    return out;
}

namespace {

// Least-squares projection onto v_1 >= v_2 >= ... >= v_N (pool adjacent violators).
Eigen::VectorXd isotonic_decreasing(const Eigen::VectorXd& y) {
    std::vector<double> sum;
    std::vector<int> len;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        sum.push_back(y(i));
        len.push_back(1);
        while (sum.size() > 1 &&
               sum[sum.size() - 2] / len[len.size() - 2] < sum.back() / len.back()) {
            sum[sum.size() - 2] += sum.back();
            len[len.size() - 2] += len.back();
            sum.pop_back();
            len.pop_back();
        }
    }
    Eigen::VectorXd v(y.size());
    Eigen::Index pos = 0;
    for (std::size_t blk = 0; blk < sum.size(); ++blk) {
        for (int j = 0; j < len[blk]; ++j) {
            v(pos++) = sum[blk] / len[blk];
        }
    }
    return v;
}

}  // namespace

Eigen::MatrixXd membrane_weights(const std::vector<Eigen::VectorXd>& densities) {
    const int count = static_cast<int>(densities.size());
    if (count < 1) {
        throw UsageError("membrane weights need at least one load");
    }
    const auto n = densities.front().size();
    Eigen::MatrixXd z(count + 1, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double sum = 0.0;
        double z0 = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            if (densities[static_cast<std::size_t>(i)].size() != n) {
                throw UsageError("membrane loads have different sizes");
            }
            sum += densities[static_cast<std::size_t>(i)](k);
            z0 = std::max(z0, sum / (i + 1));
        }
        z(0, k) = z0;
        sum = 0.0;
        for (int i = 1; i <= count; ++i) {
            sum += densities[static_cast<std::size_t>(i - 1)](k);
            z(i, k) = std::max(0.0, i * z0 - sum);
        }
    }
    return z;
}

SolveResult solve_n_membranes(const DiscreteSystem& system,
                              const std::vector<Eigen::VectorXd>& loads, MembraneMethod method,
                              const MembraneOptions& options) {
    check_square(system);
    const int n = system.n();
    const int count = static_cast<int>(loads.size());
    if (count < 2) {
        throw UsageError("N-membrane problem needs N >= 2 loads");
    }
    for (const auto& b : loads) {
        if (b.size() != n) {
            throw UsageError("membrane load has wrong size");
        }
    }
    SolveResult out;
    out.u_stack = Eigen::MatrixXd::Zero(count, n);

    if (method == MembraneMethod::gauss_seidel) {
        out.method = "membranes-gauss-seidel";
        const Eigen::MatrixXd& a = system.stiffness;
        const double omega = options.inner.omega;
        if (!(omega > 0.0 && omega < 2.0)) {
            throw UsageError("relaxation parameter omega must lie in (0,2)");
        }
        Eigen::MatrixXd b(count, n);
        for (int i = 0; i < count; ++i) {
            b.row(i) = loads[static_cast<std::size_t>(i)].transpose();
        }
        Eigen::VectorXd y(count);
        // u_stack * A^T gives (A u_i)_k at (i, k); updated incrementally column by column
        Eigen::MatrixXd au = out.u_stack * a.transpose();
        for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
            double update = 0.0;
            for (int k = 0; k < n; ++k) {
                const double akk = a(k, k);
                for (int i = 0; i < count; ++i) {
                    y(i) = out.u_stack(i, k) + omega * (b(i, k) - au(i, k)) / akk;
                }
                const Eigen::VectorXd v = isotonic_decreasing(y);
                const Eigen::VectorXd delta = v - out.u_stack.col(k);
                update = std::max(update, max_abs(delta));
                out.u_stack.col(k) = v;
                au += delta * a.col(k).transpose();
            }
            ++out.iterations;
            out.history.push_back(update);
            if (!std::isfinite(update)) {
                break;
            }
            if (update <= options.tol) {
                out.converged = true;
                break;
            }
        }
    } else {
        out.method = "membranes-penalized";
        if (!(options.epsilon > 0.0)) {
            throw UsageError("penalization epsilon must be positive");
        }
        const double h = system.mesh.h();
        std::vector<Eigen::VectorXd> densities;
        for (const auto& b : loads) {
            densities.emplace_back(b / h);
        }
        const Eigen::MatrixXd zeta = membrane_weights(densities);
        const Eigen::MatrixXd hz = h * zeta;
        const double eps = options.epsilon;
        const PenaltyFunction& th = options.theta;
        const int m = count * n;
        Eigen::MatrixXd big = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd rhs(m);
        for (int i = 0; i < count; ++i) {
            big.block(i * n, i * n, n, n) = system.stiffness;
            // rows of hz: zeta_0..zeta_N
            rhs.segment(i * n, n) =
                loads[static_cast<std::size_t>(i)] + hz.row(i + 1).transpose() - hz.row(i).transpose();
        }
        // P_{i,k}(u) = hz_i theta((u_i - u_{i+1})/eps) - hz_{i-1} theta((u_{i-1} - u_i)/eps),
        // with theta = 1 against the fictitious membranes u_0 = +inf, u_{N+1} = -inf
        auto term = [&](int i, int k, double ui, const Eigen::VectorXd& u) {
            const double below = i + 1 < count ? th((ui - u((i + 1) * n + k)) / eps) : 1.0;
            const double above = i > 0 ? th((u((i - 1) * n + k) - ui) / eps) : 1.0;
            const double dbelow = i + 1 < count ? th.derivative((ui - u((i + 1) * n + k)) / eps) / eps : 0.0;
            const double dabove = i > 0 ? th.derivative((u((i - 1) * n + k) - ui) / eps) / eps : 0.0;
            return std::make_tuple(hz(i + 1, k) * below - hz(i, k) * above, hz(i + 1, k) * dbelow,
                                   hz(i, k) * dabove);
        };
        double bound = 0.0;
        for (int i = 0; i <= count; ++i) {
            bound = std::max(bound, 2.0 * hz.row(i).cwiseAbs().maxCoeff());
        }
        Semilinear p{big, rhs, {}, {}, {}, bound};
        p.penalty = [&](const Eigen::VectorXd& u) {
            Eigen::VectorXd out_v(m);
            for (int i = 0; i < count; ++i) {
                for (int k = 0; k < n; ++k) {
                    out_v(i * n + k) = std::get<0>(term(i, k, u(i * n + k), u));
                }
            }
            return out_v;
        };
        p.penalty_jacobian = [&](const Eigen::VectorXd& u) {
            Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < count; ++i) {
                for (int k = 0; k < n; ++k) {
                    const auto [v, db, da] = term(i, k, u(i * n + k), u);
                    const int r = i * n + k;
                    j(r, r) += db + da;
                    if (i + 1 < count) {
                        j(r, r + n) -= db;
                    }
                    if (i > 0) {
                        j(r, r - n) -= da;
                    }
                }
            }
            return j;
        };
        p.penalty_at = [&](int r, double t, const Eigen::VectorXd& u) {
            const auto [v, db, da] = term(r / n, r % n, t, u);
            return std::make_pair(v, db + da);
        };
        SolveResult inner = solve_semilinear(p, Eigen::VectorXd::Zero(m), options.newton, out.method);
        out.method = inner.method;
        out.note = inner.note;
        out.iterations = inner.iterations;
        out.history = inner.history;
        out.converged = inner.converged;
        for (int i = 0; i < count; ++i) {
            out.u_stack.row(i) = inner.u.segment(i * n, n).transpose();
        }
    }

    out.residual_stack.resize(count, n);
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd ui = out.u_stack.row(i).transpose();
        out.residual_stack.row(i) = (system.stiffness * ui - loads[static_cast<std::size_t>(i)]).transpose();
    }
    out.u = out.u_stack.row(0).transpose();
    out.residual = out.residual_stack.row(0).transpose();
    return out;
}

namespace {

// Gaussian elimination with partial pivoting; columns eliminated in the given order.
bool eliminate(Eigen::MatrixXd m, Eigen::VectorXd r, bool reverse, Eigen::VectorXd& x) {
    const int k = static_cast<int>(m.rows());
    std::vector<int> cols(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        cols[static_cast<std::size_t>(c)] = reverse ? k - 1 - c : c;
    }
    std::vector<int> pivot_row(static_cast<std::size_t>(k));
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    const double scale = k == 0 ? 1.0 : m.cwiseAbs().maxCoeff();
    for (int step = 0; step < k; ++step) {
        const int c = cols[static_cast<std::size_t>(step)];
        int best = -1;
        double best_val = 0.0;
        for (int row = 0; row < k; ++row) {
            if (!used[static_cast<std::size_t>(row)] && std::abs(m(row, c)) > best_val) {
                best_val = std::abs(m(row, c));
                best = row;
            }
        }
        if (best < 0 || best_val <= 1e-14 * scale) {
            return false;
        }
        used[static_cast<std::size_t>(best)] = true;
        pivot_row[static_cast<std::size_t>(step)] = best;
        for (int row = 0; row < k; ++row) {
            if (row == best || used[static_cast<std::size_t>(row)]) {
                continue;
            }
            const double f = m(row, c) / m(best, c);
            if (f != 0.0) {
                m.row(row) -= f * m.row(best);
                r(row) -= f * r(best);
            }
        }
    }
    x.setZero(k);
    for (int step = k - 1; step >= 0; --step) {
        const int c = cols[static_cast<std::size_t>(step)];
        const int row = pivot_row[static_cast<std::size_t>(step)];
        double acc = r(row);
        for (int later = step + 1; later < k; ++later) {
            const int c2 = cols[static_cast<std::size_t>(later)];
            acc -= m(row, c2) * x(c2);
        }
        x(c) = acc / m(row, c);
    }
    return true;
}

}  // namespace

Eigen::VectorXd lcp_oracle(const DiscreteSystem& system, const ObstacleSet& obstacles,
                           PivotOrder order) {
    check_square(system);
    const int n = system.n();
    if (n > 10) {
        throw UsageError("lcp_oracle is limited to n <= 10");
    }
    obstacles.validate(n);
    const Eigen::MatrixXd& a = system.stiffness;
    const Eigen::VectorXd& b = system.load;
    const bool reverse = order == PivotOrder::reverse;

    long total = 1;
    for (int i = 0; i < n; ++i) {
        total *= 3;
    }
    // state per dof: 0 free, 1 lower-active, 2 upper-active
    std::vector<int> state(static_cast<std::size_t>(n));
    Eigen::VectorXd u(n);
    for (long c = 0; c < total; ++c) {
        long code = reverse ? total - 1 - c : c;
        bool possible = true;
        for (int i = 0; i < n; ++i) {
            const int st = static_cast<int>(code % 3);
            code /= 3;
            state[static_cast<std::size_t>(i)] = st;
            if ((st == 1 && !is_finite_bound(obstacles.lower_at(i))) ||
                (st == 2 && !is_finite_bound(obstacles.upper_at(i)))) {
                possible = false;
            }
        }
        if (!possible) {
            continue;
        }
        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i) {
            const int st = state[static_cast<std::size_t>(i)];
            if (st == 0) {
                free_idx.push_back(i);
                u(i) = 0.0;
            } else {
                u(i) = st == 1 ? obstacles.lower_at(i) : obstacles.upper_at(i);
            }
        }
        const int k = static_cast<int>(free_idx.size());
        Eigen::MatrixXd m(k, k);
        Eigen::VectorXd r(k);
        for (int p = 0; p < k; ++p) {
            const int i = free_idx[static_cast<std::size_t>(p)];
            r(p) = b(i) - a.row(i).dot(u);
            for (int q = 0; q < k; ++q) {
                m(p, q) = a(i, free_idx[static_cast<std::size_t>(q)]);
            }
        }
        Eigen::VectorXd x;
        if (!eliminate(m, r, reverse, x)) {
            continue;
        }
        for (int p = 0; p < k; ++p) {
            u(free_idx[static_cast<std::size_t>(p)]) = x(p);
        }
        const Eigen::VectorXd res = a * u - b;
        const double utol = 1e-10 * (1.0 + max_abs(u));
        const double rtol = 1e-10 * (1.0 + max_abs(b) + a.cwiseAbs().rowwise().sum().maxCoeff() * max_abs(u));
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const int st = state[static_cast<std::size_t>(i)];
            const double lo = obstacles.lower_at(i);
            const double hi = obstacles.upper_at(i);
            if (st == 0) {
                ok = (!is_finite_bound(lo) || u(i) >= lo - utol) &&
                     (!is_finite_bound(hi) || u(i) <= hi + utol);
            } else if (st == 1) {
                ok = res(i) >= -rtol;
            } else {
                ok = res(i) <= rtol;
            }
        }
        if (ok) {
            return u;
        }
    }
    throw NumericalFailure("lcp_oracle: no active-set configuration satisfies complementarity");
}

}  // namespace fracobs
