#include "fracobs/fractional_core.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/quadrature.hpp"
#include "fracobs/special_functions.hpp"
#include "pair_quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>

namespace fracobs {

FractionalParams FractionalParams::make(int d, double s) {
    FractionalParams p;
    p.d = d;
    p.s = s;
    p.c_ds = riesz_constant(d, s);
    return p;
}

void FractionalParams::validate() const {
    const double c = riesz_constant(d, s);
    if (!(c_ds > 0.0) || std::abs(c - c_ds) > 1e-12 * c) {
        throw DomainError("stored c_ds does not match riesz_constant(d, s)");
    }
}

PiecewiseLinearFn::PiecewiseLinearFn(const Mesh& m, Eigen::VectorXd nodal)
    : mesh(m), values(std::move(nodal)) {
    if (values.size() != mesh.n) {
        throw UsageError("piecewise-linear function: expected " + std::to_string(mesh.n) +
                         " nodal values, got " + std::to_string(values.size()));
    }
    if (!values.allFinite()) {
        throw DomainError("piecewise-linear function: non-finite nodal value");
    }
}

PiecewiseLinearFn PiecewiseLinearFn::zero(const Mesh& m) {
    return PiecewiseLinearFn(m, Eigen::VectorXd::Zero(m.n));
}

PiecewiseLinearFn PiecewiseLinearFn::hat(const Mesh& m, int i) {
    if (i < 0 || i >= m.n) {
        throw UsageError("hat index out of range");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.n);
    v(i) = 1.0;
    return PiecewiseLinearFn(m, v);
}

double PiecewiseLinearFn::node_value(int k) const {
    if (k <= 0 || k >= mesh.n + 1) {
        return 0.0;
    }
    return values(k - 1);
}

double PiecewiseLinearFn::operator()(double x) const {
    if (!(x > mesh.x_lo && x < mesh.x_hi)) {
        return 0.0;
    }
    const double h = mesh.h();
    const double t = (x - mesh.x_lo) / h;
    int e = static_cast<int>(std::floor(t));
    e = std::min(std::max(e, 0), mesh.n);
    const double xi = t - static_cast<double>(e);
    return (1.0 - xi) * node_value(e) + xi * node_value(e + 1);
}

namespace {

void require_same_mesh(const Mesh& a, const Mesh& b) {
    if (!(a == b)) {
        throw UsageError("functions live on different meshes");
    }
}

void require_order(double s) {
    if (!(s > 0.0 && s < 1.0)) {
        throw DomainError("fractional order s must lie in (0,1), got " + std::to_string(s));
    }
}

Eigen::MatrixXd build_seminorm_gram(const Mesh& mesh, double s) {
    detail::PairProfile unit;
    unit.s = s;
    unit.constant = 1.0;
    const Eigen::MatrixXd pairs = detail::pair_form_symmetric(mesh, unit);
    const Eigen::MatrixXd tails = detail::tail_mass(mesh, unit, nullptr);
    Eigen::MatrixXd g = 2.0 * (pairs + tails);
    return 0.5 * (g + g.transpose());
}

// int_{y0}^{y1} (u(x) - u(y)) sign(x - y) |x - y|^{-1-s} dy for u linear on [y0, y1]
// with end values u0, u1; ux is the value of the global function at x.
double element_term(double x, double ux, double y0, double y1, double u0, double u1, double s) {
    const double beta = (u1 - u0) / (y1 - y0);
    const double one_s = 1.0 - s;
    if (x >= y0 && x <= y1) {
        return beta * (std::pow(x - y0, one_s) + std::pow(y1 - x, one_s)) / one_s;
    }
    const double delta = ux - (u0 + beta * (x - y0));
    if (x > y1) {
        const double a = (std::pow(x - y1, -s) - std::pow(x - y0, -s)) / s;
        const double b = (std::pow(x - y0, one_s) - std::pow(x - y1, one_s)) / one_s;
        return delta * a + beta * b;
    }
    const double a = -(std::pow(y0 - x, -s) - std::pow(y1 - x, -s)) / s;
    const double b = (std::pow(y1 - x, one_s) - std::pow(y0 - x, one_s)) / one_s;
    return delta * a + beta * b;
}

}  // namespace

std::shared_ptr<const Eigen::MatrixXd> seminorm_gram(const Mesh& mesh, double s) {
    require_order(s);
    using Key = std::tuple<double, double, int, double>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> cache;
    const Key key{mesh.x_lo, mesh.x_hi, mesh.n, s};
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) {
            return it->second;
        }
    }
    auto g = std::make_shared<const Eigen::MatrixXd>(build_seminorm_gram(mesh, s));
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 32) {
        cache.clear();
    }
    cache.emplace(key, g);
    return g;
}

double gagliardo_seminorm_sq(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double s) {
    require_same_mesh(u.mesh, v.mesh);
    require_order(s);
    if (u.values.isZero(0.0) || v.values.isZero(0.0)) {
        return 0.0;
    }
    const auto g = seminorm_gram(u.mesh, s);
    return u.values.dot(*g * v.values);
}

double ds_norm_sq(const Mesh& mesh, const Eigen::VectorXd& u, double s) {
    require_order(s);
    if (u.size() != mesh.n) {
        throw UsageError("ds_norm_sq: vector size does not match the mesh");
    }
    if (u.isZero(0.0)) {
        return 0.0;
    }
    const double c = riesz_constant(1, s);
    const auto g = seminorm_gram(mesh, s);
    return 0.5 * c * c * u.dot(*g * u);
}

double ds_norm_sq(const PiecewiseLinearFn& u, double s) { return ds_norm_sq(u.mesh, u.values, s); }

double ds_gradient_at(const PiecewiseLinearFn& u, double x, double s) {
    require_order(s);
    const Mesh& m = u.mesh;
    const double ux = u(x);
    double acc = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const double u0 = u.node_value(e);
        const double u1 = u.node_value(e + 1);
        if (u0 == 0.0 && u1 == 0.0 && ux == 0.0) {
            continue;
        }
        acc += element_term(x, ux, m.node(e), m.node(e + 1), u0, u1, s);
    }
    if (ux != 0.0) {
        acc += ux * (std::pow(x - m.x_lo, -s) - std::pow(m.x_hi - x, -s)) / s;
    }
    return riesz_constant(1, s) * acc;
}

double ds_gradient_hat(const Mesh& mesh, int i, double x, double s) {
    require_order(s);
    if (i < 0 || i >= mesh.n) {
        throw UsageError("hat index out of range");
    }
    const int k = i + 1;
    const double a = mesh.node(k - 1);
    const double mid = mesh.node(k);
    const double b = mesh.node(k + 1);
    double phi = 0.0;
    if (x > a && x < b) {
        phi = x <= mid ? (x - a) / (mid - a) : (b - x) / (b - mid);
    }
    double acc = element_term(x, phi, a, mid, 0.0, 1.0, s) + element_term(x, phi, mid, b, 1.0, 0.0, s);
    if (phi != 0.0) {
        acc += phi * (std::pow(x - a, -s) - std::pow(b - x, -s)) / s;
    }
    return riesz_constant(1, s) * acc;
}

namespace detail {

void ds_window_rule(const Mesh& mesh, double s, bool infinite_tails, std::vector<double>& points,
                    std::vector<double>& weights) {
    const double w = 2.0 * mesh.length();
    GradedRuleOptions opt;
    opt.order = 8;
    opt.levels = 12;
    opt.ratio = 0.2;
    append_graded_rule(mesh.x_lo - w, mesh.x_lo, false, true, points, weights, opt);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        append_graded_rule(mesh.node(e), mesh.node(e + 1), true, true, points, weights, opt);
    }
    append_graded_rule(mesh.x_hi, mesh.x_hi + w, true, false, points, weights, opt);
    if (!infinite_tails) {
        return;
    }
    // x = x_hi + W / tau; the integrand times W / tau^2 behaves like tau^{2s}
    const QuadratureRule gj = gauss_jacobi01(24, 2.0 * s);
    for (std::size_t q = 0; q < gj.size(); ++q) {
        const double tau = gj.nodes[q];
        const double wt = gj.weights[q] * w * std::pow(tau, -2.0 - 2.0 * s);
        points.push_back(mesh.x_hi + w / tau);
        weights.push_back(wt);
        points.push_back(mesh.x_lo - w / tau);
        weights.push_back(wt);
    }
}

}  // namespace detail

Eigen::MatrixXd ds_gradient_gram(const Mesh& mesh, double s) {
    require_order(s);
    std::vector<double> pts;
    std::vector<double> wts;
    detail::ds_window_rule(mesh, s, true, pts, wts);
    const auto p = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd v(p, mesh.n);
    for (Eigen::Index q = 0; q < p; ++q) {
        const double sw = std::sqrt(wts[static_cast<std::size_t>(q)]);
        for (int i = 0; i < mesh.n; ++i) {
            v(q, i) = sw * ds_gradient_hat(mesh, i, pts[static_cast<std::size_t>(q)], s);
        }
    }
    Eigen::MatrixXd g = v.transpose() * v;
    return 0.5 * (g + g.transpose());
}

}  // namespace fracobs
