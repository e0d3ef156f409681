#include "fracobs/quadrature.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/special_functions.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace fracobs {

namespace {

// Golub-Welsch for the Jacobi weight (1-x)^alpha (1+x)^beta on [-1,1].
QuadratureRule golub_welsch_jacobi(int order, double alpha, double beta) {
    if (order < 1) {
        throw UsageError("quadrature order must be positive");
    }
    if (!(alpha > -1.0 && beta > -1.0)) {
        throw DomainError("Jacobi exponents must exceed -1");
    }
    const int m = order;
    const double ab = alpha + beta;
    Eigen::VectorXd diag(m);
    Eigen::VectorXd sub(std::max(m - 1, 1));
    diag(0) = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < m; ++k) {
        const double kk = static_cast<double>(k);
        const double den = (2.0 * kk + ab) * (2.0 * kk + ab + 2.0);
        diag(k) = (beta * beta - alpha * alpha) / den;
    }
    for (int k = 1; k < m; ++k) {
        const double kk = static_cast<double>(k);
        double b;
        if (k == 1) {
            // (k + alpha + beta) cancels against (2k + alpha + beta - 1).
            b = 4.0 * (1.0 + alpha) * (1.0 + beta) /
                ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            const double t = 2.0 * kk + ab;
            b = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) /
                (t * t * (t + 1.0) * (t - 1.0));
        }
        sub(k - 1) = std::sqrt(b);
    }
    const double mu0 = std::pow(2.0, ab + 1.0) * lanczos_gamma(alpha + 1.0) *
                       lanczos_gamma(beta + 1.0) / lanczos_gamma(ab + 2.0);

    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(m));
    rule.weights.resize(static_cast<std::size_t>(m));
    if (m == 1) {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(m - 1), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("Golub-Welsch eigenvalue solve failed");
    }
    for (int k = 0; k < m; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre01(int order) {
    QuadratureRule r = golub_welsch_jacobi(order, 0.0, 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) {
        r.nodes[k] = 0.5 * (r.nodes[k] + 1.0);
        r.weights[k] *= 0.5;
    }
    return r;
}

QuadratureRule gauss_jacobi01(int order, double gamma) {
    // t = (1+x)/2 maps (1+x)^gamma dx onto 2^{gamma+1} t^gamma dt.
    QuadratureRule r = golub_welsch_jacobi(order, 0.0, gamma);
    const double scale = std::pow(2.0, -(gamma + 1.0));
    for (std::size_t k = 0; k < r.size(); ++k) {
        r.nodes[k] = 0.5 * (r.nodes[k] + 1.0);
        r.weights[k] *= scale;
    }
    return r;
}

QuadratureRule singular_rule01(int order, double gamma) {
    QuadratureRule r = gauss_jacobi01(order, gamma);
    for (std::size_t k = 0; k < r.size(); ++k) {
        r.weights[k] /= std::pow(r.nodes[k], gamma);
    }
    return r;
}

void append_graded_rule(double a, double b, bool singular_left, bool singular_right,
                        std::vector<double>& points, std::vector<double>& weights,
                        const GradedRuleOptions& options) {
    static thread_local int cached_order = -1;
    static thread_local QuadratureRule gl;
    if (cached_order != options.order) {
        gl = gauss_legendre01(options.order);
        cached_order = options.order;
    }
    auto push = [&](double lo, double hi) {
        const double len = hi - lo;
        for (std::size_t k = 0; k < gl.size(); ++k) {
            points.push_back(lo + len * gl.nodes[k]);
            weights.push_back(len * gl.weights[k]);
        }
    };
    const double len = b - a;
    if (!(len > 0.0)) {
        return;
    }
    // Split the interval in half when both ends are singular.
    if (singular_left && singular_right) {
        const double mid = 0.5 * (a + b);
        append_graded_rule(a, mid, true, false, points, weights, options);
        append_graded_rule(mid, b, false, true, points, weights, options);
        return;
    }
    if (!singular_left && !singular_right) {
        push(a, b);
        return;
    }
    // Geometric mesh towards the singular end.
    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(options.levels) + 2);
    double d = len;
    for (int l = 0; l < options.levels; ++l) {
        d *= options.ratio;
        cuts.push_back(d);
    }
    // cuts are distances from the singular end, decreasing.
    if (singular_left) {
        double lo = a;
        for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
            const double hi = a + *it;
            push(lo, hi);
            lo = hi;
        }
        push(lo, b);
    } else {
        double hi = b;
        for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
            const double lo = b - *it;
            push(lo, hi);
            hi = lo;
        }
        push(a, hi);
    }
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error, unsigned max_depth) {
    double err = 0.0;
    double value = 0.0;
    if (std::isfinite(a) && std::isfinite(b)) {
        // boost's error estimate is scale dependent; integrate on [0,1]
        const double len = b - a;
        auto g = [&](double t) { return len * f(a + len * t); };
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, 0.0, 1.0, max_depth,
                                                                             rel_tol, &err);
    } else {
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth,
                                                                             rel_tol, &err);
    }
    if (error != nullptr) {
        *error = err;
    }
    return value;
}

}  // namespace fracobs
