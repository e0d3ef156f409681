#pragma once

#include <functional>
#include <vector>

namespace fracobs {

/// Nodes and weights of a one-dimensional rule on [0,1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with `order` points on [0,1].
QuadratureRule gauss_legendre01(int order);

/// Gauss-Jacobi rule on [0,1] for the weight t^gamma (gamma > -1):
///   int_0^1 t^gamma g(t) dt ~= sum_k w_k g(t_k).
/// Built with the Golub-Welsch eigenvalue method.
QuadratureRule gauss_jacobi01(int order, double gamma);

/// Same rule but with the weight folded in, so that
///   int_0^1 F(t) dt ~= sum_k w_k F(t_k)
/// is exact whenever F(t) = t^gamma * polynomial of degree < 2*order.
QuadratureRule singular_rule01(int order, double gamma);

/// Composite Gauss-Legendre rule on [a,b] with geometric refinement towards the
/// endpoints flagged singular. Each level shrinks by `ratio`.
struct GradedRuleOptions {
    int order = 8;
    int levels = 10;
    double ratio = 0.2;
};
void append_graded_rule(double a, double b, bool singular_left, bool singular_right,
                        std::vector<double>& points, std::vector<double>& weights,
                        const GradedRuleOptions& options = {});

/// Adaptive Gauss-Kronrod (15 points) over [a,b]; either bound may be infinite.
/// `error`, when given, receives the accumulated error estimate.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double* error = nullptr,
                          unsigned max_depth = 20);

}  // namespace fracobs
