#pragma once

#include "fracobs/mesh.hpp"
#include "fracobs/penalty.hpp"

#include <Eigen/Dense>

#include <memory>

namespace fracobs {

struct FractionalParams {
    int d = 1;
    double s = 0.5;
    double c_ds = 0.0;

    static FractionalParams make(int d, double s);
    /// Throws DomainError if s is outside (0,1) or c_ds disagrees with riesz_constant(d, s).
    void validate() const;
};

/// Continuous piecewise-linear function on a mesh, zero at and beyond both endpoints.
struct PiecewiseLinearFn {
    Mesh mesh;
    Eigen::VectorXd values;  // interior nodes, size mesh.n

    PiecewiseLinearFn(const Mesh& m, Eigen::VectorXd nodal);
    static PiecewiseLinearFn zero(const Mesh& m);
    /// Hat function of degree of freedom i.
    static PiecewiseLinearFn hat(const Mesh& m, int i);

    /// Value at node k = 0..n+1 (0 at the two boundary nodes).
    double node_value(int k) const;
    double operator()(double x) const;
};

/// [u,v]_s = int int (u(x)-u(y)) (v(x)-v(y)) |x-y|^{-1-2s} over R x R.
double gagliardo_seminorm_sq(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double s);

/// Matrix S with [u,v]_s = u^T S v for nodal vectors on `mesh`. Cached per (mesh, s).
std::shared_ptr<const Eigen::MatrixXd> seminorm_gram(const Mesh& mesh, double s);

/// (c_{1,s}^2 / 2) [u,u]_s.
double ds_norm_sq(const PiecewiseLinearFn& u, double s);
/// Same quantity for a nodal vector.
double ds_norm_sq(const Mesh& mesh, const Eigen::VectorXd& u, double s);

/// D^s u(x) = c_{1,s} int (u(x)-u(y)) sign(x-y) |x-y|^{-1-s} dy, evaluated in closed form
/// element by element. Any real x is accepted.
double ds_gradient_at(const PiecewiseLinearFn& u, double x, double s);

/// D^s of the hat function of degree of freedom i, at x.
double ds_gradient_hat(const Mesh& mesh, int i, double x, double s);

/// G_ij = int_R D^s phi_i D^s phi_j dx, by composite quadrature graded at every node
/// and a mapped rule on the two unbounded tails.
Eigen::MatrixXd ds_gradient_gram(const Mesh& mesh, double s);

}  // namespace fracobs
