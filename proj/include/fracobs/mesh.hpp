#pragma once

namespace fracobs {

/// Uniform mesh of the interval (x_lo, x_hi) with n interior nodes.
/// Nodes are x_k = x_lo + k h for k = 0..n+1; element e is [x_e, x_{e+1}], e = 0..n.
/// Interior node k carries degree of freedom k-1.
struct Mesh {
    double x_lo = -1.0;
    double x_hi = 1.0;
    int n = 1;

    Mesh() = default;
    Mesh(double lo, double hi, int interior_nodes);

    double h() const { return (x_hi - x_lo) / static_cast<double>(n + 1); }
    double length() const { return x_hi - x_lo; }
    double node(int k) const { return x_lo + static_cast<double>(k) * h(); }
    /// Coordinate of degree of freedom i (i = 0..n-1).
    double dof_x(int i) const { return node(i + 1); }
    int num_elements() const { return n + 1; }

    bool operator==(const Mesh& other) const = default;
};

}  // namespace fracobs
