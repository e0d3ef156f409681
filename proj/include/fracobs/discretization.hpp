#pragma once

#include "fracobs/kernels.hpp"
#include "fracobs/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace fracobs {

constexpr int kMaxDofs = 2048;

struct AssemblyReport {
    std::string path;                 // "nonsymmetric", "symmetric" or "classical"
    int clamp_count = 0;              // positive off-diagonals set to zero
    double clamp_total = 0.0;
    double clamp_max = 0.0;
    int z_violations = 0;             // positive off-diagonals above the clamp threshold
    double max_positive_offdiag = 0.0;
    double min_row_sum = 0.0;
    double asymmetry = 0.0;           // ||A - A^T||_max / ||A||_max
    double norm_max = 0.0;
    double tail_cutoff_bound = 0.0;
    double tail_quadrature_error = 0.0;
};

struct DiscreteSystem {
    Mesh mesh;
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd mass_lumped;
    Eigen::VectorXd load;
    double lambda = 0.0;
    double s = 0.5;                   // 1 for the classical system
    std::string kernel_name;
    double a_lower = 1.0;
    double a_upper = 1.0;
    bool symmetric = true;
    AssemblyReport report;

    int n() const { return mesh.n; }
};

/// Right-hand side data: f_# on the domain and the d = 1 component of the vector field f,
/// sampled on [x_lo - W, x_hi + W], W = 2 (x_hi - x_lo), and taken as 0 outside.
struct LoadData {
    std::function<double(double)> f_sharp;         // callable f_#
    std::optional<Eigen::VectorXd> f_sharp_nodal;  // or nodal values, lumped: b_i = h f_i
    std::function<double(double)> f_vec;           // optional

    static LoadData constant(double value);
    static LoadData nodal(Eigen::VectorXd values);
};

/// Relative threshold below which positive off-diagonal entries are clamped.
constexpr double kZClampRelative = 1e-8;

/// A[i][j] = E_a(phi_j, phi_i) by the principal-value element-pair rule.
Eigen::MatrixXd assemble_stiffness(const Mesh& mesh, const Kernel& kernel,
                                   AssemblyReport* report = nullptr);

/// Same matrix from the symmetric double-difference form; requires kernel.symmetric().
Eigen::MatrixXd assemble_stiffness_symmetric(const Mesh& mesh, const Kernel& kernel,
                                             AssemblyReport* report = nullptr);

/// b_i = int f_# phi_i + int f D^s phi_i.
Eigen::VectorXd assemble_load(const Mesh& mesh, const LoadData& data, double s);

/// Stiffness (symmetric path when the kernel allows it), lumped mass and load.
DiscreteSystem make_system(const Mesh& mesh, const Kernel& kernel, const LoadData& data);
/// Same with a precomputed stiffness and a load vector.
DiscreteSystem make_system(const Mesh& mesh, const Kernel& kernel, Eigen::MatrixXd stiffness,
                           Eigen::VectorXd load, AssemblyReport report = {});

/// stiffness <- stiffness + lambda * diag(mass_lumped).
DiscreteSystem add_mass(DiscreteSystem system, double lambda);

/// Classical P1 stiffness of -u'' (tridiagonal 2/h, -1/h).
Eigen::MatrixXd classical_stiffness(const Mesh& mesh);
/// System of the classical (s = 1) problem with load int f_# phi_i.
DiscreteSystem make_classical_system(const Mesh& mesh, const LoadData& data);

/// Z-matrix post-processing: clamps tiny positive off-diagonals and fills the report.
void finalize_stiffness(Eigen::MatrixXd& a, AssemblyReport& report);

/// CSV dumps used by the --dump flag of the command-line tool.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v, const std::string& header);

}  // namespace fracobs
