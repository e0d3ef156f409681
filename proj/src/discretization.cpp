#include "fracobs/discretization.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/fractional_core.hpp"
#include "fracobs/quadrature.hpp"
#include "pair_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace fracobs {

namespace {

void require_size(const Mesh& mesh) {
    if (mesh.n > kMaxDofs) {
        throw UsageError("dense assembly limited to n <= " + std::to_string(kMaxDofs) + ", got " +
                         std::to_string(mesh.n));
    }
}

detail::PairProfile to_profile(const Kernel& k) {
    detail::PairProfile p;
    p.s = k.s();
    p.profile = k.profile_fn();
    p.constant = k.constant_profile();
    p.lower = k.a_lower();
    p.upper = k.a_upper();
    return p;
}

Eigen::MatrixXd assemble_path(const Mesh& mesh, const Kernel& kernel, bool symmetric,
                              AssemblyReport* report) {
    require_size(mesh);
    const detail::PairProfile profile = to_profile(kernel);
    Eigen::MatrixXd pairs = symmetric ? detail::pair_form_symmetric(mesh, profile)
                                      : detail::pair_form_nonsymmetric(mesh, profile);
    detail::TailReport tails;
    const Eigen::MatrixXd tail = detail::tail_mass(mesh, profile, &tails);
    Eigen::MatrixXd a = kernel.c_squared() * (pairs + tail);
    if (symmetric) {
        a = 0.5 * (a + a.transpose()).eval();
    }
    AssemblyReport rep;
    rep.path = symmetric ? "symmetric" : "nonsymmetric";
    rep.tail_cutoff_bound = kernel.c_squared() * tails.cutoff_bound;
    rep.tail_quadrature_error = kernel.c_squared() * tails.quadrature_error;
    finalize_stiffness(a, rep);
    if (report != nullptr) {
        *report = rep;
    }
    return a;
}

}  // namespace

LoadData LoadData::constant(double value) {
    LoadData d;
    d.f_sharp = [value](double) { return value; };
    return d;
}

LoadData LoadData::nodal(Eigen::VectorXd values) {
    LoadData d;
    d.f_sharp_nodal = std::move(values);
    return d;
}

void finalize_stiffness(Eigen::MatrixXd& a, AssemblyReport& rep) {
    const Eigen::Index n = a.rows();
    rep.norm_max = a.cwiseAbs().maxCoeff();
    const double threshold = kZClampRelative * rep.norm_max;
    rep.clamp_count = 0;
    rep.clamp_total = 0.0;
    rep.clamp_max = 0.0;
    rep.z_violations = 0;
    rep.max_positive_offdiag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || a(i, j) <= 0.0) {
                continue;
            }
            const double v = a(i, j);
            rep.max_positive_offdiag = std::max(rep.max_positive_offdiag, v);
            if (v <= threshold) {
                ++rep.clamp_count;
                rep.clamp_total += v;
                rep.clamp_max = std::max(rep.clamp_max, v);
                a(i, j) = 0.0;
            } else {
                ++rep.z_violations;
            }
        }
    }
    rep.min_row_sum = n > 0 ? a.rowwise().sum().minCoeff() : 0.0;
    rep.asymmetry = rep.norm_max > 0.0 ? (a - a.transpose()).cwiseAbs().maxCoeff() / rep.norm_max : 0.0;
}

Eigen::MatrixXd assemble_stiffness(const Mesh& mesh, const Kernel& kernel, AssemblyReport* report) {
    return assemble_path(mesh, kernel, false, report);
}

Eigen::MatrixXd assemble_stiffness_symmetric(const Mesh& mesh, const Kernel& kernel,
                                             AssemblyReport* report) {
    if (!kernel.symmetric()) {
        throw UsageError("symmetric assembly requested for the nonsymmetric kernel '" +
                         kernel.name() + "'");
    }
    return assemble_path(mesh, kernel, true, report);
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const LoadData& data, double s) {
    const int n = mesh.n;
    const double h = mesh.h();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    if (data.f_sharp_nodal) {
        if (data.f_sharp_nodal->size() != n) {
            throw UsageError("nodal load has the wrong length");
        }
        b += h * *data.f_sharp_nodal;
    } else if (data.f_sharp) {
        const QuadratureRule g3 = gauss_legendre01(3);
        for (int e = 0; e < mesh.num_elements(); ++e) {
            for (std::size_t q = 0; q < g3.size(); ++q) {
                const double xi = g3.nodes[q];
                const double f = data.f_sharp(mesh.node(e) + h * xi) * h * g3.weights[q];
                if (e >= 1) {
                    b(e - 1) += f * (1.0 - xi);
                }
                if (e + 1 <= n) {
                    b(e) += f * xi;
                }
            }
        }
    }
    if (data.f_vec) {
        std::vector<double> pts;
        std::vector<double> wts;
        detail::ds_window_rule(mesh, s, false, pts, wts);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double f = data.f_vec(pts[q]);
            if (f == 0.0) {
                continue;
            }
            for (int i = 0; i < n; ++i) {
                b(i) += wts[q] * f * ds_gradient_hat(mesh, i, pts[q], s);
            }
        }
    }
    if (!b.allFinite()) {
        throw DomainError("load vector is not finite");
    }
    return b;
}

DiscreteSystem make_system(const Mesh& mesh, const Kernel& kernel, Eigen::MatrixXd stiffness,
                           Eigen::VectorXd load, AssemblyReport report) {
    if (stiffness.rows() != mesh.n || stiffness.cols() != mesh.n || load.size() != mesh.n) {
        throw UsageError("system dimensions do not match the mesh");
    }
    DiscreteSystem sys;
    sys.mesh = mesh;
    sys.stiffness = std::move(stiffness);
    sys.mass_lumped = Eigen::VectorXd::Constant(mesh.n, mesh.h());
    sys.load = std::move(load);
    sys.s = kernel.s();
    sys.kernel_name = kernel.name();
    sys.a_lower = kernel.a_lower();
    sys.a_upper = kernel.a_upper();
    sys.symmetric = kernel.symmetric();
    sys.report = std::move(report);
    return sys;
}

DiscreteSystem make_system(const Mesh& mesh, const Kernel& kernel, const LoadData& data) {
    AssemblyReport rep;
    Eigen::MatrixXd a = kernel.symmetric() ? assemble_stiffness_symmetric(mesh, kernel, &rep)
                                           : assemble_stiffness(mesh, kernel, &rep);
    return make_system(mesh, kernel, std::move(a), assemble_load(mesh, data, kernel.s()), rep);
}

DiscreteSystem add_mass(DiscreteSystem system, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("zeroth-order weight lambda must be nonnegative");
    }
    if (lambda == 0.0) {
        return system;
    }
    system.stiffness.diagonal() += lambda * system.mass_lumped;
    system.lambda += lambda;
    return system;
}

Eigen::MatrixXd classical_stiffness(const Mesh& mesh) {
    require_size(mesh);
    const int n = mesh.n;
    const double h = mesh.h();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 2.0 / h;
        if (i + 1 < n) {
            a(i, i + 1) = -1.0 / h;
            a(i + 1, i) = -1.0 / h;
        }
    }
    return a;
}

DiscreteSystem make_classical_system(const Mesh& mesh, const LoadData& data) {
    DiscreteSystem sys;
    sys.mesh = mesh;
    sys.stiffness = classical_stiffness(mesh);
    sys.mass_lumped = Eigen::VectorXd::Constant(mesh.n, mesh.h());
    LoadData plain = data;
    plain.f_vec = nullptr;
    sys.load = assemble_load(mesh, plain, 0.5);
    sys.s = 1.0;
    sys.kernel_name = "classical";
    sys.report.path = "classical";
    finalize_stiffness(sys.stiffness, sys.report);
    return sys;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write " + path);
    }
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << (j ? "," : "") << "c" << j;
    }
    out << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << m(i, j);
        }
        out << "\n";
    }
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v, const std::string& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write " + path);
    }
    out << std::setprecision(17) << "i," << header << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << i << "," << v(i) << "\n";
    }
}

}  // namespace fracobs
