#include "pair_quadrature.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/parallel.hpp"
#include "fracobs/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace fracobs::detail {

namespace {

struct PairPoint {
    double xi;
    double eta;
    double r;  // |x - y| / h, exact in reference coordinates
    double w;
};

struct Rules {
    std::vector<PairPoint> identical;
    std::vector<PairPoint> touch_right;  // f = e + 1
    std::vector<PairPoint> touch_left;   // f = e - 1
    std::map<int, QuadratureRule> far;
};

int far_order(int gap) {
    if (gap == 2) {
        return 10;
    }
    if (gap == 3) {
        return 8;
    }
    if (gap <= 6) {
        return 6;
    }
    return 5;
}

Rules build_rules(double s, const PairOptions& opt) {
    Rules rules;
    const double gamma = 1.0 - 2.0 * s;
    const QuadratureRule radial = singular_rule01(opt.singular_order, gamma);
    const QuadratureRule angular = gauss_legendre01(opt.angular_order);

    for (std::size_t i = 0; i < radial.size(); ++i) {
        const double r = radial.nodes[i];
        for (std::size_t j = 0; j < angular.size(); ++j) {
            const double t = (1.0 - r) * angular.nodes[j];
            const double w = radial.weights[i] * (1.0 - r) * angular.weights[j];
            rules.identical.push_back({t + r, t, r, w});
            rules.identical.push_back({t, t + r, r, w});
        }
    }
    for (std::size_t i = 0; i < radial.size(); ++i) {
        const double rho = radial.nodes[i];
        for (std::size_t j = 0; j < angular.size(); ++j) {
            const double q = rho * angular.nodes[j];
            const double w = radial.weights[i] * rho * angular.weights[j];
            // (alpha, beta) = distances of x and y from the shared node, in units of h
            const std::array<std::array<double, 2>, 2> ab = {{{rho, q}, {q, rho}}};
            for (const auto& p : ab) {
                const double alpha = p[0];
                const double beta = p[1];
                rules.touch_right.push_back({1.0 - alpha, beta, alpha + beta, w});
                rules.touch_left.push_back({alpha, 1.0 - beta, alpha + beta, w});
            }
        }
    }
    for (int order : {10, 8, 6, 5}) {
        rules.far[order] = gauss_legendre01(order);
    }
    return rules;
}

struct Local {
    std::array<int, 4> nodes{};
    int m = 0;
    std::array<std::array<double, 4>, 4> a{};
};

void set_nodes(int e, int f, Local& loc) {
    loc.m = 0;
    for (int nd : {e, e + 1, f, f + 1}) {
        bool seen = false;
        for (int k = 0; k < loc.m; ++k) {
            seen = seen || loc.nodes[static_cast<std::size_t>(k)] == nd;
        }
        if (!seen) {
            loc.nodes[static_cast<std::size_t>(loc.m++)] = nd;
        }
    }
    for (auto& row : loc.a) {
        row.fill(0.0);
    }
}

inline double hat_ref(int node, int elem, double ref) {
    if (node == elem) {
        return 1.0 - ref;
    }
    if (node == elem + 1) {
        return ref;
    }
    return 0.0;
}

template <bool Symmetric>
void accumulate_point(const Mesh& mesh, int e, int f, double xi, double eta, double r, double w,
                      const PairProfile& k, Local& loc) {
    const double h = mesh.h();
    double p;
    if (k.constant) {
        p = *k.constant;
    } else {
        p = k.profile(mesh.node(e) + h * xi, mesh.node(f) + h * eta);
    }
    const double weight = w * p * std::pow(h, 1.0 - 2.0 * k.s) * std::pow(r, -1.0 - 2.0 * k.s);
    std::array<double, 4> vx{};
    std::array<double, 4> dv{};
    for (int a = 0; a < loc.m; ++a) {
        const int nd = loc.nodes[static_cast<std::size_t>(a)];
        vx[static_cast<std::size_t>(a)] = hat_ref(nd, e, xi);
        dv[static_cast<std::size_t>(a)] = vx[static_cast<std::size_t>(a)] - hat_ref(nd, f, eta);
    }
    for (int a = 0; a < loc.m; ++a) {
        const double left = Symmetric ? dv[static_cast<std::size_t>(a)] : vx[static_cast<std::size_t>(a)];
        if (left == 0.0) {
            continue;
        }
        for (int b = 0; b < loc.m; ++b) {
            loc.a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                weight * left * dv[static_cast<std::size_t>(b)];
        }
    }
}

template <bool Symmetric>
void local_pair(const Mesh& mesh, int e, int f, const PairProfile& k, const Rules& rules,
                Local& loc) {
    set_nodes(e, f, loc);
    const int gap = f - e;
    if (gap == 0) {
        for (const auto& p : rules.identical) {
            accumulate_point<Symmetric>(mesh, e, f, p.xi, p.eta, p.r, p.w, k, loc);
        }
    } else if (gap == 1) {
        for (const auto& p : rules.touch_right) {
            accumulate_point<Symmetric>(mesh, e, f, p.xi, p.eta, p.r, p.w, k, loc);
        }
    } else if (gap == -1) {
        for (const auto& p : rules.touch_left) {
            accumulate_point<Symmetric>(mesh, e, f, p.xi, p.eta, p.r, p.w, k, loc);
        }
    } else {
        const QuadratureRule& gl = rules.far.at(far_order(std::abs(gap)));
        for (std::size_t i = 0; i < gl.size(); ++i) {
            for (std::size_t j = 0; j < gl.size(); ++j) {
                const double xi = gl.nodes[i];
                const double eta = gl.nodes[j];
                const double r = std::abs(static_cast<double>(gap) + eta - xi);
                accumulate_point<Symmetric>(mesh, e, f, xi, eta, r, gl.weights[i] * gl.weights[j],
                                            k, loc);
            }
        }
    }
    if (Symmetric) {
        // 1/2 from the symmetric form; a distinct pair also stands for its mirror (f, e)
        const double factor = gap == 0 ? 0.5 : 1.0;
        for (auto& row : loc.a) {
            for (double& v : row) {
                v *= factor;
            }
        }
    }
    for (int a = 0; a < loc.m; ++a) {
        for (int b = 0; b < loc.m; ++b) {
            if (!std::isfinite(loc.a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)])) {
                throw NumericalFailure("pair quadrature produced a non-finite value on element pair (" +
                                       std::to_string(e) + ", " + std::to_string(f) + ")");
            }
        }
    }
}

void scatter(const Local& loc, int shift, int n, Eigen::MatrixXd& out) {
    for (int a = 0; a < loc.m; ++a) {
        const int ra = loc.nodes[static_cast<std::size_t>(a)] + shift;
        if (ra < 1 || ra > n) {
            continue;
        }
        for (int b = 0; b < loc.m; ++b) {
            const int cb = loc.nodes[static_cast<std::size_t>(b)] + shift;
            if (cb < 1 || cb > n) {
                continue;
            }
            out(ra - 1, cb - 1) += loc.a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
    }
}

template <bool Symmetric>
Eigen::MatrixXd pair_form(const Mesh& mesh, const PairProfile& k, const PairOptions& opt) {
    if (!(k.s > 0.0 && k.s < 1.0)) {
        throw DomainError("pair quadrature: s must lie in (0,1)");
    }
    if (!k.constant && !k.profile) {
        throw UsageError("pair quadrature: kernel profile missing");
    }
    const Rules rules = build_rules(k.s, opt);
    const int ne = mesh.num_elements();
    const int n = mesh.n;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    const int f_lo_gap = Symmetric ? 0 : -(ne - 1);

    if (k.constant) {
        // translation invariance: one local matrix per gap
        const int gaps = ne - f_lo_gap;
        std::vector<Local> per_gap(static_cast<std::size_t>(gaps));
        parallel_for(gaps, [&](int gi) {
            const int gap = f_lo_gap + gi;
            const int e = gap < 0 ? -gap : 0;
            local_pair<Symmetric>(mesh, e, e + gap, k, rules, per_gap[static_cast<std::size_t>(gi)]);
        });
        for (int e = 0; e < ne; ++e) {
            const int f_begin = Symmetric ? e : 0;
            for (int f = f_begin; f < ne; ++f) {
                const int gap = f - e;
                const int e_ref = gap < 0 ? -gap : 0;
                scatter(per_gap[static_cast<std::size_t>(gap - f_lo_gap)], e - e_ref, n, out);
            }
        }
        return out;
    }

    constexpr int kBlock = 16;
    for (int e0 = 0; e0 < ne; e0 += kBlock) {
        const int e1 = std::min(e0 + kBlock, ne);
        std::vector<std::vector<Local>> rows(static_cast<std::size_t>(e1 - e0));
        parallel_for(e1 - e0, [&](int idx) {
            const int e = e0 + idx;
            const int f_begin = Symmetric ? e : 0;
            auto& row = rows[static_cast<std::size_t>(idx)];
            row.resize(static_cast<std::size_t>(ne - f_begin));
            for (int f = f_begin; f < ne; ++f) {
                local_pair<Symmetric>(mesh, e, f, k, rules, row[static_cast<std::size_t>(f - f_begin)]);
            }
        });
        for (const auto& row : rows) {
            for (const auto& loc : row) {
                scatter(loc, 0, n, out);
            }
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd pair_form_symmetric(const Mesh& mesh, const PairProfile& kernel,
                                    const PairOptions& options) {
    return pair_form<true>(mesh, kernel, options);
}

Eigen::MatrixXd pair_form_nonsymmetric(const Mesh& mesh, const PairProfile& kernel,
                                       const PairOptions& options) {
    return pair_form<false>(mesh, kernel, options);
}

namespace {

// Integral of profile(x, y) over the exterior half-line on one side, after the substitution
// w = (d / (d + t))^{2s}; returns T with  int k(x,y) dy = d^{-2s} T / (2s).
double side_profile_integral(const Mesh& mesh, const PairProfile& k, double x, bool left,
                             double cutoff, double rel_tol, TailReport* report) {
    if (k.constant) {
        return *k.constant;
    }
    const double d = left ? x - mesh.x_lo : mesh.x_hi - x;
    const double two_s = 2.0 * k.s;
    auto y_of_t = [&](double t) { return left ? mesh.x_lo - t : mesh.x_hi + t; };
    auto integrand = [&](double w) {
        const double t = d * (std::pow(w, -1.0 / two_s) - 1.0);
        return k.profile(x, y_of_t(t));
    };
    const double w_cut = std::pow(d / (d + cutoff), two_s);
    double err = 0.0;
    const double body = integrate_adaptive(integrand, w_cut, 1.0, rel_tol, &err);
    const double remainder = w_cut * k.profile(x, y_of_t(cutoff));
    if (!std::isfinite(body) || !std::isfinite(remainder)) {
        throw NumericalFailure("exterior tail quadrature produced a non-finite value at x = " +
                               std::to_string(x));
    }
    if (report != nullptr) {
        report->quadrature_error += std::pow(d, -two_s) * err / two_s;
        report->cutoff_bound += std::pow(d, -two_s) * w_cut * (k.upper - k.lower) / two_s;
    }
    return body + remainder;
}

}  // namespace

double tail_density(const Mesh& mesh, const PairProfile& kernel, double x, double cutoff,
                    double rel_tol, TailReport* report) {
    const double two_s = 2.0 * kernel.s;
    const double dl = x - mesh.x_lo;
    const double dr = mesh.x_hi - x;
    const double tl = side_profile_integral(mesh, kernel, x, true, cutoff, rel_tol, report);
    const double tr = side_profile_integral(mesh, kernel, x, false, cutoff, rel_tol, report);
    return (std::pow(dl, -two_s) * tl + std::pow(dr, -two_s) * tr) / two_s;
}

Eigen::MatrixXd tail_mass(const Mesh& mesh, const PairProfile& k, TailReport* report,
                          const PairOptions& opt) {
    const int n = mesh.n;
    const int ne = mesh.num_elements();
    const double h = mesh.h();
    const double two_s = 2.0 * k.s;
    const double cutoff = opt.tail_cutoff_factor * mesh.length();
    const QuadratureRule gl = gauss_legendre01(opt.element_order);
    const QuadratureRule edge = gauss_jacobi01(8, 2.0 - two_s);

    struct ElementTail {
        std::array<std::array<double, 2>, 2> a{};
        TailReport rep;
    };
    std::vector<ElementTail> parts(static_cast<std::size_t>(ne));

    parallel_for(ne, [&](int e) {
        ElementTail& part = parts[static_cast<std::size_t>(e)];
        const double x0 = mesh.node(e);
        for (int side = 0; side < 2; ++side) {
            const bool left = side == 0;
            const bool boundary = left ? e == 0 : e == ne - 1;
            if (boundary) {
                // only the interior node of the element carries a dof; phi ~ t/h vanishes at the
                // boundary and  phi^2 tau ~ t^{2-2s}
                double acc = 0.0;
                for (std::size_t q = 0; q < edge.size(); ++q) {
                    const double sig = edge.nodes[q];
                    const double x = left ? mesh.x_lo + h * sig : mesh.x_hi - h * sig;
                    acc += edge.weights[q] *
                           side_profile_integral(mesh, k, x, left, cutoff, opt.tail_rel_tol, &part.rep);
                }
                const int loc = left ? 1 : 0;
                part.a[static_cast<std::size_t>(loc)][static_cast<std::size_t>(loc)] +=
                    std::pow(h, 1.0 - two_s) * acc / two_s;
                continue;
            }
            for (std::size_t q = 0; q < gl.size(); ++q) {
                const double xi = gl.nodes[q];
                const double x = x0 + h * xi;
                const double d = left ? x - mesh.x_lo : mesh.x_hi - x;
                const double tau = std::pow(d, -two_s) *
                                   side_profile_integral(mesh, k, x, left, cutoff, opt.tail_rel_tol,
                                                         &part.rep) /
                                   two_s;
                const std::array<double, 2> phi = {1.0 - xi, xi};
                for (std::size_t a = 0; a < 2; ++a) {
                    for (std::size_t b = 0; b < 2; ++b) {
                        part.a[a][b] += h * gl.weights[q] * phi[a] * phi[b] * tau;
                    }
                }
            }
        }
        // the error estimates above are per unit weight; scale by the element measure
        part.rep.quadrature_error *= h;
        part.rep.cutoff_bound *= h;
    });

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    TailReport total;
    for (int e = 0; e < ne; ++e) {
        const ElementTail& part = parts[static_cast<std::size_t>(e)];
        for (int a = 0; a < 2; ++a) {
            const int ra = e + a;
            if (ra < 1 || ra > n) {
                continue;
            }
            for (int b = 0; b < 2; ++b) {
                const int cb = e + b;
                if (cb < 1 || cb > n) {
                    continue;
                }
                out(ra - 1, cb - 1) += part.a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
        }
        total.quadrature_error += part.rep.quadrature_error;
        total.cutoff_bound += part.rep.cutoff_bound;
    }
    if (report != nullptr) {
        *report = total;
    }
    return out;
}

}  // namespace fracobs::detail
