#include "fracobs/kernels.hpp"

#include "fracobs/errors.hpp"
#include "fracobs/quadrature.hpp"
#include "fracobs/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace fracobs {

namespace {

void require_order(double s) {
    if (!(s > 0.0 && s < 1.0)) {
        throw DomainError("fractional order s must lie in (0,1), got " + std::to_string(s));
    }
}

}  // namespace

Kernel::Kernel(std::string name, double s, Profile profile, double a_lower, double a_upper,
               bool symmetric, std::optional<double> constant_profile)
    : name_(std::move(name)),
      s_(s),
      c2_(0.0),
      profile_(std::move(profile)),
      a_lower_(a_lower),
      a_upper_(a_upper),
      symmetric_(symmetric),
      constant_(constant_profile) {
    require_order(s);
    const double c = riesz_constant(1, s);
    c2_ = c * c;
    if (!(a_lower > 0.0) || !(a_upper >= a_lower) || !std::isfinite(a_upper)) {
        throw DomainError("kernel '" + name_ + "': need 0 < a_lower <= a_upper < inf");
    }
    if (constant_) {
        const double v = *constant_;
        profile_ = [v](double, double) { return v; };
    }
    if (!profile_) {
        throw UsageError("kernel '" + name_ + "': missing profile");
    }
}

double Kernel::profile(double x, double y) const { return profile_(x, y); }

double Kernel::operator()(double x, double y) const {
    if (x == y) {
        throw DomainError("kernel evaluated on the diagonal");
    }
    return c2_ * profile_(x, y) * std::pow(std::abs(x - y), -1.0 - 2.0 * s_);
}

Kernel Kernel::scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw DomainError("kernel scale factor must be positive");
    }
    std::optional<double> c;
    if (constant_) {
        c = factor * *constant_;
    }
    Profile p = profile_;
    return Kernel(name_ + "*" + std::to_string(factor), s_,
                  [p, factor](double x, double y) { return factor * p(x, y); }, factor * a_lower_,
                  factor * a_upper_, symmetric_, c);
}

KernelCheck check_kernel(const Kernel& k, double lo, double hi, int samples, unsigned seed) {
    KernelCheck chk;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    chk.min_profile = std::numeric_limits<double>::infinity();
    chk.max_profile = -std::numeric_limits<double>::infinity();
    int done = 0;
    while (done < samples) {
        const double x = dist(rng);
        const double y = dist(rng);
        if (x == y) {
            continue;
        }
        ++done;
        const double a = k(x, y);
        const double b = a * std::pow(std::abs(x - y), 1.0 + 2.0 * k.s()) / k.c_squared();
        chk.min_profile = std::min(chk.min_profile, b);
        chk.max_profile = std::max(chk.max_profile, b);
        if (b < k.a_lower() * (1.0 - 1e-12) || b > k.a_upper() * (1.0 + 1e-12)) {
            chk.band_ok = false;
        }
        if (k.symmetric()) {
            const double asym = std::abs(a - k(y, x)) / a;
            chk.max_asymmetry = std::max(chk.max_asymmetry, asym);
            if (asym > 1e-12) {
                chk.symmetry_ok = false;
            }
        }
    }
    chk.samples = done;
    return chk;
}

Kernel fractional_laplacian_kernel(double s) {
    return Kernel("fractional_laplacian", s, nullptr, 1.0, 1.0, true, 1.0);
}

Kernel constant_kernel(double s, double value, std::string name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError("constant kernel: value must be positive");
    }
    return Kernel(std::move(name), s, nullptr, value, value, true, value);
}

Kernel ds_energy_kernel(double s) {
    const double k = ds_energy_profile(s);
    return Kernel("ds_energy", s, nullptr, k, k, true, k);
}

Kernel perturbed_kernel(double s, Kernel::Profile b, bool symmetric, std::string name,
                        std::optional<std::pair<double, double>> band) {
    require_order(s);
    if (!b) {
        throw UsageError("perturbed kernel: missing profile");
    }
    std::mt19937_64 rng(977u);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool sym_ok = true;
    for (int k = 0; k < 10000; ++k) {
        const double x = dist(rng);
        const double y = dist(rng);
        const double v = b(x, y);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError("perturbed kernel '" + name + "': nonpositive or non-finite sample b(" +
                              std::to_string(x) + ", " + std::to_string(y) + ") = " + std::to_string(v));
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (std::abs(v - b(y, x)) > 1e-12 * v) {
            sym_ok = false;
        }
    }
    if (symmetric && !sym_ok) {
        throw UsageError("perturbed kernel '" + name + "' flagged symmetric but b(x,y) != b(y,x)");
    }
    if (band) {
        if (lo < band->first * (1.0 - 1e-12) || hi > band->second * (1.0 + 1e-12)) {
            throw DomainError("perturbed kernel '" + name + "': samples leave the declared band");
        }
        lo = band->first;
        hi = band->second;
    }
    return Kernel(std::move(name), s, std::move(b), lo, hi, symmetric && sym_ok);
}

void CoefficientField::validate(double lo, double hi, int samples) const {
    if (!alpha) {
        throw UsageError("coefficient field without a function");
    }
    const double sup = sampled_sup(lo, hi, samples);
    if (!std::isfinite(sup) || sup > 1e6) {
        throw DomainError("coefficient field '" + description + "' exceeds 1e6 or is not finite");
    }
}

double CoefficientField::sampled_sup(double lo, double hi, int samples) const {
    double sup = 0.0;
    const int m = std::max(samples, 2);
    for (int k = 0; k < m; ++k) {
        const double z = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
        const double v = std::abs(alpha(z));
        if (!std::isfinite(v)) {
            return std::numeric_limits<double>::infinity();
        }
        sup = std::max(sup, v);
    }
    return sup;
}

CoefficientField CoefficientField::constant_field(double value) {
    CoefficientField f;
    f.alpha = [value](double) { return value; };
    f.description = "constant " + std::to_string(value);
    f.sup_bound = std::abs(value);
    return f;
}

namespace {

double smooth_step(double t) {
    // 0 for t <= 0, 1 for t >= 1
    if (t <= 0.0) {
        return 0.0;
    }
    if (t >= 1.0) {
        return 1.0;
    }
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace

double smooth_bump(double z) { return smooth_step((z - 0.9) / 0.1) * smooth_step((1.6 - z) / 0.1); }

CoefficientField CoefficientField::counterexample() {
    CoefficientField f;
    f.alpha = [](double z) { return 0.01 + 50.0 * smooth_bump(z); };
    f.description = "0.01 + 50 H(z)";
    f.sup_bound = 50.01;
    return f;
}

double kappa_integrand(double x, double y, double z, double s) {
    if (z == x || z == y) {
        throw DomainError("kappa integrand evaluated at a singular point");
    }
    const double a = (y - z) / std::pow(std::abs(y - z), 2.0 + s);
    const double b = (z - x) / std::pow(std::abs(z - x), 2.0 + s);
    return a * b;
}

namespace {

struct PVResult {
    double value = 0.0;
    double error = 0.0;
    double tail_bound = 0.0;
};

// PV int F with F = A kappa.
PVResult pv_integral(const std::function<double(double)>& A, double sup_a, double x, double y,
                     double s, const KAOptions& opt) {
    require_order(s);
    if (x == y) {
        throw DomainError("k_A requires x != y");
    }
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    const double m = std::max(std::abs(x), std::abs(y));
    const double z_max = std::max(opt.z_max, 10.0 * m);
    const double r0 = 0.5 * (hi - lo);

    // Integrands are written in offsets from x or y so that the differences z - x and y - z
    // stay exact when x and y are close.
    const double d = y - x;
    auto kap = [s](double zx, double yz) {
        return (yz / std::pow(std::abs(yz), 2.0 + s)) * (zx / std::pow(std::abs(zx), 2.0 + s));
    };
    auto fx = [&](double u) { return A(x + u) * kap(u, d - u); };
    auto fy = [&](double v) { return A(y + v) * kap(d + v, -v); };
    static thread_local double cached_s = -1.0;
    static thread_local QuadratureRule gj;
    if (cached_s != s) {
        gj = gauss_jacobi01(20, -s);
        cached_s = s;
    }
    // int_0^r [f(u) + f(-u)] du; the bracket behaves like u^{-s} times an even smooth function
    auto paired = [&](const std::function<double(double)>& f, double r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < gj.size(); ++k) {
            const double t = gj.nodes[k];
            const double u = r * t;
            acc += gj.weights[k] * std::pow(t, s) * (f(u) + f(-u));
        }
        return r * acc;
    };
    const std::function<double(double)> gx = fx;
    const std::function<double(double)> gy = fy;
    double err_total = 0.0;
    auto gk = [&](const std::function<double(double)>& f, double a, double b) {
        if (!(b > a)) {
            return 0.0;
        }
        double e = 0.0;
        const double v = integrate_adaptive(f, a, b, 1e-11, &e, 12);
        err_total += e;
        return v;
    };
    const std::function<double(double)>& f_lo = x < y ? gx : gy;
    const std::function<double(double)>& f_hi = x < y ? gy : gx;
    // outside the two pairing windows, in offsets from the nearer singular point
    double rest = 0.0;
    {
        double a = -r0;
        double step = r0;
        while (lo + a > -z_max) {
            const double b = std::max(a - step, -z_max - lo);
            rest += gk(f_lo, b, a);
            a = b;
            step *= 2.0;
        }
        a = r0;
        step = r0;
        while (hi + a < z_max) {
            const double b = std::min(a + step, z_max - hi);
            rest += gk(f_hi, a, b);
            a = b;
            step *= 2.0;
        }
    }
    double r = r0;
    double annuli = 0.0;
    double prev = paired(gx, r) + paired(gy, r) + rest;
    double prev_diff = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int k = 1; k <= opt.max_refinements; ++k) {
        const double rn = 0.5 * r;
        annuli += gk(gx, -r, -rn) + gk(gx, rn, r) + gk(gy, -r, -rn) + gk(gy, rn, r);
        const double cur = paired(gx, rn) + paired(gy, rn) + annuli + rest;
        const double diff = std::abs(cur - prev);
        if (!std::isfinite(cur)) {
            throw NumericalFailure("k_A principal value is not finite");
        }
        const double tol = opt.rel_tol * std::abs(cur) + 1e-13 * (1.0 + std::abs(rest));
        if (diff <= tol) {
            const double tail = sup_a * 2.0 * std::pow(z_max - m, -1.0 - 2.0 * s) / (1.0 + 2.0 * s);
            return {cur, diff + err_total + tail, tail};
        }
        stalls = diff >= prev_diff ? stalls + 1 : 0;
        if (stalls >= 2) {
            throw NumericalFailure("k_A principal-value pairing does not converge at (" +
                                   std::to_string(x) + ", " + std::to_string(y) + ")");
        }
        prev_diff = diff;
        prev = cur;
        r = rn;
    }
    throw NumericalFailure("k_A principal-value pairing did not reach tolerance at (" +
                           std::to_string(x) + ", " + std::to_string(y) + ")");
}

}  // namespace

KAEvaluation ka_evaluate(const CoefficientField& A, double x, double y, double s,
                         const KAOptions& options) {
    require_order(s);
    if (x == y) {
        throw DomainError("ka_evaluate requires x != y");
    }
    if (!A.alpha) {
        throw UsageError("coefficient field without a function");
    }
    const double m = std::max(std::abs(x), std::abs(y));
    const double z_max = std::max(options.z_max, 10.0 * m);
    const double sup_a = A.sup_bound ? *A.sup_bound : A.sampled_sup(-10.0 * z_max, 10.0 * z_max);
    const PVResult pv = pv_integral(A.alpha, sup_a, x, y, s, options);
    const double c = riesz_constant(1, s);
    KAEvaluation out;
    out.x = x;
    out.y = y;
    out.value = c * c * pv.value;
    out.est_abs_error = c * c * pv.error;
    return out;
}

double kappa_pv_integral(double x, double y, double s, double* est_abs_error) {
    const KAOptions opt;
    const PVResult pv = pv_integral([](double) { return 1.0; }, 1.0, x, y, s, opt);
    // with A = 1 the tails beyond z_max are integrated instead of bounded
    const double z_max = std::max(opt.z_max, 10.0 * std::max(std::abs(x), std::abs(y)));
    auto k = [&](double z) { return kappa_integrand(x, y, z, s); };
    double e1 = 0.0;
    double e2 = 0.0;
    const double tails = integrate_adaptive(k, z_max, std::numeric_limits<double>::infinity(), 1e-12, &e1) +
                         integrate_adaptive(k, -std::numeric_limits<double>::infinity(), -z_max, 1e-12, &e2);
    if (est_abs_error != nullptr) {
        *est_abs_error = pv.error - pv.tail_bound + std::abs(e1) + std::abs(e2);
    }
    return pv.value + tails;
}

BandScanReport ka_band_scan(const CoefficientField& A, double s,
                            const std::vector<std::pair<double, double>>& pairs,
                            const KAOptions& options) {
    BandScanReport rep;
    rep.min_normalized = std::numeric_limits<double>::infinity();
    rep.max_normalized = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pairs) {
        BandScanEntry e;
        e.x = x;
        e.y = y;
        try {
            const KAEvaluation v = ka_evaluate(A, x, y, s, options);
            e.value = v.value;
            e.est_abs_error = v.est_abs_error;
            e.normalized = v.value * std::pow(std::abs(x - y), 1.0 + 2.0 * s);
            e.evaluated = true;
            e.positive = e.value > 0.0;
            rep.min_normalized = std::min(rep.min_normalized, e.normalized);
            rep.max_normalized = std::max(rep.max_normalized, e.normalized);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        if (!e.positive) {
            ++rep.violations;
        }
        rep.entries.push_back(e);
    }
    if (rep.entries.empty() || rep.min_normalized > rep.max_normalized) {
        rep.min_normalized = 0.0;
        rep.max_normalized = 0.0;
    }
    return rep;
}

Kernel ka_kernel(const CoefficientField& A, double s,
                 const std::vector<std::pair<double, double>>& band_pairs,
                 const KAOptions& options) {
    require_order(s);
    const BandScanReport scan = ka_band_scan(A, s, band_pairs, options);
    if (scan.entries.empty()) {
        throw UsageError("ka_kernel needs at least one pair to estimate its band");
    }
    if (scan.violations > 0) {
        throw DomainError("k_A kernel is not positive on the scanned pairs (" +
                          std::to_string(scan.violations) + " violations)");
    }
    const double c = riesz_constant(1, s);
    const double c2 = c * c;
    const double sup_a = A.sup_bound ? *A.sup_bound
                                     : A.sampled_sup(-10.0 * options.z_max, 10.0 * options.z_max);
    const double s_copy = s;
    auto alpha = A.alpha;
    Kernel::Profile profile = [alpha, sup_a, s_copy, options](double x, double y) {
        return pv_integral(alpha, sup_a, x, y, s_copy, options).value *
               std::pow(std::abs(x - y), 1.0 + 2.0 * s_copy);
    };
    return Kernel("k_A[" + A.description + "]", s, std::move(profile), scan.min_normalized / c2,
                  scan.max_normalized / c2, true);
}

}  // namespace fracobs
