#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracobs {

/// Two-point kernel a(x,y) = c_{1,s}^2 * b(x,y) * |x-y|^{-1-2s}.
/// b is the profile; the ellipticity band a_* <= b <= a^* is stored with it.
class Kernel {
public:
    using Profile = std::function<double(double, double)>;

    Kernel(std::string name, double s, Profile profile, double a_lower, double a_upper,
           bool symmetric, std::optional<double> constant_profile = std::nullopt);

    /// a(x, y); throws DomainError for x == y.
    double operator()(double x, double y) const;
    /// a(x, y) |x-y|^{1+2s} / c^2.
    double profile(double x, double y) const;

    const std::string& name() const { return name_; }
    double s() const { return s_; }
    double c_squared() const { return c2_; }
    double a_lower() const { return a_lower_; }
    double a_upper() const { return a_upper_; }
    bool symmetric() const { return symmetric_; }
    const std::optional<double>& constant_profile() const { return constant_; }
    const Profile& profile_fn() const { return profile_; }

    /// The same kernel multiplied by factor > 0.
    Kernel scaled(double factor) const;

private:
    std::string name_;
    double s_;
    double c2_;
    Profile profile_;
    double a_lower_;
    double a_upper_;
    bool symmetric_;
    std::optional<double> constant_;
};

struct KernelCheck {
    int samples = 0;
    double min_profile = 0.0;
    double max_profile = 0.0;
    double max_asymmetry = 0.0;  // max |a(x,y) - a(y,x)| / a(x,y)
    bool band_ok = true;
    bool symmetry_ok = true;

    bool ok() const { return band_ok && symmetry_ok; }
};

/// Samples random pairs in [lo, hi]^2 and checks the band and, if flagged, the symmetry.
KernelCheck check_kernel(const Kernel& k, double lo = -2.0, double hi = 2.0, int samples = 10000,
                         unsigned seed = 20240611u);

/// a(x,y) = c^2 |x-y|^{-1-2s}, a_* = a^* = 1.
Kernel fractional_laplacian_kernel(double s);

/// a(x,y) = c^2 * value * |x-y|^{-1-2s}.
Kernel constant_kernel(double s, double value, std::string name = "constant");

/// a(x,y) = C_{1,s} |x-y|^{-1-2s}: its form is int D^s u D^s v.
Kernel ds_energy_kernel(double s);

/// a(x,y) = c^2 b(x,y) |x-y|^{-1-2s}. The band is taken from `band` when given, otherwise from
/// 10^4 samples in [-2,2]^2. Throws DomainError on a nonpositive sample and UsageError when
/// `symmetric` is claimed but the samples are not symmetric.
Kernel perturbed_kernel(double s, Kernel::Profile b, bool symmetric, std::string name = "perturbed",
                        std::optional<std::pair<double, double>> band = std::nullopt);

/// Scalar coefficient field A(z) (the d = 1 case of a matrix field).
struct CoefficientField {
    std::function<double(double)> alpha;
    std::string description;

    double operator()(double z) const { return alpha(z); }
    /// Throws DomainError if |alpha| > 1e6 or non-finite on a sample grid of [lo, hi].
    void validate(double lo = -50.0, double hi = 50.0, int samples = 20001) const;
    /// max |alpha| on the same grid.
    double sampled_sup(double lo, double hi, int samples = 20001) const;
    /// Known bound on sup |alpha|; when empty the PV integrator samples one.
    std::optional<double> sup_bound;

    static CoefficientField constant_field(double value);
    /// 0.01 + 50 H(z) with the smooth bump H below.
    static CoefficientField counterexample();
};

/// C-infinity bump: 1 on [1, 1.5], 0 outside (0.9, 1.6), monotone transitions.
double smooth_bump(double z);

/// ((y-z)/|y-z|^{2+s}) ((z-x)/|z-x|^{2+s}); DomainError when z equals x or y.
double kappa_integrand(double x, double y, double z, double s);

struct KAEvaluation {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    double est_abs_error = 0.0;
};

struct KAOptions {
    double z_max = 1e3;      // raised to 10 max(|x|,|y|) when smaller
    double rel_tol = 1e-9;   // target for the pairing refinement
    int max_refinements = 10;
};

/// k_A(x,y) = c^2 PV int A(z) kappa(x,y,z) dz.
KAEvaluation ka_evaluate(const CoefficientField& A, double x, double y, double s,
                         const KAOptions& options = {});

/// PV int kappa(x,y,z) dz (A = 1, without the c^2 factor).
double kappa_pv_integral(double x, double y, double s, double* est_abs_error = nullptr);

struct BandScanEntry {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    double normalized = 0.0;  // value |x-y|^{1+2s}
    double est_abs_error = 0.0;
    bool evaluated = false;
    bool positive = false;
    std::string error;
};

struct BandScanReport {
    std::vector<BandScanEntry> entries;
    double min_normalized = 0.0;
    double max_normalized = 0.0;
    int violations = 0;  // nonpositive or failed entries
};

BandScanReport ka_band_scan(const CoefficientField& A, double s,
                            const std::vector<std::pair<double, double>>& pairs,
                            const KAOptions& options = {});

/// Kernel whose values come from ka_evaluate. The band is estimated from a scan over
/// `band_pairs`; DomainError if any scanned value is nonpositive.
Kernel ka_kernel(const CoefficientField& A, double s,
                 const std::vector<std::pair<double, double>>& band_pairs,
                 const KAOptions& options = {});

}  // namespace fracobs
