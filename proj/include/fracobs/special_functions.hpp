#pragma once

namespace fracobs {

/// Gamma function via the Lanczos approximation (g = 7, 9 coefficients),
/// with the reflection formula for x < 1/2. Throws DomainError at the poles.
double lanczos_gamma(double x);

/// Normalisation constant of the Riesz s-gradient,
///   c_{d,s} = 2^s pi^{-d/2} Gamma((d+s+1)/2) / Gamma((1-s)/2).
double riesz_constant(int d, double s);

/// Constant of the singular-integral representation of (-Delta)^s in one dimension,
///   C_{1,s} = 4^s Gamma(1/2 + s) / (sqrt(pi) |Gamma(-s)|),
/// so that  int D^s u D^s v = (C_{1,s}/2) [u, v]_s.
double fractional_laplacian_constant(double s);

/// Ratio C_{1,s} / c_{1,s}^2: the profile of the D^s-energy kernel measured in the
/// c_{1,s}^2 |x-y|^{-1-2s} units used by every Kernel.
double ds_energy_profile(double s);

}  // namespace fracobs
