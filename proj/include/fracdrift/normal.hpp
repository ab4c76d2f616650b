#pragma once

namespace fracdrift {

/// Standard normal distribution function φ(x) = erfc(-x/√2)/2.
double normal_cdf(double x);

/// Quantile u_p = φ⁻¹(p) for p in (0, 1).
///
/// Acklam's rational approximation (relative error below 1.2e-9) followed by one
/// Halley step against normal_cdf, which brings it to near machine precision.
double normal_quantile(double p);

}  // namespace fracdrift
