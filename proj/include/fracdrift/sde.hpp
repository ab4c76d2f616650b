#pragma once

#include "fracdrift/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracdrift {

using ScalarFn = std::function<double(double)>;

/// Drift b together with b', an antiderivative 𝚋 (𝚋' = b) and the bounds the
/// estimators need: M = sup b', ‖b'‖_∞, and optionally 𝔟 with b² ≥ 𝔟.
struct DriftModel {
  std::string name;
  ScalarFn b;
  ScalarFn b_prime;
  ScalarFn antiderivative;
  double sup_b_prime = 0.0;
  double sup_norm_b_prime = 0.0;
  std::optional<double> square_lower_bound;

  /// b(x) = π - arctan(x), 𝔟 = π²/4, ‖b'‖_∞ = 1, M = 0.
  static DriftModel model1();
  /// Ornstein-Uhlenbeck drift b(x) = -x.
  static DriftModel model2();
  /// b(x) = c0 + c1 x.
  static DriftModel affine(double c0, double c1);
  static DriftModel constant(double c) { return affine(c, 0.0); }
  /// "model1", "model2" or "custom:c0[,c1]" (polynomial coefficients, lowest degree first).
  static DriftModel from_id(const std::string& id);
};

/// Finite-difference consistency of b, b', 𝚋 and the declared bounds on `probes`.
/// Throws ValidationError naming the first failed check.
void validate_drift(const DriftModel& drift, std::span<const double> probes);

/// State-dependent volatility σ(·) for the H = 1/2 model, with μ ≤ |σ| ≤ ‖σ‖_∞.
struct VolModel {
  ScalarFn sigma;
  ScalarFn sigma_prime;
  double lower = 0.0;
  double upper = 0.0;

  static VolModel constant(double c);
  /// σ(x) = clamp(x, lower, upper) with 0 < lower < upper.
  static VolModel clamped_identity(double lower, double upper);
};

void validate_vol(const VolModel& vol, std::span<const double> probes);

struct SdeSpec {
  double x0 = 0.0;
  double theta0 = 0.0;
  double sigma = 1.0;
  DriftModel drift;
  HurstParams hurst{0.5};
  Grid grid{1.0, 1};

  void validate() const {
    if (sigma == 0.0 || !std::isfinite(sigma)) throw ValidationError("sigma must be nonzero and finite");
    if (!std::isfinite(x0)) throw ValidationError("x0 must be finite");
    if (!std::isfinite(theta0)) throw ValidationError("theta0 must be finite");
  }
};

/// X_{j+1} = X_j + θ₀ b(X_j) Δ + σ (B_{j+1} - B_j), X_0 = x₀.
PathBundle euler_additive(const SdeSpec& spec, const PathBundle& noise);

/// X_{j+1} = X_j + θ₀ b(X_j) Δ + σ(X_j) ΔB_j; Brownian noise only.
PathBundle euler_multiplicative(const SdeSpec& spec, const VolModel& vol, const PathBundle& noise);

struct RegenerationCopies {
  PathBundle copies;             ///< one row per segment, on the grid [0, T] with T / mesh steps
  std::vector<int> start_nodes;  ///< node index of each segment start in the long path
  int count() const { return copies.size(); }
};

/// Splits one long trajectory into segments of length `copy_horizon` starting at
/// successive returns to x₀: τ₁ = 0, τ_i = first node t_j > τ_{i-1} + T with
/// (X_{t_j} - x₀)(X_{t_{j-1}} - x₀) ≤ 0.
///
/// Recurrence of the process is the caller's responsibility; fewer than
/// `max_copies` segments is a normal outcome.
RegenerationCopies extract_regeneration_copies(const PathBundle& long_path, double x0,
                                               double copy_horizon, int max_copies);

}  // namespace fracdrift
