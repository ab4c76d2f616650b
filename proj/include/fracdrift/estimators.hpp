#pragma once

#include "fracdrift/sde.hpp"
#include "fracdrift/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>

namespace fracdrift {

// All time integrals below are left-point Riemann sums on the bundle's grid.
// The singular kernel |t - s|^{2H-2} is only evaluated at distinct nodes.

/// D_N = (1/NT) Σ_i Σ_{j<ν} b(X^i_{t_j})² Δ.
double compute_DN(const PathBundle& paths, const DriftModel& drift);

/// I_N = (1/(N T D_N)) Σ_i (𝚋(X^i_T) - 𝚋(X^i_0)). Throws DegenerateStatistics if D_N = 0.
double compute_IN(const PathBundle& paths, const DriftModel& drift, double d_n);

/// C_i(t_j) = Σ_{l<j} b'(X^i_{t_l}) Δ, one row per path.
RowMatrix cumulative_b_prime(const PathBundle& paths, const DriftModel& drift);

struct SufficientStats {
  double d_n = 0.0;
  double i_n = 0.0;
  double m_n = 1.0;  ///< exp(‖b'‖_∞ |I_N| T)
  RowMatrix cumulative;
};

SufficientStats sufficient_stats(const PathBundle& paths, const DriftModel& drift);

/// Φ_N(r) = -(α_H σ²/(N T D_N)) Σ_i Σ_{j=1..ν} Σ_{l<j} b'(X^i_{t_j})
///          · exp((r + I_N)(C_i(t_j) - C_i(t_l))) · (t_j - t_l)^{2H-2} Δ².
///
/// Pair weights and exponent bases are cached at construction, so each
/// evaluation is a single exp-and-sum pass over N ν(ν+1)/2 terms.
class PhiMap {
public:
  PhiMap(const SufficientStats& stats, const PathBundle& paths, const DriftModel& drift,
         const HurstParams& hurst, double sigma);

  double operator()(double r) const;

private:
  Eigen::ArrayXd weights_;
  Eigen::ArrayXd exponents_;
  double shift_;
  double scale_;
};

double phi_map(double r, const SufficientStats& stats, const PathBundle& paths,
               const DriftModel& drift, const HurstParams& hurst, double sigma);

/// Ω_N: T^{2H} M_N / D_N ≤ 𝔠 / (ᾱ_H σ² ‖b'‖²_∞). True when ‖b'‖_∞ = 0 (Φ_N ≡ 0).
bool check_omega(const SufficientStats& stats, const HurstParams& hurst, double sigma,
                 double sup_norm_b_prime, double horizon, double contraction);

struct FixedPointResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< |phi(value) - value|
};

/// Picard iteration R_0 = 0, R_{n+1} = phi(R_n), stopping after `max_iters`
/// steps or as soon as |phi(R_n) - R_n| ≤ tol.
template <typename Map>
FixedPointResult fixed_point(Map&& phi, int max_iters, double tol) {
  if (max_iters < 1) throw ValidationError("fixed_point: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw ValidationError("fixed_point: tol must be >= 0");
  FixedPointResult result;
  double current = 0.0;
  double next = phi(current);
  for (int k = 1; k <= max_iters; ++k) {
    current = next;
    next = phi(current);
    if (!std::isfinite(current) || !std::isfinite(next))
      throw DivergenceError("fixed-point iteration produced a non-finite iterate");
    result.value = current;
    result.iterations = k;
    result.residual = std::abs(next - current);
    if (result.residual <= tol) break;
  }
  return result;
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;

  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

/// Ȳ_N for H > 1/2:
/// (σ²/(N T²)) Σ_i [α_H Σ_{s≠t} |b(X_s)||b(X_t)||t-s|^{2H-2}Δ²
///                  + α_H² σ² Σ_{u,v} Σ_{u'<u} Σ_{v'<v} |u-u'|^{2H-2}|v-v'|^{2H-2} b'(X_v)b'(X_u)Δ⁴].
/// The quadruple sum separates into the square of a double sum and is computed that way.
double ybar_fbm(const PathBundle& paths, const DriftModel& drift, const HurstParams& hurst,
                double sigma);

/// θ ± 2 Ȳ_N^{1/2} u_{1-α/4} / (√N D_N).
Interval aci_fbm(const PathBundle& paths, const DriftModel& drift, const HurstParams& hurst,
                 double sigma, const SufficientStats& stats, double theta_center, double alpha);

struct FbmOptions {
  double contraction = 0.5;  ///< 𝔠
  double threshold = 0.0;    ///< 𝔡
  std::optional<double> alpha = 0.05;
  bool enforce_omega = false;
  int max_iters = 0;  ///< 0 selects iteration_schedule
  double tol = 1e-12;

  bool operator==(const FbmOptions&) const = default;
};

struct EstimateFBM {
  double theta_tilde = 0.0;
  double r_n = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool omega_holds = false;
  double contraction = 0.5;
  double threshold = 0.0;
  double theta_tilde_c = 0.0;   ///< θ̃ 1_{Ω_N}
  double theta_tilde_cd = 0.0;  ///< θ̃ 1_{{D_N ≥ 𝔡} ∩ Ω_N}
  double d_n = 0.0;
  double i_n = 0.0;
  double m_n = 1.0;
  std::optional<Interval> aci;
  std::optional<double> ybar;
};

/// θ̃_N = I_N + R_N with R_N the fixed point of Φ_N, plus its truncations and ACI.
///
/// With enforce_omega = false the iteration always runs and Ω_N is only
/// reported; with enforce_omega = true, θ̃_N = 0 whenever Ω_N fails. D_N = 0 is
/// an error unless 𝔡 > 0, in which case θ̃ is NaN and both truncations are 0.
EstimateFBM estimate_fbm(const PathBundle& paths, const DriftModel& drift,
                         const HurstParams& hurst, double sigma, const FbmOptions& options = {});

struct EstimateBM {
  double d_nn = 0.0;
  double v_nn = 0.0;
  double theta_hat = 0.0;
  double theta_hat_d = 0.0;
  double ybar = 0.0;
  std::optional<Interval> aci;
};

/// Discrete least squares for H = 1/2: θ̂ = V_{N,n}/D_{N,n} with
/// V_{N,n} = (1/NT) Σ_i Σ_j b(X_{t_j})(X_{t_{j+1}} - X_{t_j}),
/// Ȳ_N = (1/(N T²)) Σ_i Σ_j b(X_{t_j})² σ(X_{t_j})² Δ and ACI θ̂ ± Ȳ^{1/2} u_{1-α/2}/(√N D).
EstimateBM estimate_bm(const PathBundle& paths, const DriftModel& drift, const VolModel& vol,
                       double threshold, std::optional<double> alpha);

/// 𝔡_max = 𝔟/2 from a lower bound b² ≥ 𝔟 > 0.
double dmax_from_lower_bound(double frak_b);

struct ThresholdValue {
  double value = 0.0;
  bool degenerate = false;  ///< true when x₀ = 0 makes the bound vanish
};

/// 𝔡_max = (x₀²/2) e^{-2 θ_max T_max} for Ornstein-Uhlenbeck drift.
ThresholdValue dmax_ou(double x0, double theta_max, double horizon_max);

/// Iteration count max(30, ⌈-log(𝔪√N)/log 𝔠⌉) with 𝔪 = 𝔠(1-𝔠)⁻¹/(2T ᾱ_H ‖b'‖_∞).
int iteration_schedule(int n, double contraction, double horizon, double sup_norm_b_prime,
                       const HurstParams& hurst);

/// Upper bound on the horizon T under which the consistency condition holds
/// given ‖b‖_f ≥ ℓ and θ₀ ≤ θ_max. +inf when ‖b'‖_∞ = 0.
double max_horizon(double ell, double theta_max, double horizon_max, const HurstParams& hurst,
                   double sigma, const DriftModel& drift, double x0, double contraction);

}  // namespace fracdrift
