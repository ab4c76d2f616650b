#include "fracdrift/estimators.hpp"

#include "fracdrift/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracdrift {

namespace {

/// (kΔ)^{2H-2} for lags k = 0..ν; entry 0 is unused.
Eigen::ArrayXd lag_kernel(const Grid& grid, const HurstParams& hurst) {
  Eigen::ArrayXd kernel = Eigen::ArrayXd::Zero(grid.steps() + 1);
  const double exponent = 2.0 * hurst.value() - 2.0;
  for (int k = 1; k <= grid.steps(); ++k) kernel(k) = std::pow(k * grid.mesh(), exponent);
  return kernel;
}

void require_solution(const PathBundle& paths) {
  if (paths.kind != BundleKind::solution) throw ValidationError("estimators need a solution bundle");
  if (paths.size() < 1) throw ValidationError("estimators need at least one path");
}

void require_fractional(const HurstParams& hurst) {
  if (!(hurst.value() > 0.5)) throw ValidationError("this estimator requires H > 1/2");
}

Interval fbm_interval(double ybar, int n, double d_n, double center, double alpha) {
  const double half = 2.0 * std::sqrt(ybar) * normal_quantile(1.0 - alpha / 4.0) /
                      (std::sqrt(static_cast<double>(n)) * d_n);
  return Interval{center - half, center + half, alpha};
}

}  // namespace

double compute_DN(const PathBundle& paths, const DriftModel& drift) {
  require_solution(paths);
  const int steps = paths.grid.steps();
  double total = 0.0;
  for (int i = 0; i < paths.size(); ++i)
    for (int j = 0; j < steps; ++j) {
      const double b = drift.b(paths.values(i, j));
      total += b * b;
    }
  return total * paths.grid.mesh() / (paths.size() * paths.grid.horizon());
}

double compute_IN(const PathBundle& paths, const DriftModel& drift, double d_n) {
  require_solution(paths);
  if (!(d_n > 0.0)) throw DegenerateStatistics("D_N = 0: the drift vanishes along every path");
  const int last = paths.grid.steps();
  double total = 0.0;
  for (int i = 0; i < paths.size(); ++i)
    total += drift.antiderivative(paths.values(i, last)) - drift.antiderivative(paths.values(i, 0));
  return total / (paths.size() * paths.grid.horizon() * d_n);
}

RowMatrix cumulative_b_prime(const PathBundle& paths, const DriftModel& drift) {
  const int steps = paths.grid.steps();
  const double dt = paths.grid.mesh();
  RowMatrix c(paths.size(), steps + 1);
  for (int i = 0; i < paths.size(); ++i) {
    c(i, 0) = 0.0;
    for (int j = 0; j < steps; ++j) c(i, j + 1) = c(i, j) + drift.b_prime(paths.values(i, j)) * dt;
  }
  return c;
}

SufficientStats sufficient_stats(const PathBundle& paths, const DriftModel& drift) {
  SufficientStats stats;
  stats.d_n = compute_DN(paths, drift);
  stats.i_n = compute_IN(paths, drift, stats.d_n);
  stats.m_n = std::exp(drift.sup_norm_b_prime * std::abs(stats.i_n) * paths.grid.horizon());
  stats.cumulative = cumulative_b_prime(paths, drift);
  return stats;
}

PhiMap::PhiMap(const SufficientStats& stats, const PathBundle& paths, const DriftModel& drift,
               const HurstParams& hurst, double sigma) {
  require_solution(paths);
  require_fractional(hurst);
  if (!(stats.d_n > 0.0)) throw DegenerateStatistics("D_N = 0: Phi_N is undefined");
  if (stats.cumulative.rows() != paths.size() || stats.cumulative.cols() != paths.grid.steps() + 1)
    throw ValidationError("PhiMap: statistics do not match the bundle");

  const int steps = paths.grid.steps();
  const double dt = paths.grid.mesh();
  const Eigen::ArrayXd kernel = lag_kernel(paths.grid, hurst);
  const Eigen::Index pairs = static_cast<Eigen::Index>(paths.size()) * steps * (steps + 1) / 2;
  weights_.resize(pairs);
  exponents_.resize(pairs);
  Eigen::Index k = 0;
  for (int i = 0; i < paths.size(); ++i)
    for (int j = 1; j <= steps; ++j) {
      const double slope = drift.b_prime(paths.values(i, j)) * dt * dt;
      for (int l = 0; l < j; ++l, ++k) {
        weights_(k) = slope * kernel(j - l);
        exponents_(k) = stats.cumulative(i, j) - stats.cumulative(i, l);
      }
    }
  shift_ = stats.i_n;
  scale_ = -hurst.alpha() * sigma * sigma / (paths.size() * paths.grid.horizon() * stats.d_n);
}

double PhiMap::operator()(double r) const {
  return scale_ * (weights_ * ((r + shift_) * exponents_).exp()).sum();
}

double phi_map(double r, const SufficientStats& stats, const PathBundle& paths,
               const DriftModel& drift, const HurstParams& hurst, double sigma) {
  return PhiMap(stats, paths, drift, hurst, sigma)(r);
}

bool check_omega(const SufficientStats& stats, const HurstParams& hurst, double sigma,
                 double sup_norm_b_prime, double horizon, double contraction) {
  if (!(contraction > 0.0 && contraction < 1.0))
    throw ValidationError("contraction constant must lie in (0, 1)");
  if (sup_norm_b_prime == 0.0) return true;
  if (!(stats.d_n > 0.0)) return false;
  const double lhs = std::pow(horizon, 2.0 * hurst.value()) * stats.m_n / stats.d_n;
  const double rhs =
      contraction / (hurst.alpha_bar() * sigma * sigma * sup_norm_b_prime * sup_norm_b_prime);
  return lhs <= rhs;
}

double ybar_fbm(const PathBundle& paths, const DriftModel& drift, const HurstParams& hurst,
                double sigma) {
  require_solution(paths);
  require_fractional(hurst);
  const int steps = paths.grid.steps();
  const double dt = paths.grid.mesh();
  const double horizon = paths.grid.horizon();
  const double alpha = hurst.alpha();
  const Eigen::ArrayXd kernel = lag_kernel(paths.grid, hurst);

  // inner(j) = Σ_{l<j} (t_j - t_l)^{2H-2}
  Eigen::ArrayXd inner = Eigen::ArrayXd::Zero(steps + 1);
  for (int j = 1; j <= steps; ++j) inner(j) = inner(j - 1) + kernel(j);

  Eigen::ArrayXd abs_b(steps);
  double total = 0.0;
  for (int i = 0; i < paths.size(); ++i) {
    for (int j = 0; j < steps; ++j) abs_b(j) = std::abs(drift.b(paths.values(i, j)));
    double pair_sum = 0.0;
    for (int t = 1; t < steps; ++t)
      for (int s = 0; s < t; ++s) pair_sum += abs_b(s) * abs_b(t) * kernel(t - s);
    const double double_term = 2.0 * pair_sum * dt * dt;

    double factor = 0.0;
    for (int j = 1; j <= steps; ++j) factor += drift.b_prime(paths.values(i, j)) * inner(j);
    factor *= dt * dt;
    const double quadruple_term = factor * factor;

    total += alpha * double_term + alpha * alpha * sigma * sigma * quadruple_term;
  }
  const double ybar = sigma * sigma * total / (paths.size() * horizon * horizon);
  if (!(ybar >= 0.0) || !std::isfinite(ybar))
    throw DegenerateStatistics("Ybar_N is negative or non-finite");
  return ybar;
}

Interval aci_fbm(const PathBundle& paths, const DriftModel& drift, const HurstParams& hurst,
                 double sigma, const SufficientStats& stats, double theta_center, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(stats.d_n > 0.0)) throw DegenerateStatistics("D_N = 0: no confidence interval");
  return fbm_interval(ybar_fbm(paths, drift, hurst, sigma), paths.size(), stats.d_n, theta_center, alpha);
}

EstimateFBM estimate_fbm(const PathBundle& paths, const DriftModel& drift,
                         const HurstParams& hurst, double sigma, const FbmOptions& options) {
  require_solution(paths);
  require_fractional(hurst);
  if (sigma == 0.0 || !std::isfinite(sigma)) throw ValidationError("sigma must be nonzero");
  if (!(options.threshold >= 0.0)) throw ValidationError("threshold must be >= 0");
  if (options.alpha && !(*options.alpha > 0.0 && *options.alpha < 1.0))
    throw ValidationError("alpha must lie in (0, 1)");

  EstimateFBM est;
  est.contraction = options.contraction;
  est.threshold = options.threshold;
  est.d_n = compute_DN(paths, drift);
  if (!(est.d_n > 0.0)) {
    if (options.threshold > 0.0) {
      est.theta_tilde = std::numeric_limits<double>::quiet_NaN();
      est.r_n = est.theta_tilde;
      est.i_n = est.theta_tilde;
      est.m_n = std::numeric_limits<double>::infinity();
      return est;
    }
    throw DegenerateStatistics("D_N = 0: the untruncated estimator is undefined");
  }

  const SufficientStats stats = sufficient_stats(paths, drift);
  const double horizon = paths.grid.horizon();
  est.i_n = stats.i_n;
  est.m_n = stats.m_n;
  est.omega_holds = check_omega(stats, hurst, sigma, drift.sup_norm_b_prime, horizon,
                                options.contraction);

  if (options.enforce_omega && !est.omega_holds) {
    est.theta_tilde = 0.0;
  } else {
    const int max_iters = options.max_iters > 0
                              ? options.max_iters
                              : iteration_schedule(paths.size(), options.contraction, horizon,
                                                   drift.sup_norm_b_prime, hurst);
    const FixedPointResult fp = fixed_point(PhiMap(stats, paths, drift, hurst, sigma), max_iters,
                                            options.tol);
    est.r_n = fp.value;
    est.iterations = fp.iterations;
    est.residual = fp.residual;
    est.theta_tilde = stats.i_n + fp.value;
  }

  est.theta_tilde_c = est.omega_holds ? est.theta_tilde : 0.0;
  est.theta_tilde_cd = (est.omega_holds && est.d_n >= options.threshold) ? est.theta_tilde : 0.0;

  if (options.alpha) {
    est.ybar = ybar_fbm(paths, drift, hurst, sigma);
    est.aci = fbm_interval(*est.ybar, paths.size(), est.d_n, est.theta_tilde, *options.alpha);
  }
  return est;
}

EstimateBM estimate_bm(const PathBundle& paths, const DriftModel& drift, const VolModel& vol,
                       double threshold, std::optional<double> alpha) {
  require_solution(paths);
  if (!(threshold >= 0.0)) throw ValidationError("threshold must be >= 0");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const int steps = paths.grid.steps();
  const double dt = paths.grid.mesh();
  const double horizon = paths.grid.horizon();
  const double n = paths.size();

  double squares = 0.0;
  double increments = 0.0;
  double weighted = 0.0;
  for (int i = 0; i < paths.size(); ++i)
    for (int j = 0; j < steps; ++j) {
      const double x = paths.values(i, j);
      const double b = drift.b(x);
      const double s = vol.sigma(x);
      squares += b * b;
      increments += b * (paths.values(i, j + 1) - x);
      weighted += b * b * s * s;
    }

  EstimateBM est;
  est.d_nn = squares * dt / (n * horizon);
  est.v_nn = increments / (n * horizon);
  est.ybar = weighted * dt / (n * horizon * horizon);
  if (!(est.d_nn > 0.0)) {
    if (threshold > 0.0) {
      est.theta_hat = std::numeric_limits<double>::quiet_NaN();
      est.theta_hat_d = 0.0;
      return est;
    }
    throw DegenerateStatistics("D_{N,n} = 0: the least-squares estimator is undefined");
  }
  est.theta_hat = est.v_nn / est.d_nn;
  est.theta_hat_d = est.d_nn >= threshold ? est.theta_hat : 0.0;
  if (alpha) {
    const double half =
        std::sqrt(est.ybar) * normal_quantile(1.0 - *alpha / 2.0) / (std::sqrt(n) * est.d_nn);
    est.aci = Interval{est.theta_hat - half, est.theta_hat + half, *alpha};
  }
  return est;
}

double dmax_from_lower_bound(double frak_b) {
  if (!(frak_b > 0.0))
    throw ValidationError("no computable threshold: the lower bound on b^2 must be positive");
  return frak_b / 2.0;
}

ThresholdValue dmax_ou(double x0, double theta_max, double horizon_max) {
  if (!(theta_max > 0.0)) throw ValidationError("dmax_ou: theta_max must be positive");
  if (!(horizon_max > 0.0)) throw ValidationError("dmax_ou: T_max must be positive");
  const double value = 0.5 * x0 * x0 * std::exp(-2.0 * theta_max * horizon_max);
  return ThresholdValue{value, x0 == 0.0};
}

int iteration_schedule(int n, double contraction, double horizon, double sup_norm_b_prime,
                       const HurstParams& hurst) {
  constexpr int floor_iterations = 30;
  if (n < 1) throw ValidationError("iteration_schedule: N must be >= 1");
  if (!(contraction > 0.0 && contraction < 1.0))
    throw ValidationError("contraction constant must lie in (0, 1)");
  if (sup_norm_b_prime == 0.0) return 1;
  require_fractional(hurst);
  const double m = contraction / (1.0 - contraction) /
                   (2.0 * horizon * hurst.alpha_bar() * sup_norm_b_prime);
  const double needed = -std::log(m * std::sqrt(static_cast<double>(n))) / std::log(contraction);
  // Absorb round-off so exact powers of 𝔠 do not round up by one.
  const double rounded = std::ceil(needed - 1e-9);
  if (rounded <= floor_iterations) return floor_iterations;
  return static_cast<int>(std::min(rounded, 1e6));
}

double max_horizon(double ell, double theta_max, double horizon_max, const HurstParams& hurst,
                   double sigma, const DriftModel& drift, double x0, double contraction) {
  if (!(ell > 0.0)) throw ValidationError("max_horizon: ell must be positive");
  require_fractional(hurst);
  const double norm = drift.sup_norm_b_prime;
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  const double c1 = std::max(std::abs(drift.b(x0)), norm / 2.0);
  const double noise = std::abs(sigma) * std::pow(horizon_max, hurst.value());
  const double bracket = theta_max * theta_max * horizon_max * horizon_max +
                         theta_max * horizon_max / ell + noise * (1.0 + noise) / (ell * ell);
  const double base = contraction * ell * ell / (hurst.alpha_bar() * sigma * sigma * norm * norm) *
                      std::exp(-2.0 * c1 * norm * bracket);
  return std::pow(base, 1.0 / (2.0 * hurst.value()));
}

}  // namespace fracdrift
