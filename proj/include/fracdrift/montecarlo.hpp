#pragma once

#include "fracdrift/estimators.hpp"
#include "fracdrift/fbm.hpp"
#include "fracdrift/sde.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracdrift {

enum class Mode { fbm, bm };

struct CorrelationSpec {
  enum class Kind { identity, block };
  Kind kind = Kind::identity;
  int block_size = 1;
  double rho = 0.0;

  bool operator==(const CorrelationSpec&) const = default;

  CrossCorrelation build(int n) const;
};

struct ExperimentConfig {
  std::string model = "model2";
  double hurst = 0.9;
  double horizon = 0.75;
  int steps = 20;
  double sigma = 1.0;
  double x0 = 5.0;
  double theta0 = 1.0;
  int n_max = 50;
  int replications = 100;
  std::uint64_t seed = 1;
  FbmOptions estimator;
  CorrelationSpec correlation;
  Mode mode = Mode::fbm;
  /// One bundle per trial, estimates on its prefixes; false draws fresh paths for every N.
  bool prefix_reuse = true;

  void validate() const;
  SdeSpec sde_spec() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct TrialPoint {
  double estimate = 0.0;   ///< θ̃_N (fbm) or θ̂_{N,n} (bm)
  double truncated = 0.0;  ///< θ̃^{𝔠,𝔡}_N (fbm) or θ̂^𝔡_{N,n} (bm)
  double aci_lower = 0.0;
  double aci_upper = 0.0;
  bool has_aci = false;
  bool omega_holds = true;
  double d_n = 0.0;
};

struct TrialResult {
  int trial = 0;
  std::vector<int> sizes;                         ///< N values evaluated
  std::vector<std::optional<TrialPoint>> points;  ///< empty where the estimator failed

  /// Point at the largest evaluated N.
  const std::optional<TrialPoint>& final_point() const { return points.back(); }
  std::optional<double> final_error(double theta0) const;
};

struct SummaryReport {
  double mean_error = 0.0;
  double std_error = 0.0;
  double coverage = 0.0;
  double truncated_mean_error = 0.0;  ///< mean |θ̃^{𝔠,𝔡} - θ₀| at the configured 𝔡
  int failed_trials = 0;
  std::vector<double> thresholds;
  std::vector<double> threshold_mean_errors;
  double seconds = 0.0;
};

/// Mean and population standard deviation (divisor R).
std::pair<double, double> summarize(std::span<const double> errors);

struct TrialPaths {
  PathBundle noise;
  PathBundle solution;
};

/// The N_max-path bundle that trial `trial_index` estimates from (prefix-reuse convention).
TrialPaths simulate_trial(const ExperimentConfig& config, int trial_index);

/// Evaluates trial `trial_index` at every N = 1..N_max. Deterministic in (config, trial_index).
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

/// Trials 0..replications-1 on `workers` threads (0 = all cores); output is independent of `workers`.
std::vector<TrialResult> run_trials(const ExperimentConfig& config, int workers = 0);

SummaryReport summarize_trials(const ExperimentConfig& config, std::span<const TrialResult> trials);

SummaryReport run_experiment(const ExperimentConfig& config, int workers = 0);

/// Mean error of the 𝔡-truncated estimator at N = n_fixed for every threshold,
/// sharing one set of simulated trials across thresholds. mean_error holds the
/// untruncated error at n_fixed.
SummaryReport threshold_sweep(const ExperimentConfig& config, std::span<const double> thresholds,
                              int n_fixed, int workers = 0);

/// Fraction of replications whose ACI at N_max contains θ₀.
SummaryReport coverage_experiment(const ExperimentConfig& config, int workers = 0);

struct RateStudy {
  std::vector<int> sizes;
  std::vector<double> mean_errors;
  double slope = 0.0;  ///< least-squares slope of log(mean error) against log N
};

/// Mean errors at each N in `sizes` (prefixes of one bundle of max(sizes) paths per trial).
RateStudy convergence_rate(const ExperimentConfig& config, std::span<const int> sizes,
                           int workers = 0);

}  // namespace fracdrift
