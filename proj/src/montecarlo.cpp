#include "fracdrift/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

namespace fracdrift {

CrossCorrelation CorrelationSpec::build(int n) const {
  if (kind == Kind::identity) return CrossCorrelation::identity(n);
  return block_correlation(n, block_size, rho);
}

void ExperimentConfig::validate() const {
  const HurstParams h(hurst);
  const Grid g(horizon, steps);
  (void)g;
  sde_spec().validate();
  if (replications < 1) throw ValidationError("replications must be >= 1");
  if (n_max < 1) throw ValidationError("N must be >= 1");
  if (mode == Mode::bm && !h.is_brownian()) throw ValidationError("mode bm requires H = 0.5");
  if (mode == Mode::fbm && !(hurst > 0.5)) throw ValidationError("mode fbm requires H > 0.5");
  const auto& e = estimator;
  if (!(e.contraction > 0.0 && e.contraction < 1.0)) throw ValidationError("c must lie in (0, 1)");
  if (!(e.threshold >= 0.0)) throw ValidationError("d must be >= 0");
  if (e.alpha && !(*e.alpha > 0.0 && *e.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (e.max_iters < 0) throw ValidationError("max_iters must be >= 0");
  if (!(e.tol >= 0.0)) throw ValidationError("tol must be >= 0");
  if (correlation.kind == CorrelationSpec::Kind::block) {
    if (correlation.block_size < 1 || n_max % correlation.block_size != 0)
      throw ValidationError("block_q must divide N");
    correlation.build(correlation.block_size);
  }
}

SdeSpec ExperimentConfig::sde_spec() const {
  SdeSpec spec;
  spec.x0 = x0;
  spec.theta0 = theta0;
  spec.sigma = sigma;
  spec.drift = DriftModel::from_id(model);
  spec.hurst = HurstParams(hurst);
  spec.grid = Grid(horizon, steps);
  return spec;
}

std::optional<double> TrialResult::final_error(double theta0) const {
  if (!final_point()) return std::nullopt;
  return std::abs(final_point()->estimate - theta0);
}

std::pair<double, double> summarize(std::span<const double> errors) {
  if (errors.empty()) throw ValidationError("summarize: empty error list");
  const double n = static_cast<double>(errors.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  const double mean = sum / n;
  double squares = 0.0;
  for (double e : errors) squares += (e - mean) * (e - mean);
  return {mean, std::sqrt(squares / n)};
}

namespace {

template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

class TrialEngine {
public:
  explicit TrialEngine(const ExperimentConfig& config)
      : config_(config), spec_(config.sde_spec()), vol_(VolModel::constant(config.sigma)) {
    config_.validate();
    if (config_.prefix_reuse)
      sampler_.emplace(spec_.hurst, spec_.grid, config_.correlation.build(config_.n_max));
  }

  TrialResult evaluate(int trial, std::span<const int> sizes) const {
    TrialResult result;
    result.trial = trial;
    result.sizes.assign(sizes.begin(), sizes.end());
    result.points.reserve(sizes.size());
    if (config_.prefix_reuse) {
      const PathBundle solution = simulate(trial).solution;
      for (int n : sizes) result.points.push_back(estimate(solution.prefix(n)));
    } else {
      for (int n : sizes) {
        Engine engine(derive_seed(derive_seed(config_.seed, static_cast<std::uint64_t>(trial)),
                                  static_cast<std::uint64_t>(n)));
        const FbmSampler sampler(spec_.hurst, spec_.grid, config_.correlation.build(n));
        result.points.push_back(estimate(euler_additive(spec_, sampler.sample(engine))));
      }
    }
    return result;
  }

  std::vector<TrialResult> evaluate_all(std::span<const int> sizes, int workers) const {
    std::vector<TrialResult> trials(config_.replications);
    parallel_for(config_.replications, workers,
                 [&](int trial) { trials[trial] = evaluate(trial, sizes); });
    return trials;
  }

  TrialPaths simulate(int trial) const {
    if (!sampler_) throw ValidationError("whole-trial simulation requires prefix reuse");
    Engine engine = make_engine(config_.seed, static_cast<std::uint64_t>(trial));
    PathBundle noise = sampler_->sample(engine);
    PathBundle solution = euler_additive(spec_, noise);
    return TrialPaths{std::move(noise), std::move(solution)};
  }

private:
  std::optional<TrialPoint> estimate(const PathBundle& paths) const {
    TrialPoint point;
    try {
      if (config_.mode == Mode::bm) {
        const EstimateBM est = estimate_bm(paths, spec_.drift, vol_, config_.estimator.threshold,
                                           config_.estimator.alpha);
        point.estimate = est.theta_hat;
        point.truncated = est.theta_hat_d;
        point.d_n = est.d_nn;
        if (est.aci) {
          point.has_aci = true;
          point.aci_lower = est.aci->lower;
          point.aci_upper = est.aci->upper;
        }
      } else {
        const EstimateFBM est =
            estimate_fbm(paths, spec_.drift, spec_.hurst, spec_.sigma, config_.estimator);
        point.estimate = est.theta_tilde;
        point.truncated = est.theta_tilde_cd;
        point.omega_holds = est.omega_holds;
        point.d_n = est.d_n;
        if (est.aci) {
          point.has_aci = true;
          point.aci_lower = est.aci->lower;
          point.aci_upper = est.aci->upper;
        }
      }
    } catch (const DegenerateStatistics&) {
      return std::nullopt;
    } catch (const DivergenceError&) {
      return std::nullopt;
    }
    if (!std::isfinite(point.estimate)) return std::nullopt;
    return point;
  }

  ExperimentConfig config_;
  SdeSpec spec_;
  VolModel vol_;
  std::optional<FbmSampler> sampler_;
};

std::vector<int> all_sizes(int n_max) {
  std::vector<int> sizes(n_max);
  std::iota(sizes.begin(), sizes.end(), 1);
  return sizes;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TrialPaths simulate_trial(const ExperimentConfig& config, int trial_index) {
  ExperimentConfig cfg = config;
  cfg.prefix_reuse = true;
  return TrialEngine(cfg).simulate(trial_index);
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
  return TrialEngine(config).evaluate(trial_index, all_sizes(config.n_max));
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config, int workers) {
  return TrialEngine(config).evaluate_all(all_sizes(config.n_max), workers);
}

SummaryReport summarize_trials(const ExperimentConfig& config, std::span<const TrialResult> trials) {
  SummaryReport report;
  std::vector<double> errors;
  std::vector<double> truncated;
  int covered = 0;
  for (const TrialResult& trial : trials) {
    const auto& point = trial.final_point();
    if (!point) {
      ++report.failed_trials;
      continue;
    }
    errors.push_back(std::abs(point->estimate - config.theta0));
    truncated.push_back(std::abs(point->truncated - config.theta0));
    if (point->has_aci && point->aci_lower <= config.theta0 && config.theta0 <= point->aci_upper)
      ++covered;
  }
  if (!errors.empty()) {
    std::tie(report.mean_error, report.std_error) = summarize(errors);
    report.truncated_mean_error = summarize(truncated).first;
  } else {
    report.mean_error = report.std_error = report.truncated_mean_error =
        std::numeric_limits<double>::quiet_NaN();
  }
  report.coverage = trials.empty() ? 0.0 : static_cast<double>(covered) / trials.size();
  return report;
}

SummaryReport run_experiment(const ExperimentConfig& config, int workers) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<TrialResult> trials = run_trials(config, workers);
  SummaryReport report = summarize_trials(config, trials);
  report.seconds = elapsed_since(start);
  return report;
}

SummaryReport threshold_sweep(const ExperimentConfig& config, std::span<const double> thresholds,
                              int n_fixed, int workers) {
  if (thresholds.empty()) throw ValidationError("threshold sweep needs at least one threshold");
  if (n_fixed < 1 || n_fixed > config.n_max) throw ValidationError("N_fixed must lie in [1, N]");
  for (double d : thresholds)
    if (!(d >= 0.0)) throw ValidationError("thresholds must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  const int sizes[] = {n_fixed};
  const std::vector<TrialResult> trials = TrialEngine(config).evaluate_all(sizes, workers);

  SummaryReport report = summarize_trials(config, trials);
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double d : thresholds) {
    std::vector<double> errors;
    for (const TrialResult& trial : trials) {
      const auto& p = trial.final_point();
      if (!p) continue;
      const bool keep = p->omega_holds && p->d_n >= d;
      errors.push_back(std::abs((keep ? p->estimate : 0.0) - config.theta0));
    }
    report.threshold_mean_errors.push_back(
        errors.empty() ? std::numeric_limits<double>::quiet_NaN() : summarize(errors).first);
  }
  report.seconds = elapsed_since(start);
  return report;
}

SummaryReport coverage_experiment(const ExperimentConfig& config, int workers) {
  if (!config.estimator.alpha) throw ValidationError("coverage needs a confidence level alpha");
  const auto start = std::chrono::steady_clock::now();
  const int sizes[] = {config.n_max};
  const std::vector<TrialResult> trials = TrialEngine(config).evaluate_all(sizes, workers);
  SummaryReport report = summarize_trials(config, trials);
  report.seconds = elapsed_since(start);
  return report;
}

RateStudy convergence_rate(const ExperimentConfig& config, std::span<const int> sizes, int workers) {
  if (sizes.size() < 2) throw ValidationError("convergence_rate needs at least two sample sizes");
  ExperimentConfig cfg = config;
  cfg.n_max = *std::max_element(sizes.begin(), sizes.end());
  const std::vector<TrialResult> trials = TrialEngine(cfg).evaluate_all(sizes, workers);

  RateStudy study;
  study.sizes.assign(sizes.begin(), sizes.end());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<double> errors;
    for (const TrialResult& trial : trials)
      if (trial.points[k]) errors.push_back(std::abs(trial.points[k]->estimate - cfg.theta0));
    if (errors.empty()) throw DegenerateStatistics("every trial failed at some sample size");
    study.mean_errors.push_back(summarize(errors).first);
  }

  const std::size_t m = sizes.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += std::log(static_cast<double>(sizes[k]));
    my += std::log(study.mean_errors[k]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = std::log(static_cast<double>(sizes[k])) - mx;
    sxy += dx * (std::log(study.mean_errors[k]) - my);
    sxx += dx * dx;
  }
  study.slope = sxy / sxx;
  return study;
}

}  // namespace fracdrift
