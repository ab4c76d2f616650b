// fracdrift: drift estimation for fractional SDEs from N observed copies.
//
//   fracdrift simulate   --set model=model2 --set H=0.9 --out runs/sim
//   fracdrift estimate   --input runs/sim/paths.csv --set model=model2 --set H=0.9
//   fracdrift experiment --set model=model1 --set H=0.7 --out runs/m1
//   fracdrift sweep      --set model=model2 --set H=0.9 --grid 1:0.5:31 --n-fixed 15
//   fracdrift coverage   --set model=model2 --set mode=bm --set N=200 --set nu=200
//
// Exit codes: 0 success, 2 validation error, 3 degenerate statistics, 4 I/O.

#include "fracdrift/config.hpp"
#include "fracdrift/estimators.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/montecarlo.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fracdrift;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  int workers = 0;
  bool timing = false;
  std::string input;
  std::string grid;
  std::optional<int> n_fixed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--set", opts.sets, "Override a config key (key=value), repeatable");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides config and FRACDRIFT_SEED)");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", opts.workers, "Worker threads (0 = all cores); never affects results")
      ->check(CLI::NonNegativeNumber);
}

RunConfig resolve_config(const CommonOptions& opts) {
  std::optional<fs::path> path;
  if (!opts.config_path.empty()) path = opts.config_path;
  nlohmann::json doc = load_config_document(path, opts.sets);
  if (!opts.out.empty()) doc["out"] = opts.out;
  if (!opts.format.empty()) doc["format"] = opts.format;
  if (!opts.grid.empty()) doc["grid"] = opts.grid;
  if (opts.n_fixed) doc["n_fixed"] = *opts.n_fixed;
  if (opts.seed) {
    doc["seed"] = *opts.seed;
  } else if (!doc.contains("seed")) {
    if (const char* env = std::getenv("FRACDRIFT_SEED")) {
      try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        doc["seed"] = static_cast<std::uint64_t>(value);
      } catch (const std::exception&) {
        throw ValidationError("FRACDRIFT_SEED is not an unsigned integer");
      }
    }
  }
  return parse_config(doc);
}

fs::path prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
  write_text(cfg.out_dir / "config.json", to_json(cfg).dump(2) + '\n');
  return cfg.out_dir;
}

std::string extension(const RunConfig& cfg) { return cfg.format == OutputFormat::json ? ".json" : ".csv"; }

int cmd_simulate(const RunConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const TrialPaths paths = simulate_trial(cfg.experiment, 0);
  write_text(dir / "noise.csv", paths_csv(paths.noise));
  write_text(dir / "paths.csv", paths_csv(paths.solution));
  std::cout << "wrote " << (dir / "noise.csv").string() << " and " << (dir / "paths.csv").string() << '\n';
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::string& input) {
  const ExperimentConfig& e = cfg.experiment;
  const PathBundle paths =
      input.empty() ? simulate_trial(e, 0).solution : read_paths_csv(fs::path(input));
  const DriftModel drift = DriftModel::from_id(e.model);

  nlohmann::ordered_json record;
  if (e.mode == Mode::bm) {
    record = estimate_record(estimate_bm(paths, drift, VolModel::constant(e.sigma),
                                         e.estimator.threshold, e.estimator.alpha));
  } else {
    record = estimate_record(estimate_fbm(paths, drift, HurstParams(e.hurst), e.sigma, e.estimator));
  }

  const fs::path dir = prepare_output(cfg);
  if (cfg.format == OutputFormat::json)
    write_text(dir / "estimate.json", record.dump(2) + '\n');
  else
    write_text(dir / "estimate.csv", record_csv(record));
  std::cout << record.dump(2) << '\n';
  return 0;
}

int cmd_experiment(const RunConfig& cfg, int workers, bool timing) {
  const fs::path dir = prepare_output(cfg);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<TrialResult> trials = run_trials(cfg.experiment, workers);
  const SummaryReport report = summarize_trials(cfg.experiment, trials);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::optional<double> stamp = timing ? std::optional<double>(seconds) : std::nullopt;

  if (cfg.format == OutputFormat::json) {
    write_text(dir / "summary.json", summary_json(cfg, report, stamp).dump(2) + '\n');
    write_text(dir / "trajectories.json", trajectories_json(trials).dump(2) + '\n');
  } else {
    write_text(dir / "summary.csv", summary_csv(cfg, report, stamp));
    write_text(dir / "trajectories.csv", trajectories_csv(trials));
  }
  std::cout << "mean_error=" << format_number(report.mean_error)
            << " std_error=" << format_number(report.std_error)
            << " coverage=" << format_number(report.coverage)
            << " failed=" << report.failed_trials << " seconds=" << seconds << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& cfg, int workers) {
  if (cfg.sweep_grid.empty()) throw ValidationError("sweep needs a threshold grid (--grid start:step:count)");
  const std::vector<double> grid = parse_threshold_grid(cfg.sweep_grid);
  const fs::path dir = prepare_output(cfg);
  const SummaryReport report = threshold_sweep(cfg.experiment, grid, cfg.n_fixed, workers);
  if (cfg.format == OutputFormat::json)
    write_text(dir / "sweep.json", sweep_json(report).dump(2) + '\n');
  else
    write_text(dir / "sweep.csv", sweep_csv(report));
  std::cout << "untruncated mean_error(N=" << cfg.n_fixed << ")=" << format_number(report.mean_error)
            << " thresholds=" << grid.size() << '\n';
  return 0;
}

int cmd_coverage(const RunConfig& cfg, int workers, bool timing) {
  const fs::path dir = prepare_output(cfg);
  const SummaryReport report = coverage_experiment(cfg.experiment, workers);
  const std::optional<double> stamp = timing ? std::optional<double>(report.seconds) : std::nullopt;
  if (cfg.format == OutputFormat::json)
    write_text(dir / "summary.json", summary_json(cfg, report, stamp).dump(2) + '\n');
  else
    write_text(dir / "summary.csv", summary_csv(cfg, report, stamp));
  std::cout << "coverage=" << format_number(report.coverage) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-parameter estimation for fractional SDEs from N copies"};
  app.require_subcommand(1);

  CommonOptions opts;
  CLI::App* simulate = app.add_subcommand("simulate", "Sample one bundle and write noise.csv and paths.csv");
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate theta from a paths CSV or a fresh simulation");
  CLI::App* experiment = app.add_subcommand("experiment", "Replicated experiment: summary + trajectories");
  CLI::App* sweep = app.add_subcommand("sweep", "Mean error of the truncated estimator over a threshold grid");
  CLI::App* coverage = app.add_subcommand("coverage", "Empirical coverage of the confidence interval");
  for (CLI::App* cmd : {simulate, estimate, experiment, sweep, coverage}) add_common(cmd, opts);
  estimate->add_option("--input", opts.input, "Paths CSV (t,path_1,...,path_N)");
  sweep->add_option("--grid", opts.grid, "Threshold grid start:step:count");
  sweep->add_option("--n-fixed", opts.n_fixed, "Sample size N at which thresholds are compared");
  experiment->add_flag("--timing", opts.timing, "Record wall-clock seconds in the summary");
  coverage->add_flag("--timing", opts.timing, "Record wall-clock seconds in the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    const RunConfig cfg = resolve_config(opts);
    if (*simulate) return cmd_simulate(cfg);
    if (*estimate) return cmd_estimate(cfg, opts.input);
    if (*experiment) return cmd_experiment(cfg, opts.workers, opts.timing);
    if (*sweep) return cmd_sweep(cfg, opts.workers);
    if (*coverage) return cmd_coverage(cfg, opts.workers, opts.timing);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateStatistics& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitDegenerate;
  } catch (const DivergenceError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitDegenerate;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitIo;
  }
  return 0;
}
