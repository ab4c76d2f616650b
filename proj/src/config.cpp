#include "fracdrift/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fracdrift {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model", "H",        "T",          "nu",          "sigma",       "x0",        "theta0",
      "N",     "replications", "seed",   "c",           "d",           "alpha",     "max_iters",
      "tol",   "enforce_omega", "correlation", "block_q", "block_rho", "mode",      "prefix_reuse",
      "out",   "format",   "verbosity",  "n_fixed",     "grid"};
  return keys;
}

[[noreturn]] void field_error(const std::string& key, const std::string& what) {
  throw ValidationError("config field '" + key + "': " + what);
}

double get_number(const json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number()) field_error(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) field_error(key, "must be finite");
  return x;
}

long long get_integer(const json& doc, const std::string& key, long long fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  field_error(key, "expected an integer");
}

bool get_bool(const json& doc, const std::string& key, bool fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_boolean()) field_error(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& doc, const std::string& key, const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_string()) field_error(key, "expected a string");
  return v.get<std::string>();
}

struct Preset {
  double horizon;
  double sigma;
  double x0;
  double theta0;
};

Preset preset_for(const std::string& model) {
  if (model == "model1") return {0.1, 0.25, 5.0, 1.0};
  if (model == "model2") return {0.75, 1.0, 5.0, 1.0};
  return {1.0, 1.0, 0.0, 1.0};
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a key-value object");
  for (const auto& item : doc.items())
    if (!known_keys().contains(item.key())) field_error(item.key(), "unknown key");

  RunConfig cfg;
  ExperimentConfig& e = cfg.experiment;

  e.model = get_string(doc, "model", "model2");
  try {
    DriftModel::from_id(e.model);
  } catch (const ValidationError& err) {
    field_error("model", err.what());
  }
  const Preset preset = preset_for(e.model);

  const std::string mode = get_string(doc, "mode", "fbm");
  if (mode == "fbm")
    e.mode = Mode::fbm;
  else if (mode == "bm")
    e.mode = Mode::bm;
  else
    field_error("mode", "expected \"fbm\" or \"bm\"");

  if (doc.contains("H"))
    e.hurst = get_number(doc, "H", 0.0);
  else if (e.mode == Mode::bm)
    e.hurst = 0.5;
  else
    field_error("H", "required in fbm mode");
  if (!(e.hurst > 0.0 && e.hurst < 1.0)) field_error("H", "must lie in (0, 1)");
  if (e.mode == Mode::bm && e.hurst != 0.5) field_error("H", "bm mode requires H = 0.5");
  if (e.mode == Mode::fbm && !(e.hurst > 0.5)) field_error("H", "fbm mode requires H > 0.5");

  e.horizon = get_number(doc, "T", preset.horizon);
  if (!(e.horizon > 0.0)) field_error("T", "must be positive");
  const long long steps = get_integer(doc, "nu", 20);
  if (steps < 1 || steps > 100000) field_error("nu", "must lie in [1, 100000]");
  e.steps = static_cast<int>(steps);
  e.sigma = get_number(doc, "sigma", preset.sigma);
  if (e.sigma == 0.0) field_error("sigma", "must be nonzero");
  e.x0 = get_number(doc, "x0", preset.x0);
  e.theta0 = get_number(doc, "theta0", preset.theta0);

  const long long n = get_integer(doc, "N", 50);
  if (n < 1 || n > 1000000) field_error("N", "must lie in [1, 1000000]");
  e.n_max = static_cast<int>(n);
  const long long reps = get_integer(doc, "replications", 100);
  if (reps < 1 || reps > 100000000) field_error("replications", "must be >= 1");
  e.replications = static_cast<int>(reps);

  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (s.is_number_unsigned())
      e.seed = s.get<std::uint64_t>();
    else if (s.is_number_integer() && s.get<long long>() >= 0)
      e.seed = static_cast<std::uint64_t>(s.get<long long>());
    else
      field_error("seed", "expected a nonnegative integer");
  }

  e.estimator.contraction = get_number(doc, "c", 0.5);
  if (!(e.estimator.contraction > 0.0 && e.estimator.contraction < 1.0))
    field_error("c", "must lie in (0, 1)");
  e.estimator.threshold = get_number(doc, "d", 0.0);
  if (!(e.estimator.threshold >= 0.0)) field_error("d", "must be >= 0");
  if (doc.contains("alpha") && doc.at("alpha").is_null()) {
    e.estimator.alpha.reset();
  } else {
    e.estimator.alpha = get_number(doc, "alpha", 0.05);
    if (!(*e.estimator.alpha > 0.0 && *e.estimator.alpha < 1.0)) field_error("alpha", "must lie in (0, 1)");
  }
  const long long iters = get_integer(doc, "max_iters", 0);
  if (iters < 0 || iters > 1000000) field_error("max_iters", "must lie in [0, 1000000]");
  e.estimator.max_iters = static_cast<int>(iters);
  e.estimator.tol = get_number(doc, "tol", 1e-12);
  if (!(e.estimator.tol >= 0.0)) field_error("tol", "must be >= 0");
  e.estimator.enforce_omega = get_bool(doc, "enforce_omega", false);

  const std::string corr = get_string(doc, "correlation", "identity");
  if (corr == "identity") {
    e.correlation = CorrelationSpec{};
    if (doc.contains("block_q") || doc.contains("block_rho"))
      field_error("correlation", "block_q/block_rho need correlation = \"block\"");
  } else if (corr == "block") {
    e.correlation.kind = CorrelationSpec::Kind::block;
    const long long q = get_integer(doc, "block_q", 1);
    if (q < 1 || e.n_max % q != 0) field_error("block_q", "must divide N");
    e.correlation.block_size = static_cast<int>(q);
    e.correlation.rho = get_number(doc, "block_rho", 0.0);
    if (q > 1 && !(e.correlation.rho > -1.0 / (q - 1) && e.correlation.rho <= 1.0))
      field_error("block_rho", "outside the positive semidefinite range (-1/(q-1), 1]");
  } else {
    field_error("correlation", "expected \"identity\" or \"block\"");
  }
  e.prefix_reuse = get_bool(doc, "prefix_reuse", true);

  cfg.out_dir = get_string(doc, "out", ".");
  const std::string format = get_string(doc, "format", "csv");
  if (format == "csv")
    cfg.format = OutputFormat::csv;
  else if (format == "json")
    cfg.format = OutputFormat::json;
  else
    field_error("format", "expected \"csv\" or \"json\"");
  cfg.verbosity = static_cast<int>(get_integer(doc, "verbosity", 0));
  const long long n_fixed = get_integer(doc, "n_fixed", std::min<long long>(15, e.n_max));
  if (n_fixed < 1 || n_fixed > e.n_max) field_error("n_fixed", "must lie in [1, N]");
  cfg.n_fixed = static_cast<int>(n_fixed);
  cfg.sweep_grid = get_string(doc, "grid", "");
  if (!cfg.sweep_grid.empty()) {
    try {
      parse_threshold_grid(cfg.sweep_grid);
    } catch (const ValidationError& err) {
      field_error("grid", err.what());
    }
  }

  e.validate();
  return cfg;
}

json load_config_document(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw IoError("cannot read config file " + path->string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& err) {
      throw ValidationError("malformed config file " + path->string() + ": " + err.what());
    }
  }
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("override '" + item + "' is not of the form key=value");
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    doc[key] = value;
  }
  return doc;
}

json to_json(const RunConfig& config) {
  const ExperimentConfig& e = config.experiment;
  json doc = {
      {"model", e.model},
      {"mode", e.mode == Mode::bm ? "bm" : "fbm"},
      {"H", e.hurst},
      {"T", e.horizon},
      {"nu", e.steps},
      {"sigma", e.sigma},
      {"x0", e.x0},
      {"theta0", e.theta0},
      {"N", e.n_max},
      {"replications", e.replications},
      {"seed", e.seed},
      {"c", e.estimator.contraction},
      {"d", e.estimator.threshold},
      {"alpha", e.estimator.alpha ? json(*e.estimator.alpha) : json(nullptr)},
      {"max_iters", e.estimator.max_iters},
      {"tol", e.estimator.tol},
      {"enforce_omega", e.estimator.enforce_omega},
      {"prefix_reuse", e.prefix_reuse},
      {"out", config.out_dir.string()},
      {"format", config.format == OutputFormat::json ? "json" : "csv"},
      {"verbosity", config.verbosity},
      {"n_fixed", config.n_fixed},
      {"grid", config.sweep_grid},
  };
  if (e.correlation.kind == CorrelationSpec::Kind::block) {
    doc["correlation"] = "block";
    doc["block_q"] = e.correlation.block_size;
    doc["block_rho"] = e.correlation.rho;
  } else {
    doc["correlation"] = "identity";
  }
  return doc;
}

std::vector<double> parse_threshold_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream in(spec);
  std::string token;
  while (std::getline(in, token, ':')) parts.push_back(token);
  if (parts.size() != 3) throw ValidationError("threshold grid must look like start:step:count");
  double start = 0.0, step = 0.0;
  long long count = 0;
  try {
    std::size_t used = 0;
    start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("start");
    step = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("step");
    count = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw ValidationError("threshold grid '" + spec + "' has a malformed number");
  }
  if (count < 1) throw ValidationError("threshold grid is empty");
  if (count > 1000000) throw ValidationError("threshold grid is too large");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) grid[k] = start + static_cast<double>(k) * step;
  if (grid.front() < 0.0 || grid.back() < 0.0) throw ValidationError("thresholds must be >= 0");
  return grid;
}

}  // namespace fracdrift
