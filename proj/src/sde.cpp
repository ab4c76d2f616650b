#include "fracdrift/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracdrift {

DriftModel DriftModel::model1() {
  constexpr double pi = std::numbers::pi;
  DriftModel m;
  m.name = "model1";
  m.b = [](double x) { return pi - std::atan(x); };
  m.b_prime = [](double x) { return -1.0 / (1.0 + x * x); };
  m.antiderivative = [](double x) {
    return pi * x - x * std::atan(x) + 0.5 * std::log1p(x * x);
  };
  // sup of -1/(1+x²) is 0, approached but not attained.
  m.sup_b_prime = 0.0;
  m.sup_norm_b_prime = 1.0;
  m.square_lower_bound = pi * pi / 4.0;
  return m;
}

DriftModel DriftModel::model2() {
  DriftModel m = affine(0.0, -1.0);
  m.name = "model2";
  return m;
}

DriftModel DriftModel::affine(double c0, double c1) {
  if (!std::isfinite(c0) || !std::isfinite(c1))
    throw ValidationError("drift coefficients must be finite");
  DriftModel m;
  std::ostringstream name;
  name.precision(17);
  name << "custom:" << c0 << ',' << c1;
  m.name = name.str();
  m.b = [c0, c1](double x) { return c0 + c1 * x; };
  m.b_prime = [c1](double) { return c1; };
  m.antiderivative = [c0, c1](double x) { return c0 * x + 0.5 * c1 * x * x; };
  m.sup_b_prime = c1;
  m.sup_norm_b_prime = std::abs(c1);
  if (c1 == 0.0) m.square_lower_bound = c0 * c0;
  return m;
}

DriftModel DriftModel::from_id(const std::string& id) {
  if (id == "model1") return model1();
  if (id == "model2") return model2();
  const std::string prefix = "custom:";
  if (id.rfind(prefix, 0) != 0) throw ValidationError("unknown drift model '" + id + "'");
  std::vector<double> coeffs;
  std::stringstream in(id.substr(prefix.size()));
  std::string token;
  while (std::getline(in, token, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ValidationError("custom drift: cannot parse coefficient '" + token + "'");
    }
    if (used != token.size())
      throw ValidationError("custom drift: cannot parse coefficient '" + token + "'");
    coeffs.push_back(value);
  }
  if (coeffs.empty()) throw ValidationError("custom drift: no coefficients given");
  // Higher degrees would make ‖b'‖_∞ infinite.
  for (std::size_t k = 2; k < coeffs.size(); ++k)
    if (coeffs[k] != 0.0)
      throw ValidationError("custom drift: degree > 1 has unbounded derivative");
  return affine(coeffs[0], coeffs.size() > 1 ? coeffs[1] : 0.0);
}

namespace {

double central_difference(const ScalarFn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

void validate_drift(const DriftModel& drift, std::span<const double> probes) {
  constexpr double h = 1e-5;
  constexpr double tol = 1e-6;
  if (!std::isfinite(drift.sup_norm_b_prime) || drift.sup_norm_b_prime < 0.0)
    throw ValidationError(drift.name + ": sup norm of b' must be finite and nonnegative");
  if (drift.square_lower_bound && *drift.square_lower_bound < 0.0)
    throw ValidationError(drift.name + ": lower bound on b^2 must be nonnegative");
  for (double x : probes) {
    const double scale = 1.0 + std::abs(x);
    if (std::abs(central_difference(drift.b, x, h) - drift.b_prime(x)) > tol * scale)
      throw ValidationError(drift.name + ": b' disagrees with finite differences of b");
    if (std::abs(central_difference(drift.antiderivative, x, h) - drift.b(x)) > tol * scale * scale)
      throw ValidationError(drift.name + ": antiderivative disagrees with b");
    if (drift.b_prime(x) > drift.sup_b_prime)
      throw ValidationError(drift.name + ": b' exceeds its declared supremum");
    if (std::abs(drift.b_prime(x)) > drift.sup_norm_b_prime)
      throw ValidationError(drift.name + ": |b'| exceeds its declared sup norm");
    if (drift.square_lower_bound && drift.b(x) * drift.b(x) < *drift.square_lower_bound)
      throw ValidationError(drift.name + ": b^2 falls below its declared lower bound");
  }
}

VolModel VolModel::constant(double c) {
  if (c == 0.0 || !std::isfinite(c)) throw ValidationError("constant volatility must be nonzero");
  return VolModel{[c](double) { return c; }, [](double) { return 0.0; }, std::abs(c), std::abs(c)};
}

VolModel VolModel::clamped_identity(double lower, double upper) {
  if (!(lower > 0.0 && upper > lower && std::isfinite(upper)))
    throw ValidationError("clamped volatility needs 0 < lower < upper < inf");
  return VolModel{[lower, upper](double x) { return std::clamp(x, lower, upper); },
                  [lower, upper](double x) { return (x > lower && x < upper) ? 1.0 : 0.0; },
                  lower, upper};
}

void validate_vol(const VolModel& vol, std::span<const double> probes) {
  if (!(vol.lower > 0.0) || !std::isfinite(vol.upper) || vol.upper < vol.lower)
    throw ValidationError("volatility bounds must satisfy 0 < lower <= upper < inf");
  for (double x : probes) {
    const double s = std::abs(vol.sigma(x));
    if (s < vol.lower || s > vol.upper)
      throw ValidationError("volatility leaves its declared bounds");
    if (std::abs(central_difference(vol.sigma, x, 1e-5) - vol.sigma_prime(x)) > 1e-6 * (1.0 + std::abs(x)))
      throw ValidationError("sigma' disagrees with finite differences of sigma");
  }
}

namespace {

void check_noise(const SdeSpec& spec, const PathBundle& noise) {
  spec.validate();
  if (noise.kind != BundleKind::noise) throw ValidationError("euler: input bundle must be noise");
  if (!(noise.grid == spec.grid)) throw ValidationError("euler: noise grid does not match the model grid");
}

}  // namespace

PathBundle euler_additive(const SdeSpec& spec, const PathBundle& noise) {
  check_noise(spec, noise);
  const double dt = spec.grid.mesh();
  const int steps = spec.grid.steps();
  RowMatrix x(noise.size(), steps + 1);
  for (int i = 0; i < noise.size(); ++i) {
    x(i, 0) = spec.x0;
    for (int j = 0; j < steps; ++j)
      x(i, j + 1) = x(i, j) + spec.theta0 * spec.drift.b(x(i, j)) * dt +
                    spec.sigma * (noise.values(i, j + 1) - noise.values(i, j));
  }
  return PathBundle(spec.grid, std::move(x), BundleKind::solution);
}

PathBundle euler_multiplicative(const SdeSpec& spec, const VolModel& vol, const PathBundle& noise) {
  check_noise(spec, noise);
  if (!spec.hurst.is_brownian())
    throw ValidationError("euler_multiplicative requires H = 1/2");
  const double dt = spec.grid.mesh();
  const int steps = spec.grid.steps();
  RowMatrix x(noise.size(), steps + 1);
  for (int i = 0; i < noise.size(); ++i) {
    x(i, 0) = spec.x0;
    for (int j = 0; j < steps; ++j)
      x(i, j + 1) = x(i, j) + spec.theta0 * spec.drift.b(x(i, j)) * dt +
                    vol.sigma(x(i, j)) * (noise.values(i, j + 1) - noise.values(i, j));
  }
  return PathBundle(spec.grid, std::move(x), BundleKind::solution);
}

RegenerationCopies extract_regeneration_copies(const PathBundle& long_path, double x0,
                                               double copy_horizon, int max_copies) {
  if (long_path.size() != 1) throw ValidationError("regeneration: expected a single long path");
  if (max_copies < 1) throw ValidationError("regeneration: max_copies must be >= 1");
  const double mesh = long_path.grid.mesh();
  const double ratio = copy_horizon / mesh;
  const int window = static_cast<int>(std::lround(ratio));
  if (window < 1 || std::abs(ratio - window) > 1e-9 * std::max(1.0, ratio))
    throw ValidationError("regeneration: mesh must divide the copy horizon");
  const auto path = long_path.values.row(0);
  if (path(0) != x0) throw ValidationError("regeneration: long path must start at x0");

  const int last = long_path.grid.steps();
  std::vector<int> starts;
  int tau = 0;
  while (static_cast<int>(starts.size()) < max_copies && tau + window <= last) {
    starts.push_back(tau);
    int next = -1;
    for (int j = tau + window + 1; j <= last; ++j) {
      if ((path(j) - x0) * (path(j - 1) - x0) <= 0.0) {
        next = j;
        break;
      }
    }
    if (next < 0) break;
    tau = next;
  }

  RowMatrix segments(static_cast<Eigen::Index>(starts.size()), window + 1);
  for (std::size_t k = 0; k < starts.size(); ++k)
    segments.row(static_cast<Eigen::Index>(k)) = path.segment(starts[k], window + 1);
  return RegenerationCopies{PathBundle(Grid(copy_horizon, window), std::move(segments), BundleKind::solution),
                            std::move(starts)};
}

}  // namespace fracdrift
