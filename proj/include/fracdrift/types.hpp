#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracdrift {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowMatrix = RowMatrixX<double>;

/// Invalid input: out-of-range parameter, mismatched shapes, malformed config.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The data do not allow estimation (e.g. D_N = 0).
class DegenerateStatistics : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fixed-point iteration produced a non-finite iterate.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Uniform dissection t_j = jT/ν of [0, T].
class Grid {
public:
  Grid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw ValidationError("grid horizon T must be positive and finite");
    if (steps < 1) throw ValidationError("grid steps must be >= 1");
  }

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double mesh() const { return horizon_ / steps_; }

  /// Node t_j; t_0 = 0 and t_ν = T exactly.
  double node(int j) const {
    if (j == steps_) return horizon_;
    return horizon_ * static_cast<double>(j) / static_cast<double>(steps_);
  }

  Vector nodes() const {
    Vector t(steps_ + 1);
    for (int j = 0; j <= steps_; ++j) t(j) = node(j);
    return t;
  }

  bool operator==(const Grid& other) const = default;

private:
  double horizon_;
  int steps_;
};

/// Hurst index with the derived constants α_H = H(2H-1) and ᾱ_H = α_H / (2H(2H+1)).
class HurstParams {
public:
  explicit HurstParams(double hurst) : hurst_(hurst) {
    if (!(hurst > 0.0 && hurst < 1.0))
      throw ValidationError("Hurst index H must lie in (0, 1)");
  }

  double value() const { return hurst_; }
  double alpha() const { return hurst_ * (2.0 * hurst_ - 1.0); }
  double alpha_bar() const { return alpha() / (2.0 * hurst_ * (2.0 * hurst_ + 1.0)); }
  bool is_brownian() const { return hurst_ == 0.5; }

private:
  double hurst_;
};

enum class BundleKind { noise, solution };

/// N sampled trajectories on a grid; row i is process i at nodes t_0..t_ν.
struct PathBundle {
  Grid grid;
  RowMatrix values;
  BundleKind kind = BundleKind::noise;

  PathBundle(Grid g, RowMatrix v, BundleKind k) : grid(g), values(std::move(v)), kind(k) {
    if (values.cols() != grid.steps() + 1)
      throw ValidationError("bundle column count must equal grid steps + 1");
    if (!values.allFinite()) throw ValidationError("bundle contains non-finite values");
    if (kind == BundleKind::noise && values.rows() > 0 && (values.col(0).array() != 0.0).any())
      throw ValidationError("noise paths must start at 0");
  }

  int size() const { return static_cast<int>(values.rows()); }

  /// First `count` paths, sharing the grid.
  PathBundle prefix(int count) const {
    if (count < 1 || count > size()) throw ValidationError("prefix size out of range");
    return PathBundle(grid, values.topRows(count), kind);
  }
};

}  // namespace fracdrift
