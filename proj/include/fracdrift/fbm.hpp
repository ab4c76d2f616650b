#pragma once

#include "fracdrift/rng.hpp"
#include "fracdrift/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace fracdrift {

inline constexpr double kPivotTolerance = 1e-10;

/// Lower-triangular L with L Lᵀ = (A + Aᵀ)/2 for positive semidefinite A.
///
/// Pivots in [-tol, tol] are treated as zero and their column is left empty,
/// so rank-deficient matrices (e.g. fully dependent clusters) factor cleanly.
/// A pivot below -tol means A is not PSD and raises ValidationError.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_cholesky(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol = typename Derived::Scalar(kPivotTolerance)) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw ValidationError("psd_cholesky: matrix must be square");
  const Eigen::Index n = a.rows();
  const MatrixX<Scalar> sym = (a + a.transpose()) / Scalar(2);
  MatrixX<Scalar> lower = MatrixX<Scalar>::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = sym(j, j) - lower.row(j).head(j).squaredNorm();
    if (pivot < -tol) throw ValidationError("matrix is not positive semidefinite");
    if (pivot <= tol) continue;
    const Scalar root = std::sqrt(pivot);
    lower(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i)
      lower(i, j) = (sym(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / root;
  }
  return lower;
}

/// fBm covariance R_H(s,t) = ½(s^{2H} + t^{2H} - |t-s|^{2H}).
template <typename Scalar>
Scalar fbm_kernel(Scalar hurst, Scalar s, Scalar t) {
  if (hurst == Scalar(0.5)) return std::min(s, t);
  const Scalar two_h = Scalar(2) * hurst;
  return (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h)) / Scalar(2);
}

/// ν×ν covariance of (B_{t_1}, ..., B_{t_ν}).
template <typename Scalar = double>
MatrixX<Scalar> fbm_covariance(const HurstParams& hurst, const Grid& grid) {
  const int n = grid.steps();
  MatrixX<Scalar> cov(n, n);
  const auto h = static_cast<Scalar>(hurst.value());
  for (int a = 0; a < n; ++a) {
    const auto s = static_cast<Scalar>(grid.node(a + 1));
    cov(a, a) = fbm_kernel(h, s, s);
    for (int b = 0; b < a; ++b) {
      cov(a, b) = fbm_kernel(h, s, static_cast<Scalar>(grid.node(b + 1)));
      cov(b, a) = cov(a, b);
    }
  }
  return cov;
}

/// Correlation between copies: Cov(B^i_s, B^k_t) = R_{ik} R_H(s,t).
class CrossCorrelation {
public:
  explicit CrossCorrelation(Matrix r);

  static CrossCorrelation identity(int n) { return CrossCorrelation(Matrix::Identity(n, n)); }

  int size() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  const Matrix& factor() const { return factor_; }
  bool is_identity() const { return matrix_.isIdentity(0.0); }

private:
  Matrix matrix_;
  Matrix factor_;
};

/// Block-diagonal R with N/q clusters of size q, off-diagonal ρ inside a cluster.
CrossCorrelation block_correlation(int n, int q, double rho);

/// |𝓡_N|: ordered pairs i ≠ k with R_{ik} ≠ 0.
long dependence_count(const CrossCorrelation& corr);

/// Reusable exact sampler; factors the time and cross covariances once.
class FbmSampler {
public:
  FbmSampler(const HurstParams& hurst, const Grid& grid, const CrossCorrelation& corr);

  /// L_cross · Z · L_timeᵀ with Z filled row by row from `engine`, plus a zero column for t_0.
  PathBundle sample(Engine& engine) const;

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(cross_factor_.rows()); }

private:
  Grid grid_;
  Matrix time_factor_;
  Matrix cross_factor_;
  bool independent_;
};

PathBundle sample_fbm_bundle(const HurstParams& hurst, const Grid& grid,
                             const CrossCorrelation& corr, Engine& engine);

}  // namespace fracdrift
