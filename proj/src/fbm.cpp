#include "fracdrift/fbm.hpp"

#include <cmath>

namespace fracdrift {

CrossCorrelation::CrossCorrelation(Matrix r) : matrix_(std::move(r)) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols())
    throw ValidationError("correlation matrix must be square and non-empty");
  if (!matrix_.allFinite()) throw ValidationError("correlation matrix has non-finite entries");
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    if (matrix_(i, i) != 1.0) throw ValidationError("correlation matrix must have unit diagonal");
    for (Eigen::Index k = 0; k < i; ++k)
      if (std::abs(matrix_(i, k) - matrix_(k, i)) > 1e-12)
        throw ValidationError("correlation matrix must be symmetric");
  }
  factor_ = psd_cholesky(matrix_);
}

CrossCorrelation block_correlation(int n, int q, double rho) {
  if (n < 1 || q < 1) throw ValidationError("block_correlation: N and q must be positive");
  if (n % q != 0) throw ValidationError("block_correlation: q must divide N");
  if (q > 1 && !(rho > -1.0 / (q - 1) && rho <= 1.0))
    throw ValidationError("block_correlation: rho outside the PSD range (-1/(q-1), 1]");
  Matrix r = Matrix::Identity(n, n);
  for (int block = 0; block < n / q; ++block)
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        if (a != b) r(block * q + a, block * q + b) = rho;
  return CrossCorrelation(std::move(r));
}

long dependence_count(const CrossCorrelation& corr) {
  const Matrix& r = corr.matrix();
  long count = 0;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index k = 0; k < r.cols(); ++k)
      if (i != k && r(i, k) != 0.0) ++count;
  return count;
}

FbmSampler::FbmSampler(const HurstParams& hurst, const Grid& grid, const CrossCorrelation& corr)
    : grid_(grid),
      time_factor_(psd_cholesky(fbm_covariance<double>(hurst, grid))),
      cross_factor_(corr.factor()),
      independent_(corr.is_identity()) {}

PathBundle FbmSampler::sample(Engine& engine) const {
  const int n = size();
  const int steps = grid_.steps();
  NormalSource normal(engine);
  Matrix z(n, steps);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < steps; ++j) z(i, j) = normal();

  RowMatrix values = RowMatrix::Zero(n, steps + 1);
  if (independent_)
    values.rightCols(steps).noalias() = z * time_factor_.transpose();
  else
    values.rightCols(steps).noalias() = cross_factor_ * z * time_factor_.transpose();
  return PathBundle(grid_, std::move(values), BundleKind::noise);
}

PathBundle sample_fbm_bundle(const HurstParams& hurst, const Grid& grid,
                             const CrossCorrelation& corr, Engine& engine) {
  return FbmSampler(hurst, grid, corr).sample(engine);
}

}  // namespace fracdrift
