#include "turbo/gaussian.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "turbo/error.hpp"

namespace turbo {

GaussianCanonical to_canonical(const GaussianMoment& g) {
  require_square(g.cov, "covariance");
  require_size(g.mean, g.cov.rows(), "mean");
  Matrix precision = inverse_spd(g.cov);
  Vector shift = precision * g.mean;
  return {std::move(precision), std::move(shift)};
}

GaussianMoment to_moment(const GaussianCanonical& g) {
  require_square(g.precision, "precision");
  require_size(g.shift, g.precision.rows(), "shift");
  Matrix cov = inverse_spd(g.precision);
  Vector mean = cov * g.shift;
  return {std::move(mean), std::move(cov)};
}

GaussianCanonical product(const GaussianCanonical& a, const GaussianCanonical& b) {
  if (a.dim() != b.dim() || a.precision.rows() != b.precision.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "canonical product operands differ in size");
  }
  return {symmetrize(a.precision + b.precision), a.shift + b.shift};
}

GaussianMoment affine_propagate(const GaussianMoment& g, const Matrix& a, const Vector& b,
                                const Matrix& c) {
  if (a.cols() != g.dim() || a.rows() != b.size() || c.rows() != a.rows() ||
      c.cols() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "affine_propagate shapes are incompatible");
  }
  return {a * g.mean + b, symmetrize(c + a * g.cov * a.transpose())};
}

double log_overlap_weight(const GaussianMoment& a, const GaussianMoment& b, bool include_det) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "overlap_weight operands differ in size");
  }
  const Matrix sum = symmetrize(a.cov + b.cov);
  const Vector diff = a.mean - b.mean;
  Eigen::LLT<Matrix> llt(sum);
  if (llt.info() != Eigen::Success || llt.rcond() * kMaxConditionNumber < 1.0) {
    throw Error(ErrorCode::kSingularMatrix, "sum of covariances is not invertible");
  }
  const Vector white = llt.matrixL().solve(diff);
  double log_w = -0.5 * white.squaredNorm();
  if (include_det) {
    const double n = static_cast<double>(a.dim());
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    log_w -= 0.5 * n * log_det;
  }
  return log_w;
}

double overlap_weight(const GaussianMoment& a, const GaussianMoment& b, bool include_det) {
  const double log_w = log_overlap_weight(a, b, include_det);
  if (log_w < std::log(std::numeric_limits<double>::min())) return 0.0;
  return std::exp(log_w);
}

GaussianMoment marginal_block(const GaussianMoment& g, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > g.dim()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "block [" + std::to_string(start) + ", " + std::to_string(start + count) +
                    ") outside dimension " + std::to_string(g.dim()));
  }
  return {g.mean.segment(start, count), g.cov.block(start, start, count, count)};
}

GaussianMoment moment_match(std::span<const WeightedGaussianPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "moment_match needs at least one pair");
  const Eigen::Index dl = pairs.front().gaussian.dim();
  const Eigen::Index dn = pairs.front().point.size();
  double total = 0.0;
  for (const auto& p : pairs) {
    if (p.gaussian.dim() != dl || p.point.size() != dn) {
      throw Error(ErrorCode::kDimensionMismatch, "mixture components differ in size");
    }
    if (!(p.weight >= 0.0)) throw Error(ErrorCode::kInvalidParams, "negative mixture weight");
    total += p.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroTotalWeight, "mixture weights sum to zero");

  Vector mean = Vector::Zero(dl + dn);
  for (const auto& p : pairs) {
    const double w = p.weight / total;
    mean.head(dl) += w * p.gaussian.mean;
    mean.tail(dn) += w * p.point;
  }
  // Centered accumulation; algebraically equal to E[x x^T] - mean mean^T.
  Matrix cov = Matrix::Zero(dl + dn, dl + dn);
  Vector centered(dl + dn);
  for (const auto& p : pairs) {
    const double w = p.weight / total;
    centered.head(dl) = p.gaussian.mean - mean.head(dl);
    centered.tail(dn) = p.point - mean.tail(dn);
    cov.noalias() += w * centered * centered.transpose();
    cov.topLeftCorner(dl, dl) += w * p.gaussian.cov;
  }
  return {std::move(mean), symmetrize(cov)};
}

Vector sample_with_factor(const Vector& mean, const Matrix& factor, Rng& rng) {
  return mean + factor * rng.normal_vector(mean.size());
}

Vector sample(const GaussianMoment& g, Rng& rng) {
  require_size(g.mean, g.cov.rows(), "mean");
  return sample_with_factor(g.mean, psd_factor(g.cov), rng);
}

}  // namespace turbo
