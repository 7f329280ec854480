#pragma once

#include <span>

#include "turbo/linalg.hpp"
#include "turbo/rng.hpp"

namespace turbo {

/// Gaussian in mean/covariance form.
struct GaussianMoment {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const { return mean.size(); }

  static GaussianMoment standard(Eigen::Index n) {
    return {Vector::Zero(n), Matrix::Identity(n, n)};
  }
};

/// Gaussian in precision/shift form: precision = cov^-1, shift = precision * mean.
/// A zero precision and zero shift is the flat (unity) message.
struct GaussianCanonical {
  Matrix precision;
  Vector shift;

  Eigen::Index dim() const { return shift.size(); }

  static GaussianCanonical flat(Eigen::Index n) {
    return {Matrix::Zero(n, n), Vector::Zero(n)};
  }

  bool is_flat() const { return precision.isZero(0.0) && shift.isZero(0.0); }
};

/// One term w * delta(x_N - point) * N(x_L; gaussian) of a particle/Gaussian mixture.
struct WeightedGaussianPair {
  Vector point;
  GaussianMoment gaussian;
  double weight = 1.0;
};

GaussianCanonical to_canonical(const GaussianMoment& g);
GaussianMoment to_moment(const GaussianCanonical& g);

/// Equality-node rule: precisions add, shifts add.
GaussianCanonical product(const GaussianCanonical& a, const GaussianCanonical& b);

/// Pushes N(mean, cov) through x -> A x + b + noise(C).
GaussianMoment affine_propagate(const GaussianMoment& g, const Matrix& a, const Vector& b,
                                const Matrix& c);

/// Log of the constant produced when N(.; a) feeds a node N(.; b):
///   -N/2 log det(Ca + Cb) - 1/2 (ma - mb)^T (Ca + Cb)^-1 (ma - mb)
/// with N the dimension. This is the Gaussian overlap integral without its
/// (2 pi)^(-N/2) factor. `include_det` drops the determinant term when false.
double log_overlap_weight(const GaussianMoment& a, const GaussianMoment& b,
                          bool include_det = true);

/// exp(log_overlap_weight); returns 0 instead of a subnormal or underflowed value.
double overlap_weight(const GaussianMoment& a, const GaussianMoment& b,
                      bool include_det = true);

/// Marginal over coordinates [start, start + count).
GaussianMoment marginal_block(const GaussianMoment& g, Eigen::Index start, Eigen::Index count);

/// Moment-matched single Gaussian over the stacked vector [x_L; x_N] of the
/// mixture sum_j w_j N(x_L; eta_j, C_j) delta(x_N - x_j). Weights need not be
/// normalized.
GaussianMoment moment_match(std::span<const WeightedGaussianPair> pairs);

/// Draws one sample. Consumes exactly dim() standard normal draws from `rng`.
Vector sample(const GaussianMoment& g, Rng& rng);

/// Same as sample() with a precomputed psd_factor(cov).
Vector sample_with_factor(const Vector& mean, const Matrix& factor, Rng& rng);

}  // namespace turbo
