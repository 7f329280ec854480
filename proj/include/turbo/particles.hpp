#pragma once

#include <cstddef>
#include <vector>

#include "turbo/ekf.hpp"
#include "turbo/gaussian.hpp"
#include "turbo/rng.hpp"
#include "turbo/ssm.hpp"

namespace turbo {

/// Particles over x_N. Column j of `points` is particle j; `weights` are
/// normalized.
struct ParticleSet {
  Matrix points;
  Vector weights;

  Eigen::Index size() const { return points.cols(); }
  Eigen::Index dim() const { return points.rows(); }
  auto point(Eigen::Index j) const { return points.col(j); }

  static ParticleSet uniform(Matrix points);
};

/// Draws n particles from the x_N marginal of `g` (the last `d_n` coordinates).
ParticleSet sample_particles(const GaussianMoment& g, Eigen::Index d_n, Eigen::Index n, Rng& rng);

/// Normalizes log-weights with max subtraction. Throws AllZeroWeights when no
/// weight is positive and finite.
Vector normalize_log_weights(const Vector& log_w);

/// Systematic resampling: one uniform draw, N evenly spaced positions.
/// Returns ancestor indices.
std::vector<Eigen::Index> systematic_resample(const Vector& weights, Rng& rng);

/// Shannon entropy (nats) of normalized weights.
double weight_entropy(const Vector& weights);

/// Switches for the determinant factors left out of the particle weights by
/// default.
struct WeightOptions {
  bool include_det_ms = false;  // [det C_ms]^(-P/2) in the measurement weight
  bool include_det_pm = false;  // [det(C_z + Cw_L)]^(-D_L/2) in the PM weight
};

/// Log of w_fe1,j = N(y; B_j eta_fe2 + g_j, B_j C_fe2 B_j^T + Ce) per particle,
/// with the determinant factor controlled by `options`.
Vector pf_first_mu(const ParticleSet& particles, const ClgModel& model, std::size_t l,
                   const Vector& y, const GaussianMoment& fe2_lin,
                   const WeightOptions& options = {});

struct PmgEkfResult {
  Vector log_weights;
  std::size_t repaired = 0;  // particles whose z-covariance needed eigenvalue clamping
};

/// Pseudo-measurement weights for the particle filter derived from the EKF's
/// two x_L marginals. Per particle:
///   z-message    N(z; A_j (eta_fe2 - eta_fe1) + f_j, Cw_L + A_j (C_fe2 - C_fe1) A_j^T)
///   PM precision W_pm = W_z + W_w,  shift w_pm = w_z + W_w f_j
///   log weight   1/2 (eta_pm^T W_pm eta_pm - eta_z^T W_z eta_z - f_j^T W_w f_j)
Vector pmg_ekf(const ParticleSet& particles, const ClgModel& model, std::size_t l,
               const GaussianMoment& fe1_lin, const GaussianMoment& fe2_lin,
               const WeightOptions& options = {});
PmgEkfResult pmg_ekf_detailed(const ParticleSet& particles, const ClgModel& model,
                              std::size_t l, const GaussianMoment& fe1_lin,
                              const GaussianMoment& fe2_lin, const WeightOptions& options = {});

struct ResampleResult {
  ParticleSet particles;                 // resampled, uniform weights
  Vector normalized;                     // W_fe2 over the input particles
  std::vector<Eigen::Index> ancestors;   // input index of each output particle
};

/// Combines prior, measurement and PM log-weights, normalizes and resamples.
ResampleResult pf_second_mu_normalize_resample(const ParticleSet& particles,
                                               const Vector& log_w_fe1, const Vector& log_w_pm,
                                               Rng& rng);

/// PM messages over x_L paired with each particle: mean j is column j of
/// `pm_mean`, covariance j is the j-th D_L x D_L block of `pm_cov`.
struct PmgPfResult {
  Matrix predicted;  // x_N particles for step l + 1, one column each
  Matrix pm_mean;
  Matrix pm_cov;
  std::size_t regularized = 0;  // particles needing a ridge on W_pm

  Eigen::Index size() const { return pm_mean.cols(); }
  GaussianMoment message(Eigen::Index j) const;
};

/// Samples each particle's x_N prediction N(A_N eta_fe2 + f_N, Cw_N + A_N C_fe2 A_N^T)
/// and turns z = x_N' - f_N into a Gaussian message over x_L with precision
/// A_N^T W_w A_N and shift A_N^T W_w z.
PmgPfResult pmg_pf(const ParticleSet& resampled, const ClgModel& model, std::size_t l,
                   const GaussianMoment& fe2_lin, Rng& rng);

/// Projects the particle/Gaussian pairs onto one Gaussian over [x_L; x_N].
PmMessageEkf pmc_pf(const PmgPfResult& generated, const ParticleSet& resampled);

}  // namespace turbo
