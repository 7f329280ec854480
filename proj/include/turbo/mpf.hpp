#pragma once

#include <cstdint>
#include <vector>

#include "turbo/filter.hpp"
#include "turbo/rng.hpp"
#include "turbo/ssm.hpp"

namespace turbo {

/// Marginalized particle filter: particles over x_N, each carrying a Kalman
/// filter over x_L. Column j of `xn` / `xl` and the j-th d_l x d_l block of
/// `cov` belong to particle j.
struct MpfState {
  Matrix xn;   // d_n x N_p, predicted nonlinear states
  Matrix xl;   // d_l x N_p, predicted means of x_L
  Matrix cov;  // d_l x (d_l N_p), predicted covariances of x_L
  Vector weights;

  Eigen::Index size() const { return xn.cols(); }
  auto cov_block(Eigen::Index j) { return cov.middleCols(j * xl.rows(), xl.rows()); }
  auto cov_block(Eigen::Index j) const { return cov.middleCols(j * xl.rows(), xl.rows()); }
};

/// x_N sampled from the initial marginal; each x_L Gaussian is the initial
/// pdf conditioned on the sampled x_N.
MpfState mpf_init(const ClgModel& model, Eigen::Index n_particles, Rng& rng);

/// One recursion: PF weighting with the per-particle predictive likelihood,
/// Kalman measurement update, estimate, resampling, and the time update in
/// which the sampled x_N' acts as a measurement of x_L.
StepEstimate mpf_step(MpfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                      Rng& rng);

class Mpf final : public Filter {
 public:
  Mpf(const ClgModel& model, Eigen::Index n_particles, std::uint64_t seed);

  StepEstimate step(std::size_t l, const Vector& y) override;
  std::string name() const override { return "mpf"; }

  const MpfState& state() const { return state_; }

 private:
  const ClgModel& model_;
  Rng rng_;
  MpfState state_;
};

}  // namespace turbo
