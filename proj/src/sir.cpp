#include "turbo/sir.hpp"

#include <vector>

#include "turbo/error.hpp"
#include "turbo/particles.hpp"

namespace turbo {

SirState sir_init(const ClgModel& model, Eigen::Index n_particles, Rng& rng) {
  if (n_particles < 1) throw Error(ErrorCode::kInvalidParams, "n_particles must be >= 1");
  Eigen::LLT<Matrix> llt(model.cov_e());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidParams, "SIR filter needs a positive definite Ce");
  }
  const GaussianMoment& init = model.init();
  const Matrix factor = psd_factor(init.cov);
  SirState state;
  state.points.resize(init.dim(), n_particles);
  for (Eigen::Index j = 0; j < n_particles; ++j) {
    state.points.col(j) = sample_with_factor(init.mean, factor, rng);
  }
  state.process_factor = psd_factor(model.cov_w());
  return state;
}

StepEstimate sir_pf_step(SirState& state, const ClgModel& model, std::size_t l, const Vector& y,
                         Rng& rng) {
  const ClgDims& d = model.dims();
  if (state.points.rows() != d.d()) {
    throw Error(ErrorCode::kDimensionMismatch, "SIR state does not match the model");
  }
  require_size(y, d.p, "measurement");
  const Eigen::Index n = state.points.cols();
  Eigen::LLT<Matrix> llt(model.cov_e());

  Vector log_w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector r = y - clg_compose_h(model, l, state.points.col(j));
    const Vector u = llt.matrixL().solve(r);
    log_w(j) = -0.5 * u.squaredNorm();
  }
  const Vector w = normalize_log_weights(log_w);
  const Vector mean = state.points * w;
  StepEstimate estimate{mean.head(d.d_l), mean.tail(d.d_n)};

  const std::vector<Eigen::Index> ancestors = systematic_resample(w, rng);
  Matrix next(d.d(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = state.points.col(ancestors[static_cast<std::size_t>(i)]);
    next.col(i) = sample_with_factor(clg_compose_f(model, l, x), state.process_factor, rng);
  }
  state.points = std::move(next);
  return estimate;
}

SirPf::SirPf(const ClgModel& model, Eigen::Index n_particles, std::uint64_t seed)
    : model_(model), rng_(seed) {
  state_ = sir_init(model_, n_particles, rng_);
}

StepEstimate SirPf::step(std::size_t l, const Vector& y) {
  return sir_pf_step(state_, model_, l, y, rng_);
}

}  // namespace turbo
