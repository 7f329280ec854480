#include "turbo/mpf.hpp"

#include <cmath>

#include "turbo/error.hpp"
#include "turbo/particles.hpp"

namespace turbo {

MpfState mpf_init(const ClgModel& model, Eigen::Index n_particles, Rng& rng) {
  if (n_particles < 1) throw Error(ErrorCode::kInvalidParams, "n_particles must be >= 1");
  const ClgDims& d = model.dims();
  const GaussianMoment& init = model.init();
  const Matrix c_ll = init.cov.topLeftCorner(d.d_l, d.d_l);
  const Matrix c_ln = init.cov.topRightCorner(d.d_l, d.d_n);
  const Matrix c_nn = init.cov.bottomRightCorner(d.d_n, d.d_n);

  MpfState state;
  state.xn = sample_particles(init, d.d_n, n_particles, rng).points;
  state.xl.resize(d.d_l, n_particles);

  // Conditional of x_L given x_N; with a singular C_NN the pseudo-inverse
  // keeps the conditional well defined.
  const Matrix gain =
      c_ln * c_nn.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix cond_cov = symmetrize(c_ll - gain * c_ln.transpose());
  for (Eigen::Index j = 0; j < n_particles; ++j) {
    state.xl.col(j) = init.mean.head(d.d_l) + gain * (state.xn.col(j) - init.mean.tail(d.d_n));
  }
  state.cov = cond_cov.replicate(1, n_particles);
  state.weights = Vector::Constant(n_particles, 1.0 / static_cast<double>(n_particles));
  return state;
}

StepEstimate mpf_step(MpfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                      Rng& rng) {
  const ClgDims& d = model.dims();
  const Eigen::Index n = state.size();
  if (state.xn.rows() != d.d_n || state.xl.rows() != d.d_l) {
    throw Error(ErrorCode::kDimensionMismatch, "MPF state does not match the model");
  }
  require_size(y, d.p, "measurement");

  // Measurement: weight by N(y; B x_L + g, B P B^T + Ce), then Kalman update.
  Vector log_w(n);
  Vector xn(d.d_n), r(d.p);
  Matrix pbt(d.d_l, d.p), s(d.p, d.p), k(d.d_l, d.p);
  SmallCholesky chol;
  for (Eigen::Index j = 0; j < n; ++j) {
    xn = state.xn.col(j);
    const Matrix b = model.b_meas(l, xn);
    auto p = state.cov_block(j);
    pbt.noalias() = p * b.transpose();
    s = model.cov_e();
    s.noalias() += b * pbt;
    r = y - model.g_meas(l, xn);
    r.noalias() -= b * state.xl.col(j);
    if (!chol.compute(s)) {
      throw Error(ErrorCode::kSingularMatrix, "MPF innovation covariance not positive definite");
    }
    log_w(j) = -0.5 * chol.log_det() + std::log(state.weights(j));
    k = pbt.transpose();
    chol.solve_columns(k);  // S^-1 B P
    chol.solve_lower(r.data());
    log_w(j) -= 0.5 * r.squaredNorm();
    chol.solve_upper(r.data());  // r <- S^-1 r
    state.xl.col(j).noalias() += pbt * r;
    p.noalias() -= pbt * k;
    p = (0.5 * (p + p.transpose())).eval();
  }
  const Vector w = normalize_log_weights(log_w);
  StepEstimate estimate{state.xl * w, state.xn * w};

  const std::vector<Eigen::Index> ancestors = systematic_resample(w, rng);
  Matrix xn_next(d.d_n, n);
  Matrix xl_next(d.d_l, n);
  Matrix cov_next(d.d_l, d.d_l * n);

  // Time update. The sampled x_N' = A_N x_L + f_N + w_N carries information
  // on x_L, folded in with gain L = A_L P A_N^T N^-1.
  Vector xl(d.d_l), n_mean(d.d_n), noise(d.d_n), next(d.d_n), innovation(d.d_n);
  Matrix pant(d.d_l, d.d_n), n_cov(d.d_n, d.d_n), cross(d.d_l, d.d_n), gain_t(d.d_n, d.d_l);
  Matrix ap(d.d_l, d.d_l), p_next(d.d_l, d.d_l);
  SmallCholesky chol_n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = ancestors[static_cast<std::size_t>(i)];
    xn = state.xn.col(j);
    xl = state.xl.col(j);
    const auto p = state.cov_block(j);
    const Matrix a_l = model.a_lin(l, xn);
    const Matrix a_n = model.a_non(l, xn);
    const Vector f_l = model.f_lin(l, xn);
    const Vector f_n = model.f_non(l, xn);

    pant.noalias() = p * a_n.transpose();
    n_cov = model.cov_w_non();
    n_cov.noalias() += a_n * pant;
    n_mean = f_n;
    n_mean.noalias() += a_n * xl;
    if (!chol_n.compute(n_cov)) {
      throw Error(ErrorCode::kNotPsd, "MPF x_N prediction covariance not positive definite");
    }
    for (Eigen::Index q = 0; q < d.d_n; ++q) noise(q) = rng.normal();
    chol_n.transform(n_mean, noise, next);
    innovation = next - n_mean;
    xn_next.col(i) = next;

    cross.noalias() = a_l * pant;  // A_L P A_N^T
    gain_t = cross.transpose();
    chol_n.solve_columns(gain_t);  // L^T = N^-1 (A_L P A_N^T)^T
    auto x_next = xl_next.col(i);
    x_next = f_l;
    x_next.noalias() += a_l * xl;
    x_next.noalias() += gain_t.transpose() * innovation;
    ap.noalias() = a_l * p;
    p_next = model.cov_w_lin();
    p_next.noalias() += ap * a_l.transpose();
    p_next.noalias() -= cross * gain_t;
    cov_next.middleCols(i * d.d_l, d.d_l) = 0.5 * (p_next + p_next.transpose());
  }
  state.xn = std::move(xn_next);
  state.xl = std::move(xl_next);
  state.cov = std::move(cov_next);
  state.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return estimate;
}

Mpf::Mpf(const ClgModel& model, Eigen::Index n_particles, std::uint64_t seed)
    : model_(model), rng_(seed) {
  state_ = mpf_init(model_, n_particles, rng_);
}

StepEstimate Mpf::step(std::size_t l, const Vector& y) {
  return mpf_step(state_, model_, l, y, rng_);
}

}  // namespace turbo
