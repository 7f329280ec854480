#include "turbo/ekf.hpp"

#include "turbo/error.hpp"

namespace turbo {

GaussianMoment ekf_time_update(const GaussianMoment& estimate, const ClgModel& model,
                               std::size_t l) {
  const Linearization lin = linearize_transition(model, l, estimate.mean);
  return affine_propagate(estimate, lin.f_mat, lin.u_vec, model.cov_w());
}

FirstMu ekf_first_mu(const GaussianMoment& prediction, const ClgModel& model, std::size_t l,
                     const Vector& y) {
  const ClgDims& d = model.dims();
  require_size(y, d.p, "measurement");
  const Linearization lin = linearize_measurement(model, l, prediction.mean);
  const GaussianCanonical fp = to_canonical(prediction);
  const Matrix w_e = inverse_spd(model.cov_e());
  const Matrix ht_we = lin.h_mat.transpose() * w_e;  // H W_e, D x P

  GaussianCanonical ms{symmetrize(ht_we * lin.h_mat), ht_we * (y - lin.v_vec)};
  FirstMu out;
  out.fe1_canonical = product(fp, ms);
  out.fe1 = to_moment(out.fe1_canonical);
  out.fe1_lin = marginal_block(out.fe1, 0, d.d_l);
  return out;
}

SecondMu ekf_second_mu(const FirstMu& fe1, const PmMessageEkf& pm, Eigen::Index d_l) {
  SecondMu out;
  if (pm.unity) {
    out.fe2 = fe1.fe1;
    out.fe2_lin = fe1.fe1_lin;
    return out;
  }
  const Eigen::Index d = fe1.fe1.dim();
  if (pm.message.dim() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "PM message and EKF state differ in size");
  }
  const Matrix& c_pm = pm.message.cov;
  const Matrix w = inverse_general(c_pm * fe1.fe1_canonical.precision + Matrix::Identity(d, d));
  out.fe2.cov = symmetrize(w * c_pm);
  out.fe2.mean = w * (c_pm * fe1.fe1_canonical.shift + pm.message.mean);
  out.fe2_lin = marginal_block(out.fe2, 0, d_l);
  return out;
}

Ekf::Ekf(const ClgModel& model) : model_(model) {
  state_.fp = model.init();
  state_.fe = model.init();
}

StepEstimate Ekf::step(std::size_t l, const Vector& y) {
  const FirstMu mu = ekf_first_mu(state_.fp, model_, l, y);
  state_.fe = mu.fe1;
  state_.fp = ekf_time_update(state_.fe, model_, l);
  const Eigen::Index dl = model_.dims().d_l;
  return {state_.fe.mean.head(dl), state_.fe.mean.tail(model_.dims().d_n)};
}

}  // namespace turbo
