#include "turbo/agent_model.hpp"

#include <cmath>

#include "turbo/error.hpp"

namespace turbo {

namespace {

GaussianMoment initial_pdf(const AgentParams& p) {
  Vector mean(4);
  mean << p.p_init, p.v_init;
  Eigen::Vector4d sd{p.sigma_ep, p.sigma_ep, p.sigma_ev, p.sigma_ev};
  for (int i = 0; i < 4; ++i) {
    if (p.init_std(i) > 0.0) sd(i) = p.init_std(i);
  }
  return {mean, Matrix(sd.cwiseAbs2().asDiagonal())};
}

const AgentParams& validated(const AgentParams& p) {
  p.validate();
  return p;
}

}  // namespace

void AgentParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::kInvalidParams, "rho must lie in (0, 1)");
  if (!positive(t_s)) throw Error(ErrorCode::kInvalidParams, "t_s must be positive");
  if (!positive(sigma_p) || !positive(sigma_ep) || !positive(sigma_ev)) {
    throw Error(ErrorCode::kInvalidParams, "noise standard deviations must be positive");
  }
  if (!positive(d0) || !positive(v0)) {
    throw Error(ErrorCode::kInvalidParams, "d0 and v0 must be positive");
  }
  if (!std::isfinite(a0) || !std::isfinite(a0_tilde) || a0 < 0.0 || a0_tilde < 0.0) {
    throw Error(ErrorCode::kInvalidParams, "a0 and a0_tilde must be finite and non-negative");
  }
  if (!p_init.allFinite() || !v_init.allFinite() || !init_std.allFinite()) {
    throw Error(ErrorCode::kInvalidParams, "initial conditions must be finite");
  }
}

AgentModel::AgentModel(const AgentParams& params)
    : ClgModel(ClgDims{2, 2, 3},
               Matrix(Eigen::Matrix2d::Identity() * validated(params).sigma_p * params.sigma_p),
               Matrix(Eigen::Matrix2d::Identity() * (1.0 - params.rho) * (1.0 - params.rho)),
               Matrix(Eigen::Vector3d(params.sigma_ep * params.sigma_ep,
                                      params.sigma_ep * params.sigma_ep,
                                      params.sigma_ev * params.sigma_ev)
                          .asDiagonal()),
               initial_pdf(params)),
      params_(params),
      spring_(params.a0 / params.d0) {}

Eigen::Vector2d AgentModel::drag(const Vector& v) const {
  // a0_tilde (s/v0)^3 v/s == (a0_tilde / v0^3) s^2 v, smooth in v.
  const double s2 = v.squaredNorm();
  if (s2 < kSpeedEpsilon * kSpeedEpsilon) return Eigen::Vector2d::Zero();
  const double c = params_.a0_tilde / (params_.v0 * params_.v0 * params_.v0);
  return c * s2 * Eigen::Vector2d(v(0), v(1));
}

Matrix AgentModel::a_lin(std::size_t, const Vector&) const {
  const double t = params_.t_s;
  return Matrix(Eigen::Matrix2d::Identity() * (1.0 - 0.5 * spring_ * t * t));
}

Vector AgentModel::f_lin(std::size_t, const Vector& xn) const {
  const double t = params_.t_s;
  return Vector(xn * t - 0.5 * t * t * drag(xn));
}

Matrix AgentModel::a_non(std::size_t, const Vector&) const {
  return Matrix(Eigen::Matrix2d::Identity() * (-spring_ * params_.t_s));
}

Vector AgentModel::f_non(std::size_t, const Vector& xn) const {
  return Vector(params_.rho * xn - params_.t_s * drag(xn));
}

Matrix AgentModel::b_meas(std::size_t, const Vector&) const {
  Matrix b = Matrix::Zero(3, 2);
  b.topRows(2).setIdentity();
  return b;
}

Vector AgentModel::g_meas(std::size_t, const Vector& xn) const {
  Vector g = Vector::Zero(3);
  g(2) = xn.norm();
  return g;
}

Matrix AgentModel::state_jacobian(std::size_t, const Vector& x) const {
  require_size(x, 4, "state");
  const double t = params_.t_s;
  const Eigen::Vector2d v = x.tail(2);
  // d(c s^2 v)/dv = c (s^2 I + 2 v v^T)
  Eigen::Matrix2d drag_jac = Eigen::Matrix2d::Zero();
  if (v.norm() >= kSpeedEpsilon) {
    const double c = params_.a0_tilde / (params_.v0 * params_.v0 * params_.v0);
    drag_jac = c * (v.squaredNorm() * Eigen::Matrix2d::Identity() + 2.0 * v * v.transpose());
  }
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  Matrix f(4, 4);
  f.topLeftCorner(2, 2) = (1.0 - 0.5 * spring_ * t * t) * id;
  f.topRightCorner(2, 2) = t * id - 0.5 * t * t * drag_jac;
  f.bottomLeftCorner(2, 2) = -spring_ * t * id;
  f.bottomRightCorner(2, 2) = params_.rho * id - t * drag_jac;
  return f;
}

Matrix AgentModel::measurement_jacobian(std::size_t, const Vector& x) const {
  require_size(x, 4, "state");
  Matrix h = Matrix::Zero(3, 4);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Vector2d v = x.tail(2);
  const double s = v.norm();
  if (s >= kSpeedEpsilon) h.block(2, 2, 1, 2) = (v / s).transpose();
  return h;
}

AgentModel agent_model(const AgentParams& params) { return AgentModel(params); }

}  // namespace turbo
