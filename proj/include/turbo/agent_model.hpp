#pragma once

#include "turbo/ssm.hpp"

namespace turbo {

/// Planar agent pulled towards the origin by a spring-like force and slowed by
/// a cubic drag. State x = [p; v] with position p as the linear component and
/// velocity v as the nonlinear one; measurements are [p; |v|].
struct AgentParams {
  double rho = 0.99;        // velocity forgetting factor
  double t_s = 0.1;         // sampling interval [s]
  double sigma_p = 0.01;    // position process noise [m]
  double sigma_ep = 5e-2;   // position measurement noise [m]
  double sigma_ev = 5e-2;   // speed measurement noise [m/s]
  double a0 = 1.5;          // restoring force scale [m/s^2]
  double d0 = 0.5;          // reference distance [m]
  double a0_tilde = 0.05;   // drag scale [m/s^2]
  double v0 = 1.0;          // reference speed [m/s]
  Eigen::Vector2d p_init{5.0, 8.0};
  Eigen::Vector2d v_init{4.0, 4.0};
  /// Standard deviations of the initial pdf; non-positive entries select the
  /// default (sigma_ep, sigma_ep, sigma_ev, sigma_ev).
  Eigen::Vector4d init_std{0.0, 0.0, 0.0, 0.0};

  void validate() const;
};

/// Below this speed the drag term and the speed Jacobian row are set to zero.
inline constexpr double kSpeedEpsilon = 1e-9;

class AgentModel final : public ClgModel {
 public:
  explicit AgentModel(const AgentParams& params);

  const AgentParams& params() const { return params_; }

  Matrix a_lin(std::size_t l, const Vector& xn) const override;
  Vector f_lin(std::size_t l, const Vector& xn) const override;
  Matrix a_non(std::size_t l, const Vector& xn) const override;
  Vector f_non(std::size_t l, const Vector& xn) const override;
  Matrix b_meas(std::size_t l, const Vector& xn) const override;
  Vector g_meas(std::size_t l, const Vector& xn) const override;

  Matrix state_jacobian(std::size_t l, const Vector& x) const override;
  Matrix measurement_jacobian(std::size_t l, const Vector& x) const override;

  /// Drag acceleration magnitude factor times v: a0_tilde (|v|/v0)^3 v/|v|.
  Eigen::Vector2d drag(const Vector& v) const;

 private:
  AgentParams params_;
  double spring_;  // a0 / d0
};

AgentModel agent_model(const AgentParams& params);

}  // namespace turbo
