#pragma once

#include "turbo/ssm.hpp"

namespace turbo {

/// CLG model whose slots are constant matrices and affine functions of x_N:
///   f_L(x_N) = M_L x_N + c_L,  f_N(x_N) = M_N x_N + c_N,  g(x_N) = G x_N + c_g.
/// The whole model is then linear Gaussian, which makes it the reference case
/// for exactness checks against a textbook Kalman filter.
struct AffineModelSpec {
  ClgDims dims;
  Matrix a_lin, m_lin;
  Vector c_lin;
  Matrix a_non, m_non;
  Vector c_non;
  Matrix b_meas, g_mat;
  Vector c_meas;
  Matrix cov_w_lin, cov_w_non, cov_e;
  GaussianMoment init;
};

class AffineModel final : public ClgModel {
 public:
  explicit AffineModel(AffineModelSpec spec);

  Matrix a_lin(std::size_t l, const Vector& xn) const override;
  Vector f_lin(std::size_t l, const Vector& xn) const override;
  Matrix a_non(std::size_t l, const Vector& xn) const override;
  Vector f_non(std::size_t l, const Vector& xn) const override;
  Matrix b_meas(std::size_t l, const Vector& xn) const override;
  Vector g_meas(std::size_t l, const Vector& xn) const override;

  Matrix state_jacobian(std::size_t l, const Vector& x) const override;
  Matrix measurement_jacobian(std::size_t l, const Vector& x) const override;

  /// Whole-state form x' = F x + u + w, y = H x + v + e.
  const Matrix& transition() const { return f_; }
  const Vector& transition_offset() const { return u_; }
  const Matrix& observation() const { return h_; }
  const Vector& observation_offset() const { return v_; }

 private:
  AffineModelSpec spec_;
  Matrix f_;
  Vector u_;
  Matrix h_;
  Vector v_;
};

}  // namespace turbo
