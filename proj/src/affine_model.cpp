#include "turbo/affine_model.hpp"

#include "turbo/error.hpp"

namespace turbo {

namespace {

void check_shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const char* what) {
  if (m.rows() != r || m.cols() != c) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " has the wrong shape");
  }
}

}  // namespace

AffineModel::AffineModel(AffineModelSpec spec)
    : ClgModel(spec.dims, spec.cov_w_lin, spec.cov_w_non, spec.cov_e, spec.init),
      spec_(std::move(spec)) {
  const ClgDims& d = dims();
  check_shape(spec_.a_lin, d.d_l, d.d_l, "a_lin");
  check_shape(spec_.m_lin, d.d_l, d.d_n, "m_lin");
  check_shape(spec_.a_non, d.d_n, d.d_l, "a_non");
  check_shape(spec_.m_non, d.d_n, d.d_n, "m_non");
  check_shape(spec_.b_meas, d.p, d.d_l, "b_meas");
  check_shape(spec_.g_mat, d.p, d.d_n, "g_mat");
  require_size(spec_.c_lin, d.d_l, "c_lin");
  require_size(spec_.c_non, d.d_n, "c_non");
  require_size(spec_.c_meas, d.p, "c_meas");

  f_.resize(d.d(), d.d());
  f_ << spec_.a_lin, spec_.m_lin, spec_.a_non, spec_.m_non;
  u_.resize(d.d());
  u_ << spec_.c_lin, spec_.c_non;
  h_.resize(d.p, d.d());
  h_ << spec_.b_meas, spec_.g_mat;
  v_ = spec_.c_meas;
}

Matrix AffineModel::a_lin(std::size_t, const Vector&) const { return spec_.a_lin; }
Vector AffineModel::f_lin(std::size_t, const Vector& xn) const {
  return spec_.m_lin * xn + spec_.c_lin;
}
Matrix AffineModel::a_non(std::size_t, const Vector&) const { return spec_.a_non; }
Vector AffineModel::f_non(std::size_t, const Vector& xn) const {
  return spec_.m_non * xn + spec_.c_non;
}
Matrix AffineModel::b_meas(std::size_t, const Vector&) const { return spec_.b_meas; }
Vector AffineModel::g_meas(std::size_t, const Vector& xn) const {
  return spec_.g_mat * xn + spec_.c_meas;
}

Matrix AffineModel::state_jacobian(std::size_t, const Vector&) const { return f_; }
Matrix AffineModel::measurement_jacobian(std::size_t, const Vector&) const { return h_; }

}  // namespace turbo
