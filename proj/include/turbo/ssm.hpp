#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "turbo/gaussian.hpp"
#include "turbo/linalg.hpp"
#include "turbo/rng.hpp"

namespace turbo {

/// Sizes of a conditionally linear Gaussian model. The state is laid out as
/// x = [x_L; x_N] with x_L the first d_l coordinates.
struct ClgDims {
  Eigen::Index d_l = 1;
  Eigen::Index d_n = 1;
  Eigen::Index p = 1;

  Eigen::Index d() const { return d_l + d_n; }
  void validate() const;
};

/// Conditionally linear Gaussian state-space model:
///
///   x_L' = A_L(x_N) x_L + f_L(x_N) + w_L,   w_L ~ N(0, Cw_L)
///   x_N' = A_N(x_N) x_L + f_N(x_N) + w_N,   w_N ~ N(0, Cw_N)
///   y    = B(x_N) x_L + g(x_N) + e,          e   ~ N(0, Ce)
///
/// Implementations supply the slot functions. The default Jacobians use
/// central differences; models with closed forms should override them.
class ClgModel {
 public:
  virtual ~ClgModel() = default;

  const ClgDims& dims() const { return dims_; }

  virtual Matrix a_lin(std::size_t l, const Vector& xn) const = 0;
  virtual Vector f_lin(std::size_t l, const Vector& xn) const = 0;
  virtual Matrix a_non(std::size_t l, const Vector& xn) const = 0;
  virtual Vector f_non(std::size_t l, const Vector& xn) const = 0;
  virtual Matrix b_meas(std::size_t l, const Vector& xn) const = 0;
  virtual Vector g_meas(std::size_t l, const Vector& xn) const = 0;

  const Matrix& cov_w_lin() const { return cov_w_lin_; }
  const Matrix& cov_w_non() const { return cov_w_non_; }
  const Matrix& cov_e() const { return cov_e_; }
  /// Block-diagonal process noise covariance of the whole state.
  const Matrix& cov_w() const { return cov_w_; }
  const GaussianMoment& init() const { return init_; }

  /// d f(x) / d x, a D x D matrix.
  virtual Matrix state_jacobian(std::size_t l, const Vector& x) const;
  /// d h(x) / d x, a P x D matrix (H^T in column-vector convention).
  virtual Matrix measurement_jacobian(std::size_t l, const Vector& x) const;

 protected:
  /// Validates shapes and PSD-ness of the noise model.
  ClgModel(ClgDims dims, Matrix cov_w_lin, Matrix cov_w_non, Matrix cov_e, GaussianMoment init);

 private:
  ClgDims dims_;
  Matrix cov_w_lin_;
  Matrix cov_w_non_;
  Matrix cov_e_;
  Matrix cov_w_;
  GaussianMoment init_;
};

/// Whole-state transition f(x) = [A_L x_L + f_L; A_N x_L + f_N].
Vector clg_compose_f(const ClgModel& model, std::size_t l, const Vector& x);

/// Whole-state measurement function h(x) = B x_L + g.
Vector clg_compose_h(const ClgModel& model, std::size_t l, const Vector& x);

/// Central-difference Jacobian of clg_compose_f / clg_compose_h; step is
/// 1e-6 * max(1, |x_i|). Used as the default Jacobian and as a test oracle.
Matrix finite_difference_state_jacobian(const ClgModel& model, std::size_t l, const Vector& x);
Matrix finite_difference_measurement_jacobian(const ClgModel& model, std::size_t l,
                                              const Vector& x);

/// First-order expansion x' = F x + u + w, y = H^T x + v + e.
struct Linearization {
  Matrix f_mat;  // F, D x D, evaluated at x_fe
  Vector u_vec;  // f(x_fe) - F x_fe
  Matrix h_mat;  // H^T, P x D, evaluated at x_fp
  Vector v_vec;  // h(x_fp) - H^T x_fp
};

Linearization linearize(const ClgModel& model, std::size_t l, const Vector& x_fe,
                        const Vector& x_fp);

/// Linearizes only the transition (F, u); h_mat and v_vec are left empty.
Linearization linearize_transition(const ClgModel& model, std::size_t l, const Vector& x_fe);

/// Linearizes only the measurement (H^T, v); f_mat and u_vec are left empty.
Linearization linearize_measurement(const ClgModel& model, std::size_t l, const Vector& x_fp);

/// True states x_0..x_{T-1} and measurements y_0..y_{T-1} (row l holds step l).
struct Trajectory {
  Matrix states;
  Matrix measurements;
  std::uint64_t seed = 0;

  std::size_t steps() const { return static_cast<std::size_t>(states.rows()); }
  Vector state(std::size_t l) const { return states.row(static_cast<Eigen::Index>(l)).transpose(); }
  Vector measurement(std::size_t l) const {
    return measurements.row(static_cast<Eigen::Index>(l)).transpose();
  }
};

/// Forward-samples the model: x_0 ~ init, y_l = h(x_l) + e_l,
/// x_{l+1} = f(x_l) + w_l. Per step the draws are taken in the order
/// measurement noise, then process noise.
Trajectory simulate(const ClgModel& model, std::size_t t_steps, std::uint64_t seed);

/// CSV with header "l,x_0..x_{D-1},y_0..y_{P-1}", one row per step, l from 0.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in, const ClgDims& dims);

}  // namespace turbo
