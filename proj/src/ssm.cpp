#include "turbo/ssm.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "turbo/error.hpp"

namespace turbo {

void ClgDims::validate() const {
  if (d_l < 1 || d_n < 1 || p < 1) {
    throw Error(ErrorCode::kInvalidParams, "d_l, d_n and p must all be at least 1");
  }
}

ClgModel::ClgModel(ClgDims dims, Matrix cov_w_lin, Matrix cov_w_non, Matrix cov_e,
                   GaussianMoment init)
    : dims_(dims),
      cov_w_lin_(std::move(cov_w_lin)),
      cov_w_non_(std::move(cov_w_non)),
      cov_e_(std::move(cov_e)),
      init_(std::move(init)) {
  dims_.validate();
  auto check = [](const Matrix& m, Eigen::Index n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
      throw Error(ErrorCode::kDimensionMismatch, std::string(name) + " has the wrong shape");
    }
    if (!is_symmetric(m) || !is_psd(m)) {
      throw Error(ErrorCode::kInvalidParams, std::string(name) + " is not symmetric PSD");
    }
  };
  check(cov_w_lin_, dims_.d_l, "cov_w_lin");
  check(cov_w_non_, dims_.d_n, "cov_w_non");
  check(cov_e_, dims_.p, "cov_e");
  check(init_.cov, dims_.d(), "init covariance");
  require_size(init_.mean, dims_.d(), "init mean");
  cov_w_ = Matrix::Zero(dims_.d(), dims_.d());
  cov_w_.topLeftCorner(dims_.d_l, dims_.d_l) = cov_w_lin_;
  cov_w_.bottomRightCorner(dims_.d_n, dims_.d_n) = cov_w_non_;
}

Matrix ClgModel::state_jacobian(std::size_t l, const Vector& x) const {
  return finite_difference_state_jacobian(*this, l, x);
}

Matrix ClgModel::measurement_jacobian(std::size_t l, const Vector& x) const {
  return finite_difference_measurement_jacobian(*this, l, x);
}

Vector clg_compose_f(const ClgModel& model, std::size_t l, const Vector& x) {
  const ClgDims& d = model.dims();
  require_size(x, d.d(), "state");
  const Vector xl = x.head(d.d_l);
  const Vector xn = x.tail(d.d_n);
  Vector out(d.d());
  out.head(d.d_l) = model.a_lin(l, xn) * xl + model.f_lin(l, xn);
  out.tail(d.d_n) = model.a_non(l, xn) * xl + model.f_non(l, xn);
  return out;
}

Vector clg_compose_h(const ClgModel& model, std::size_t l, const Vector& x) {
  const ClgDims& d = model.dims();
  require_size(x, d.d(), "state");
  const Vector xn = x.tail(d.d_n);
  return model.b_meas(l, xn) * x.head(d.d_l) + model.g_meas(l, xn);
}

namespace {

template <typename Fn>
Matrix central_difference(const Vector& x, Eigen::Index rows, Fn&& fn) {
  Matrix jac(rows, x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const Vector plus = fn(probe);
    probe(i) = x(i) - h;
    const Vector minus = fn(probe);
    probe(i) = x(i);
    jac.col(i) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonDifferentiablePoint, std::string(what) + " is not finite");
  }
}

}  // namespace

Matrix finite_difference_state_jacobian(const ClgModel& model, std::size_t l, const Vector& x) {
  return central_difference(x, model.dims().d(),
                            [&](const Vector& p) { return clg_compose_f(model, l, p); });
}

Matrix finite_difference_measurement_jacobian(const ClgModel& model, std::size_t l,
                                              const Vector& x) {
  return central_difference(x, model.dims().p,
                            [&](const Vector& p) { return clg_compose_h(model, l, p); });
}

Linearization linearize_transition(const ClgModel& model, std::size_t l, const Vector& x_fe) {
  require_size(x_fe, model.dims().d(), "linearization point");
  Linearization lin;
  lin.f_mat = model.state_jacobian(l, x_fe);
  require_finite(lin.f_mat, "state Jacobian");
  lin.u_vec = clg_compose_f(model, l, x_fe) - lin.f_mat * x_fe;
  return lin;
}

Linearization linearize_measurement(const ClgModel& model, std::size_t l, const Vector& x_fp) {
  require_size(x_fp, model.dims().d(), "linearization point");
  Linearization lin;
  lin.h_mat = model.measurement_jacobian(l, x_fp);
  require_finite(lin.h_mat, "measurement Jacobian");
  lin.v_vec = clg_compose_h(model, l, x_fp) - lin.h_mat * x_fp;
  return lin;
}

Linearization linearize(const ClgModel& model, std::size_t l, const Vector& x_fe,
                        const Vector& x_fp) {
  Linearization lin = linearize_transition(model, l, x_fe);
  Linearization meas = linearize_measurement(model, l, x_fp);
  lin.h_mat = std::move(meas.h_mat);
  lin.v_vec = std::move(meas.v_vec);
  return lin;
}

Trajectory simulate(const ClgModel& model, std::size_t t_steps, std::uint64_t seed) {
  if (t_steps < 1) throw Error(ErrorCode::kInvalidParams, "t_steps must be at least 1");
  const ClgDims& d = model.dims();
  Rng rng(seed);
  const Matrix w_factor = psd_factor(model.cov_w());
  const Matrix e_factor = psd_factor(model.cov_e());

  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(static_cast<Eigen::Index>(t_steps), d.d());
  traj.measurements.resize(static_cast<Eigen::Index>(t_steps), d.p);
  Vector x = sample(model.init(), rng);
  for (std::size_t l = 0; l < t_steps; ++l) {
    const auto row = static_cast<Eigen::Index>(l);
    traj.states.row(row) = x.transpose();
    const Vector y = sample_with_factor(clg_compose_h(model, l, x), e_factor, rng);
    traj.measurements.row(row) = y.transpose();
    x = sample_with_factor(clg_compose_f(model, l, x), w_factor, rng);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const Eigen::Index d = trajectory.states.cols();
  const Eigen::Index p = trajectory.measurements.cols();
  out << "l";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x_" << i;
  for (Eigen::Index i = 0; i < p; ++i) out << ",y_" << i;
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < trajectory.states.rows(); ++r) {
    out << r;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << trajectory.states(r, i);
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << trajectory.measurements(r, i);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing trajectory CSV");
}

Trajectory read_trajectory_csv(std::istream& in, const ClgDims& dims) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIoError, "empty trajectory CSV");
  std::vector<std::vector<double>> rows;
  const Eigen::Index expected = 1 + dims.d() + dims.p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIoError, "malformed number '" + cell + "'");
      }
    }
    if (static_cast<Eigen::Index>(values.size()) != expected) {
      throw Error(ErrorCode::kDimensionMismatch, "trajectory row has wrong column count");
    }
    rows.push_back(std::move(values));
  }
  Trajectory traj;
  const auto n = static_cast<Eigen::Index>(rows.size());
  traj.states.resize(n, dims.d());
  traj.measurements.resize(n, dims.p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& v = rows[static_cast<std::size_t>(r)];
    for (Eigen::Index i = 0; i < dims.d(); ++i) traj.states(r, i) = v[static_cast<std::size_t>(1 + i)];
    for (Eigen::Index i = 0; i < dims.p; ++i) {
      traj.measurements(r, i) = v[static_cast<std::size_t>(1 + dims.d() + i)];
    }
  }
  return traj;
}

}  // namespace turbo
