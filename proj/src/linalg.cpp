#include "turbo/linalg.hpp"

#include <cmath>
#include <string>

#include "turbo/error.hpp"

namespace turbo {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

double trace_scale(const Matrix& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::abs(m(i, i));
  return std::max(1.0, s);
}

}  // namespace

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " is not square");
  }
}

void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has size " + std::to_string(v.size()) + ", expected " +
                    std::to_string(n));
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = max_abs(m);
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

bool is_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * trace_scale(m);
}

Matrix inverse_general(const Matrix& m) {
  require_square(m, "matrix");
  if (m.size() == 0) return m;
  if (!all_finite(m)) throw Error(ErrorCode::kSingularMatrix, "non-finite entries");
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond * kMaxConditionNumber >= 1.0)) {
    throw Error(ErrorCode::kSingularMatrix,
                "condition number estimate " + std::to_string(1.0 / rcond) + " too large");
  }
  return lu.inverse();
}

Matrix inverse_spd(const Matrix& m) {
  require_square(m, "matrix");
  if (m.size() == 0) return m;
  if (!all_finite(m)) throw Error(ErrorCode::kSingularMatrix, "non-finite entries");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success && llt.rcond() * kMaxConditionNumber >= 1.0) {
    return symmetrize(llt.solve(Matrix::Identity(m.rows(), m.cols())));
  }
  return symmetrize(inverse_general(m));
}

bool SmallCholesky::compute(const Matrix& a) {
  const Eigen::Index n = a.rows();
  l_.resize(n, n);
  ok_ = false;
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= l_(j, k) * l_(j, k);
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l_(i, k) * l_(j, k);
      l_(i, j) = v / ljj;
    }
  }
  ok_ = true;
  return true;
}

void SmallCholesky::solve_lower(double* x) const {
  const Eigen::Index n = l_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = x[i];
    for (Eigen::Index k = 0; k < i; ++k) acc -= l_(i, k) * x[k];
    x[i] = acc / l_(i, i);
  }
}

void SmallCholesky::solve(double* x) const {
  solve_lower(x);
  solve_upper(x);
}

void SmallCholesky::solve_upper(double* x) const {
  const Eigen::Index n = l_.rows();
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double acc = x[i];
    for (Eigen::Index k = i + 1; k < n; ++k) acc -= l_(k, i) * x[k];
    x[i] = acc / l_(i, i);
  }
}

void SmallCholesky::solve_columns(Matrix& b) const {
  for (Eigen::Index c = 0; c < b.cols(); ++c) solve(b.col(c).data());
}

void SmallCholesky::inverse(Matrix& out) const {
  const Eigen::Index n = l_.rows();
  out.setIdentity(n, n);
  solve_columns(out);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
  }
}

void SmallCholesky::transform(const Vector& mean, const Vector& noise, Vector& x) const {
  const Eigen::Index n = l_.rows();
  x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = mean(i);
    for (Eigen::Index k = 0; k <= i; ++k) acc += l_(i, k) * noise(k);
    x(i) = acc;
  }
}

double SmallCholesky::log_det() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < l_.rows(); ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

double SmallCholesky::condition_bound() const {
  const auto diag = l_.diagonal();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  return ratio * ratio;
}

Matrix psd_factor(const Matrix& m) {
  require_square(m, "covariance");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -kPsdTolerance * trace_scale(m)) {
    throw Error(ErrorCode::kNotPsd, "covariance has a negative eigenvalue " +
                                        std::to_string(ev.minCoeff()));
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

Matrix clamp_eigenvalues(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector ev = es.eigenvalues().cwiseMax(floor);
  return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace turbo
