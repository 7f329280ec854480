#pragma once

#include <Eigen/Dense>

namespace turbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrices whose reciprocal condition number falls below this are treated
/// as singular.
inline constexpr double kMaxConditionNumber = 1e14;

/// Eigenvalues down to -kPsdTolerance * scale are accepted as zero.
inline constexpr double kPsdTolerance = 1e-10;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Inverse of a symmetric positive definite matrix (Cholesky, LU fallback).
/// Throws SingularMatrix when the condition number exceeds kMaxConditionNumber.
Matrix inverse_spd(const Matrix& m);

/// Inverse of a general square matrix via partially pivoted LU.
Matrix inverse_general(const Matrix& m);

/// Largest absolute entry; 0 for empty matrices.
double max_abs(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// True when every eigenvalue is >= -kPsdTolerance * max(1, trace scale).
bool is_psd(const Matrix& m, double tol = kPsdTolerance);

/// Factor L with L*L^T == m for symmetric PSD m. Negative eigenvalues inside
/// the tolerance band are clamped to zero; anything below it throws NotPsd.
Matrix psd_factor(const Matrix& m);

/// Replaces eigenvalues below `floor` by `floor` (symmetric input).
Matrix clamp_eigenvalues(const Matrix& m, double floor);

/// Cholesky factorization A = L L^T for the small systems inside particle
/// loops. Plain loops over a reused buffer; Eigen's LLT spends most of its
/// time in dispatch and allocation at these sizes.
class SmallCholesky {
 public:
  /// Returns false (and leaves the factor unusable) if A is not positive
  /// definite. Only the lower triangle of A is read.
  bool compute(const Matrix& a);

  bool ok() const { return ok_; }
  Eigen::Index size() const { return l_.rows(); }
  const Matrix& factor() const { return l_; }  // lower triangle holds L

  /// x <- L^-1 x
  void solve_lower(double* x) const;
  /// x <- L^-T x
  void solve_upper(double* x) const;
  /// x <- A^-1 x
  void solve(double* x) const;
  void solve_in_place(Vector& x) const { solve(x.data()); }
  /// Every column of b <- A^-1 column.
  void solve_columns(Matrix& b) const;
  /// out <- A^-1 (symmetric).
  void inverse(Matrix& out) const;
  /// x <- mean + L noise
  void transform(const Vector& mean, const Vector& noise, Vector& x) const;

  double log_det() const;
  /// (max L_ii / min L_ii)^2, a lower bound on the condition number.
  double condition_bound() const;

 private:
  Matrix l_;
  bool ok_ = false;
};

void require_square(const Matrix& m, const char* what);
void require_size(const Vector& v, Eigen::Index n, const char* what);

}  // namespace turbo
