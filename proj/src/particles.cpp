#include "turbo/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "turbo/error.hpp"

namespace turbo {

namespace {

// Cheap conditioning test from the Cholesky diagonal.
bool well_conditioned(const SmallCholesky& chol) {
  return chol.ok() && chol.condition_bound() <= kMaxConditionNumber;
}

}  // namespace

ParticleSet ParticleSet::uniform(Matrix points) {
  const Eigen::Index n = points.cols();
  if (n < 1) throw Error(ErrorCode::kEmptyInput, "particle set is empty");
  return {std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n))};
}

ParticleSet sample_particles(const GaussianMoment& g, Eigen::Index d_n, Eigen::Index n,
                             Rng& rng) {
  const GaussianMoment marginal = marginal_block(g, g.dim() - d_n, d_n);
  const Matrix factor = psd_factor(marginal.cov);
  Matrix points(d_n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    points.col(j) = sample_with_factor(marginal.mean, factor, rng);
  }
  return ParticleSet::uniform(std::move(points));
}

Vector normalize_log_weights(const Vector& log_w) {
  if (log_w.size() == 0) throw Error(ErrorCode::kEmptyInput, "no weights to normalize");
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < log_w.size(); ++j) {
    if (!std::isnan(log_w(j))) top = std::max(top, log_w(j));
  }
  if (!std::isfinite(top)) {
    throw Error(ErrorCode::kAllZeroWeights, "every particle weight is zero or undefined");
  }
  Vector w(log_w.size());
  for (Eigen::Index j = 0; j < log_w.size(); ++j) {
    w(j) = std::isnan(log_w(j)) ? 0.0 : std::exp(log_w(j) - top);
  }
  return w / w.sum();
}

std::vector<Eigen::Index> systematic_resample(const Vector& weights, Rng& rng) {
  const Eigen::Index n = weights.size();
  std::vector<Eigen::Index> ancestors(static_cast<std::size_t>(n));
  const double step = 1.0 / static_cast<double>(n);
  const double start = rng.uniform() * step;
  double cumulative = weights(0);
  Eigen::Index i = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double position = start + static_cast<double>(j) * step;
    while (position > cumulative && i < n - 1) cumulative += weights(++i);
    ancestors[static_cast<std::size_t>(j)] = i;
  }
  return ancestors;
}

double weight_entropy(const Vector& weights) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights(j) > 0.0) h -= weights(j) * std::log(weights(j));
  }
  return h;
}

Vector pf_first_mu(const ParticleSet& particles, const ClgModel& model, std::size_t l,
                   const Vector& y, const GaussianMoment& fe2_lin,
                   const WeightOptions& options) {
  const ClgDims& d = model.dims();
  require_size(y, d.p, "measurement");
  const double p = static_cast<double>(d.p);
  Vector log_w(particles.size());
  Vector xn(d.d_n);
  Vector residual(d.p);
  Matrix bc(d.p, d.d_l);
  Matrix c_ms(d.p, d.p);
  SmallCholesky chol;
  Matrix last_b;
  for (Eigen::Index j = 0; j < particles.size(); ++j) {
    xn = particles.point(j);
    const Matrix b = model.b_meas(l, xn);
    residual = y - model.g_meas(l, xn);
    residual.noalias() -= b * fe2_lin.mean;
    // The factorization only depends on B, which is often the same for all particles.
    if (j == 0 || b != last_b) {
      bc.noalias() = b * fe2_lin.cov;
      c_ms = model.cov_e();
      c_ms.noalias() += bc * b.transpose();
      if (!chol.compute(c_ms)) {
        throw Error(ErrorCode::kSingularMatrix, "measurement covariance is not positive definite");
      }
      last_b = b;
    }
    chol.solve_lower(residual.data());
    log_w(j) = -0.5 * residual.squaredNorm();
    if (options.include_det_ms) log_w(j) -= 0.5 * p * chol.log_det();
  }
  return log_w;
}

PmgEkfResult pmg_ekf_detailed(const ParticleSet& particles, const ClgModel& model,
                              std::size_t l, const GaussianMoment& fe1_lin,
                              const GaussianMoment& fe2_lin, const WeightOptions& options) {
  const ClgDims& d = model.dims();
  const Matrix& cov_w = model.cov_w_lin();
  const Matrix w_w = inverse_spd(cov_w);
  const Vector delta_mean = fe2_lin.mean - fe1_lin.mean;
  const Matrix delta_cov = fe2_lin.cov - fe1_lin.cov;
  const double dl = static_cast<double>(d.d_l);

  PmgEkfResult out;
  out.log_weights.resize(particles.size());

  // Identical EKF marginals carry no PM information: every exponent vanishes
  // and C_z = Cw_L for all particles.
  if (delta_mean.isZero(0.0) && delta_cov.isZero(0.0)) {
    double log_w = 0.0;
    if (options.include_det_pm) {
      SmallCholesky det_chol;
      det_chol.compute(2.0 * cov_w);
      log_w = -0.5 * dl * det_chol.log_det();
    }
    out.log_weights.setConstant(log_w);
    return out;
  }

  Vector xn(d.d_n);
  Vector eta_z(d.d_l), shift_z(d.d_l), eta_pm(d.d_l);
  Matrix ad(d.d_l, d.d_l), c_z(d.d_l, d.d_l), w_pm(d.d_l, d.d_l);
  SmallCholesky chol, chol_pm, det_chol;
  Matrix last_a;
  bool last_repaired = false;
  for (Eigen::Index j = 0; j < particles.size(); ++j) {
    xn = particles.point(j);
    const Matrix a = model.a_lin(l, xn);
    // The weight depends on the particle only through A_L.
    if (j > 0 && a == last_a) {
      out.log_weights(j) = out.log_weights(j - 1);
      if (last_repaired) ++out.repaired;
      continue;
    }
    last_a = a;
    last_repaired = false;
    ad.noalias() = a * delta_cov;
    c_z = cov_w;
    c_z.noalias() += ad * a.transpose();
    c_z = 0.5 * (c_z + c_z.transpose()).eval();
    chol.compute(c_z);
    if (!well_conditioned(chol)) {
      // C_fe2 - C_fe1 is negative semidefinite, so C_z can lose definiteness.
      const double scale = std::max(std::abs(c_z.trace()), cov_w.trace());
      c_z = clamp_eigenvalues(c_z, 1e-12 * scale);
      chol.compute(c_z);
      ++out.repaired;
      last_repaired = true;
    }
    // The exponent is invariant to a common shift of all means; evaluating it
    // relative to f_j keeps the quadratic terms small.
    eta_z.noalias() = a * delta_mean;  // eta_z - f_j
    shift_z = eta_z;
    chol.solve_in_place(shift_z);
    chol.inverse(w_pm);
    w_pm += w_w;
    if (!chol_pm.compute(w_pm)) {
      throw Error(ErrorCode::kSingularMatrix, "PM precision is not positive definite");
    }
    // shift_pm = shift_z + W_w (f_j - f_j)
    eta_pm = shift_z;
    chol_pm.solve_in_place(eta_pm);
    double log_w = 0.5 * (eta_pm.dot(shift_z) - eta_z.dot(shift_z));
    if (options.include_det_pm) {
      det_chol.compute(c_z + cov_w);
      log_w -= 0.5 * dl * det_chol.log_det();
    }
    out.log_weights(j) = log_w;
  }
  return out;
}

Vector pmg_ekf(const ParticleSet& particles, const ClgModel& model, std::size_t l,
               const GaussianMoment& fe1_lin, const GaussianMoment& fe2_lin,
               const WeightOptions& options) {
  return pmg_ekf_detailed(particles, model, l, fe1_lin, fe2_lin, options).log_weights;
}

ResampleResult pf_second_mu_normalize_resample(const ParticleSet& particles,
                                               const Vector& log_w_fe1, const Vector& log_w_pm,
                                               Rng& rng) {
  const Eigen::Index n = particles.size();
  if (log_w_fe1.size() != n || log_w_pm.size() != n || particles.weights.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "weight vectors and particle set differ in size");
  }
  Vector log_w = log_w_fe1 + log_w_pm + particles.weights.array().log().matrix();
  ResampleResult out;
  out.normalized = normalize_log_weights(log_w);
  out.ancestors = systematic_resample(out.normalized, rng);
  Matrix points(particles.dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    points.col(j) = particles.point(out.ancestors[static_cast<std::size_t>(j)]);
  }
  out.particles = ParticleSet::uniform(std::move(points));
  return out;
}

GaussianMoment PmgPfResult::message(Eigen::Index j) const {
  const Eigen::Index d_l = pm_mean.rows();
  return {pm_mean.col(j), pm_cov.middleCols(j * d_l, d_l)};
}

PmgPfResult pmg_pf(const ParticleSet& resampled, const ClgModel& model, std::size_t l,
                   const GaussianMoment& fe2_lin, Rng& rng) {
  const ClgDims& d = model.dims();
  const Eigen::Index n = resampled.size();
  const Matrix w_w = inverse_spd(model.cov_w_non());
  const double ridge = 1e-9 * w_w.trace();
  PmgPfResult out;
  out.predicted.resize(d.d_n, n);
  out.pm_mean.resize(d.d_l, n);
  out.pm_cov.resize(d.d_l, d.d_l * n);
  Vector xn(d.d_n), mean(d.d_n), next(d.d_n), noise(d.d_n), shift(d.d_l);
  Matrix ac(d.d_n, d.d_l), cov(d.d_n, d.d_n), at_ww(d.d_l, d.d_n), precision(d.d_l, d.d_l);
  Matrix pm_cov(d.d_l, d.d_l);
  SmallCholesky chol_pred, chol;
  for (Eigen::Index j = 0; j < n; ++j) {
    xn = resampled.point(j);
    const Matrix a = model.a_non(l, xn);
    const Vector f = model.f_non(l, xn);

    // x_N' ~ N(A eta_fe2 + f, Cw_N + A C_fe2 A^T)
    ac.noalias() = a * fe2_lin.cov;
    cov = model.cov_w_non();
    cov.noalias() += ac * a.transpose();
    if (!chol_pred.compute(cov)) {
      throw Error(ErrorCode::kNotPsd, "x_N prediction covariance not positive definite");
    }
    for (Eigen::Index i = 0; i < d.d_n; ++i) noise(i) = rng.normal();
    mean = f;
    mean.noalias() += a * fe2_lin.mean;
    chol_pred.transform(mean, noise, next);
    out.predicted.col(j) = next;

    // z = x_N' - f_N seen as a measurement of x_L through A_N.
    at_ww.noalias() = a.transpose() * w_w;
    precision.noalias() = at_ww * a;
    chol.compute(precision);
    if (!well_conditioned(chol)) {
      precision.diagonal().array() += ridge;
      if (!chol.compute(precision)) {
        throw Error(ErrorCode::kSingularMatrix, "PM precision is not positive definite");
      }
      ++out.regularized;
    }
    chol.inverse(pm_cov);
    out.pm_cov.middleCols(j * d.d_l, d.d_l) = pm_cov;
    next -= f;
    shift.noalias() = at_ww * next;
    chol.solve_in_place(shift);
    out.pm_mean.col(j) = shift;
  }
  return out;
}

PmMessageEkf pmc_pf(const PmgPfResult& generated, const ParticleSet& resampled) {
  const Eigen::Index n = resampled.size();
  if (n == 0 || generated.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "no PM messages to merge");
  }
  if (generated.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "PM messages and particles differ in count");
  }
  const Eigen::Index d_l = generated.pm_mean.rows();
  const Eigen::Index d_n = resampled.dim();
  const double w = 1.0 / static_cast<double>(n);

  // Uniform mixture of N(eta_j, C_j) x delta(x_N - x_j): block means first,
  // then centered second moments.
  Vector mean(d_l + d_n);
  mean.head(d_l) = generated.pm_mean.rowwise().mean();
  mean.tail(d_n) = resampled.points.rowwise().mean();

  Matrix cov = Matrix::Zero(d_l + d_n, d_l + d_n);
  Vector centered(d_l + d_n);
  for (Eigen::Index j = 0; j < n; ++j) {
    centered.head(d_l) = generated.pm_mean.col(j) - mean.head(d_l);
    centered.tail(d_n) = resampled.point(j) - mean.tail(d_n);
    cov.noalias() += w * centered * centered.transpose();
    cov.topLeftCorner(d_l, d_l) += w * generated.pm_cov.middleCols(j * d_l, d_l);
  }
  GaussianMoment merged{std::move(mean), symmetrize(cov)};
  if (!is_psd(merged.cov)) throw Error(ErrorCode::kNotPsd, "merged PM covariance is not PSD");
  return PmMessageEkf::from(std::move(merged));
}

}  // namespace turbo
