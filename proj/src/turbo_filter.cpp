#include "turbo/turbo_filter.hpp"

#include <iomanip>
#include <limits>
#include <ostream>

#include "turbo/error.hpp"

namespace turbo {

namespace {

Vector weighted_mean(const ParticleSet& particles, const Vector& weights) {
  return particles.points * weights;
}

void record(std::vector<TraceRow>* trace, std::size_t l, std::size_t k, const Vector& weights,
            const GaussianMoment& fe2, std::size_t repairs, std::size_t ridges) {
  if (trace == nullptr) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(fe2.cov, Eigen::EigenvaluesOnly);
  trace->push_back({l, k, weight_entropy(weights), es.eigenvalues().minCoeff(),
                    es.eigenvalues().maxCoeff(), repairs, ridges});
}

Vector zero_log_weights(Eigen::Index n) { return Vector::Zero(n); }

void check_state(const TfState& state, const ClgModel& model) {
  if (state.particles.dim() != model.dims().d_n || state.ekf.fp.dim() != model.dims().d()) {
    throw Error(ErrorCode::kDimensionMismatch, "turbo filter state does not match the model");
  }
}

}  // namespace

void TurboOptions::validate() const {
  if (n_particles < 1) throw Error(ErrorCode::kInvalidParams, "n_particles must be >= 1");
  if (n_iterations < 1) throw Error(ErrorCode::kInvalidParams, "n_iterations must be >= 1");
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "l,k,weight_entropy,min_eig_c_fe2,max_eig_c_fe2,z_cov_repairs,pm_ridges\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.l << ',' << r.k << ',' << r.weight_entropy << ',' << r.min_eig_c_fe2 << ','
        << r.max_eig_c_fe2 << ',' << r.z_cov_repairs << ',' << r.pm_ridges << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing trace CSV");
}

TfState tf_init(const ClgModel& model, const TurboOptions& options, Rng& rng) {
  options.validate();
  TfState state;
  state.ekf.fp = model.init();
  state.ekf.fe = model.init();
  state.particles = sample_particles(model.init(), model.dims().d_n, options.n_particles, rng);
  state.pm_to_ekf = PmMessageEkf::flat();
  state.n_iterations = options.n_iterations;
  return state;
}

TfEstimate tf1_step(TfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                    const TurboOptions& options, Rng& rng, std::vector<TraceRow>* trace) {
  check_state(state, model);
  const ClgDims& d = model.dims();
  const FirstMu fe1 = ekf_first_mu(state.ekf.fp, model, l, y);

  PmMessageEkf pm = PmMessageEkf::flat();
  ParticleSet current = state.particles;
  Matrix predicted;
  Vector x_non;
  for (std::size_t k = 1; k <= options.n_iterations; ++k) {
    const SecondMu fe2 = ekf_second_mu(fe1, pm, d.d_l);
    const Vector log_w_fe1 = pf_first_mu(current, model, l, y, fe2.fe2_lin, options.weights);
    PmgEkfResult pm_weights;
    if (options.exchange_pm) {
      pm_weights = pmg_ekf_detailed(current, model, l, fe1.fe1_lin, fe2.fe2_lin, options.weights);
    } else {
      pm_weights.log_weights = zero_log_weights(current.size());
    }
    ResampleResult resampled =
        pf_second_mu_normalize_resample(current, log_w_fe1, pm_weights.log_weights, rng);
    x_non = weighted_mean(current, resampled.normalized);

    PmgPfResult generated = pmg_pf(resampled.particles, model, l, fe2.fe2_lin, rng);
    pm = options.exchange_pm ? pmc_pf(generated, resampled.particles)
                             : PmMessageEkf::flat();
    record(trace, l, k, resampled.normalized, fe2.fe2, pm_weights.repaired, generated.regularized);
    current = std::move(resampled.particles);
    predicted = std::move(generated.predicted);
  }

  const SecondMu final_fe2 = ekf_second_mu(fe1, pm, d.d_l);
  state.ekf.fe = final_fe2.fe2;
  state.ekf.fp = ekf_time_update(final_fe2.fe2, model, l);
  state.particles = ParticleSet::uniform(std::move(predicted));
  state.pm_to_ekf = std::move(pm);
  state.iteration = options.n_iterations;
  state.n_iterations = options.n_iterations;
  return {final_fe2.fe2.mean.head(d.d_l), std::move(x_non), final_fe2.fe2.mean.tail(d.d_n)};
}

TfEstimate tf2_step(TfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                    const TurboOptions& options, Rng& rng, std::vector<TraceRow>* trace) {
  check_state(state, model);
  const ClgDims& d = model.dims();
  const FirstMu fe1 = ekf_first_mu(state.ekf.fp, model, l, y);

  PmMessageEkf pm = PmMessageEkf::flat();
  SecondMu fe2 = ekf_second_mu(fe1, pm, d.d_l);
  ParticleSet current = state.particles;
  Vector log_w_pm = zero_log_weights(current.size());
  Matrix predicted;
  for (std::size_t k = 1; k <= options.n_iterations; ++k) {
    const Vector log_w_fe1 = pf_first_mu(current, model, l, y, fe2.fe2_lin, options.weights);
    ResampleResult resampled = pf_second_mu_normalize_resample(current, log_w_fe1, log_w_pm, rng);

    PmgPfResult generated = pmg_pf(resampled.particles, model, l, fe2.fe2_lin, rng);
    pm = options.exchange_pm ? pmc_pf(generated, resampled.particles)
                             : PmMessageEkf::flat();
    fe2 = ekf_second_mu(fe1, pm, d.d_l);

    std::size_t repairs = 0;
    if (options.exchange_pm) {
      PmgEkfResult pm_weights = pmg_ekf_detailed(resampled.particles, model, l, fe1.fe1_lin,
                                                 fe2.fe2_lin, options.weights);
      log_w_pm = std::move(pm_weights.log_weights);
      repairs = pm_weights.repaired;
    } else {
      log_w_pm = zero_log_weights(current.size());
    }
    record(trace, l, k, resampled.normalized, fe2.fe2, repairs, generated.regularized);
    current = std::move(resampled.particles);
    predicted = std::move(generated.predicted);
  }

  // Final weights over the last resampled set, combining the measurement with
  // the PM weights produced by the last iteration.
  const Vector log_w_fe1 = pf_first_mu(current, model, l, y, fe2.fe2_lin, options.weights);
  const Vector final_weights = normalize_log_weights(
      log_w_fe1 + log_w_pm + current.weights.array().log().matrix());
  Vector x_non = weighted_mean(current, final_weights);

  state.ekf.fe = fe2.fe2;
  state.ekf.fp = ekf_time_update(fe2.fe2, model, l);
  state.particles = ParticleSet::uniform(std::move(predicted));
  state.pm_to_ekf = std::move(pm);
  state.iteration = options.n_iterations;
  state.n_iterations = options.n_iterations;
  return {fe2.fe2.mean.head(d.d_l), std::move(x_non), fe2.fe2.mean.tail(d.d_n)};
}

TurboFilter::TurboFilter(const ClgModel& model, TurboOptions options, std::uint64_t seed)
    : model_(model), options_(options), rng_(seed) {
  state_ = tf_init(model_, options_, rng_);
}

StepEstimate TurboFilter::step(std::size_t l, const Vector& y) {
  std::vector<TraceRow>* sink = tracing_ ? &trace_ : nullptr;
  last_ = options_.schedule == Schedule::kEkfFirst
              ? tf1_step(state_, model_, l, y, options_, rng_, sink)
              : tf2_step(state_, model_, l, y, options_, rng_, sink);
  return {last_.x_lin, last_.x_non};
}

std::string TurboFilter::name() const {
  return options_.schedule == Schedule::kEkfFirst ? "tf1" : "tf2";
}

}  // namespace turbo
