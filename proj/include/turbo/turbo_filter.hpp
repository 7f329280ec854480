#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "turbo/ekf.hpp"
#include "turbo/filter.hpp"
#include "turbo/particles.hpp"

namespace turbo {

/// Order of the two constituent filters inside one iteration.
enum class Schedule {
  kEkfFirst,  // TF#1
  kPfFirst,   // TF#2
};

struct TurboOptions {
  Schedule schedule = Schedule::kEkfFirst;
  Eigen::Index n_particles = 100;
  std::size_t n_iterations = 1;
  WeightOptions weights;
  /// When false both PM messages are held at unity, which decouples the EKF
  /// from the particle filter.
  bool exchange_pm = true;

  void validate() const;
};

/// Joint state carried between recursions.
struct TfState {
  EkfState ekf;
  ParticleSet particles;    // predicted x_N particles for the current step
  PmMessageEkf pm_to_ekf;   // last PM message delivered to the EKF
  std::size_t iteration = 0;  // iterations completed in the last recursion
  std::size_t n_iterations = 1;
};

struct TfEstimate {
  Vector x_lin;      // first D_L entries of the final EKF estimate
  Vector x_non;      // weighted particle mean
  Vector x_non_ekf;  // last D_N entries of the final EKF estimate
};

/// One row of the optional per-iteration diagnostic trace.
struct TraceRow {
  std::size_t l = 0;
  std::size_t k = 0;
  double weight_entropy = 0.0;
  double min_eig_c_fe2 = 0.0;
  double max_eig_c_fe2 = 0.0;
  std::size_t z_cov_repairs = 0;
  std::size_t pm_ridges = 0;
};

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// Initial joint state: EKF prediction = model.init(), particles sampled from
/// its x_N marginal.
TfState tf_init(const ClgModel& model, const TurboOptions& options, Rng& rng);

/// One TF#1 recursion (EKF runs before the particle filter in each iteration).
/// Updates `state` to hold the predictions for step l + 1.
TfEstimate tf1_step(TfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                    const TurboOptions& options, Rng& rng,
                    std::vector<TraceRow>* trace = nullptr);

/// One TF#2 recursion (particle filter runs before the EKF in each iteration).
TfEstimate tf2_step(TfState& state, const ClgModel& model, std::size_t l, const Vector& y,
                    const TurboOptions& options, Rng& rng,
                    std::vector<TraceRow>* trace = nullptr);

class TurboFilter final : public Filter {
 public:
  TurboFilter(const ClgModel& model, TurboOptions options, std::uint64_t seed);

  StepEstimate step(std::size_t l, const Vector& y) override;
  std::string name() const override;

  /// Full estimate (both x_N variants) of the most recent step.
  const TfEstimate& last_estimate() const { return last_; }
  const TfState& state() const { return state_; }

  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  const ClgModel& model_;
  TurboOptions options_;
  Rng rng_;
  TfState state_;
  TfEstimate last_;
  bool tracing_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace turbo
