#pragma once

#include <cstdint>

#include "turbo/filter.hpp"
#include "turbo/rng.hpp"
#include "turbo/ssm.hpp"

namespace turbo {

/// Bootstrap particle filter over the whole state; column j of `points` is
/// particle j (predicted for the current step).
struct SirState {
  Matrix points;
  Matrix process_factor;  // L with L L^T = Cw
};

/// Throws InvalidParams unless Ce is positive definite.
SirState sir_init(const ClgModel& model, Eigen::Index n_particles, Rng& rng);

/// Weight by N(y; h(x), Ce), estimate, resample systematically, propagate
/// through f(x) + w.
StepEstimate sir_pf_step(SirState& state, const ClgModel& model, std::size_t l, const Vector& y,
                         Rng& rng);

class SirPf final : public Filter {
 public:
  SirPf(const ClgModel& model, Eigen::Index n_particles, std::uint64_t seed);

  StepEstimate step(std::size_t l, const Vector& y) override;
  std::string name() const override { return "pf"; }

 private:
  const ClgModel& model_;
  Rng rng_;
  SirState state_;
};

}  // namespace turbo
