#pragma once

#include "turbo/filter.hpp"
#include "turbo/gaussian.hpp"
#include "turbo/ssm.hpp"

namespace turbo {

struct EkfState {
  GaussianMoment fp;  // prediction of x_l from y_0..y_{l-1}
  GaussianMoment fe;  // latest estimate of x_l
};

/// Result of the measurement update driven by the real measurement.
struct FirstMu {
  GaussianCanonical fe1_canonical;
  GaussianMoment fe1;
  GaussianMoment fe1_lin;  // marginal over x_L
};

/// Result of the measurement update driven by the pseudo-measurement.
struct SecondMu {
  GaussianMoment fe2;
  GaussianMoment fe2_lin;  // marginal over x_L
};

/// Pseudo-measurement message passed from the particle filter to the EKF.
/// `unity` marks the flat message used before any PM is available; otherwise
/// `message` holds its mean and (possibly singular) covariance.
struct PmMessageEkf {
  bool unity = true;
  GaussianMoment message;

  static PmMessageEkf flat() { return {}; }
  static PmMessageEkf from(GaussianMoment g) { return {false, std::move(g)}; }
};

/// Prediction N(F eta + u, Cw + F C F^T) with F, u linearized at estimate.mean.
GaussianMoment ekf_time_update(const GaussianMoment& estimate, const ClgModel& model,
                               std::size_t l);

/// Information-form update of the prediction with y; the measurement model is
/// linearized at prediction.mean.
FirstMu ekf_first_mu(const GaussianMoment& prediction, const ClgModel& model, std::size_t l,
                     const Vector& y);

/// Product of fe1 with the PM message, evaluated as
///   C_fe2 = W C_pm,  eta_fe2 = W (C_pm w_fe1 + eta_pm),  W = (C_pm W_fe1 + I)^-1.
/// A unity message returns fe1 unchanged.
SecondMu ekf_second_mu(const FirstMu& fe1, const PmMessageEkf& pm, Eigen::Index d_l);

/// Standalone extended Kalman filter (first MU followed by time update).
class Ekf final : public Filter {
 public:
  explicit Ekf(const ClgModel& model);

  StepEstimate step(std::size_t l, const Vector& y) override;
  std::string name() const override { return "ekf"; }

  const EkfState& state() const { return state_; }

 private:
  const ClgModel& model_;
  EkfState state_;
};

}  // namespace turbo
