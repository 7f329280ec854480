#include <gtest/gtest.h>

#include "test_util.hpp"
#include "turbo/affine_model.hpp"
#include "turbo/agent_model.hpp"
#include "turbo/ekf.hpp"
#include "turbo/error.hpp"

using namespace turbo;
using namespace turbo::testing;

namespace {

// Scalar x_L and x_N evolving independently: x' = diag(f) x + u, y = b x_L.
AffineModel scalar_pair_model(double f, double u, double cw, double b, double ce) {
  AffineModelSpec s;
  s.dims = {1, 1, 1};
  s.a_lin = Matrix::Constant(1, 1, f);
  s.m_lin = Matrix::Zero(1, 1);
  s.c_lin = Vector::Constant(1, u);
  s.a_non = Matrix::Zero(1, 1);
  s.m_non = Matrix::Constant(1, 1, f);
  s.c_non = Vector::Constant(1, u);
  s.b_meas = Matrix::Constant(1, 1, b);
  s.g_mat = Matrix::Zero(1, 1);
  s.c_meas = Vector::Zero(1);
  s.cov_w_lin = s.cov_w_non = Matrix::Constant(1, 1, cw);
  s.cov_e = Matrix::Constant(1, 1, ce);
  s.init = GaussianMoment::standard(2);
  return AffineModel(s);
}

FirstMu first_mu_from(const GaussianMoment& g, Eigen::Index d_l) {
  FirstMu mu;
  mu.fe1 = g;
  mu.fe1_canonical = to_canonical(g);
  mu.fe1_lin = marginal_block(g, 0, d_l);
  return mu;
}

}  // namespace

TEST(EkfTimeUpdate, IdentityTransition) {
  const AffineModel model = scalar_pair_model(1.0, 0.0, 0.0, 1.0, 1.0);
  Rng rng(1);
  const GaussianMoment g = random_gaussian(2, rng);
  const GaussianMoment p = ekf_time_update(g, model, 0);
  EXPECT_LT(rel_diff(p.mean, g.mean), 1e-15);
  EXPECT_LT(rel_diff(p.cov, g.cov), 1e-15);
}

TEST(EkfTimeUpdate, ScalarExample) {
  const AffineModel model = scalar_pair_model(0.5, 1.0, 0.25, 1.0, 1.0);
  const GaussianMoment g{Eigen::Vector2d(2.0, 2.0), Matrix::Identity(2, 2)};
  const GaussianMoment p = ekf_time_update(g, model, 0);
  EXPECT_DOUBLE_EQ(p.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(p.cov(0, 0), 0.5);
  const GaussianMoment oracle = affine_propagate(marginal_block(g, 0, 1), Matrix::Constant(1, 1, 0.5),
                                                 Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 0.25));
  EXPECT_DOUBLE_EQ(oracle.mean(0), p.mean(0));
  EXPECT_DOUBLE_EQ(oracle.cov(0, 0), p.cov(0, 0));
}

TEST(EkfTimeUpdate, LinearModelMatchesKalmanPredict) {
  Rng rng(6);
  const AffineModel model(random_affine_spec(rng));
  const GaussianMoment g = random_gaussian(4, rng);
  const GaussianMoment p = ekf_time_update(g, model, 0);
  const Matrix& f = model.transition();
  EXPECT_LT(rel_diff(p.mean, f * g.mean + model.transition_offset()), 1e-12);
  EXPECT_LT(rel_diff(p.cov, f * g.cov * f.transpose() + model.cov_w()), 1e-12);
}

TEST(EkfFirstMu, UninformativeMeasurement) {
  const AffineModel model = scalar_pair_model(1.0, 0.0, 0.1, 0.0, 1.0);
  Rng rng(2);
  const GaussianMoment fp = random_gaussian(2, rng);
  const FirstMu mu = ekf_first_mu(fp, model, 0, Vector::Constant(1, 3.0));
  EXPECT_LT(rel_diff(mu.fe1.mean, fp.mean), 1e-12);
  EXPECT_LT(rel_diff(mu.fe1.cov, fp.cov), 1e-12);
}

TEST(EkfFirstMu, ScalarKalmanUpdate) {
  const AffineModel model = scalar_pair_model(1.0, 0.0, 0.1, 1.0, 1.0);
  const FirstMu mu = ekf_first_mu(GaussianMoment::standard(2), model, 0, Vector::Constant(1, 2.0));
  EXPECT_NEAR(mu.fe1_lin.mean(0), 1.0, 1e-15);
  EXPECT_NEAR(mu.fe1_lin.cov(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(mu.fe1.mean(1), 0.0, 1e-15);
  EXPECT_NEAR(mu.fe1.cov(1, 1), 1.0, 1e-15);
}

TEST(EkfFirstMu, LinearModelMatchesGainForm) {
  Rng rng(7);
  const AffineModel model(random_affine_spec(rng));
  const GaussianMoment fp = random_gaussian(4, rng);
  const Vector y = random_vector(3, rng);
  KalmanOracle kf = kalman_oracle(model);
  kf.x = fp.mean;
  kf.p = fp.cov;
  Matrix pf;
  const Vector xf = kf.step(y, &pf);
  const FirstMu mu = ekf_first_mu(fp, model, 0, y);
  EXPECT_LT(rel_diff(mu.fe1.mean, xf), 1e-10);
  EXPECT_LT(rel_diff(mu.fe1.cov, pf), 1e-10);
  EXPECT_LT(rel_diff(mu.fe1_lin.cov, pf.topLeftCorner(2, 2)), 1e-10);
}

TEST(EkfSecondMu, FlatMessageReturnsFirstUpdate) {
  Rng rng(3);
  const FirstMu mu = first_mu_from(random_gaussian(4, rng), 2);
  const SecondMu out = ekf_second_mu(mu, PmMessageEkf::flat(), 2);
  EXPECT_EQ(out.fe2.mean, mu.fe1.mean);
  EXPECT_EQ(out.fe2.cov, mu.fe1.cov);
  EXPECT_EQ(out.fe2_lin.mean, mu.fe1_lin.mean);
}

TEST(EkfSecondMu, ScalarProduct) {
  FirstMu mu;
  mu.fe1 = {Vector::Zero(2), Matrix::Identity(2, 2)};
  mu.fe1_canonical = to_canonical(mu.fe1);
  mu.fe1_lin = marginal_block(mu.fe1, 0, 1);
  const PmMessageEkf pm = PmMessageEkf::from({Eigen::Vector2d(2.0, 2.0), Matrix::Identity(2, 2)});
  const SecondMu out = ekf_second_mu(mu, pm, 1);
  EXPECT_NEAR(out.fe2_lin.mean(0), 1.0, 1e-15);
  EXPECT_NEAR(out.fe2_lin.cov(0, 0), 0.5, 1e-15);
}

TEST(EkfSecondMu, MatchesCanonicalProduct) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const FirstMu mu = first_mu_from(random_gaussian(4, rng), 2);
    const GaussianMoment pm = random_gaussian(4, rng);
    const SecondMu out = ekf_second_mu(mu, PmMessageEkf::from(pm), 2);
    const GaussianMoment oracle = to_moment(product(mu.fe1_canonical, to_canonical(pm)));
    EXPECT_LT(rel_diff(out.fe2.mean, oracle.mean), 1e-10);
    EXPECT_LT(rel_diff(out.fe2.cov, oracle.cov), 1e-10);
    EXPECT_TRUE(is_symmetric(out.fe2.cov, 0.0));
  }
}

// A PM message that is degenerate along x_N (zero variance) pins those
// coordinates; the moment-form update must handle it without inverting C_pm.
TEST(EkfSecondMu, SingularMessagePinsCoordinates) {
  Rng rng(15);
  const FirstMu mu = first_mu_from(random_gaussian(4, rng), 2);
  GaussianMoment pm{random_vector(4, rng), Matrix::Zero(4, 4)};
  pm.cov.topLeftCorner(2, 2) = random_spd(2, rng);
  const SecondMu out = ekf_second_mu(mu, PmMessageEkf::from(pm), 2);
  EXPECT_LT((out.fe2.mean.tail(2) - pm.mean.tail(2)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(out.fe2.cov.bottomRightCorner(2, 2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(is_psd(out.fe2.cov));
}

TEST(EkfSecondMu, DimensionMismatch) {
  Rng rng(1);
  const FirstMu mu = first_mu_from(random_gaussian(4, rng), 2);
  try {
    ekf_second_mu(mu, PmMessageEkf::from(GaussianMoment::standard(3)), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Ekf, MatchesKalmanFilterOnLinearModel) {
  Rng rng(21);
  const AffineModel model(random_affine_spec(rng));
  const Trajectory traj = simulate(model, 100, 77);
  Ekf ekf(model);
  KalmanOracle kf = kalman_oracle(model);
  for (std::size_t l = 0; l < traj.steps(); ++l) {
    Matrix pf;
    const Vector xf = kf.step(traj.measurement(l), &pf);
    const StepEstimate est = ekf.step(l, traj.measurement(l));
    ASSERT_LT(rel_diff(est.x_lin, xf.head(2)), 1e-10) << "step " << l;
    ASSERT_LT(rel_diff(est.x_non, xf.tail(2)), 1e-10) << "step " << l;
    ASSERT_LT(rel_diff(ekf.state().fe.cov, pf), 1e-10) << "step " << l;
    ASSERT_LT(rel_diff(ekf.state().fp.mean, kf.x), 1e-10) << "step " << l;
  }
}

TEST(Ekf, BenchmarkCovariancesStayPsd) {
  const AgentModel model(AgentParams{});
  const Trajectory traj = simulate(model, 300, 5);
  Ekf ekf(model);
  for (std::size_t l = 0; l < traj.steps(); ++l) {
    const StepEstimate est = ekf.step(l, traj.measurement(l));
    ASSERT_TRUE(est.x_lin.allFinite() && est.x_non.allFinite());
    ASSERT_TRUE(is_symmetric(ekf.state().fe.cov) && is_psd(ekf.state().fe.cov, 1e-10));
    ASSERT_TRUE(is_symmetric(ekf.state().fp.cov) && is_psd(ekf.state().fp.cov, 1e-10));
  }
}
