#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ihgp/errors.hpp"
#include "ihgp/kalman.hpp"
#include "ihgp/steady.hpp"
#include "oracles.hpp"

using namespace ihgp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DiscreteModel matern32_model(double sigma2, double ell, double dt) {
  return discretize(build_sde(KernelSpec::matern(1.5, sigma2, ell)), dt);
}

DiscreteModel scalar_model(double ell, double dt) {
  return discretize(build_sde(KernelSpec::matern(0.5, 1.0, ell)), dt);
}

}  // namespace

TEST(Dare, ScalarClosedForm) {
  const DiscreteModel model = scalar_model(2.0, 0.5);
  const double a = model.transition(0, 0);
  const double q = model.process_noise(0, 0);
  for (double gamma : {0.01, 0.3, 10.0}) {
    const double expected = oracle::scalar_dare(a, q, gamma);
    const Matrix pp = solve_pp_dare(model, gamma);
    EXPECT_NEAR(pp(0, 0), expected, 1e-12 * expected);
  }
}

TEST(Dare, LargeGammaApproachesPrior) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.01);
  const Matrix pp = solve_pp_dare(model, 1e9);
  EXPECT_LT((pp - model.initial_cov).norm(), 1e-6 * model.initial_cov.norm());
}

TEST(Dare, FixedPointUnderRiccatiIteration) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  for (double gamma : {0.05, 1.0, 100.0}) {
    const Matrix pp = solve_pp_dare(model, gamma);
    EXPECT_LE(dare_residual(model, gamma, pp), 1e-9);
  }
}

TEST(Dare, MonotoneTowardPriorInGamma) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const Vector& h = model.measurement;
  double prev = 0.0;
  for (int i = 0; i < 32; ++i) {
    const double gamma =
        std::exp(std::log(1e-2) + i * (std::log(1e3) - std::log(1e-2)) / 31);
    const Matrix pp = solve_pp_dare(model, gamma);
    const double hph = h.dot(pp * h);
    EXPECT_GT(hph, prev);
    prev = hph;
  }
  EXPECT_LT(prev, h.dot(model.initial_cov * h));
}

TEST(Dare, RejectsBadGamma) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.1);
  EXPECT_THROW(solve_pp_dare(model, 0.0), ParameterError);
  EXPECT_THROW(solve_pp_dare(model, -1.0), ParameterError);
}

TEST(StationaryGain, LimitsAndScalarForm) {
  const DiscreteModel model = scalar_model(1.0, 0.3);
  const double a = model.transition(0, 0);
  const double q = model.process_noise(0, 0);
  const double gamma = 0.4;
  const double p = oracle::scalar_dare(a, q, gamma);
  const Vector k = stationary_gain(solve_pp_dare(model, gamma),
                                   model.measurement, gamma);
  EXPECT_NEAR(k(0), p / (p + gamma), 1e-12);

  // gamma -> inf: gain vanishes.
  EXPECT_NEAR(stationary_gain(model.initial_cov, model.measurement, kInf)(0),
              0.0, 0.0);

  // gamma -> 0 with h = e_1: the observed coordinate is trusted fully.
  const DiscreteModel m32 = matern32_model(1.0, 1.0, 0.05);
  const Matrix pp0 = solve_pp_dare(m32, 1e-10);
  const Vector k0 = stationary_gain(pp0, m32.measurement, 1e-10);
  EXPECT_NEAR(m32.measurement.dot(k0), 1.0, 1e-6);
}

TEST(SmootherPair, InfinityEndpointIsPrior) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.05);
  const auto [g, ps] = solve_smoother_pair(model, model.initial_cov);
  EXPECT_LT((ps - model.initial_cov).norm(), 1e-9 * model.initial_cov.norm());
  (void)g;
}

TEST(SmootherPair, ScalarClosedForm) {
  const DiscreteModel model = scalar_model(1.5, 0.25);
  const double gamma = 0.7;
  const SteadyStateSet set = solve_steady_state(model, gamma);
  const double a = model.transition(0, 0);
  const double q = model.process_noise(0, 0);
  const double expected = oracle::scalar_smooth_cov(a, q, set.filt_cov(0, 0));
  EXPECT_NEAR(set.smooth_cov(0, 0), expected, 1e-12);
}

TEST(SmootherPair, PsdOrdering) {
  const DiscreteModel model =
      discretize(build_sde(KernelSpec::sum({KernelSpec::matern(2.5, 1.0, 0.7),
                                            KernelSpec::matern(1.5, 0.4, 2.0)})),
                 0.05);
  for (double gamma : {0.03, 0.5, 40.0}) {
    const SteadyStateSet set = solve_steady_state(model, gamma);
    EXPECT_GE(min_eigenvalue_sym(set.pred_cov - set.filt_cov), -1e-8);
    EXPECT_GE(min_eigenvalue_sym(set.filt_cov - set.smooth_cov), -1e-8);
  }
}

TEST(SteadyStateSet, ResidualInvariantsAtDefaults) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const GammaGrid grid(model);
  ASSERT_EQ(grid.node_count(), 32);
  for (int i = 0; i < grid.node_count(); ++i) {
    const SteadyStateSet& set = grid.node(i);
    EXPECT_LE(dare_residual(model, set.gamma, set.pred_cov), 1e-9);
    // Ps fixed-point residual.
    const Matrix pp_next = model.transition * set.filt_cov *
                               model.transition.transpose() +
                           model.process_noise;
    const Matrix rhs = set.smoother_gain * set.smooth_cov *
                           set.smoother_gain.transpose() +
                       set.filt_cov - set.smoother_gain * pp_next *
                                          set.smoother_gain.transpose();
    EXPECT_LE((rhs - set.smooth_cov).norm(), 1e-9 * set.smooth_cov.norm());
    // Gain identity.
    const Vector k_ref = stationary_gain(set.pred_cov, model.measurement,
                                         set.gamma);
    EXPECT_LT((set.gain - k_ref).norm(), 1e-14);
  }
  // Infinity endpoint: Pp = Pf = Pinf, k = 0.
  EXPECT_LT((grid.infinity().pred_cov - model.initial_cov).norm(), 1e-12);
  EXPECT_NEAR(grid.infinity().gain.norm(), 0.0, 0.0);
  EXPECT_LT((grid.infinity().filt_cov - model.initial_cov).norm(), 1e-12);
}

TEST(GammaGrid, NodeQueriesAreBitIdentical) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const GammaGrid grid(model);
  for (int i : {0, 7, 31}) {
    const double gamma = grid.node_gamma(i);
    const SteadyStateSet set = grid.at(gamma);
    EXPECT_EQ(set.pred_cov, grid.node(i).pred_cov);
    EXPECT_EQ(set.smooth_cov, grid.node(i).smooth_cov);
    EXPECT_EQ(set.smoother_gain, grid.node(i).smoother_gain);
  }
}

TEST(GammaGrid, OffNodeInterpolationAccuracy) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const GammaGrid grid(model);

  // The value quoted in the experiment setup.
  {
    const Matrix direct = solve_pp_dare(model, 0.37);
    const Matrix interp = grid.at(0.37).pred_cov;
    EXPECT_LE((interp - direct).norm() / direct.norm(), 1e-3);
  }

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-2),
                                                   std::log(1e3));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double gamma = std::exp(log_gamma(rng));
    const SteadyStateSet interp = grid.at(gamma);
    const SteadyStateSet direct = solve_steady_state(model, gamma);
    worst = std::max(worst, (interp.pred_cov - direct.pred_cov).norm() /
                                direct.pred_cov.norm());
    worst = std::max(worst, (interp.smooth_cov - direct.smooth_cov).norm() /
                                direct.smooth_cov.norm());
    worst = std::max(worst,
                     (interp.smoother_gain - direct.smoother_gain).norm() /
                         direct.smoother_gain.norm());
  }
  EXPECT_LE(worst, 5e-3);
}

TEST(GammaGrid, CoarseGridDegradesGracefully) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const GammaGrid fine(model);
  GridOptions coarse_opts;
  coarse_opts.nodes = 4;
  const GammaGrid coarse(model, coarse_opts);

  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-2),
                                                   std::log(1e3));
  double err_fine = 0.0, err_coarse = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = std::exp(log_gamma(rng));
    const Matrix direct = solve_pp_dare(model, gamma);
    err_fine = std::max(err_fine,
                        (fine.at(gamma).pred_cov - direct).norm() / direct.norm());
    err_coarse = std::max(
        err_coarse, (coarse.at(gamma).pred_cov - direct).norm() / direct.norm());
  }
  EXPECT_GE(err_coarse, err_fine);
  EXPECT_LE(err_fine, err_coarse * 10.0 + 1e-12);
}

TEST(GammaGrid, ClampsOutOfRangeQueries) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  const GammaGrid grid(model);
  const SteadyStateSet hi = grid.at(1e6);
  EXPECT_EQ(hi.pred_cov, grid.node(31).pred_cov);
  const SteadyStateSet lo = grid.at(1e-9);
  EXPECT_EQ(lo.pred_cov, grid.node(0).pred_cov);
  const SteadyStateSet inf = grid.at(kInf);
  EXPECT_LT((inf.pred_cov - model.initial_cov).norm(), 1e-12);
}

TEST(GammaGrid, ExactNodeInsertion) {
  const DiscreteModel model = matern32_model(1.0, 1.0, 0.012);
  GammaGrid grid(model);
  const double sigma2 = 0.123;
  grid.insert_exact(sigma2);
  EXPECT_TRUE(grid.has_exact(sigma2));
  const Matrix direct = solve_pp_dare(model, sigma2);
  EXPECT_EQ(grid.at(sigma2).pred_cov, direct);
}

TEST(GammaGrid, InterpolatedSetsStayPsd) {
  const DiscreteModel model =
      discretize(build_sde(KernelSpec::sum({KernelSpec::matern(2.5, 1.0, 0.5),
                                            KernelSpec::matern(1.5, 0.5, 3.0)})),
                 0.05);
  const GammaGrid grid(model);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-2),
                                                   std::log(1e3));
  for (int trial = 0; trial < 40; ++trial) {
    const SteadyStateSet set = grid.at(std::exp(log_gamma(rng)));
    EXPECT_GE(min_eigenvalue_sym(set.pred_cov), -1e-8 * set.pred_cov.trace());
    EXPECT_GE(min_eigenvalue_sym(set.smooth_cov),
              -1e-8 * set.smooth_cov.trace());
  }
}

TEST(GainStabilisation, FilterGainConvergesToStationary) {
  const double dt = 12.0 / 1000.0;
  const DiscreteModel model = matern32_model(1.0, 0.7, dt);
  const double noise = 0.1;
  Vector y(1000);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int i = 0; i < 1000; ++i) y(i) = g(rng);

  const FilterResult filt = kalman_filter(model, y, noise);
  const Vector k_stat = stationary_gain(solve_pp_dare(model, noise),
                                        model.measurement, noise);
  const int burn_in = static_cast<int>(10.0 * 0.7 / dt);
  ASSERT_LT(burn_in, 800);
  for (int i = 800; i < 1000; ++i) {
    EXPECT_LE((filt.gains[i] - k_stat).cwiseAbs().maxCoeff(), 1e-6)
        << "step " << i;
  }
}
