#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "inhomwalk/gaussian.hpp"
#include "inhomwalk/spectral.hpp"

using namespace inhomwalk;

namespace {

long double theta_oracle(long double z) {
  long double s = 1.0L;
  for (int k = 1; k < 200; ++k) s += 2.0L * ((k % 2) ? -1.0L : 1.0L) * std::exp(-2.0L * z * z * k * k);
  return s;
}

GaussianSchedule homogeneous(std::size_t n, double var = 1.0) {
  return GaussianSchedule{std::vector<double>(n, var), std::sqrt(var)};
}

}  // namespace

TEST(Theta, KnownValues) {
  EXPECT_NEAR(jacobi_theta(0.5), 0.036055, 1e-6);
  EXPECT_NEAR(jacobi_theta(0.5), static_cast<double>(theta_oracle(0.5L)), 1e-15);
  EXPECT_NEAR(jacobi_theta(10.0), 1.0 - 2.0 * std::exp(-200.0), 1e-15);
  EXPECT_THROW(jacobi_theta(0.0), Error);
  EXPECT_THROW(jacobi_theta(-1.0), Error);
}

TEST(Theta, SeriesFormsAgree) {
  for (double z = 0.3; z <= 3.0; z += 0.05) {
    EXPECT_NEAR(jacobi_theta_alternating(z), jacobi_theta_dual(z), 1e-14) << z;
  }
}

TEST(Theta, Monotone) {
  double prev = 0.0;
  for (double z = 0.05; z <= 4.0; z += 0.01) {
    const double t = jacobi_theta(z);
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(Theta, SmallZInequality) {
  const double rhs = std::exp(-2.0 * std::numbers::pi * std::numbers::pi / (8 * 0.25));
  EXPECT_NEAR(rhs, 5.18e-5, 1e-7);
  EXPECT_TRUE(theta_small_z_check(0.5, 1.0));
  EXPECT_TRUE(theta_small_z_check(6.0, 0.01));
  EXPECT_GT(theta_threshold(0.1, 0.05, 3.0), 0.05);
  EXPECT_TRUE(std::isfinite(log_jacobi_theta(0.02)));
}

TEST(BridgeCovariance, Formula) {
  std::vector<double> B{0, 1, 2, 3, 4};
  EXPECT_EQ(bridge_covariance(B, 4, 4), 0.0);
  EXPECT_DOUBLE_EQ(bridge_covariance(B, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(bridge_covariance(B, 1, 3), bridge_covariance(B, 3, 1));
}

TEST(BridgeCovariance, PositiveSemidefinite) {
  for (std::size_t n : {8u, 33u, 64u}) {
    std::vector<double> B(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) B[i] = B[i - 1] + 0.5 + 0.4 * std::sin(static_cast<double>(i));
    Eigen::MatrixXd C(n + 1, n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) C(i, j) = bridge_covariance(B, i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(GaussianCheckpoint, SingleCheckpoint) {
  auto g = homogeneous(16);
  auto p = gaussian_checkpoint_prob(g, {{16, {{-0.5, 0.5}}, std::nullopt}});
  EXPECT_NEAR(p.value, normal_cdf(0.5 / 4) - normal_cdf(-0.5 / 4), 1e-14);
}

TEST(GaussianCheckpoint, Marginalization) {
  auto g = homogeneous(20, 0.5);
  const double one = gaussian_checkpoint_prob(g, {{20, {{-1.5, 2.5}}, std::nullopt}}).value;
  const double two = gaussian_checkpoint_prob(g, {{7, {}, std::nullopt}, {20, {{-1.5, 2.5}}, std::nullopt}}).value;
  EXPECT_NEAR(one, two, 1e-9);
}

TEST(GaussianCheckpoint, MatchesMonteCarlo) {
  auto g = homogeneous(30, 0.7);
  std::vector<GaussCheckpoint> cps{
      {10, unit_cells({-2, -1, 0, 1, 2, 3}), 3.0},
      {20, unit_cells({-1, 0, 1}), 2.5},
      {30, unit_cells({0, 1, 2, 3, 4}), 4.0},
  };
  auto q = gaussian_checkpoint_prob(g, cps);
  auto mc = gaussian_checkpoint_mc(g, cps, 400000, 5);
  EXPECT_TRUE(q.quadrature);
  EXPECT_NEAR(q.value, mc.value, 3 * mc.std_error);
}

TEST(GaussianCheckpoint, CapOnLastIncrementConverges) {
  auto g = homogeneous(32, 0.5);
  std::vector<GaussCheckpoint> cps{
      {16, unit_cells({-4, -3, -2, -1, 0, 1, 2, 3, 4}), std::pow(16.0, 0.55)},
      {32, unit_cells({-4, -2, 0, 2, 4}), std::pow(16.0, 0.55)},
  };
  GaussProb q;
  ASSERT_NO_THROW(q = gaussian_checkpoint_prob(g, cps));
  auto mc = gaussian_checkpoint_mc(g, cps, 400000, 11);
  EXPECT_NEAR(q.value, mc.value, 3 * mc.std_error);
}

TEST(GaussianCheckpoint, ManyCheckpointsFallBackToMc) {
  auto g = homogeneous(90, 1.0);
  std::vector<GaussCheckpoint> cps;
  for (std::size_t t = 10; t <= 90; t += 10) cps.push_back({t, {{-8.0, 8.0}}, std::nullopt});
  auto p = gaussian_checkpoint_prob(g, cps, 20000, 3);
  EXPECT_FALSE(p.quadrature);
  EXPECT_GT(p.std_error, 0.0);
}

TEST(GaussianBridge, LowerBoundByTheta) {
  std::vector<double> var;
  for (int i = 0; i < 64; ++i) var.push_back(0.4 + 0.6 * (i % 3) / 2.0);
  GaussianSchedule g{var, 1.0};
  for (double s : {0.3, 0.6, 1.0}) {
    auto r = mc_gaussian_bridge_smallball(g, 2.0, s, 20000, 9);
    EXPECT_GE(r.value + 3 * r.std_error, jacobi_theta(s / g.sigma_plus));
  }
  EXPECT_NEAR(mc_gaussian_bridge_smallball(g, 0.0, 50.0, 10000, 1).value, 1.0, 1e-15);
}

TEST(GaussianBridge, BrownianLimit) {
  auto g = homogeneous(2048, 1.0);
  for (double s : {0.8, 1.2}) {
    auto r = mc_gaussian_bridge_smallball(g, 0.0, s, 10000, 17);
    EXPECT_NEAR(r.value, jacobi_theta(s), 3 * r.std_error + 0.01);
  }
}

TEST(GaussianBridge, MarginalVariance) {
  std::vector<double> var;
  for (int i = 0; i < 40; ++i) var.push_back(0.5 + 0.5 * (i % 2));
  GaussianSchedule g{var, 1.0};
  auto B = g.partial_vars();
  for (std::size_t i : {5u, 20u, 33u}) {
    auto [v, se] = mc_bridge_variance(g, 1.5, i, 40000, i);
    EXPECT_NEAR(v, bridge_covariance(B, i, i), 4 * se);
  }
}

TEST(GaussianBridge, Deterministic) {
  auto g = homogeneous(32);
  auto a = mc_gaussian_bridge_smallball(g, 1.0, 0.5, 10000, 42);
  auto b = mc_gaussian_bridge_smallball(g, 1.0, 0.5, 10000, 42);
  EXPECT_EQ(a.value, b.value);
}
