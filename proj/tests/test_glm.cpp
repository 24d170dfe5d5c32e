#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spolf/errors.hpp"
#include "spolf/glm.hpp"
#include "spolf/rng.hpp"

using namespace spolf;

namespace {

Eigen::VectorXd unit_ball_point(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = standard_normal(rng);
  return v.normalized() * std::pow(uniform01(rng), 1.0 / d);
}

}  // namespace

// Hand-computed: 3 * 1 * 0.1 / 1 * sqrt(log 60).
TEST(Glm, ConfidenceRadiusValue) {
  EXPECT_NEAR(confidence_radius(1.0, 0.1, 1.0, 0.05), 0.6070348, 1e-6);
  EXPECT_NEAR(confidence_radius(0.25, 0.1, 0.25, 0.05), 0.6070348, 1e-6);
  EXPECT_DOUBLE_EQ(confidence_radius(1.0, 0.0, 1.0, 0.05), 0.0);
}

TEST(Glm, SumNormBoundValues) {
  // sqrt(2 * 5 * 5 * log(400 / 5)).
  EXPECT_NEAR(sum_norm_bound(395, 5, 5), 14.8026, 1e-3);
  EXPECT_NEAR(sum_norm_bound(380, 20, 5), std::sqrt(200.0 * std::log(80.0)), 1e-12);
  EXPECT_EQ(sum_norm_bound(0, 2, 5), 0.0);
}

TEST(Glm, EigenThresholdZeroForIdentity) {
  EXPECT_EQ(eigen_threshold(0.1, 0.0, 1.0, 5, 0.05), 0.0);
  const double m = 1.0 / (6.0 * std::sqrt(3.0));
  EXPECT_NEAR(eigen_threshold(0.1, m, 0.25, 5, 0.05),
              512 * 0.01 * m * m * 256 * (25 + std::log(20.0)), 1e-9);
}

TEST(Glm, ConstructorValidates) {
  EXPECT_THROW(GlmEstimator(LinkKind::kIdentity, 0, 0.1, 0.05), InvalidSpec);
  EXPECT_THROW(GlmEstimator(LinkKind::kIdentity, 2, -0.1, 0.05), InvalidSpec);
  EXPECT_THROW(GlmEstimator(LinkKind::kIdentity, 2, 0.1, 1.0), InvalidSpec);
}

TEST(Glm, UpdateErrors) {
  GlmEstimator g(LinkKind::kIdentity, 2, 0.1, 0.05);
  EXPECT_THROW(g.update(Eigen::Vector2d(1.0, 0.1), 0.0), FeatureNormExceeded);
  EXPECT_THROW(g.update(Eigen::Vector3d(0.1, 0.1, 0.1), 0.0), InvalidSpec);
  g.update(Eigen::Vector2d(1.0, 0.0), 0.3);
  EXPECT_THROW(g.fit(), InsufficientData);
  EXPECT_THROW(g.interval_inside(Eigen::Vector2d(0.1, 0.0)), NotFitted);
  EXPECT_THROW(g.interval_outside(), NotFitted);
}

// W = 4 I after four unit observations on each axis pair; ||phi||_{W^-1} = 1/2.
TEST(Glm, WeightedNormOnScaledIdentity) {
  GlmEstimator g(LinkKind::kIdentity, 2, 0.1, 0.05);
  for (int i = 0; i < 4; ++i) {
    g.update(Eigen::Vector2d(1, 0), 0.0);
    g.update(Eigen::Vector2d(0, 1), 0.0);
  }
  EXPECT_EQ(g.design(), 4.0 * Eigen::Matrix2d::Identity());
  EXPECT_NEAR(g.weighted_norm(Eigen::Vector2d(0.6, 0.8)), 0.5, 1e-6);
  EXPECT_NEAR(g.lambda_min(), 4.0, 1e-12);
  EXPECT_NEAR(g.lambda_max_inv(), 0.25, 1e-6);
  Eigen::MatrixXd cols(2, 2);
  cols << 1, 0, 0, 0.5;
  const Eigen::VectorXd norms = g.weighted_norms(cols);
  EXPECT_NEAR(norms(0), 0.5, 1e-6);
  EXPECT_NEAR(norms(1), 0.25, 1e-6);
}

// Design bookkeeping vs direct sums; the inverse vs Eigen.
TEST(Glm, DesignMatchesDirectSum) {
  Rng rng(3);
  GlmEstimator g(LinkKind::kSigmoid, 4, 0.1, 0.05);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd phi = unit_ball_point(4, rng);
    g.update(phi, uniform01(rng));
    w += phi * phi.transpose();
  }
  EXPECT_LT((g.design() - w).norm(), 1e-12);
  const Eigen::MatrixXd inv = (w + 1e-6 * Eigen::MatrixXd::Identity(4, 4)).inverse();
  EXPECT_LT((g.design_inverse() - inv).norm(), 1e-9);
  EXPECT_EQ(g.num_observations(), 30u);
  EXPECT_EQ(g.observed_features().cols(), 30);
}

TEST(Glm, IdentityNoiselessFitIsExact) {
  Rng rng(4);
  const Eigen::VectorXd theta = Eigen::Vector3d(0.2, -0.5, 0.7);
  GlmEstimator g(LinkKind::kIdentity, 3, 0.1, 0.05);
  for (int i = 0; i < 12; ++i) {
    const Eigen::VectorXd phi = unit_ball_point(3, rng);
    g.update(phi, phi.dot(theta));
  }
  g.fit();
  EXPECT_TRUE(g.fitted());
  EXPECT_LT((g.theta() - theta).norm(), 1e-8);
  EXPECT_LT(g.score_norm(), 1e-8);
}

// For the identity link the MLE is ordinary least squares.
TEST(Glm, IdentityFitMatchesLeastSquares) {
  Rng rng(5);
  const int n = 40;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  GlmEstimator g(LinkKind::kIdentity, 3, 0.1, 0.05);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd phi = unit_ball_point(3, rng);
    x.row(i) = phi.transpose();
    y(i) = phi.sum() + 0.1 * standard_normal(rng);
    g.update(phi, y(i));
  }
  g.fit();
  const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
  EXPECT_LT((g.theta() - ols).norm(), 1e-6);
}

TEST(Glm, SigmoidScoreVanishesAtFit) {
  Rng rng(6);
  const Eigen::VectorXd theta = Eigen::Vector3d(1.5, -1.0, 0.5);
  GlmEstimator g(LinkKind::kSigmoid, 3, 0.1, 0.05);
  for (int i = 0; i < 500; ++i) {
    const Eigen::VectorXd phi = unit_ball_point(3, rng);
    g.update(phi, 1.0 / (1.0 + std::exp(-phi.dot(theta))) + 0.1 * standard_normal(rng));
  }
  const int iters = g.fit();
  EXPECT_GT(iters, 0);
  EXPECT_LE(g.score_norm(), g.options().score_tol);
  EXPECT_LT((g.theta() - theta).norm(), 0.6);
  // Refit from the solution is immediate.
  EXPECT_EQ(g.fit(), 0);
}

TEST(Glm, RadiusTracksEstimateNorm) {
  GlmEstimator g(LinkKind::kSigmoid, 2, 0.1, 0.05);
  g.set_theta(Eigen::Vector2d(0.0, 0.0));
  // xi = mu'(1).
  const double xi = std::exp(-1.0) / std::pow(1.0 + std::exp(-1.0), 2);
  EXPECT_NEAR(g.xi(), xi, 1e-15);
  EXPECT_NEAR(g.beta(), 3 * 0.25 * 0.1 / xi * std::sqrt(std::log(60.0)), 1e-12);
  g.set_theta(Eigen::Vector2d(3.0, 4.0));
  EXPECT_NEAR(g.xi(), LinkFunction::of(LinkKind::kSigmoid).derivative(6.0), 1e-15);
}

TEST(Glm, IntervalsInsideAndOutside) {
  GlmEstimator g(LinkKind::kIdentity, 2, 0.1, 0.05);
  for (int i = 0; i < 4; ++i) {
    g.update(Eigen::Vector2d(1, 0), 0.5);
    g.update(Eigen::Vector2d(0, 1), 0.2);
  }
  g.fit();
  const double beta = confidence_radius(1.0, 0.1, 1.0, 0.05);
  const Interval in = g.interval_inside(Eigen::Vector2d(1, 0));
  EXPECT_NEAR(in.lo, 0.5 - beta * 0.5, 1e-6);
  EXPECT_NEAR(in.hi, 0.5 + beta * 0.5, 1e-6);
  const Interval out = g.interval_outside();
  EXPECT_EQ(out.lo, 0.0);
  EXPECT_NEAR(out.hi, std::sqrt(0.29) + beta * 0.25, 1e-6);
}

TEST(Glm, JsonRoundTrip) {
  Rng rng(8);
  GlmEstimator g(LinkKind::kSigmoid, 3, 0.05, 0.1);
  for (int i = 0; i < 20; ++i) g.update(unit_ball_point(3, rng), uniform01(rng));
  g.fit();
  const GlmEstimator back = GlmEstimator::from_json(g.to_json());
  EXPECT_EQ(back.theta(), g.theta());
  EXPECT_EQ(back.design(), g.design());
  EXPECT_EQ(back.observed_values(), g.observed_values());
  EXPECT_EQ(back.beta(), g.beta());
  EXPECT_TRUE(back.fitted());
  EXPECT_THROW(GlmEstimator::from_json("[1,2"), ParseError);
  EXPECT_THROW(GlmEstimator::from_json("{}"), ParseError);
}

TEST(Glm, Interval) {
  const Interval a{0.0, 1.0}, b{0.5, 2.0};
  EXPECT_EQ(intersect(a, b), (Interval{0.5, 1.0}));
  EXPECT_TRUE(intersect(a, Interval{2.0, 3.0}).empty());
  EXPECT_TRUE(a.contains(1.0));
  EXPECT_DOUBLE_EQ(b.width(), 1.5);
}
