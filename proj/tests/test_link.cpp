#include <gtest/gtest.h>

#include <cmath>

#include "spolf/link.hpp"

using namespace spolf;

TEST(Link, IdentityConstants) {
  const auto mu = LinkFunction::of(LinkKind::kIdentity);
  EXPECT_DOUBLE_EQ(mu.mean(0.3), 0.3);
  EXPECT_DOUBLE_EQ(mu.derivative(-4.0), 1.0);
  EXPECT_DOUBLE_EQ(mu.lipschitz(), 1.0);
  EXPECT_DOUBLE_EQ(mu.curvature(), 0.0);
  EXPECT_DOUBLE_EQ(mu.xi(7.0), 1.0);
  EXPECT_DOUBLE_EQ(*mu.inverse(0.42), 0.42);
}

TEST(Link, SigmoidValues) {
  const auto mu = LinkFunction::of(LinkKind::kSigmoid);
  EXPECT_DOUBLE_EQ(mu.mean(0.0), 0.5);
  EXPECT_DOUBLE_EQ(mu.derivative(0.0), 0.25);
  EXPECT_NEAR(*mu.inverse(mu.mean(1.7)), 1.7, 1e-12);
  EXPECT_FALSE(mu.inverse(1.0).has_value());
  EXPECT_FALSE(mu.inverse(-0.1).has_value());
}

// Analytic derivatives vs central differences, and the bounds L and M as a
// dense scan over the real line.
TEST(Link, SigmoidDerivativeBounds) {
  const auto mu = LinkFunction::of(LinkKind::kSigmoid);
  double max_d1 = 0.0, max_d2 = 0.0;
  const double h = 1e-5;
  for (double x = -12.0; x <= 12.0; x += 1e-3) {
    const double fd = (mu.mean(x + h) - mu.mean(x - h)) / (2 * h);
    EXPECT_NEAR(mu.derivative(x), fd, 1e-9);
    const double d2 = (mu.derivative(x + h) - mu.derivative(x - h)) / (2 * h);
    max_d1 = std::max(max_d1, mu.derivative(x));
    max_d2 = std::max(max_d2, std::abs(d2));
  }
  EXPECT_NEAR(max_d1, mu.lipschitz(), 1e-9);
  EXPECT_NEAR(max_d2, mu.curvature(), 1e-6);
  EXPECT_NEAR(mu.curvature(), 0.0962250448649376, 1e-15);
}

// xi(b) is the minimum of mu' over [-b, b].
TEST(Link, SigmoidXiIsInfimumOverInterval) {
  const auto mu = LinkFunction::of(LinkKind::kSigmoid);
  for (double b : {0.0, 0.5, 1.0, 2.5, 6.0}) {
    double lo = 1.0;
    for (double x = -b; x <= b + 1e-12; x += b / 1000.0 + 1e-9) lo = std::min(lo, mu.derivative(x));
    EXPECT_NEAR(mu.xi(b), lo, 1e-9);
    EXPECT_DOUBLE_EQ(mu.xi(-b), mu.xi(b));
  }
}

TEST(Link, ParseNames) {
  EXPECT_EQ(parse_link("identity"), LinkKind::kIdentity);
  EXPECT_EQ(parse_link("linear"), LinkKind::kIdentity);
  EXPECT_EQ(parse_link("logistic"), LinkKind::kSigmoid);
  EXPECT_FALSE(parse_link("probit").has_value());
  EXPECT_EQ(to_string(LinkKind::kSigmoid), "sigmoid");
}
