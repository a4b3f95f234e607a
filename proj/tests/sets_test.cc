#include "whcert/sets.h"

#include <cmath>

#include <gtest/gtest.h>

#include "whcert/sampling.h"

namespace whcert {
namespace {

GTEST_TEST(QuadraticFormTest, EllipsoidMembership) {
  const QuadraticForm q = Ellipsoid(Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0.5));
  EXPECT_TRUE(q.Contains(Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(q.Contains(Eigen::Vector2d(3, 0)));
  EXPECT_FALSE(q.Contains(Eigen::Vector2d(3.01, 0)));
  EXPECT_FALSE(q.Contains(Eigen::Vector2d(1, 0.51)));
  // 1 - ((x-1)/2)^2 - (y/0.5)^2 at (2, 0.25).
  EXPECT_NEAR(q.Evaluate(Eigen::Vector2d(2, 0.25)), 1 - 0.25 - 0.25, 1e-14);
  EXPECT_THROW(Ellipsoid(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), std::invalid_argument);
}

GTEST_TEST(QuadraticFormTest, PolynomialRoundTrip) {
  Eigen::Matrix3d S;
  S << -0.2, 0, 0.3, 0, 0, 0.5, 0.3, 0.5, -1;
  const QuadraticForm q(S);
  const Polynomial p = q.ToPolynomial();
  const Eigen::Vector2d x(0.7, -1.1);
  // [x;1]' S [x;1] written out.
  const double direct = -0.2 * x[0] * x[0] + 0.6 * x[0] + 1.0 * x[1] - 1.0;
  EXPECT_NEAR(p.Evaluate(x), direct, 1e-14);
  EXPECT_NEAR(q.Evaluate(x), direct, 1e-14);
  EXPECT_TRUE(QuadraticForm::FromPolynomial(p).S().isApprox(S, 1e-14));
  EXPECT_THROW(QuadraticForm::FromPolynomial(p * p), std::invalid_argument);
}

GTEST_TEST(SemiAlgebraicSetTest, BoxAndIntersection) {
  const SemiAlgebraicSet box = Box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 2));
  EXPECT_EQ(box.constraints().size(), 2u);
  EXPECT_TRUE(box.Contains(Eigen::Vector2d(1, 2)));
  EXPECT_FALSE(box.Contains(Eigen::Vector2d(1.001, 0)));
  ASSERT_TRUE(box.bounds().has_value());

  const SemiAlgebraicSet ell = EllipsoidSet(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2));
  const SemiAlgebraicSet both = box.Intersect(ell);
  EXPECT_EQ(both.constraints().size(), 3u);
  EXPECT_FALSE(both.Contains(Eigen::Vector2d(0.9, 1.9)));
  EXPECT_TRUE(both.Contains(Eigen::Vector2d(0.5, 1.5)));
  EXPECT_DOUBLE_EQ(both.bounds()->hi[1], 2.0);
  EXPECT_DOUBLE_EQ(both.bounds()->lo[0], -1.0);
  for (const auto& p : both.boundary_points()) EXPECT_TRUE(both.Contains(p, 1e-9));
  EXPECT_EQ(both.ToQuadratics().size(), 3u);
}

GTEST_TEST(SemiAlgebraicSetTest, EmptySet) {
  const SemiAlgebraicSet e = SemiAlgebraicSet::Empty(2);
  EXPECT_TRUE(e.is_empty());
  EXPECT_FALSE(e.Contains(Eigen::Vector2d(0, 0)));
}

GTEST_TEST(SamplingTest, RadicalInverse) {
  EXPECT_DOUBLE_EQ(RadicalInverse(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(RadicalInverse(2, 2), 0.25);
  EXPECT_DOUBLE_EQ(RadicalInverse(3, 2), 0.75);
  EXPECT_NEAR(RadicalInverse(1, 3), 1.0 / 3, 1e-15);
  EXPECT_NEAR(RadicalInverse(5, 3), 2.0 / 3 + 1.0 / 9, 1e-15);
}

GTEST_TEST(SamplingTest, StreamIsPrefixStableAndInBox) {
  const Eigen::Vector2d lo(-1, 2), hi(3, 5);
  BoxSampler a(lo, hi, 7), b(lo, hi, 7), c(lo, hi, 8);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd p = a.Next();
    EXPECT_TRUE((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all());
    EXPECT_EQ(p, b.Next());
    differs |= (p - c.Next()).norm() > 0;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.drawn(), 200);
}

GTEST_TEST(SamplingTest, SampleSetRejection) {
  const SemiAlgebraicSet ell = EllipsoidSet(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const BoundingBox box{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)};
  const auto pts = SampleSet(ell, box, 2000, 3, 100000);
  ASSERT_EQ(pts.size(), 2000u);
  for (const auto& p : pts) EXPECT_LE(p.norm(), 1.0 + 1e-12);
  const auto more = SampleSet(ell, box, 3000, 3, 100000);
  for (int i = 0; i < 2000; ++i) EXPECT_EQ(pts[i], more[i]);
  // Area ratio pi/4 within a loose band.
  const auto few = SampleSet(ell, box, 100000, 3, 4000);
  EXPECT_NEAR(static_cast<double>(few.size()) / 4000, M_PI / 4, 0.03);
}

}  // namespace
}  // namespace whcert
