#include "whcert/systems.h"

#include <gtest/gtest.h>

#include "oracles.h"

namespace whcert {
namespace {

System RunningExample() {
  Eigen::Matrix2d A;
  A << 0, 1, 1, 1;
  Eigen::Vector2d B(1, 1);
  return System::Linear(A, B);
}

GTEST_TEST(SystemsTest, LinearStepsMatchMatrixProducts) {
  const System sys = RunningExample();
  Eigen::RowVector2d K(-0.5, -0.7);
  const Controller ctrl = Controller::Linear(K);
  const Eigen::Vector2d x(0.3, -0.2);
  EXPECT_TRUE(StepClosed(sys, ctrl, x).isApprox((sys.A() + sys.B() * K) * x, 1e-15));
  EXPECT_TRUE(StepOpenZero(sys, x).isApprox(sys.A() * x, 1e-15));
  const AugmentedState next = StepOpenHold(sys, {x, Eigen::VectorXd::Constant(1, 0.4)});
  EXPECT_TRUE(next.x.isApprox(sys.A() * x + sys.B() * 0.4, 1e-15));
  EXPECT_DOUBLE_EQ(next.u_held[0], 0.4);
  EXPECT_EQ(next.Stacked().size(), 3);
}

GTEST_TEST(SystemsTest, IterateOpenMatchesOracleRollout) {
  const System sys = RunningExample();
  Eigen::RowVector2d K(-0.5, -0.7);
  const Controller ctrl = Controller::Linear(K);
  const Eigen::Vector2d x(0.3, -0.2);
  for (int m = 0; m <= 3; ++m) {
    std::vector<int> bits{1};
    bits.insert(bits.end(), m, 0);
    for (bool hold : {false, true}) {
      const auto xs = testing::LinearRollout(sys.A(), sys.B(), K, hold, x, bits);
      const Strategy q = hold ? Strategy::kHold : Strategy::kZero;
      EXPECT_TRUE(IterateOpen(sys, ctrl, q, x, m).isApprox(xs.back(), 1e-13)) << m << hold;
    }
    const AugmentedState aug = IterateOpenAugmented(sys, ctrl, x, m);
    EXPECT_TRUE(aug.x.isApprox(IterateOpen(sys, ctrl, Strategy::kHold, x, m), 1e-13));
    EXPECT_NEAR(aug.u_held[0], (K * x)(0), 1e-15);
  }
}

GTEST_TEST(SystemsTest, ZeroAndHoldAgreeWhenHeldInputIsZero) {
  const System sys = RunningExample();
  const Eigen::Vector2d x(0.6, -1.4);
  AugmentedState aug{x, Eigen::VectorXd::Zero(1)};
  Eigen::VectorXd z = x;
  for (int k = 0; k < 5; ++k) {
    aug = StepOpenHold(sys, aug);
    z = StepOpenZero(sys, z);
    EXPECT_TRUE(aug.x.isApprox(z, 1e-15));
  }
}

GTEST_TEST(SystemsTest, PolynomialDynamicsAndMaps) {
  const std::vector<std::string> names{"x1", "x2", "u"};
  std::vector<Polynomial> f{ParsePolynomial("x1 + 0.1*x2^2 + u", names),
                            ParsePolynomial("x2 - 0.2*x1*u", names)};
  const System sys = System::PolynomialDynamics(2, 1, f);
  EXPECT_FALSE(sys.is_linear());
  const Controller ctrl = Controller::PolynomialLaw(2, {ParsePolynomial("-0.5*x2", {"x1", "x2"})});
  const Eigen::Vector2d x(1.0, 2.0);
  const double u = -1.0;
  const Eigen::Vector2d expect(1.0 + 0.4 + u, 2.0 - 0.2 * u);
  EXPECT_TRUE(StepClosed(sys, ctrl, x).isApprox(expect, 1e-14));
  const auto cl = ClosedLoopMap(sys, ctrl);
  const auto oz = OpenZeroMap(sys);
  EXPECT_NEAR(cl[0].Evaluate(x), expect[0], 1e-14);
  EXPECT_NEAR(cl[1].Evaluate(x), expect[1], 1e-14);
  EXPECT_NEAR(oz[0].Evaluate(x), 1.4, 1e-14);
  EXPECT_NEAR(oz[1].Evaluate(x), 2.0, 1e-14);
  EXPECT_THROW(sys.A(), std::logic_error);
}

GTEST_TEST(SystemsTest, StrategyNamesAndCompatibility) {
  EXPECT_EQ(ParseStrategy("hold"), Strategy::kHold);
  EXPECT_EQ(ToString(Strategy::kZero), "zero");
  EXPECT_THROW(ParseStrategy("last"), std::invalid_argument);
  const Controller bad = Controller::Linear(Eigen::MatrixXd::Zero(1, 3));
  EXPECT_THROW(bad.CheckCompatible(RunningExample()), std::invalid_argument);
}

}  // namespace
}  // namespace whcert
