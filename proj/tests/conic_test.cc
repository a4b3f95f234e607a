#include "whcert/conic.h"

#include <gtest/gtest.h>

#include "whcert/interior_point.h"

namespace whcert {
namespace conic {
namespace {

GTEST_TEST(AffineMatrixTest, EvaluateMatchesDenseAlgebra) {
  ConicProblem p;
  const SymMatVar P = p.AddSymmetric("P", 2);
  const Var a = p.AddScalar("a");
  Eigen::Matrix2d F;
  F << 1, 2, -1, 0.5;
  const AffineMatrix expr = AffineMatrix::Of(P).Congruence(F) - AffineMatrix::Scaled(a, Eigen::Matrix2d::Identity());
  Eigen::VectorXd y(p.num_vars());
  y << 1.0, 0.2, 3.0, 0.7;  // P00, P01, P11, a
  Eigen::Matrix2d Pv;
  Pv << 1.0, 0.2, 0.2, 3.0;
  const Eigen::Matrix2d expect = F.transpose() * Pv * F - 0.7 * Eigen::Matrix2d::Identity();
  EXPECT_TRUE(expr.Evaluate(y).isApprox(expect, 1e-14));

  const AffineMatrix blocks =
      AffineMatrix::Blocks(AffineMatrix::Of(P), AffineMatrix::Constant(Eigen::Matrix2d::Zero()),
                           AffineMatrix::Constant(Eigen::Matrix2d::Zero()),
                           AffineMatrix::Identity(2, LinExpr(a) * 2.0));
  const Eigen::MatrixXd B = blocks.Evaluate(y);
  EXPECT_TRUE(B.topLeftCorner(2, 2).isApprox(Pv));
  EXPECT_DOUBLE_EQ(B(3, 3), 1.4);
  EXPECT_DOUBLE_EQ(B(0, 3), 0.0);
}

GTEST_TEST(ConicSolveTest, MarginOfSimpleBlock) {
  ConicProblem p;
  const Var y = p.AddScalar("y", -10, 10);
  Eigen::Matrix2d off;
  off << 0, 1, 1, 0;
  p.AddPsd("block", AffineMatrix::Constant(0.5 * Eigen::Matrix2d::Identity()) +
                        AffineMatrix::Scaled(y, off));
  const SolveOutcome out = Solve(p);
  ASSERT_EQ(out.status, SolveStatus::kFeasible) << out.diagnostic;
  // Eigenvalues 0.5 +- y.
  EXPECT_NEAR(out.margin, 0.5, 1e-6);
  EXPECT_NEAR(out.value(y), 0.0, 1e-5);
}

GTEST_TEST(ConicSolveTest, DetectsInfeasibility) {
  ConicProblem p;
  const Var y = p.AddScalar("y");
  p.AddNonnegative("y >= 1", LinExpr(y) - 1.0, true);
  p.AddNonnegative("y <= 0", -LinExpr(y), true);
  const SolveOutcome out = Solve(p);
  EXPECT_EQ(out.status, SolveStatus::kInfeasible) << out.diagnostic;
  EXPECT_LT(out.margin_bound, 0.0);
}

GTEST_TEST(ConicSolveTest, ObjectiveWithEqualities) {
  ConicProblem p;
  const Var a = p.AddScalar("a", 0.2, 10);
  const Var b = p.AddScalar("b", 0.0, 0.5);
  p.AddEquality("sum", LinExpr(a) + LinExpr(b) - 1.0);
  p.AddNonnegative("slack", LinExpr(a), true);
  p.SetObjective(LinExpr(a));
  const SolveOutcome out = Solve(p);
  ASSERT_EQ(out.status, SolveStatus::kFeasible) << out.diagnostic;
  EXPECT_NEAR(out.value(a), 0.5, 1e-6);
  EXPECT_NEAR(out.value(a) + out.value(b), 1.0, 1e-9);
}

GTEST_TEST(ConicSolveTest, DiscreteLyapunovCertificate) {
  Eigen::Matrix2d A;
  A << 0.5, 0.4, -0.3, 0.6;
  ConicProblem p;
  const SymMatVar P = p.AddSymmetric("P", 2);
  const AffineMatrix Pa = AffineMatrix::Of(P);
  p.AddPsd("P >= I", Pa - AffineMatrix::Constant(Eigen::Matrix2d::Identity()));
  p.AddPsd("decrease", Pa - Pa.Congruence(A) - AffineMatrix::Constant(Eigen::Matrix2d::Identity()));
  p.AddPsd("bound", AffineMatrix::Constant(100 * Eigen::Matrix2d::Identity()) - Pa, false);
  const SolveOutcome out = Solve(p);
  ASSERT_EQ(out.status, SolveStatus::kFeasible) << out.diagnostic;
  const Eigen::MatrixXd Pv = out.value(P);
  // Independent check with a plain eigen solver.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(Pv - Eigen::Matrix2d::Identity());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(Pv - A.transpose() * Pv * A -
                                                    Eigen::Matrix2d::Identity());
  EXPECT_GE(e1.eigenvalues().minCoeff(), -1e-7);
  EXPECT_GE(e2.eigenvalues().minCoeff(), -1e-7);
}

GTEST_TEST(ConicSolveTest, UnstableLyapunovIsInfeasible) {
  Eigen::Matrix2d A;
  A << 1.1, 0, 0, 0.5;
  ConicProblem p;
  const SymMatVar P = p.AddSymmetric("P", 2);
  const AffineMatrix Pa = AffineMatrix::Of(P);
  p.AddPsd("P >= I", Pa - AffineMatrix::Constant(Eigen::Matrix2d::Identity()));
  p.AddPsd("decrease", Pa - Pa.Congruence(A));
  EXPECT_EQ(Solve(p).status, SolveStatus::kInfeasible);
}

GTEST_TEST(ConicProblemTest, JsonRoundTripAndValidation) {
  ConicProblem p;
  const SymMatVar P = p.AddSymmetric("P", 2);
  const Var t = p.AddScalar("t", 0, 1);
  p.AddPsd("c", AffineMatrix::Of(P) - AffineMatrix::Scaled(t, Eigen::Matrix2d::Identity()));
  p.AddEquality("trace", LinExpr(P(0, 0)) + LinExpr(P(1, 1)) - 2.0);
  const ConicProblem q = ConicProblem::FromJson(p.ToJson());
  EXPECT_EQ(q.num_vars(), p.num_vars());
  EXPECT_EQ(q.psd_constraints().size(), 1u);
  EXPECT_EQ(q.equalities().size(), 1u);
  EXPECT_EQ(q.ToJson(), p.ToJson());
  EXPECT_NO_THROW(p.Validate());

  ConicProblem bad;
  EXPECT_THROW(bad.AddScalar("y", 2, 1), std::invalid_argument);
}

GTEST_TEST(InteriorPointTest, SmallDualSdp) {
  // max y  s.t.  I - y diag(1, 2) >= 0  ->  y = 0.5.
  SdpProblem sdp;
  sdp.m = 1;
  sdp.b = Eigen::VectorXd::Ones(1);
  SdpBlock blk;
  blk.dim = 2;
  blk.C = Eigen::Matrix2d::Identity();
  blk.vars = {0};
  blk.A = {Eigen::Vector2d(1, 2).asDiagonal()};
  sdp.blocks.push_back(blk);
  const IpmResult r = SolveSdp(sdp);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.y[0], 0.5, 1e-7);
  EXPECT_NEAR(r.primal_objective, 0.5, 1e-7);
}

GTEST_TEST(EigMinTest, RejectsAsymmetry) {
  Eigen::Matrix2d M;
  M << 1, 2, 2, -3;
  EXPECT_NEAR(EigMin(M), -1 - std::sqrt(8.0), 1e-12);
  M(0, 1) = 2.1;
  EXPECT_THROW(EigMin(M), std::invalid_argument);
}

}  // namespace
}  // namespace conic
}  // namespace whcert
