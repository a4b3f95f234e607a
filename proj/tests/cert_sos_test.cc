#include "whcert/cert_sos.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "whcert/problem.h"

namespace whcert {
namespace {

// x+ = 0.5 x + 0.1 x^2 + u + 1, u = -0.1 x, zero strategy under K(1,2).
// Both loops push x up by at least 0.1 per step, away from Xu.
const char* kScalarPoly = R"({
  "system": {"type": "polynomial", "states": ["x"], "inputs": ["u"],
             "f": ["0.5*x + 0.1*x^2 + u + 1"]},
  "controller": {"poly": ["-0.1*x"]},
  "strategy": "zero",
  "constraint": {"r": 1, "s": 2},
  "sets": {
    "X": {"type": "box", "lo": [-2], "hi": [4]},
    "X0": {"type": "box", "lo": [0], "hi": [1]},
    "Xu": {"type": "intersection", "sets": [
      {"type": "polynomial", "constraints": ["-1.5 - x"]},
      {"type": "box", "lo": [-2], "hi": [4]}]}
  },
  "sos": {"n_p": 2}
})";

double EvalMonomial(const Exponent& e, const Eigen::VectorXd& z) {
  double v = 1.0;
  for (size_t i = 0; i < e.size(); ++i) v *= std::pow(z[i], e[i]);
  return v;
}

// z' Q z by point evaluation of the monomial vector.
double EvalGram(const GramBlock& g, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  const MonomialBasis& b = MonomialBasis::Get(static_cast<int>(z.size()), g.half_degree);
  Eigen::VectorXd m(b.size());
  for (int i = 0; i < b.size(); ++i) m[i] = EvalMonomial(b[i], z);
  Eigen::MatrixXd Q(b.size(), b.size());
  for (int i = 0; i < b.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) Q(i, j) = y[g.Q(i, j).id];
  }
  return m.dot(Q * m);
}

GTEST_TEST(CertSosTest, ScalarDecreaseCertificate) {
  const Problem p = ParseProblem(kScalarPoly);
  const WhGraph g = WhGraph::Build(p.constraint);
  const SosReport r = VerifySos(GbfVariant::Parse("1dgbf-zero"), p, g);
  ASSERT_EQ(r.status, CertStatus::kCertified) << r.detail;
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_LT(r.gram_residual, 1e-9);
  const PolyGbf& c = *r.certificate;
  EXPECT_EQ(c.num_nodes(), g.num_nodes());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-2, 4);
  for (int i = 0; i < 5000; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, d(rng));
    if (p.sets.X0.Contains(x)) EXPECT_LE(c.Evaluate(g.initial(), x), 1e-9);
    if (p.sets.Xu.Contains(x)) {
      for (int v = 0; v < c.num_nodes(); ++v) EXPECT_GT(c.Evaluate(v, x), 0.0);
    }
  }
  EXPECT_NE(r.ToJson().find("\"Certified\""), std::string::npos);
}

GTEST_TEST(CertSosTest, GramIdentityHoldsPointwise) {
  const Problem p = ParseProblem(kScalarPoly);
  const WhGraph g = WhGraph::Build(p.constraint);
  const SosEncoding enc = EncodeSos(GbfVariant::Parse("dgbf-zero"), p, g);
  const conic::SolveOutcome out = conic::Solve(enc.problem);
  ASSERT_EQ(out.status, conic::SolveStatus::kFeasible) << out.diagnostic;
  const GramCheck gc = CheckGram(enc, out.assignment);
  EXPECT_LT(gc.coefficient_residual, 1e-9);
  EXPECT_GE(gc.min_eig, -1e-7);

  // target - sum sigma_j g_j - z'Qz vanishes at random points.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (const SosCondition& c : enc.conditions) {
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd z(c.num_vars);
      for (int i = 0; i < z.size(); ++i) z[i] = d(rng);
      double value = 0.0;
      for (const auto& [e, coef] : c.target) value += coef.Evaluate(out.assignment) * EvalMonomial(e, z);
      for (size_t j = 0; j < c.multipliers.size(); ++j) {
        value -= EvalGram(c.multipliers[j], out.assignment, z) * c.constraints[j].Evaluate(z);
      }
      value -= EvalGram(c.gram, out.assignment, z);
      EXPECT_NEAR(value, 0.0, 1e-8) << c.label;
    }
  }
}

GTEST_TEST(CertSosTest, ImplicationVariantsAreRejected) {
  const Problem p = ParseProblem(kScalarPoly);
  const WhGraph g = WhGraph::Build(p.constraint);
  EXPECT_THROW(EncodeSos(GbfVariant::Parse("gbf-zero"), p, g), std::invalid_argument);
  EXPECT_THROW(EncodeSos(GbfVariant::Parse("1gbf-zero"), p, g), std::invalid_argument);
}

GTEST_TEST(CertSosTest, DegreeErrors) {
  Problem p = ParseProblem(kScalarPoly);
  const WhGraph g = WhGraph::Build(p.constraint);
  p.sos.multiplier_degree = 1;
  EXPECT_THROW(EncodeSos(GbfVariant::Parse("1dgbf-zero"), p, g), SosDegreeError);
  p.sos.multiplier_degree = -1;
  p.sos.n_p = 8;
  // Psi of degree 8 composed with the quadratic closed loop exceeds the cap.
  try {
    EncodeSos(GbfVariant::Parse("1dgbf-zero"), p, g);
    FAIL();
  } catch (const SosDegreeError& e) {
    EXPECT_FALSE(e.label().empty());
  }
}

GTEST_TEST(CertSosTest, ExtractedBarrierMatchesScaledEncoding) {
  const Problem p = ParseProblem(kScalarPoly);
  const WhGraph g = WhGraph::Build(p.constraint);
  const SosEncoding enc = EncodeSos(GbfVariant::Parse("1dgbf-zero"), p, g);
  const conic::SolveOutcome out = conic::Solve(enc.problem);
  ASSERT_EQ(out.status, conic::SolveStatus::kFeasible);
  const PolyGbf c = ExtractPolyGbf(enc, out.assignment, g);
  const MonomialBasis& b = MonomialBasis::Get(enc.num_vars, enc.n_p);
  for (double x : {-1.7, -0.2, 0.9}) {
    // Psi in scaled coordinates at x / scale.
    const double xs = x / enc.scale[0];
    double scaled = 0.0;
    for (int i = 0; i < b.size(); ++i) {
      scaled += out.assignment[enc.psi[0][i].id] * std::pow(xs, b[i][0]);
    }
    EXPECT_NEAR(c.Evaluate(0, Eigen::VectorXd::Constant(1, x)), scaled, 1e-9);
  }
}

}  // namespace
}  // namespace whcert
