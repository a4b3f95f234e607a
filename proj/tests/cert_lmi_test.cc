#include "whcert/cert_lmi.h"

#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "whcert/problem.h"

namespace whcert {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

double Quad(const Eigen::MatrixXd& P, const Eigen::VectorXd& x) {
  Eigen::VectorXd z(x.size() + 1);
  z << x, 1.0;
  return z.dot(P * z);
}

// Scalar plant x+ = 0.5 x + u with u = -0.2 x under K(1,2).
const char* kScalar = R"({
  "system": {"type": "linear", "A": [[0.5]], "B": [[1]], "states": ["x"], "inputs": ["u"]},
  "controller": {"K": [[-0.2]]},
  "strategy": "zero",
  "constraint": {"r": 1, "s": 2},
  "sets": {
    "X": {"type": "box", "lo": [-4], "hi": [4]},
    "X0": {"type": "box", "lo": [-1], "hi": [1]},
    "Xu": {"type": "polynomial", "constraints": ["x - 3"]}
  }
})";

GTEST_TEST(CertLmiTest, ConditionCountsFollowGraph) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  const Eigen::MatrixXd K = p.controller->K();
  // init + unsafe per node, then one per (edge, m <= label).
  const auto gbf = BuildConditions(GbfVariant::Parse("gbf-hold"), p, K, g);
  EXPECT_EQ(gbf.size(), 6u + 10u);
  for (const auto& c : gbf) {
    if (c.kind == LmiCondition::Kind::kDynamic) EXPECT_TRUE(c.implication);
  }
  const auto dgbf = BuildConditions(GbfVariant::Parse("dgbf-hold"), p, K, g);
  EXPECT_EQ(dgbf.size(), gbf.size());
  for (const auto& c : dgbf) EXPECT_FALSE(c.implication);
  // 1-step: one switch per edge, one increase for each node entered with a loss.
  const auto one = BuildConditions(GbfVariant::Parse("1dgbf-hold"), p, K, g);
  EXPECT_EQ(one.size(), 6u + 6u + 2u);
  EXPECT_EQ(one.front().F.rows(), 4);
  const auto one_imp = BuildConditions(GbfVariant::Parse("1gbf-hold"), p, K, g);
  EXPECT_EQ(one_imp.size(), 6u + 6u + 1u + 2u);
}

GTEST_TEST(CertLmiTest, SuccessorMatrixMatchesRollout) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const Eigen::MatrixXd K = p.controller->K();
  const Eigen::MatrixXd& A = p.system.A();
  const Eigen::MatrixXd& B = p.system.B();
  const Eigen::Vector2d x(0.3, -0.8);
  for (const char* q : {"zero", "hold"}) {
    for (int m = 0; m <= 3; ++m) {
      std::vector<int> bits{1};
      bits.insert(bits.end(), m, 0);
      const auto xs = testing::LinearRollout(A, B, K, std::string(q) == "hold", x, bits);
      const GbfVariant v{GbfTag::kGbf, ParseStrategy(q)};
      const Eigen::MatrixXd F = SuccessorMatrix(v, p, K, m);
      Eigen::Vector3d z(x[0], x[1], 1.0);
      EXPECT_TRUE((F * z).head(2).isApprox(xs.back(), 1e-12)) << q << " m=" << m;
    }
  }
  // Augmented: (x, u_held, 1) -> (A x + B u_held, u_held, 1).
  const GbfVariant aug = GbfVariant::Parse("1dgbf-hold");
  const Eigen::MatrixXd Fo = OpenLoopMatrix(aug, p);
  Eigen::Vector4d z(x[0], x[1], 0.7, 1.0);
  const Eigen::Vector2d next = A * x + B * 0.7;
  EXPECT_TRUE((Fo * z).head(2).isApprox(next, 1e-14));
  EXPECT_DOUBLE_EQ((Fo * z)[2], 0.7);
}

GTEST_TEST(CertLmiTest, ScalarProblemIsCertifiedForEveryVariant) {
  const Problem p = ParseProblem(kScalar);
  const WhGraph g = WhGraph::Build(p.constraint);
  for (const char* tag : {"gbf", "dgbf", "1gbf", "1dgbf"}) {
    const GbfVariant v{ParseGbfTag(tag), Strategy::kZero};
    const CertReport r = Verify(v, p, p.controller->K(), g);
    EXPECT_EQ(r.status, CertStatus::kCertified) << tag << ": " << r.detail;
    ASSERT_TRUE(r.certificate.has_value());
    for (const auto& e : RecheckResiduals(*r.certificate, p, g)) {
      EXPECT_GE(e.min_eig, -1e-6) << e.label;
    }
  }
}

GTEST_TEST(CertLmiTest, RunningExampleGbfHoldsAtSampleLevel) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  const Eigen::MatrixXd K = p.controller->K();
  const CertReport r = Verify(GbfVariant::Parse("gbf-hold"), p, K, g);
  ASSERT_EQ(r.status, CertStatus::kCertified) << r.detail;
  const GbfCertificate& c = *r.certificate;

  // Semantic conditions checked with an independent rollout.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> box(-3, 3);
  int antecedents = 0;
  for (int i = 0; i < 20000; ++i) {
    const Eigen::Vector2d x(box(rng), box(rng));
    for (int v = 0; v < 3; ++v) EXPECT_NEAR(c.Evaluate(v, x), Quad(c.P[v], x), 1e-9);
    if (p.sets.X0.Contains(x)) EXPECT_LE(Quad(c.P[0], x), 1e-9);
    if (p.sets.Xu.Contains(x)) {
      for (int v = 0; v < 3; ++v) EXPECT_GT(Quad(c.P[v], x), 0.0);
    }
    for (const auto& e : g.edges()) {
      if (Quad(c.P[e.from], x) > 0) continue;
      ++antecedents;
      std::vector<int> bits{1};
      for (int m = 0; m <= e.label; ++m) {
        const auto xs = testing::LinearRollout(p.system.A(), p.system.B(), K, true, x, bits);
        EXPECT_LE(Quad(c.P[e.to], xs.back()), -(e.label - m) * c.eps[e.to] + 1e-7);
        bits.push_back(0);
      }
    }
  }
  EXPECT_GT(antecedents, 100);
}

GTEST_TEST(CertLmiTest, RunningExampleOneStepDecreaseIsInfeasible) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  const CertReport r = Verify(GbfVariant::Parse("1dgbf-hold"), p, p.controller->K(), g);
  EXPECT_EQ(r.status, CertStatus::kInfeasible) << r.detail;
  EXPECT_FALSE(r.certificate.has_value());
}

GTEST_TEST(CertLmiTest, ConditionMatrixOfCertifiedReport) {
  const Problem p = ParseProblem(kScalar);
  const WhGraph g = WhGraph::Build(p.constraint);
  const GbfVariant v = GbfVariant::Parse("dgbf-zero");
  const CertReport r = Verify(v, p, p.controller->K(), g);
  ASSERT_TRUE(r.certificate.has_value());
  for (const auto& c : BuildConditions(v, p, p.controller->K(), g)) {
    const Eigen::MatrixXd M = ConditionMatrix(c, *r.certificate);
    EXPECT_TRUE(M.isApprox(M.transpose()));
    EXPECT_GE(conic::EigMin(M), -1e-6) << c.label;
  }
  const std::string json = r.ToJson();
  EXPECT_NE(json.find("\"Certified\""), std::string::npos);
}

GTEST_TEST(CertLmiTest, EncodingIsWellFormed) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  const conic::ConicProblem enc = Encode(GbfVariant::Parse("dgbf-hold"), p, p.controller->K(), g);
  EXPECT_NO_THROW(enc.Validate());
  EXPECT_GE(enc.psd_constraints().size(), 16u);
  EXPECT_EQ(enc.matrices().size(), 3u);
}

GTEST_TEST(CertLmiTest, RejectsPolynomialProblems) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_3.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  EXPECT_THROW(BuildConditions(GbfVariant::Parse("gbf-zero"), p, Eigen::MatrixXd::Zero(1, 2), g),
               std::invalid_argument);
}

GTEST_TEST(CertLmiTest, ScheduleParsing) {
  const LmiOptions o = ParseSchedule(R"({"gamma_grid": [0.5, 1.0], "alternation_rounds": 4,
                                         "eps_min": 0.01})");
  EXPECT_EQ(o.gamma_grid, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(o.alternation_rounds, 4);
  EXPECT_DOUBLE_EQ(o.eps_min, 0.01);
  EXPECT_DOUBLE_EQ(o.rho, LmiOptions{}.rho);
  try {
    ParseSchedule(R"({"gamma": 1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/gamma");
  }
  EXPECT_THROW(ParseSchedule(R"({"gamma_grid": "x"})"), ConfigError);
  const auto grid = LmiOptions::DefaultGammaGrid();
  ASSERT_EQ(grid.size(), 20u);
  EXPECT_NEAR(grid.front(), 1.0 / 64, 1e-15);
  EXPECT_NEAR(grid.back(), 8.0, 1e-12);
}

GTEST_TEST(CertLmiTest, SynthesisKeepsACertifiedGain) {
  // Already certified at the initial gain: synthesis returns it.
  const Problem p = ParseProblem(kScalar);
  const WhGraph g = WhGraph::Build(p.constraint);
  const SynthesisResult s = Synthesize(p, g, p.controller->K());
  EXPECT_EQ(s.report.status, CertStatus::kCertified);
  EXPECT_EQ(s.rounds, 0);
  EXPECT_TRUE(s.K.isApprox(p.controller->K()));
}

}  // namespace
}  // namespace whcert
