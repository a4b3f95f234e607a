#include "whcert/validate.h"

#include <sstream>

#include <gtest/gtest.h>

#include "whcert/cert_lmi.h"

namespace whcert {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

class ValidateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    problem_ = LoadProblem(kConfigDir + "/case_study_1.json");
    graph_ = std::make_unique<WhGraph>(WhGraph::Build(problem_.constraint));
    const CertReport r =
        Verify(GbfVariant::Parse("gbf-hold"), problem_, problem_.controller->K(), *graph_);
    ASSERT_TRUE(r.certificate.has_value());
    cert_ = *r.certificate;
  }

  Problem problem_;
  std::unique_ptr<WhGraph> graph_;
  GbfCertificate cert_;
};

TEST_F(ValidateTest, CertifiedBarrierPasses) {
  ValidateOptions o;
  o.samples = 20000;
  const ValidationReport rep = ValidateCertificate(cert_, problem_, *graph_, o);
  EXPECT_TRUE(rep.passed);
  EXPECT_TRUE(rep.residuals_ok);
  EXPECT_LE(rep.max_violation, 1e-6);
  // init + unsafe per node, one per (edge, m).
  EXPECT_EQ(rep.conditions.size(), 16u);
  for (const auto& c : rep.conditions) {
    EXPECT_EQ(c.violations, 0) << c.label;
    EXPECT_GT(c.samples, 0) << c.label;
  }
}

TEST_F(ValidateTest, BrokenBarrierIsCaughtAndSamplingIsMonotone) {
  // Positive at the origin, so the init condition fails on X0.
  GbfCertificate broken = cert_;
  broken.P[0](2, 2) += 20.0;
  ValidateOptions small;
  small.samples = 2000;
  ValidateOptions large = small;
  large.samples = 8000;
  const ValidationReport a = ValidateCertificate(broken, problem_, *graph_, small);
  const ValidationReport b = ValidateCertificate(broken, problem_, *graph_, large);
  EXPECT_FALSE(a.passed);
  EXPECT_GT(a.max_violation, 1e-6);
  EXPECT_GE(b.max_violation, a.max_violation);
  EXPECT_NE(a.ToJson().find("\"passed\": false"), std::string::npos);
}

TEST_F(ValidateTest, MismatchedGraphIsRejected) {
  const WhGraph other = WhGraph::Build(WhConstraint(3, 5));
  EXPECT_THROW(ValidateCertificate(cert_, problem_, other), std::invalid_argument);
}

TEST_F(ValidateTest, Containment) {
  const ContainmentReport same = CheckContainment(cert_, cert_, problem_, {0, 1, 2}, 5000);
  EXPECT_TRUE(same.passed);
  ASSERT_EQ(same.escapes.size(), 3u);
  EXPECT_GT(same.inner_count[0], 0);

  // Shifting the outer barrier up shrinks its sublevel set.
  GbfCertificate shrunk = cert_;
  for (auto& P : shrunk.P) P(2, 2) += 10.0;
  const ContainmentReport esc = CheckContainment(cert_, shrunk, problem_, {0, 1, 2}, 5000);
  EXPECT_FALSE(esc.passed);
  EXPECT_GT(esc.escapes[0], 0);
}

TEST_F(ValidateTest, LevelsetGrid) {
  const auto grid = ParseGrid("x1:-1:1:3,x2:0:2:5");
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_EQ(grid[0].name, "x1");
  EXPECT_DOUBLE_EQ(grid[1].hi, 2.0);
  EXPECT_EQ(grid[1].n, 5);
  const std::string csv = LevelsetCsv(cert_, 1, grid);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x1,x2,psi,sign");
  int rows = 0;
  while (std::getline(in, line)) {
    double x1, x2, psi;
    int sign;
    char c;
    std::istringstream row(line);
    row >> x1 >> c >> x2 >> c >> psi >> c >> sign;
    EXPECT_NEAR(psi, cert_.Evaluate(1, Eigen::Vector2d(x1, x2)), 1e-6 * (1 + std::abs(psi)));
    EXPECT_EQ(sign, psi > 0 ? 1 : (psi < 0 ? -1 : 0));
    ++rows;
  }
  EXPECT_EQ(rows, 15);
  EXPECT_THROW(LevelsetCsv(cert_, 0, ParseGrid("x1:0:1:2")), std::invalid_argument);
}

GTEST_TEST(ParseGridTest, RejectsMalformedSpecs) {
  EXPECT_THROW(ParseGrid(""), std::invalid_argument);
  EXPECT_THROW(ParseGrid("x1:0:1"), std::invalid_argument);
  EXPECT_THROW(ParseGrid("x1:0:1:0"), std::invalid_argument);
  EXPECT_THROW(ParseGrid("x1:1:0:5"), std::invalid_argument);
  EXPECT_THROW(ParseGrid("x1:a:1:5"), std::invalid_argument);
}

}  // namespace
}  // namespace whcert
