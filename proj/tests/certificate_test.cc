#include "whcert/certificate.h"

#include <gtest/gtest.h>

namespace whcert {
namespace {

GbfCertificate Sample() {
  GbfCertificate c;
  c.variant = GbfVariant::Parse("dgbf-zero");
  c.graph = "K(2,4)";
  c.state_dim = 2;
  c.input_dim = 1;
  Eigen::Matrix3d P;
  P << 2, 0.5, 0.1, 0.5, 1, -0.2, 0.1, -0.2, -1;
  c.P = {P, 2 * P};
  c.eps = {0.1, 0.2};
  c.multipliers = {{"edge v1-0->v1 m=0 lambda0", 0.3}};
  c.K = Eigen::RowVector2d(-0.5, -0.7);
  return c;
}

GTEST_TEST(GbfVariantTest, ParseAndPrint) {
  for (const char* s : {"gbf-zero", "dgbf-hold", "1gbf-zero", "1dgbf-hold"}) {
    EXPECT_EQ(GbfVariant::Parse(s).ToString(), s);
  }
  const GbfVariant v = GbfVariant::Parse("1dgbf-hold");
  EXPECT_TRUE(v.decrease());
  EXPECT_TRUE(v.one_step());
  EXPECT_TRUE(v.augmented());
  EXPECT_FALSE(GbfVariant::Parse("1dgbf-zero").augmented());
  EXPECT_FALSE(GbfVariant::Parse("gbf-hold").augmented());
  EXPECT_THROW(GbfVariant::Parse("gbf"), std::invalid_argument);
  EXPECT_THROW(GbfVariant::Parse("2gbf-zero"), std::invalid_argument);
  EXPECT_EQ(ParseGbfTag("1dgbf"), GbfTag::kOneDGbf);
}

GTEST_TEST(CertificateTest, QuadraticEvaluation) {
  const GbfCertificate c = Sample();
  const Eigen::Vector2d x(0.4, -1.0);
  // Expanded [x;1]' P [x;1].
  const double expect = 2 * 0.16 + 2 * 0.5 * 0.4 * -1.0 + 1 * 1.0 + 2 * 0.1 * 0.4 +
                        2 * -0.2 * -1.0 - 1;
  EXPECT_NEAR(c.Evaluate(0, x), expect, 1e-14);
  EXPECT_NEAR(EvaluateBarrier(Certificate(c), 1, x), 2 * expect, 1e-14);
  EXPECT_THROW(c.Evaluate(0, Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

GTEST_TEST(CertificateTest, QuadraticJsonRoundTrip) {
  const GbfCertificate c = Sample();
  const Certificate back = CertificateFromJson(ToJson(c));
  ASSERT_TRUE(std::holds_alternative<GbfCertificate>(back));
  const GbfCertificate& d = std::get<GbfCertificate>(back);
  EXPECT_EQ(d.variant, c.variant);
  EXPECT_EQ(d.graph, c.graph);
  ASSERT_EQ(d.P.size(), 2u);
  EXPECT_TRUE(d.P[1].isApprox(c.P[1], 1e-15));
  EXPECT_EQ(d.eps, c.eps);
  EXPECT_EQ(d.multipliers, c.multipliers);
  EXPECT_TRUE(d.K.isApprox(c.K));
  EXPECT_EQ(NumNodes(back), 2);
  EXPECT_EQ(BarrierDim(back), 2);
  EXPECT_EQ(GraphOf(back), "K(2,4)");
}

GTEST_TEST(CertificateTest, PolynomialJsonRoundTrip) {
  PolyGbf c;
  c.variant = GbfVariant::Parse("1dgbf-zero");
  c.graph = "K(3,5)";
  c.n_p = 2;
  c.num_vars = 2;
  c.state_dim = 2;
  const Polynomial x = Polynomial::Variable(2, 0);
  const Polynomial y = Polynomial::Variable(2, 1);
  c.psi = {x * x + y - Polynomial::Constant(2, 1.0), x * y};
  c.eps = {0.0, 0.5};
  c.gram_residual = 1e-12;
  const Certificate back = CertificateFromJson(CertificateToJson(Certificate(c)));
  ASSERT_TRUE(std::holds_alternative<PolyGbf>(back));
  const PolyGbf& d = std::get<PolyGbf>(back);
  const Eigen::Vector2d z(0.3, 2.0);
  EXPECT_NEAR(d.Evaluate(0, z), 0.09 + 2.0 - 1.0, 1e-14);
  EXPECT_NEAR(d.Evaluate(1, z), 0.6, 1e-14);
  EXPECT_EQ(d.eps, c.eps);
  EXPECT_EQ(VariantOf(back), c.variant);
}

GTEST_TEST(CertificateTest, MalformedJson) {
  EXPECT_THROW(CertificateFromJson("{"), std::invalid_argument);
  EXPECT_THROW(CertificateFromJson(R"({"kind": "cubic"})"), std::invalid_argument);
  std::string text = ToJson(Sample());
  text.replace(text.find("\"v2\""), 4, "\"v7\"");
  EXPECT_THROW(CertificateFromJson(text), std::invalid_argument);
}

}  // namespace
}  // namespace whcert
