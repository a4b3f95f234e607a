#include "whcert/wh_graph.h"

#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "oracles.h"
#include "whcert/wh_constraint.h"

namespace whcert {
namespace {

using testing::BitsOf;
using testing::BitString;
using testing::WindowOracle;

std::set<std::tuple<int, int, int>> EdgeSet(const WhGraph& g) {
  std::set<std::tuple<int, int, int>> out;
  for (const auto& e : g.edges()) out.insert({e.from + 1, e.label, e.to + 1});
  return out;
}

GTEST_TEST(WhConstraintTest, RejectsBadParameters) {
  EXPECT_THROW(WhConstraint(0, 3), std::invalid_argument);
  EXPECT_THROW(WhConstraint(4, 3), std::invalid_argument);
  EXPECT_EQ(WhConstraint(2, 4).ToString(), "K(2,4)");
  EXPECT_EQ(WhConstraint(2, 4).max_losses(), 2);
}

GTEST_TEST(WhConstraintTest, LossWordParsing) {
  const LossWord w = LossWord::FromString("10010");
  EXPECT_EQ(w.size(), 5);
  EXPECT_TRUE(w[0]);
  EXPECT_FALSE(w[1]);
  EXPECT_EQ(w.ToString(), "10010");
  EXPECT_THROW(LossWord::FromString("10a"), std::invalid_argument);
}

GTEST_TEST(WhConstraintTest, SatisfiesMatchesWindowOracle) {
  for (int s = 1; s <= 6; ++s) {
    for (int r = 1; r <= s; ++r) {
      const WhConstraint c(r, s);
      for (int len = 1; len <= 10; ++len) {
        for (unsigned w = 0; w < (1u << len); ++w) {
          const auto bits = BitsOf(w, len);
          const LossWord word = LossWord::FromString(BitString(bits));
          ASSERT_EQ(Satisfies(word, c), WindowOracle(bits, r, s))
              << c.ToString() << " " << word.ToString();
        }
      }
    }
  }
}

GTEST_TEST(WhConstraintTest, DecomposeAndExpand) {
  const WhConstraint c(2, 4);
  const LossWord w = LossWord::FromString("1001101");
  const LabelWord labels = Decompose(w, c);
  EXPECT_EQ(labels.labels(), (std::vector<int>{2, 0, 1, 0}));
  EXPECT_EQ(labels.Expand(), w);
  EXPECT_THROW(Decompose(LossWord::FromString("0101"), c), std::invalid_argument);
  EXPECT_THROW(Decompose(LossWord::FromString("1000"), c), std::invalid_argument);
}

GTEST_TEST(WhConstraintTest, DominanceIsBoundedInclusion) {
  // Fewer allowed losses in the same window is stronger.
  EXPECT_TRUE(DominatesBounded(WhConstraint(3, 4), WhConstraint(2, 4), 12));
  EXPECT_FALSE(DominatesBounded(WhConstraint(2, 4), WhConstraint(3, 4), 12));
  EXPECT_THROW(DominatesBounded(WhConstraint(2, 4), WhConstraint(3, 4), 30),
               std::invalid_argument);
}

GTEST_TEST(WhGraphTest, RunningExampleGraph) {
  const WhGraph g = WhGraph::Build(WhConstraint(2, 4));
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(g.num_edges(), 6);
  EXPECT_EQ(g.initial(), 0);
  const std::set<std::tuple<int, int, int>> expected{
      {1, 0, 1}, {1, 1, 2}, {1, 2, 3}, {2, 0, 1}, {2, 1, 2}, {3, 0, 1}};
  EXPECT_EQ(EdgeSet(g), expected);
}

GTEST_TEST(WhGraphTest, PlatoonGraph) {
  const WhGraph g = WhGraph::Build(WhConstraint(3, 5));
  EXPECT_EQ(g.num_nodes(), 6);
  EXPECT_EQ(g.num_edges(), 10);
  const std::set<std::tuple<int, int, int>> expected{
      {1, 0, 1}, {1, 1, 2}, {1, 2, 3}, {2, 0, 4}, {2, 1, 5},
      {3, 0, 6}, {4, 0, 1}, {4, 1, 2}, {5, 0, 4}, {6, 0, 1}};
  EXPECT_EQ(EdgeSet(g), expected);
}

GTEST_TEST(WhGraphTest, ThreeInSevenHasFifteenNodes) {
  const WhGraph g = WhGraph::Build(WhConstraint(3, 7));
  EXPECT_EQ(g.num_nodes(), 15);
  // Subgraph shown for the zero-strategy study: v1 -4-> v5 -0-> v15 -0-> v1.
  EXPECT_EQ(g.Next(0, 0), 0);
  const int a = g.Next(0, 4);
  ASSERT_GE(a, 0);
  const int b = g.Next(a, 0);
  ASSERT_GE(b, 0);
  EXPECT_EQ(g.Next(b, 0), 0);
}

GTEST_TEST(WhGraphTest, AcceptanceMatchesWindowOracle) {
  for (int s = 1; s <= 6; ++s) {
    for (int r = 1; r <= s; ++r) {
      const WhGraph g = WhGraph::Build(WhConstraint(r, s));
      for (int len = 1; len <= 10; ++len) {
        for (unsigned w = 1u << (len - 1); w < (1u << len); ++w) {
          const auto bits = BitsOf(w, len);
          ASSERT_EQ(g.Accepts(LossWord::FromString(BitString(bits))), WindowOracle(bits, r, s))
              << g.Id() << " " << BitString(bits);
        }
      }
      EXPECT_TRUE(CheckLanguageEquivalence(g, WhConstraint(r, s), 10).equivalent);
    }
  }
}

GTEST_TEST(WhGraphTest, LanguageCheckFlagsWrongGraph) {
  // Dropping the two-loss edge loses "100".
  const WhConstraint c(2, 4);
  const WhGraph g = WhGraph::FromEdges(c, 2, 0, {{0, 0, 0}, {0, 1, 1}, {1, 0, 0}, {1, 1, 1}});
  const LanguageCheck lc = CheckLanguageEquivalence(g, c, 8);
  EXPECT_FALSE(lc.equivalent);
  ASSERT_TRUE(lc.counterexample.has_value());
  EXPECT_EQ(lc.counterexample->ToString(), "100");
}

GTEST_TEST(WhGraphTest, FromEdgesValidation) {
  const WhConstraint c(2, 4);
  EXPECT_THROW(WhGraph::FromEdges(c, 2, 0, {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}}),
               std::invalid_argument);
  EXPECT_THROW(WhGraph::FromEdges(c, 2, 0, {{0, 0, 0}, {0, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(WhGraph::FromEdges(c, 2, 0, {{0, 0, 0}, {1, 0, 0}}), std::invalid_argument);
}

GTEST_TEST(WhGraphTest, JsonRoundTripAndNames) {
  const WhGraph g = WhGraph::Build(WhConstraint(3, 5));
  const WhGraph h = WhGraph::FromJson(g.ToJson());
  EXPECT_EQ(h.edges(), g.edges());
  EXPECT_EQ(h.Id(), "K(3,5)");
  EXPECT_EQ(WhGraph::NodeName(2), "v3");
  EXPECT_EQ(WhGraph::ParseNodeName("v12"), 11);
  EXPECT_THROW(WhGraph::ParseNodeName("x1"), std::invalid_argument);
  EXPECT_THROW(WhGraph::ParseNodeName("v0"), std::invalid_argument);
}

GTEST_TEST(WhGraphTest, DotExportListsEveryEdge) {
  const WhGraph g = WhGraph::Build(WhConstraint(2, 4));
  const std::string dot = ExportDot(g);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("v1 -> v3"), std::string::npos);
}

GTEST_TEST(WhGraphTest, PathCountsMatchAdmissibleWords) {
  for (const auto& [r, s] : std::vector<std::pair<int, int>>{{2, 4}, {3, 5}, {3, 7}}) {
    const WhGraph g = WhGraph::Build(WhConstraint(r, s));
    for (int h = 1; h <= 10; ++h) {
      long long admissible = 0;
      for (unsigned w = 1u << (h - 1); w < (1u << h); ++w) admissible += WindowOracle(BitsOf(w, h), r, s);
      EXPECT_EQ(CountPaths(g, h), admissible) << g.Id() << " h=" << h;
      long long streamed = 0;
      PathEnumerator it(g, h);
      while (auto p = it.Next()) {
        EXPECT_EQ(p->ExpandedLength(), h);
        EXPECT_TRUE(g.Accepts(p->Expand()));
        ++streamed;
      }
      EXPECT_EQ(streamed, admissible);
    }
  }
}

GTEST_TEST(WhGraphTest, UpToHorizonStream) {
  const WhGraph g = WhGraph::Build(WhConstraint(2, 4));
  long long total = 0;
  for (int h = 1; h <= 6; ++h) total += CountPaths(g, h);
  EXPECT_EQ(CountPaths(g, 6, PathMode::kUpToHorizon), total);
  EXPECT_THROW(PathEnumerator(g, kDefaultPathHorizon + 1), std::invalid_argument);
}

GTEST_TEST(WhGraphTest, PathToString) {
  GraphPath p{{0, 0, 2}, {0, 2}};
  EXPECT_EQ(p.ToString(), "v1 0 v1 2 v3");
  EXPECT_EQ(p.Expand().ToString(), "1100");
  EXPECT_EQ(p.ExpandedLength(), 4);
}

}  // namespace
}  // namespace whcert
