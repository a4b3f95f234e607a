#include "whcert/problem.h"

#include <string>

#include <gtest/gtest.h>

namespace whcert {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

const char* kMinimal = R"({
  "system": {"type": "linear", "A": [[0.5, 0], [0, 0.5]], "B": [[1], [0]],
             "states": ["x1", "x2"], "inputs": ["u"]},
  "controller": {"K": [[-0.1, 0]]},
  "strategy": "zero",
  "constraint": {"r": 1, "s": 2},
  "sets": {
    "X": {"type": "box", "lo": [-2, -2], "hi": [2, 2]},
    "X0": {"type": "ellipsoid", "center": [0, 0], "semi_axes": [0.5, 0.5]},
    "Xu": {"type": "polynomial", "constraints": ["x1 - 1.5"]}
  }
})";

std::string Replace(std::string text, const std::string& from, const std::string& to) {
  const size_t pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::string PointerOf(const std::string& json) {
  try {
    ParseProblem(json);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<none>";
}

GTEST_TEST(ProblemTest, ParsesMinimalLinearProblem) {
  const Problem p = ParseProblem(kMinimal);
  EXPECT_TRUE(p.system.is_linear());
  EXPECT_EQ(p.system.n(), 2);
  ASSERT_TRUE(p.controller.has_value());
  EXPECT_DOUBLE_EQ(p.controller->K()(0, 0), -0.1);
  EXPECT_EQ(p.strategy, Strategy::kZero);
  EXPECT_EQ(p.constraint, WhConstraint(1, 2));
  EXPECT_TRUE(p.sets.Xu.Contains(Eigen::Vector2d(1.6, 0)));
  EXPECT_FALSE(p.sets.U.has_value());
  EXPECT_EQ(p.state_names, (std::vector<std::string>{"x1", "x2"}));
  EXPECT_NO_THROW(ValidateProblem(p));
}

GTEST_TEST(ProblemTest, ErrorsCarryJsonPointers) {
  const std::string base = kMinimal;
  EXPECT_EQ(PointerOf(Replace(base, R"("strategy": "zero",)", "")), "/strategy");
  EXPECT_EQ(PointerOf(Replace(base, R"("semi_axes": [0.5, 0.5])", R"("semi_axes": [0.5])")),
            "/sets/X0/semi_axes");
  EXPECT_EQ(PointerOf(Replace(base, R"("semi_axes": [0.5, 0.5])", R"("semi_axes": [0.5, -1])")),
            "/sets/X0/semi_axes");
  EXPECT_EQ(PointerOf(Replace(base, R"("K": [[-0.1, 0]])", R"("K": [[-0.1]])")), "/controller/K");
  EXPECT_EQ(PointerOf(Replace(base, R"("r": 1)", R"("r": 3)")), "/constraint");
  EXPECT_EQ(PointerOf(Replace(base, R"("type": "box", "lo")", R"("type": "cube", "lo")")),
            "/sets/X/type");
  EXPECT_EQ(PointerOf(Replace(base, R"("x1 - 1.5")", R"("x1 - y")")), "/sets/Xu/constraints/0");
  EXPECT_EQ(PointerOf(Replace(base, R"("A": [[0.5, 0], [0, 0.5]])", R"("A": [[0.5, 0]])")),
            "/system/A");
  EXPECT_EQ(PointerOf("{not json"), "");
}

GTEST_TEST(ProblemTest, OverlapOfInitialAndUnsafeIsRejected) {
  const Problem p = ParseProblem(Replace(kMinimal, R"("x1 - 1.5")", R"("x1 - 0.2")"));
  try {
    ValidateProblem(p);
    FAIL() << "overlap not detected";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/sets/Xu");
  }
}

GTEST_TEST(ProblemTest, BundledConfigsLoad) {
  for (const char* name : {"case_study_1", "case_study_2", "case_study_3", "case_study_4"}) {
    SCOPED_TRACE(name);
    const Problem p = LoadProblem(kConfigDir + "/" + name + ".json");
    EXPECT_EQ(p.system.n(), 2);
  }
  const Problem cs4 = LoadProblem(kConfigDir + "/case_study_4.json");
  ASSERT_TRUE(cs4.k_init.has_value());
  // Enlarged initial set: semi-axes 1.5 * (0.21, 0.5).
  EXPECT_TRUE(cs4.sets.X0.Contains(Eigen::Vector2d(0, 0.75)));
  EXPECT_FALSE(cs4.sets.X0.Contains(Eigen::Vector2d(0, 0.76)));
  const Problem cs3 = LoadProblem(kConfigDir + "/case_study_3.json");
  EXPECT_FALSE(cs3.system.is_linear());
  EXPECT_EQ(cs3.sos.n_p, 3);
}

GTEST_TEST(ProblemTest, PrintedPlatoonOrientationIsRejected) {
  try {
    LoadProblem(kConfigDir + "/case_study_3_printed_orientation.json");
    FAIL() << "expected rejection";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/sets/Xu");
  }
}

GTEST_TEST(ProblemTest, MissingFile) {
  EXPECT_THROW(LoadProblem(kConfigDir + "/does_not_exist.json"), ConfigError);
}

}  // namespace
}  // namespace whcert
