#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace whcert {
namespace cli {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "whcert");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string Config(const std::string& name) { return kConfigDir + "/" + name + ".json"; }

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("whcert_cli_test_" + name)).string();
}

GTEST_TEST(CliTest, GraphSummary) {
  const Result r = Invoke({"graph", "--r", "2", "--s", "4", "--check-len", "12"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "3 nodes, 6 edges, language check OK\n");
  const std::string dot = TempPath("g.dot");
  EXPECT_EQ(Invoke({"graph", "--r", "3", "--s", "7", "--dot", dot}).out.rfind("15 nodes, ", 0), 0u);
  std::ifstream in(dot);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "digraph \"K(3,7)\" {");
  EXPECT_EQ(Invoke({"graph", "--r", "5", "--s", "4"}).code, kExitBadInput);
}

GTEST_TEST(CliTest, ArgumentErrors) {
  EXPECT_EQ(Invoke({}).code, kExitBadInput);
  EXPECT_EQ(Invoke({"verify", "--problem", Config("case_study_1")}).code, kExitBadInput);
  EXPECT_EQ(Invoke({"verify", "--problem", Config("case_study_1"), "--variant", "2gbf"}).code,
            kExitBadInput);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
}

GTEST_TEST(CliTest, MalformedConfigReportsPointer) {
  const std::string path = TempPath("bad.json");
  std::ofstream(path) << R"({"system": {"type": "linear", "A": [[1]], "B": [[1]]},
    "strategy": "sometimes"})";
  const Result r = Invoke({"verify", "--problem", path, "--variant", "gbf"});
  EXPECT_EQ(r.code, kExitBadInput);
  EXPECT_NE(r.err.find("/strategy"), std::string::npos) << r.err;

  const Result printed =
      Invoke({"verify", "--problem", Config("case_study_3_printed_orientation"), "--variant", "1dgbf"});
  EXPECT_EQ(printed.code, kExitBadInput);
  EXPECT_NE(printed.err.find("/sets/Xu"), std::string::npos);
}

GTEST_TEST(CliTest, VerifyExitCodes) {
  const std::string cert = TempPath("cs1.json");
  const Result ok = Invoke({"verify", "--problem", Config("case_study_1"), "--variant", "gbf",
                         "--cert-out", cert});
  EXPECT_EQ(ok.code, kExitOk) << ok.out;
  EXPECT_NE(ok.out.find("\"status\": \"Certified\""), std::string::npos);
  const Result inf = Invoke({"verify", "--problem", Config("case_study_1"), "--variant", "1dgbf"});
  EXPECT_EQ(inf.code, kExitInfeasible);

  const Result val = Invoke({"validate", "--problem", Config("case_study_1"), "--cert", cert,
                          "--samples", "2000"});
  EXPECT_EQ(val.code, kExitOk) << val.out;

  const Result lev = Invoke({"levelset", "--cert", cert, "--node", "v2", "--grid", "x1:-1:1:2,x2:0:0:1"});
  EXPECT_EQ(lev.code, kExitOk);
  EXPECT_EQ(std::count(lev.out.begin(), lev.out.end(), '\n'), 3);
  EXPECT_EQ(Invoke({"levelset", "--cert", cert, "--node", "v9", "--grid", "x1:0:1:2,x2:0:1:2"}).code,
            kExitBadInput);

  const Result sim = Invoke({"simulate", "--problem", Config("case_study_1"), "--word", "1101",
                          "--x0", "0.1,-0.1", "--cert", cert});
  EXPECT_EQ(sim.code, kExitOk) << sim.err;
  EXPECT_NE(sim.err.find("monitor: ok"), std::string::npos);

  const std::string broken = TempPath("broken.json");
  std::ofstream(broken) << "{\"kind\": \"quadratic\"";
  EXPECT_EQ(Invoke({"validate", "--problem", Config("case_study_1"), "--cert", broken}).code,
            kExitBadInput);
}

GTEST_TEST(CliTest, SimulateZeroStateStaysAtOrigin) {
  const Result r =
      Invoke({"simulate", "--problem", Config("case_study_1"), "--word", "1111", "--x0", "0,0"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,x1,x2,u,mu,node,psi");
  EXPECT_NE(r.out.find("\n4,0,0,"), std::string::npos);
  EXPECT_EQ(Invoke({"simulate", "--problem", Config("case_study_1"), "--word", "0111", "--x0",
                 "0,0"}).code,
            kExitBadInput);
  EXPECT_EQ(Invoke({"simulate", "--problem", Config("case_study_1"), "--word", "1", "--x0", "0,x"}).code,
            kExitBadInput);
}

GTEST_TEST(CliTest, FalsifyExitCodes) {
  const Result hit = Invoke({"falsify", "--problem", Config("case_study_4"), "--horizon", "10",
                          "--samples", "200"});
  EXPECT_EQ(hit.code, kExitCounterexample);
  EXPECT_NE(hit.out.find("\"replayed\": true"), std::string::npos);
  const Result none = Invoke({"falsify", "--problem", Config("case_study_2"), "--horizon", "6",
                           "--samples", "100"});
  EXPECT_EQ(none.code, kExitOk);
}

GTEST_TEST(CliTest, GainArguments) {
  const Eigen::MatrixXd K = ParseGainArg("1, 2,3,4,5,6", 2, 3);
  EXPECT_DOUBLE_EQ(K(0, 2), 3.0);
  EXPECT_DOUBLE_EQ(K(1, 0), 4.0);
  EXPECT_THROW(ParseGainArg("1,2", 1, 3), std::invalid_argument);
  EXPECT_THROW(ParseVectorArg("1,,2"), std::invalid_argument);
  EXPECT_THROW(ParseVectorArg(""), std::invalid_argument);
  EXPECT_EQ(ParseVectorArg("-0.35,-0.85").size(), 2);
}

}  // namespace
}  // namespace cli
}  // namespace whcert
