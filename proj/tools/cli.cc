#include "cli.h"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "whcert/cert_lmi.h"
#include "whcert/cert_sos.h"
#include "whcert/certificate.h"
#include "whcert/problem.h"
#include "whcert/simulate.h"
#include "whcert/validate.h"
#include "whcert/wh_graph.h"

namespace whcert {
namespace cli {
namespace {

using Json = nlohmann::ordered_json;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

Json MatrixJson(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

int StatusExit(CertStatus s) {
  switch (s) {
    case CertStatus::kCertified:
      return kExitOk;
    case CertStatus::kInfeasible:
      return kExitInfeasible;
    case CertStatus::kUnknown:
      return kExitUnknown;
  }
  return kExitError;
}

const Controller& RequireController(const Problem& p) {
  if (!p.controller) throw ConfigError("/controller", "missing required field");
  return *p.controller;
}

struct GlobalArgs {
  uint64_t seed = 1;
};

struct GraphArgs {
  int r = 0;
  int s = 0;
  std::string dot;
  int check_len = 0;
  bool json = false;
};

int RunGraph(const GraphArgs& a, std::ostream& out) {
  const WhConstraint c(a.r, a.s);
  const WhGraph g = WhGraph::Build(c);
  if (!a.dot.empty()) WriteFile(a.dot, ExportDot(g));
  if (a.json) {
    out << g.ToJson() << "\n";
    return kExitOk;
  }
  out << g.num_nodes() << " nodes, " << g.num_edges() << " edges";
  if (a.check_len > 0) {
    const LanguageCheck lc = CheckLanguageEquivalence(g, c, a.check_len);
    if (!lc.equivalent) {
      out << ", language check FAILED on " << lc.counterexample->ToString() << "\n";
      return kExitError;
    }
    out << ", language check OK";
  }
  out << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string problem;
  std::string variant;
  std::string schedule;
  std::string cert_out;
};

LmiOptions LoadSchedule(const std::string& path) {
  if (path.empty()) return {};
  return ParseSchedule(ReadFile(path));
}

int RunVerify(const VerifyArgs& a, const GlobalArgs& g, std::ostream& out) {
  const Problem p = LoadProblem(a.problem, g.seed);
  const Controller& ctrl = RequireController(p);
  const WhGraph graph = WhGraph::Build(p.constraint);
  const GbfVariant variant{ParseGbfTag(a.variant), p.strategy};

  if (!p.system.is_linear() || !ctrl.is_linear()) {
    const SosReport rep = VerifySos(variant, p, graph);
    out << rep.ToJson() << "\n";
    if (!a.cert_out.empty() && rep.certificate) WriteFile(a.cert_out, ToJson(*rep.certificate));
    return StatusExit(rep.status);
  }
  const CertReport rep = Verify(variant, p, ctrl.K(), graph, LoadSchedule(a.schedule));
  out << rep.ToJson() << "\n";
  if (!a.cert_out.empty() && rep.certificate) WriteFile(a.cert_out, ToJson(*rep.certificate));
  return StatusExit(rep.status);
}

struct SynthesizeArgs {
  std::string problem;
  std::string k_init;
  std::string schedule;
  std::string cert_out;
};

int RunSynthesize(const SynthesizeArgs& a, const GlobalArgs& g, std::ostream& out) {
  const Problem p = LoadProblem(a.problem, g.seed);
  const int n = p.system.n();
  const int m = p.system.m();
  if (!p.system.is_linear()) throw std::invalid_argument("synthesis needs linear dynamics");
  Eigen::MatrixXd K0;
  if (!a.k_init.empty()) {
    K0 = ParseGainArg(a.k_init, m, n);
  } else if (p.k_init) {
    K0 = *p.k_init;
  } else if (p.controller && p.controller->is_linear()) {
    K0 = p.controller->K();
  } else {
    throw std::invalid_argument("no initial gain: pass --k-init");
  }
  const WhGraph graph = WhGraph::Build(p.constraint);
  const SynthesisResult res = Synthesize(p, graph, K0, LoadSchedule(a.schedule));

  Json j;
  j["K"] = MatrixJson(res.K);
  j["K_init"] = MatrixJson(K0);
  j["rounds"] = res.rounds;
  Json hist = Json::array();
  for (const auto& K : res.gain_history) hist.push_back(MatrixJson(K));
  j["gain_history"] = std::move(hist);
  j["report"] = Json::parse(res.report.ToJson());
  out << j.dump(2) << "\n";
  if (!a.cert_out.empty() && res.report.certificate) {
    WriteFile(a.cert_out, ToJson(*res.report.certificate));
  }
  return StatusExit(res.report.status);
}

struct SimulateArgs {
  std::string problem;
  std::string word;
  std::string x0;
  std::string cert;
  std::string gain;
  std::string ledger;
};

Controller ControllerFor(const Problem& p, const std::string& gain) {
  if (gain.empty()) return RequireController(p);
  return Controller::Linear(ParseGainArg(gain, p.system.m(), p.system.n()));
}

Json LedgerJson(const MonitorLedger& l) {
  Json j;
  j["ok"] = l.ok;
  j["first_violation"] = l.first_violation;
  j["unchecked_steps"] = l.unchecked_steps;
  j["diverged_at"] = l.diverged_at;
  Json entries = Json::array();
  for (const auto& e : l.entries) {
    entries.push_back({{"t", e.t},
                       {"node", e.node >= 0 ? WhGraph::NodeName(e.node) : ""},
                       {"label", e.label},
                       {"psi", e.psi},
                       {"bound", e.bound},
                       {"ok", e.ok}});
  }
  j["entries"] = std::move(entries);
  return j;
}

int RunSimulate(const SimulateArgs& a, const GlobalArgs& g, std::ostream& out,
                std::ostream& err) {
  const Problem p = LoadProblem(a.problem, g.seed);
  const Controller ctrl = ControllerFor(p, a.gain);
  const LossWord word = LossWord::FromString(a.word);
  const Eigen::VectorXd x0 = ParseVectorArg(a.x0);
  Trajectory traj = Rollout(p.system, ctrl, p.strategy, x0, word);
  if (a.cert.empty()) {
    out << TrajectoryCsv(traj, p.state_names, p.input_names);
    return kExitOk;
  }
  const Certificate cert = CertificateFromJson(ReadFile(a.cert));
  const WhGraph graph = WhGraph::Build(p.constraint);
  AlignToGraph(&traj, graph);
  const MonitorLedger ledger = Monitor(traj, cert, graph, ctrl);
  out << TrajectoryCsv(traj, p.state_names, p.input_names, &ledger);
  if (!a.ledger.empty()) WriteFile(a.ledger, LedgerJson(ledger).dump(2) + "\n");
  if (!ledger.ok) {
    err << "monitor: violation at t = " << ledger.first_violation << "\n";
    return kExitViolation;
  }
  err << "monitor: ok (" << ledger.entries.size() << " checks, " << ledger.unchecked_steps
      << " unchecked steps";
  if (ledger.diverged_at >= 0) err << ", non-finite from t = " << ledger.diverged_at;
  err << ")\n";
  return kExitOk;
}

struct FalsifyArgs {
  std::string problem;
  int horizon = 10;
  int samples = 1000;
  int random_walks = 2000;
  std::string gain;
};

int RunFalsify(const FalsifyArgs& a, const GlobalArgs& g, std::ostream& out) {
  const Problem p = LoadProblem(a.problem, g.seed);
  const Controller ctrl = ControllerFor(p, a.gain);
  const WhGraph graph = WhGraph::Build(p.constraint);
  FalsifyOptions o;
  o.horizon = a.horizon;
  o.samples = a.samples;
  o.seed = g.seed;
  o.random_walks = a.random_walks;
  const FalsificationReport rep = Falsify(p, ctrl, graph, o);
  Json j = Json::parse(rep.ToJson());
  if (rep.counterexample) j["replayed"] = Replay(p, ctrl, *rep.counterexample);
  out << j.dump(2) << "\n";
  return rep.counterexample ? kExitCounterexample : kExitOk;
}

struct ValidateArgs {
  std::string problem;
  std::string cert;
  int samples = 100000;
};

int RunValidate(const ValidateArgs& a, const GlobalArgs& g, std::ostream& out) {
  const Problem p = LoadProblem(a.problem, g.seed);
  const Certificate cert = CertificateFromJson(ReadFile(a.cert));
  const WhGraph graph = WhGraph::Build(p.constraint);
  ValidateOptions o;
  o.samples = a.samples;
  o.seed = g.seed;
  const ValidationReport rep = ValidateCertificate(cert, p, graph, o);
  out << rep.ToJson() << "\n";
  return rep.passed ? kExitOk : kExitViolation;
}

struct LevelsetArgs {
  std::string cert;
  std::string node;
  std::string grid;
};

int RunLevelset(const LevelsetArgs& a, std::ostream& out) {
  const Certificate cert = CertificateFromJson(ReadFile(a.cert));
  const int node = WhGraph::ParseNodeName(a.node);
  if (node >= NumNodes(cert)) throw std::invalid_argument("node " + a.node + " not in certificate");
  out << LevelsetCsv(cert, node, ParseGrid(a.grid));
  return kExitOk;
}

}  // namespace

Eigen::VectorXd ParseVectorArg(std::string_view text) {
  std::vector<double> values;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string item(text.substr(pos, end - pos));
    const size_t first = item.find_first_not_of(" \t");
    const size_t last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw std::invalid_argument("empty value in '" + std::string(text) + "'");
    item = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("bad number '" + item + "'");
    }
    values.push_back(v);
    pos = end + 1;
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<int>(values.size()));
}

Eigen::MatrixXd ParseGainArg(std::string_view text, int rows, int cols) {
  const Eigen::VectorXd v = ParseVectorArg(text);
  if (v.size() != rows * cols) {
    throw std::invalid_argument("gain needs " + std::to_string(rows * cols) + " values, got " +
                                std::to_string(v.size()));
  }
  Eigen::MatrixXd K(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) K(i, j) = v[i * cols + j];
  }
  return K;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safety certificates for control loops under weakly-hard loss constraints",
               "whcert"};
  app.require_subcommand(1);
  GlobalArgs global;
  app.add_option("--seed", global.seed, "Seed for every randomized procedure")->capture_default_str();

  std::function<int()> run;

  GraphArgs ga;
  auto* graph = app.add_subcommand("graph", "Build the WH graph of K(r,s)");
  graph->add_option("--r", ga.r, "Required successes")->required();
  graph->add_option("--s", ga.s, "Window length")->required();
  graph->add_option("--dot", ga.dot, "Write Graphviz DOT to this path");
  graph->add_option("--check-len", ga.check_len, "Check language equivalence up to this length");
  graph->add_flag("--json", ga.json, "Print the graph as JSON");
  graph->callback([&] { run = [&] { return RunGraph(ga, out); }; });

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Search for a barrier certificate");
  verify->add_option("--problem", va.problem, "Problem JSON")->required();
  verify->add_option("--variant", va.variant, "gbf, dgbf, 1gbf or 1dgbf")
      ->required()
      ->check(CLI::IsMember({"gbf", "dgbf", "1gbf", "1dgbf"}));
  verify->add_option("--schedule", va.schedule, "Solver schedule JSON");
  verify->add_option("--cert-out", va.cert_out, "Write the certificate JSON here");
  verify->callback([&] { run = [&] { return RunVerify(va, global, out); }; });

  SynthesizeArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Alternating GBF gain synthesis");
  synth->add_option("--problem", sa.problem, "Problem JSON")->required();
  synth->add_option("--k-init", sa.k_init, "Initial gain, row-major comma-separated");
  synth->add_option("--schedule", sa.schedule, "Solver schedule JSON");
  synth->add_option("--cert-out", sa.cert_out, "Write the certificate JSON here");
  synth->callback([&] { run = [&] { return RunSynthesize(sa, global, out); }; });

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Roll out a loss word");
  sim->add_option("--problem", ma.problem, "Problem JSON")->required();
  sim->add_option("--word", ma.word, "Loss word such as 10010")->required();
  sim->add_option("--x0", ma.x0, "Initial state, comma-separated")->required();
  sim->add_option("--cert", ma.cert, "Certificate JSON for the monitor");
  sim->add_option("--ledger", ma.ledger, "Write the monitor ledger JSON here");
  sim->add_option("--k", ma.gain, "Override the controller gain");
  sim->callback([&] { run = [&] { return RunSimulate(ma, global, out, err); }; });

  FalsifyArgs fa;
  auto* fal = app.add_subcommand("falsify", "Search admissible loss words for an unsafe entry");
  fal->add_option("--problem", fa.problem, "Problem JSON")->required();
  fal->add_option("--horizon", fa.horizon, "Steps")->required()->check(CLI::PositiveNumber);
  fal->add_option("--samples", fa.samples, "Initial states")->required()->check(CLI::PositiveNumber);
  fal->add_option("--random-walks", fa.random_walks, "Walks per state beyond the exhaustive horizon")
      ->capture_default_str();
  fal->add_option("--k", fa.gain, "Override the controller gain");
  fal->callback([&] { run = [&] { return RunFalsify(fa, global, out); }; });

  ValidateArgs la;
  auto* val = app.add_subcommand("validate", "Sample-based certificate validation");
  val->add_option("--problem", la.problem, "Problem JSON")->required();
  val->add_option("--cert", la.cert, "Certificate JSON")->required();
  val->add_option("--samples", la.samples, "Samples per set")->capture_default_str()->check(
      CLI::PositiveNumber);
  val->callback([&] { run = [&] { return RunValidate(la, global, out); }; });

  LevelsetArgs ea;
  auto* lev = app.add_subcommand("levelset", "Barrier values on a grid");
  lev->add_option("--cert", ea.cert, "Certificate JSON")->required();
  lev->add_option("--node", ea.node, "Node name such as v1")->required();
  lev->add_option("--grid", ea.grid, "x1:lo:hi:n,x2:lo:hi:n")->required();
  lev->callback([&] { run = [&] { return RunLevelset(ea, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitBadInput;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace cli
}  // namespace whcert
