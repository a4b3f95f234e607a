#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whcert/certificate.h"
#include "whcert/problem.h"
#include "whcert/systems.h"
#include "whcert/wh_constraint.h"
#include "whcert/wh_graph.h"

namespace whcert {

struct Trajectory {
  Strategy strategy = Strategy::kZero;
  LossWord word;
  // x(0..T) with T = word.size().
  std::vector<Eigen::VectorXd> x;
  // Input applied at t = 0..T-1.
  std::vector<Eigen::VectorXd> u;
  // Graph node whose barrier applies at t = 0..T, filled by AlignToGraph.
  std::vector<int> node;

  int length() const { return word.size(); }
  // (x(t), input applied at t-1); x(0) pairs with g(x(0)).
  Eigen::VectorXd Augmented(int t, const Controller& ctrl) const;
};

// Throws std::invalid_argument if the word is empty or starts with a loss.
Trajectory Rollout(const System& sys, const Controller& ctrl, Strategy q,
                   const Eigen::VectorXd& x0, const LossWord& word);

// Fills traj.node along the graph path of the word: node(0) is the initial
// node, and every step inside the block 1 0^l leaving v maps to Next(v, l).
// A trailing block without a matching edge keeps -1. Throws if a complete
// block leaves the graph.
void AlignToGraph(Trajectory* traj, const WhGraph& g);

struct MonitorEntry {
  int t = 0;
  int node = -1;
  double psi = 0.0;
  double bound = 0.0;
  bool ok = true;
  std::string label;
};

struct MonitorLedger {
  std::vector<MonitorEntry> entries;
  bool ok = true;
  // First failing time step, -1 when all checks pass.
  int first_violation = -1;
  int unchecked_steps = 0;
  // First step with a non-finite state or barrier value, -1 if none. Checks
  // stop there and the remaining steps count as unchecked.
  int diverged_at = -1;
};

// Psi_v1(x(0)) <= 0 and, for each block 1 0^l from v to v' starting at t_k,
// Psi_v'(x(t_k + 1 + m)) <= -(l - m) eps_v' for m = 0..l. Stops at the first
// non-finite state or barrier value.
MonitorLedger Monitor(const Trajectory& traj, const Certificate& cert, const WhGraph& g,
                      const Controller& ctrl, double tol = 1e-6);

// t,x..,u..,mu,node,psi. Node and psi columns stay empty without a ledger.
std::string TrajectoryCsv(const Trajectory& traj, const std::vector<std::string>& state_names,
                          const std::vector<std::string>& input_names,
                          const MonitorLedger* ledger = nullptr);

struct FalsifyOptions {
  int horizon = 10;
  int samples = 1000;
  uint64_t seed = 1;
  // Random graph walks per initial state when horizon exceeds the
  // exhaustive limit.
  int random_walks = 2000;
};

struct Counterexample {
  Eigen::VectorXd x0;
  // Prefix ending at the Xu entry: x(word.size()) lies in Xu.
  LossWord word;
  int hit_time = 0;
  Eigen::VectorXd x_hit;
};

struct FalsificationReport {
  int horizon = 0;
  bool exhaustive = true;
  // Admissible words of exactly `horizon` steps.
  long long path_count = 0;
  int samples = 0;
  // Simulated transitions.
  long long steps = 0;
  std::optional<Counterexample> counterexample;
  double seconds = 0.0;

  std::string ToJson() const;
};

// Searches admissible loss sequences from sampled X0 points (plus X0
// boundary points) for an Xu entry within the horizon. Exhaustive depth
// first over graph paths with shared prefixes up to kDefaultPathHorizon,
// random walks beyond.
FalsificationReport Falsify(const Problem& problem, const Controller& ctrl, const WhGraph& g,
                            const FalsifyOptions& options = {});

// Rolls the counterexample out again and checks the Xu entry.
bool Replay(const Problem& problem, const Controller& ctrl, const Counterexample& cx);

// X0 sample set used by Falsify and the validators: boundary points first,
// then the prefix-stable sample stream.
std::vector<Eigen::VectorXd> InitialStates(const Problem& problem, int samples, uint64_t seed);

}  // namespace whcert
