#include "whcert/simulate.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json_util.h"
#include "whcert/parallel.h"
#include "whcert/sampling.h"

namespace whcert {

using internal::Json;

Eigen::VectorXd Trajectory::Augmented(int t, const Controller& ctrl) const {
  const Eigen::VectorXd uh = t == 0 ? ctrl.Apply(x[0]) : u[t - 1];
  Eigen::VectorXd z(x[t].size() + uh.size());
  z << x[t], uh;
  return z;
}

Trajectory Rollout(const System& sys, const Controller& ctrl, Strategy q,
                   const Eigen::VectorXd& x0, const LossWord& word) {
  if (word.empty() || !word[0]) {
    throw std::invalid_argument("loss word must be non-empty and start with a success");
  }
  if (x0.size() != sys.n()) throw std::invalid_argument("x0 has the wrong dimension");
  Trajectory tr;
  tr.strategy = q;
  tr.word = word;
  tr.x.push_back(x0);
  Eigen::VectorXd held = Eigen::VectorXd::Zero(sys.m());
  for (int t = 0; t < word.size(); ++t) {
    Eigen::VectorXd u;
    if (word[t]) {
      u = ctrl.Apply(tr.x[t]);
      held = u;
    } else {
      u = q == Strategy::kHold ? held : Eigen::VectorXd::Zero(sys.m());
    }
    tr.u.push_back(u);
    tr.x.push_back(sys.Evaluate(tr.x[t], u));
  }
  return tr;
}

namespace {

struct Block {
  int start = 0;  // success instant t_k
  int losses = 0;
  bool complete = false;  // followed by another success
};

std::vector<Block> Blocks(const LossWord& w) {
  std::vector<Block> out;
  for (int t = 0; t < w.size(); ++t) {
    if (w[t]) {
      if (!out.empty()) out.back().complete = true;
      out.push_back({t, 0, false});
    } else if (!out.empty()) {
      ++out.back().losses;
    }
  }
  return out;
}

std::string EdgeText(int from, int l, int to) {
  return WhGraph::NodeName(from) + "-" + std::to_string(l) + "->" + WhGraph::NodeName(to);
}

}  // namespace

void AlignToGraph(Trajectory* traj, const WhGraph& g) {
  traj->node.assign(traj->length() + 1, -1);
  traj->node[0] = g.initial();
  int v = g.initial();
  for (const Block& b : Blocks(traj->word)) {
    const int next = g.Next(v, b.losses);
    if (next < 0) {
      if (b.complete) {
        throw std::invalid_argument("word leaves the graph at t = " + std::to_string(b.start) +
                                    " (no edge " + WhGraph::NodeName(v) + " with label " +
                                    std::to_string(b.losses) + ")");
      }
      break;
    }
    for (int m = 0; m <= b.losses; ++m) traj->node[b.start + 1 + m] = next;
    v = next;
  }
}

MonitorLedger Monitor(const Trajectory& traj, const Certificate& cert, const WhGraph& g,
                      const Controller& ctrl, double tol) {
  if (GraphOf(cert) != g.Id() || NumNodes(cert) != g.num_nodes()) {
    throw std::invalid_argument("certificate graph " + GraphOf(cert) + " does not match " + g.Id());
  }
  const bool aug = BarrierDim(cert) != static_cast<int>(traj.x[0].size());
  auto point = [&](int t) { return aug ? traj.Augmented(t, ctrl) : traj.x[t]; };
  const auto& eps = EpsOf(cert);
  MonitorLedger led;
  auto add = [&](MonitorEntry e) {
    e.ok = e.psi <= e.bound + tol;
    if (!e.ok && led.ok) {
      led.ok = false;
      led.first_violation = e.t;
    }
    led.entries.push_back(std::move(e));
  };
  add({0, g.initial(), EvaluateBarrier(cert, g.initial(), point(0)), 0.0, true,
       "init " + WhGraph::NodeName(g.initial())});
  int v = g.initial();
  for (const Block& b : Blocks(traj.word)) {
    const int next = g.Next(v, b.losses);
    if (next < 0) {
      if (b.complete) {
        throw std::invalid_argument("trajectory is not aligned with " + g.Id() + " at t = " +
                                    std::to_string(b.start));
      }
      led.unchecked_steps += b.losses + 1;
      break;
    }
    for (int m = 0; m <= b.losses; ++m) {
      const int t = b.start + 1 + m;
      const Eigen::VectorXd x = point(t);
      const double psi = x.allFinite() ? EvaluateBarrier(cert, next, x) : std::numeric_limits<double>::quiet_NaN();
      if (std::isnan(psi)) {
        led.diverged_at = t;
        led.unchecked_steps = static_cast<int>(traj.x.size()) - t;
        return led;
      }
      add({t, next, psi, -(b.losses - m) * eps[next], true,
           EdgeText(v, b.losses, next) + " m=" + std::to_string(m)});
    }
    v = next;
  }
  return led;
}

std::string TrajectoryCsv(const Trajectory& traj, const std::vector<std::string>& state_names,
                          const std::vector<std::string>& input_names,
                          const MonitorLedger* ledger) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (const auto& n : state_names) os << "," << n;
  for (const auto& n : input_names) os << "," << n;
  os << ",mu,node,psi\n";
  std::vector<const MonitorEntry*> at(traj.x.size(), nullptr);
  if (ledger) {
    for (const auto& e : ledger->entries) {
      if (e.t >= 0 && e.t < static_cast<int>(at.size())) at[e.t] = &e;
    }
  }
  for (size_t t = 0; t < traj.x.size(); ++t) {
    os << t;
    for (int i = 0; i < traj.x[t].size(); ++i) os << "," << traj.x[t][i];
    for (size_t j = 0; j < input_names.size(); ++j) {
      os << ",";
      if (t < traj.u.size()) os << traj.u[t][j];
    }
    os << ",";
    if (static_cast<int>(t) < traj.length()) os << (traj.word[t] ? 1 : 0);
    os << ",";
    const int node = at[t] ? at[t]->node : (t < traj.node.size() ? traj.node[t] : -1);
    if (node >= 0) os << WhGraph::NodeName(node);
    os << ",";
    if (at[t]) os << at[t]->psi;
    os << "\n";
  }
  return os.str();
}

std::vector<Eigen::VectorXd> InitialStates(const Problem& problem, int samples, uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : problem.sets.X0.boundary_points()) {
    if (problem.sets.X0.Contains(b)) out.push_back(b);
  }
  const auto s = SampleSet(problem.sets.X0, BoundsOf(problem.sets.X0, problem), samples, seed,
                           1000LL * samples + 1000);
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace {

class Searcher {
 public:
  Searcher(const Problem& p, const Controller& ctrl, const WhGraph& g, int horizon)
      : p_(p), ctrl_(ctrl), g_(g), horizon_(horizon) {
    for (int v = 0; v < g.num_nodes(); ++v) {
      int ml = -1;
      for (const auto& e : g.OutEdges(v)) ml = std::max(ml, e.label);
      max_label_.push_back(ml);
    }
  }

  // Depth first from x0; stops at the first Xu entry.
  std::optional<Counterexample> Exhaustive(const Eigen::VectorXd& x0) {
    bits_.clear();
    found_.reset();
    root_ = x0;
    if (InXu(x0)) return Hit(x0, x0, 0);
    Dfs(g_.initial(), 0, x0);
    return found_;
  }

  std::optional<Counterexample> Walk(const Eigen::VectorXd& x0, std::mt19937_64* rng) {
    bits_.clear();
    if (InXu(x0)) return Hit(x0, x0, 0);
    int v = g_.initial();
    int t = 0;
    Eigen::VectorXd x = x0;
    while (t < horizon_) {
      const auto out = g_.OutEdges(v);
      const GraphEdge& e = out[std::uniform_int_distribution<size_t>(0, out.size() - 1)(*rng)];
      const Eigen::VectorXd u = ctrl_.Apply(x);
      x = p_.system.Evaluate(x, u);
      bits_.push_back(1);
      ++t;
      ++steps_;
      if (InXu(x)) return Hit(x0, x, t);
      for (int j = 0; j < e.label && t < horizon_; ++j) {
        x = p_.system.Evaluate(x, Open(u));
        bits_.push_back(0);
        ++t;
        ++steps_;
        if (InXu(x)) return Hit(x0, x, t);
      }
      v = e.to;
    }
    return std::nullopt;
  }

  long long steps() const { return steps_; }

 private:
  bool InXu(const Eigen::VectorXd& x) const { return p_.sets.Xu.Contains(x, 0.0); }

  Eigen::VectorXd Open(const Eigen::VectorXd& u) const {
    return p_.strategy == Strategy::kHold ? u : Eigen::VectorXd::Zero(u.size());
  }

  Counterexample Hit(const Eigen::VectorXd& x0, const Eigen::VectorXd& x, int t) const {
    return {x0, LossWord(bits_), t, x};
  }

  // Success at time t in node v with state x.
  void Dfs(int v, int t, const Eigen::VectorXd& x) {
    const size_t depth = bits_.size();
    const Eigen::VectorXd u = ctrl_.Apply(x);
    Eigen::VectorXd cur = p_.system.Evaluate(x, u);
    bits_.push_back(1);
    ++steps_;
    const int t1 = t + 1;
    if (InXu(cur)) {
      found_ = Hit(root_, cur, t1);
    }
    for (int j = 0; !found_ && t1 + j < horizon_ + 1; ++j) {
      const int next = g_.Next(v, j);
      if (next >= 0 && t1 + j < horizon_) Dfs(next, t1 + j, cur);
      if (found_ || j == max_label_[v] || t1 + j == horizon_) break;
      cur = p_.system.Evaluate(cur, Open(u));
      bits_.push_back(0);
      ++steps_;
      if (InXu(cur)) found_ = Hit(root_, cur, t1 + j + 1);
    }
    if (!found_) bits_.resize(depth);
  }

  const Problem& p_;
  const Controller& ctrl_;
  const WhGraph& g_;
  const int horizon_;
  std::vector<int> max_label_;
  std::vector<uint8_t> bits_;
  std::optional<Counterexample> found_;
  Eigen::VectorXd root_;
  long long steps_ = 0;
};

}  // namespace

FalsificationReport Falsify(const Problem& problem, const Controller& ctrl, const WhGraph& g,
                            const FalsifyOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  if (o.horizon < 1) throw std::invalid_argument("horizon must be positive");
  ctrl.CheckCompatible(problem.system);
  FalsificationReport r;
  r.horizon = o.horizon;
  r.exhaustive = o.horizon <= kDefaultPathHorizon;
  r.path_count = CountPaths(g, o.horizon);
  const auto x0s = InitialStates(problem, o.samples, o.seed);
  r.samples = static_cast<int>(x0s.size());

  std::vector<std::optional<Counterexample>> hits(x0s.size());
  std::vector<long long> steps(x0s.size(), 0);
  std::atomic<size_t> first(x0s.size());
  ParallelFor(static_cast<int>(x0s.size()), [&](int i) {
    if (static_cast<size_t>(i) > first.load()) return;
    Searcher s(problem, ctrl, g, o.horizon);
    if (r.exhaustive) {
      hits[i] = s.Exhaustive(x0s[i]);
    } else {
      std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(i));
      for (int w = 0; w < o.random_walks && !hits[i]; ++w) hits[i] = s.Walk(x0s[i], &rng);
    }
    steps[i] = s.steps();
    if (hits[i]) {
      size_t cur = first.load();
      while (static_cast<size_t>(i) < cur && !first.compare_exchange_weak(cur, i)) {
      }
    }
  });
  for (long long s : steps) r.steps += s;
  for (const auto& h : hits) {
    if (h) {
      r.counterexample = h;
      break;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

bool Replay(const Problem& problem, const Controller& ctrl, const Counterexample& cx) {
  if (cx.hit_time == 0) return problem.sets.Xu.Contains(cx.x0, 0.0);
  const Trajectory tr = Rollout(problem.system, ctrl, problem.strategy, cx.x0, cx.word);
  return tr.length() == cx.hit_time && problem.sets.Xu.Contains(tr.x.back(), 0.0);
}

std::string FalsificationReport::ToJson() const {
  Json j;
  j["horizon"] = horizon;
  j["exhaustive"] = exhaustive;
  j["path_count"] = path_count;
  j["samples"] = samples;
  j["steps"] = steps;
  if (counterexample) {
    const auto& c = *counterexample;
    j["counterexample"] = {{"x0", internal::VectorJson(c.x0)},
                           {"word", c.word.ToString()},
                           {"hit_time", c.hit_time},
                           {"x_hit", internal::VectorJson(c.x_hit)}};
  } else {
    j["counterexample"] = nullptr;
  }
  j["seconds"] = seconds;
  return j.dump(2);
}

}  // namespace whcert
