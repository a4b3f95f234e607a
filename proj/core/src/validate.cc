#include "whcert/validate.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json_util.h"
#include "whcert/cert_lmi.h"
#include "whcert/parallel.h"
#include "whcert/sampling.h"
#include "whcert/simulate.h"

namespace whcert {

using internal::Json;

namespace {

Eigen::VectorXd Stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd z(a.size() + b.size());
  z << a, b;
  return z;
}

std::vector<Eigen::VectorXd> Sample(const SemiAlgebraicSet& s, const BoundingBox& box, int n,
                                    uint64_t seed, bool with_boundary) {
  std::vector<Eigen::VectorXd> out;
  if (with_boundary) {
    for (const auto& b : s.boundary_points()) {
      if (s.Contains(b)) out.push_back(b);
    }
  }
  const auto pts = SampleSet(s, box, n, seed, 1000LL * n + 1000);
  out.insert(out.end(), pts.begin(), pts.end());
  return out;
}

// One semantic condition: violation(sample index) > 0 means it fails.
struct Semantic {
  std::string label;
  bool strict = false;
  enum class Domain { kInit, kUnsafe, kState } domain = Domain::kState;
  int from = 0;
  int to = 0;
  int m = 0;            // open steps after the closed step, -1 for a pure open step
  double a = 0.0;       // antecedent eps multiplier
  double b = 0.0;       // consequent eps multiplier
  bool implication = false;
};

std::string EdgeName(const GraphEdge& e) {
  return WhGraph::NodeName(e.from) + "-" + std::to_string(e.label) + "->" +
         WhGraph::NodeName(e.to);
}

std::vector<Semantic> Conditions(const GbfVariant& variant, const WhGraph& g) {
  std::vector<Semantic> out;
  for (int v = 0; v < g.num_nodes(); ++v) {
    Semantic i;
    i.label = "init " + WhGraph::NodeName(v);
    i.domain = Semantic::Domain::kInit;
    i.from = i.to = v;
    out.push_back(i);
    Semantic u;
    u.label = "unsafe " + WhGraph::NodeName(v);
    u.domain = Semantic::Domain::kUnsafe;
    u.strict = true;
    u.from = u.to = v;
    out.push_back(u);
  }
  const bool imp = !variant.decrease();
  if (!variant.one_step()) {
    for (const auto& e : g.edges()) {
      for (int m = 0; m <= e.label; ++m) {
        Semantic c;
        c.label = "edge " + EdgeName(e) + " m=" + std::to_string(m);
        c.from = e.from;
        c.to = e.to;
        c.m = m;
        c.b = e.label - m;
        c.implication = imp;
        out.push_back(c);
      }
    }
    return out;
  }
  std::vector<int> max_in(g.num_nodes(), 0);
  for (const auto& e : g.edges()) {
    max_in[e.to] = std::max(max_in[e.to], e.label);
    Semantic c;
    c.label = "switch " + EdgeName(e);
    c.from = e.from;
    c.to = e.to;
    c.m = 0;
    c.b = e.label;
    c.implication = imp;
    out.push_back(c);
  }
  for (int w = 0; w < g.num_nodes(); ++w) {
    if (max_in[w] == 0) continue;
    const int top = imp ? max_in[w] : 1;
    for (int k = 1; k <= top; ++k) {
      Semantic c;
      c.label = "increase " + WhGraph::NodeName(w) + (imp ? " m=" + std::to_string(k) : "");
      c.from = c.to = w;
      c.m = -1;
      c.a = k;
      c.b = k - 1;
      c.implication = imp;
      out.push_back(c);
    }
  }
  return out;
}

void CheckFit(const Certificate& cert, const Problem& p, const WhGraph& g) {
  if (GraphOf(cert) != g.Id() || NumNodes(cert) != g.num_nodes()) {
    throw std::invalid_argument("certificate is for " + GraphOf(cert) + " with " +
                                std::to_string(NumNodes(cert)) + " nodes, problem graph is " +
                                g.Id());
  }
  const GbfVariant& v = VariantOf(cert);
  const int want = v.augmented() ? p.system.n() + p.system.m() : p.system.n();
  if (BarrierDim(cert) != want) {
    throw std::invalid_argument("certificate barrier dimension " +
                                std::to_string(BarrierDim(cert)) + " does not match " +
                                v.ToString() + " on this system (" + std::to_string(want) + ")");
  }
  if (v.strategy != p.strategy) {
    throw std::invalid_argument("certificate strategy " + ToString(v.strategy) +
                                " differs from the problem strategy " + ToString(p.strategy));
  }
  if (v.augmented() && !p.sets.U) {
    throw std::invalid_argument("augmented certificate needs an input set U in the problem");
  }
}

}  // namespace

ValidationReport ValidateCertificate(const Certificate& cert, const Problem& p,
                                     const WhGraph& g, const ValidateOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  CheckFit(cert, p, g);
  if (!p.controller) throw std::invalid_argument("validation needs a controller");
  const GbfVariant variant = VariantOf(cert);
  const bool aug = variant.augmented();
  const Controller& ctrl = *p.controller;
  const System& sys = p.system;
  const auto& eps = EpsOf(cert);

  ValidationReport r;
  r.variant = variant.ToString();
  r.graph = g.Id();
  r.samples = o.samples;

  const auto x0 = InitialStates(p, o.samples, o.seed);
  const auto xu = Sample(p.sets.Xu, BoundsOf(p.sets.Xu, p), o.samples, o.seed + 1, true);
  const auto xs = Sample(p.sets.X, BoundsOf(p.sets.X, p), o.samples, o.seed + 2, false);
  std::vector<Eigen::VectorXd> us;
  if (aug) {
    if (!p.sets.U->bounds()) throw std::invalid_argument("U must be bounded");
    us = Sample(*p.sets.U, *p.sets.U->bounds(), o.samples, o.seed + 3, false);
    if (us.empty()) throw std::invalid_argument("no samples in U");
  }
  auto u_at = [&](size_t i) -> const Eigen::VectorXd& { return us[i % us.size()]; };

  // Points and their successors on the state domain.
  std::vector<Eigen::VectorXd> z(xs.size());
  std::vector<std::vector<Eigen::VectorXd>> chain(xs.size());  // closed then open steps
  std::vector<Eigen::VectorXd> open(xs.size());
  const int max_m = variant.one_step() ? 0 : g.max_label();
  ParallelFor(static_cast<int>(xs.size()), [&](int i) {
    const Eigen::VectorXd& x = xs[i];
    if (aug) {
      const Eigen::VectorXd& uh = u_at(i);
      z[i] = Stack(x, uh);
      const Eigen::VectorXd gx = ctrl.Apply(x);
      chain[i].push_back(Stack(sys.Evaluate(x, gx), gx));
      open[i] = Stack(sys.Evaluate(x, uh), uh);
      return;
    }
    z[i] = x;
    const Eigen::VectorXd gx = ctrl.Apply(x);
    Eigen::VectorXd y = sys.Evaluate(x, gx);
    chain[i].push_back(y);
    const Eigen::VectorXd uo =
        p.strategy == Strategy::kHold ? gx : Eigen::VectorXd::Zero(sys.m());
    for (int m = 1; m <= max_m; ++m) {
      y = sys.Evaluate(y, uo);
      chain[i].push_back(y);
    }
    open[i] = sys.Evaluate(x, Eigen::VectorXd::Zero(sys.m()));
  });

  const auto conds = Conditions(variant, g);
  r.conditions.resize(conds.size());
  ParallelFor(static_cast<int>(conds.size()), [&](int ci) {
    const Semantic& c = conds[ci];
    ConditionCheck& out = r.conditions[ci];
    out.label = c.label;
    out.strict = c.strict;
    auto record = [&](double viol, const Eigen::VectorXd& pt) {
      ++out.samples;
      if (viol > out.max_violation) {
        out.max_violation = viol;
        out.worst_point = pt;
      }
      if (c.strict ? viol >= 0.0 : viol > o.slack) ++out.violations;
    };
    switch (c.domain) {
      case Semantic::Domain::kInit:
        for (const auto& x : x0) {
          const Eigen::VectorXd pt = aug ? Stack(x, ctrl.Apply(x)) : x;
          record(EvaluateBarrier(cert, c.from, pt), pt);
        }
        break;
      case Semantic::Domain::kUnsafe:
        for (size_t i = 0; i < xu.size(); ++i) {
          const Eigen::VectorXd pt = aug ? Stack(xu[i], u_at(i)) : xu[i];
          record(-EvaluateBarrier(cert, c.from, pt), pt);
        }
        break;
      case Semantic::Domain::kState:
        for (size_t i = 0; i < xs.size(); ++i) {
          const double ante = EvaluateBarrier(cert, c.from, z[i]) + c.a * eps[c.from];
          const Eigen::VectorXd& next = c.m < 0 ? open[i] : chain[i][c.m];
          const double cons = EvaluateBarrier(cert, c.to, next) + c.b * eps[c.to];
          if (c.implication) {
            if (ante <= 0.0) record(cons, z[i]);
          } else {
            record(cons - ante, z[i]);
          }
        }
        break;
    }
    out.passed = out.violations == 0;
  });

  for (const auto& c : r.conditions) {
    r.max_violation = std::max(r.max_violation, c.max_violation);
    r.passed = r.passed && c.passed;
  }

  if (const auto* q = std::get_if<GbfCertificate>(&cert)) {
    try {
      r.residual_min_eig = conic::kInf;
      for (const auto& e : RecheckResiduals(*q, p, g)) {
        r.residual_min_eig = std::min(r.residual_min_eig, e.min_eig);
      }
      r.residuals_ok = r.residual_min_eig >= -o.residual_tol;
    } catch (const std::invalid_argument&) {
      r.residual_min_eig = -conic::kInf;
      r.residuals_ok = false;
    }
  } else {
    const auto& pg = std::get<PolyGbf>(cert);
    r.gram_residual = pg.gram_residual;
    r.residual_min_eig = pg.gram_min_eig;
    r.residuals_ok = pg.gram_residual <= o.gram_residual_tol && pg.gram_min_eig >= -o.gram_eig_tol;
  }
  r.passed = r.passed && r.residuals_ok;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string ValidationReport::ToJson() const {
  Json j;
  j["variant"] = variant;
  j["graph"] = graph;
  j["samples"] = samples;
  j["passed"] = passed;
  j["max_violation"] = std::isfinite(max_violation) ? Json(max_violation) : Json(nullptr);
  j["residuals_ok"] = residuals_ok;
  j["residual_min_eig"] =
      std::isfinite(residual_min_eig) ? Json(residual_min_eig) : Json(nullptr);
  j["gram_residual"] = gram_residual;
  Json cs = Json::array();
  for (const auto& c : conditions) {
    Json cj;
    cj["label"] = c.label;
    cj["strict"] = c.strict;
    cj["samples"] = c.samples;
    cj["max_violation"] = std::isfinite(c.max_violation) ? Json(c.max_violation) : Json(nullptr);
    cj["violations"] = c.violations;
    cj["passed"] = c.passed;
    if (c.worst_point && !c.passed) cj["worst_point"] = internal::VectorJson(*c.worst_point);
    cs.push_back(cj);
  }
  j["conditions"] = cs;
  j["seconds"] = seconds;
  return j.dump(2);
}

ContainmentReport CheckContainment(const Certificate& inner, const Certificate& outer,
                                   const Problem& p, const std::vector<int>& nodes, int samples,
                                   uint64_t seed) {
  if (BarrierDim(inner) != BarrierDim(outer) || BarrierDim(inner) != p.system.n()) {
    throw std::invalid_argument("containment needs two state-space certificates of one system");
  }
  for (int v : nodes) {
    if (v < 0 || v >= NumNodes(inner) || v >= NumNodes(outer)) {
      throw std::invalid_argument("node " + WhGraph::NodeName(v) + " missing in a certificate");
    }
  }
  ContainmentReport r;
  const auto xs = Sample(p.sets.X, BoundsOf(p.sets.X, p), samples, seed, false);
  r.samples = static_cast<int>(xs.size());
  r.escapes.assign(nodes.size(), 0);
  r.inner_count.assign(nodes.size(), 0);
  for (size_t k = 0; k < nodes.size(); ++k) {
    for (const auto& x : xs) {
      if (EvaluateBarrier(inner, nodes[k], x) <= 0.0) {
        ++r.inner_count[k];
        if (EvaluateBarrier(outer, nodes[k], x) > 0.0) ++r.escapes[k];
      }
    }
    r.passed = r.passed && r.escapes[k] == 0;
  }
  return r;
}

std::string ContainmentReport::ToJson() const {
  Json j;
  j["samples"] = samples;
  j["passed"] = passed;
  j["escapes"] = escapes;
  j["inner_count"] = inner_count;
  return j.dump(2);
}

std::vector<GridAxis> ParseGrid(std::string_view spec) {
  std::vector<GridAxis> out;
  std::string s(spec);
  std::stringstream axes(s);
  std::string item;
  while (std::getline(axes, item, ',')) {
    std::vector<std::string> parts;
    std::stringstream ps(item);
    std::string part;
    while (std::getline(ps, part, ':')) parts.push_back(part);
    if (parts.size() != 4) {
      throw std::invalid_argument("grid axis '" + item + "' is not name:lo:hi:n");
    }
    GridAxis a;
    a.name = parts[0];
    try {
      size_t pos = 0;
      a.lo = std::stod(parts[1], &pos);
      if (pos != parts[1].size()) throw std::invalid_argument("");
      a.hi = std::stod(parts[2], &pos);
      if (pos != parts[2].size()) throw std::invalid_argument("");
      a.n = std::stoi(parts[3], &pos);
      if (pos != parts[3].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("grid axis '" + item + "' has a malformed number");
    }
    if (a.n < 1 || !(a.hi >= a.lo)) {
      throw std::invalid_argument("grid axis '" + item + "' needs n >= 1 and hi >= lo");
    }
    out.push_back(a);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

std::string LevelsetCsv(const Certificate& cert, int node, const std::vector<GridAxis>& grid) {
  if (static_cast<int>(grid.size()) != BarrierDim(cert)) {
    throw std::invalid_argument("grid has " + std::to_string(grid.size()) +
                                " axes, the barrier has dimension " +
                                std::to_string(BarrierDim(cert)));
  }
  if (node < 0 || node >= NumNodes(cert)) {
    throw std::invalid_argument("node " + WhGraph::NodeName(node) + " is not in the certificate");
  }
  std::ostringstream os;
  os.precision(12);
  for (const auto& a : grid) os << a.name << ",";
  os << "psi,sign\n";
  const int d = static_cast<int>(grid.size());
  std::vector<int> idx(d, 0);
  Eigen::VectorXd x(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      const auto& a = grid[k];
      x[k] = a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * idx[k] / (a.n - 1);
      os << x[k] << ",";
    }
    const double psi = EvaluateBarrier(cert, node, x);
    os << psi << "," << (psi > 0.0 ? 1 : (psi < 0.0 ? -1 : 0)) << "\n";
    int k = d - 1;
    while (k >= 0 && ++idx[k] == grid[k].n) idx[k--] = 0;
    if (k < 0) break;
  }
  return os.str();
}

}  // namespace whcert
