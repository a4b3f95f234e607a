#include "whcert/cert_lmi.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json_util.h"
#include "whcert/parallel.h"

namespace whcert {

using conic::AffineMatrix;
using conic::ConicProblem;
using conic::LinExpr;
using conic::SolveOutcome;
using conic::SolveStatus;
using conic::SymMatVar;
using conic::Var;
using internal::Json;

std::string ToString(CertStatus s) {
  switch (s) {
    case CertStatus::kCertified: return "Certified";
    case CertStatus::kInfeasible: return "Infeasible";
    case CertStatus::kUnknown: return "Unknown";
  }
  return "Unknown";
}

std::vector<double> LmiOptions::DefaultGammaGrid() {
  std::vector<double> g;
  const int points = 20;
  for (int i = 0; i < points; ++i) {
    g.push_back(std::pow(2.0, -6.0 + 9.0 * i / (points - 1)));
  }
  return g;
}

LmiOptions ParseSchedule(std::string_view json_text, LmiOptions base) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const std::string ptr = "/" + k;
    const Json& v = it.value();
    auto num = [&]() {
      if (!v.is_number()) throw ConfigError(ptr, "expected a number");
      return v.get<double>();
    };
    auto integer = [&]() {
      if (!v.is_number_integer() || v.get<int>() < 0) {
        throw ConfigError(ptr, "expected a non-negative integer");
      }
      return v.get<int>();
    };
    if (k == "gamma_grid") {
      if (!v.is_array() || v.empty()) throw ConfigError(ptr, "expected a non-empty list");
      base.gamma_grid.clear();
      for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !(v[i].get<double>() > 0.0)) {
          throw ConfigError(ptr + "/" + std::to_string(i), "expected a positive number");
        }
        base.gamma_grid.push_back(v[i].get<double>());
      }
    } else if (k == "alternation_rounds") {
      base.alternation_rounds = integer();
    } else if (k == "synthesis_rounds") {
      base.synthesis_rounds = integer();
    } else if (k == "eps_min") {
      base.eps_min = num();
    } else if (k == "rho") {
      base.rho = num();
    } else if (k == "eta") {
      base.eta = num();
    } else if (k == "feas_tol") {
      base.feas_tol = num();
    } else if (k == "residual_tol") {
      base.residual_tol = num();
    } else if (k == "gain_bound") {
      base.gain_bound = num();
    } else if (k == "p1_floor") {
      base.p1_floor = num();
    } else if (k == "multiplier_bound") {
      base.multiplier_bound = num();
    } else {
      throw ConfigError(ptr, "unknown schedule option");
    }
  }
  return base;
}

namespace {

Eigen::MatrixXd Homogenize(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n + 1, n + 1);
  F.topLeftCorner(n, n) = M;
  F(n, n) = 1.0;
  return F;
}

Eigen::MatrixXd LastUnit(int dim) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(dim, dim);
  E(dim - 1, dim - 1) = 1.0;
  return E;
}

// Embeds a quadratic over [y; 1] (y = coordinates offset..offset+k-1 of a
// size-N state) into the quadratic over [state; 1].
Eigen::MatrixXd Lift(const Eigen::MatrixXd& S, int offset, int N) {
  const int k = static_cast<int>(S.rows()) - 1;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N + 1, N + 1);
  L.block(offset, offset, k, k) = S.topLeftCorner(k, k);
  L.block(offset, N, k, 1) = S.topRightCorner(k, 1);
  L.block(N, offset, 1, k) = S.bottomLeftCorner(1, k);
  L(N, N) = S(k, k);
  return L;
}

std::vector<Eigen::MatrixXd> Quadratics(const SemiAlgebraicSet& s, const char* name) {
  std::vector<Eigen::MatrixXd> out;
  try {
    for (const auto& q : s.ToQuadratics()) out.push_back(q.S());
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(std::string("set ") + name +
                                " has constraints above degree 2; use the SOS encoder");
  }
  return out;
}

void CheckLinear(const Problem& p, const Eigen::MatrixXd& K) {
  if (!p.system.is_linear()) {
    throw std::invalid_argument("LMI encodings need a linear system; use the SOS encoder");
  }
  if (K.rows() != p.system.m() || K.cols() != p.system.n()) {
    throw std::invalid_argument("gain K has the wrong shape");
  }
}

std::string EdgeName(const GraphEdge& e) {
  return WhGraph::NodeName(e.from) + "-" + std::to_string(e.label) + "->" +
         WhGraph::NodeName(e.to);
}

}  // namespace

Eigen::MatrixXd SuccessorMatrix(const GbfVariant& variant, const Problem& problem,
                                const Eigen::MatrixXd& K, int m) {
  CheckLinear(problem, K);
  const Eigen::MatrixXd& A = problem.system.A();
  const Eigen::MatrixXd& B = problem.system.B();
  const int n = problem.system.n();
  const int nu = problem.system.m();
  if (variant.augmented()) {
    Eigen::MatrixXd Fc = Eigen::MatrixXd::Zero(n + nu, n + nu);
    Fc.topLeftCorner(n, n) = A + B * K;
    Fc.bottomLeftCorner(nu, n) = K;
    Eigen::MatrixXd Fo = Eigen::MatrixXd::Zero(n + nu, n + nu);
    Fo.topLeftCorner(n, n) = A;
    Fo.topRightCorner(n, nu) = B;
    Fo.bottomRightCorner(nu, nu) = Eigen::MatrixXd::Identity(nu, nu);
    Eigen::MatrixXd M = Fc;
    for (int k = 0; k < m; ++k) M = (Fo * M).eval();
    return Homogenize(M);
  }
  Eigen::MatrixXd M = A + B * K;
  for (int k = 0; k < m; ++k) {
    M = (A * M).eval();
    if (variant.strategy == Strategy::kHold) M += B * K;
  }
  return Homogenize(M);
}

Eigen::MatrixXd OpenLoopMatrix(const GbfVariant& variant, const Problem& problem) {
  if (!problem.system.is_linear()) {
    throw std::invalid_argument("LMI encodings need a linear system; use the SOS encoder");
  }
  const Eigen::MatrixXd& A = problem.system.A();
  const Eigen::MatrixXd& B = problem.system.B();
  const int n = problem.system.n();
  const int nu = problem.system.m();
  if (variant.augmented()) {
    Eigen::MatrixXd Fo = Eigen::MatrixXd::Zero(n + nu, n + nu);
    Fo.topLeftCorner(n, n) = A;
    Fo.topRightCorner(n, nu) = B;
    Fo.bottomRightCorner(nu, nu) = Eigen::MatrixXd::Identity(nu, nu);
    return Homogenize(Fo);
  }
  return Homogenize(A);
}

std::vector<LmiCondition> BuildConditions(const GbfVariant& variant, const Problem& problem,
                                          const Eigen::MatrixXd& K, const WhGraph& graph) {
  CheckLinear(problem, K);
  const int n = problem.system.n();
  const int nu = problem.system.m();
  const bool aug = variant.augmented();
  const int N = aug ? n + nu : n;
  if (aug && !problem.sets.U) {
    throw std::invalid_argument("hold 1-step variants need a bounded input set U");
  }

  const auto SX0 = Quadratics(problem.sets.X0, "X0");
  const auto SXu = Quadratics(problem.sets.Xu, "Xu");
  const auto SX = Quadratics(problem.sets.X, "X");
  std::vector<Eigen::MatrixXd> SU;
  if (aug) SU = Quadratics(*problem.sets.U, "U");

  std::vector<Eigen::MatrixXd> state_sets;
  for (const auto& S : SX) state_sets.push_back(aug ? Lift(S, 0, N) : S);
  for (const auto& S : SU) state_sets.push_back(Lift(S, n, N));

  std::vector<LmiCondition> out;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    LmiCondition init;
    init.kind = LmiCondition::Kind::kInit;
    init.label = "init " + WhGraph::NodeName(v);
    init.from = init.to = v;
    if (aug) {
      // u_held = K x on the initial manifold.
      init.F = Eigen::MatrixXd::Zero(N + 1, n + 1);
      init.F.topLeftCorner(n, n).setIdentity();
      init.F.block(n, 0, nu, n) = K;
      init.F(N, n) = 1.0;
    } else {
      init.F = Eigen::MatrixXd::Identity(n + 1, n + 1);
    }
    init.S = SX0;
    out.push_back(std::move(init));

    LmiCondition unsafe;
    unsafe.kind = LmiCondition::Kind::kUnsafe;
    unsafe.label = "unsafe " + WhGraph::NodeName(v);
    unsafe.from = unsafe.to = v;
    unsafe.F = Eigen::MatrixXd::Identity(N + 1, N + 1);
    for (const auto& S : SXu) unsafe.S.push_back(aug ? Lift(S, 0, N) : S);
    for (const auto& S : SU) unsafe.S.push_back(Lift(S, n, N));
    out.push_back(std::move(unsafe));
  }

  const bool implication = !variant.decrease();
  const auto& edges = graph.edges();
  if (!variant.one_step()) {
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      const GraphEdge& ed = edges[e];
      for (int m = 0; m <= ed.label; ++m) {
        LmiCondition c;
        c.label = "edge " + EdgeName(ed) + " m=" + std::to_string(m);
        c.from = ed.from;
        c.to = ed.to;
        c.F = SuccessorMatrix(variant, problem, K, m);
        c.a = 0.0;
        c.b = ed.label - m;
        c.implication = implication;
        c.S = state_sets;
        c.edge = e;
        c.m = m;
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  const Eigen::MatrixXd Fc = SuccessorMatrix(variant, problem, K, 0);
  const Eigen::MatrixXd Fo = OpenLoopMatrix(variant, problem);
  std::vector<int> max_in(graph.num_nodes(), 0);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const GraphEdge& ed = edges[e];
    max_in[ed.to] = std::max(max_in[ed.to], ed.label);
    LmiCondition c;
    c.label = "switch " + EdgeName(ed);
    c.from = ed.from;
    c.to = ed.to;
    c.F = Fc;
    c.b = ed.label;
    c.implication = implication;
    c.S = state_sets;
    c.edge = e;
    c.m = 0;
    out.push_back(std::move(c));
  }
  for (int w = 0; w < graph.num_nodes(); ++w) {
    if (max_in[w] == 0) continue;
    if (implication) {
      for (int m = 1; m <= max_in[w]; ++m) {
        LmiCondition c;
        c.label = "increase " + WhGraph::NodeName(w) + " m=" + std::to_string(m);
        c.from = c.to = w;
        c.F = Fo;
        c.a = m;
        c.b = m - 1;
        c.implication = true;
        c.S = state_sets;
        c.m = m;
        out.push_back(std::move(c));
      }
    } else {
      LmiCondition c;
      c.label = "increase " + WhGraph::NodeName(w);
      c.from = c.to = w;
      c.F = Fo;
      c.a = 1.0;
      c.b = 0.0;
      c.S = state_sets;
      out.push_back(std::move(c));
    }
  }
  return out;
}

namespace {

std::string LambdaName(const LmiCondition& c, int j) {
  return c.label + " lambda" + std::to_string(j);
}

std::string GammaName(const LmiCondition& c) { return c.label + " gamma"; }

struct Layout {
  int nodes = 0;
  int dim = 0;  // homogenized barrier dimension
  std::vector<SymMatVar> P;
  std::vector<Var> eps;
  std::vector<std::vector<Var>> lambda;
  std::vector<Var> gamma;  // id -1 when fixed
};

// P-step: P_v, eps_v, multipliers free; gamma per condition fixed.
ConicProblem EncodeP(const std::vector<LmiCondition>& conds, int nodes, int dim,
                     const GbfVariant& variant, const LmiOptions& o,
                     const std::vector<double>& gammas, bool p1_floor, Layout* layout) {
  ConicProblem p;
  layout->nodes = nodes;
  layout->dim = dim;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd E = LastUnit(dim);
  const double eps_floor = variant.decrease() ? 0.0 : o.eps_min;
  for (int v = 0; v < nodes; ++v) {
    const std::string name = WhGraph::NodeName(v);
    layout->P.push_back(p.AddSymmetric("P_" + name, dim));
    layout->eps.push_back(p.AddScalar("eps_" + name, eps_floor, o.rho));
  }
  for (int v = 0; v < nodes; ++v) {
    const std::string name = WhGraph::NodeName(v);
    const AffineMatrix Pv = AffineMatrix::Of(layout->P[v]);
    p.AddPsd("P_" + name + " <= rho I", AffineMatrix::Constant(o.rho * I) - Pv, false);
    p.AddPsd("P_" + name + " >= -rho I", Pv + AffineMatrix::Constant(o.rho * I), false);
    if (p1_floor) {
      const Eigen::MatrixXd sel = Eigen::MatrixXd::Identity(dim, dim - 1);
      p.AddPsd("p1_" + name + " floor",
               Pv.Congruence(sel) - AffineMatrix::Constant(o.p1_floor * Eigen::MatrixXd::Identity(dim - 1, dim - 1)),
               false);
    }
  }
  layout->lambda.assign(conds.size(), {});
  layout->gamma.assign(conds.size(), Var{});
  for (size_t i = 0; i < conds.size(); ++i) {
    const LmiCondition& c = conds[i];
    AffineMatrix expr;
    const AffineMatrix Pf = AffineMatrix::Of(layout->P[c.from]);
    switch (c.kind) {
      case LmiCondition::Kind::kInit:
        expr = -Pf.Congruence(c.F);
        break;
      case LmiCondition::Kind::kUnsafe:
        expr = Pf - AffineMatrix::Constant(o.eta * I);
        break;
      case LmiCondition::Kind::kDynamic: {
        const double g = c.implication ? gammas[i] : 1.0;
        expr = Pf * g;
        if (c.a != 0.0) expr += AffineMatrix::Scaled(LinExpr(layout->eps[c.from]) * (g * c.a), E);
        expr -= AffineMatrix::Of(layout->P[c.to]).Congruence(c.F);
        if (c.b != 0.0) expr -= AffineMatrix::Scaled(LinExpr(layout->eps[c.to]) * c.b, E);
        break;
      }
    }
    for (size_t j = 0; j < c.S.size(); ++j) {
      Var lam = p.AddScalar(LambdaName(c, static_cast<int>(j)), 0.0, o.multiplier_bound);
      layout->lambda[i].push_back(lam);
      expr -= AffineMatrix::Scaled(lam, c.S[j]);
    }
    p.AddPsd(c.label, std::move(expr));
  }
  return p;
}

// Gamma-step: P_v and eps_v fixed; gamma per implication condition free.
ConicProblem EncodeGamma(const std::vector<LmiCondition>& conds, const GbfCertificate& fixed,
                         const LmiOptions& o, Layout* layout) {
  ConicProblem p;
  const int dim = static_cast<int>(fixed.P[0].rows());
  layout->nodes = fixed.num_nodes();
  layout->dim = dim;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd E = LastUnit(dim);
  layout->lambda.assign(conds.size(), {});
  layout->gamma.assign(conds.size(), Var{});
  for (size_t i = 0; i < conds.size(); ++i) {
    const LmiCondition& c = conds[i];
    const Eigen::MatrixXd& Pf = fixed.P[c.from];
    AffineMatrix expr;
    switch (c.kind) {
      case LmiCondition::Kind::kInit:
        expr = AffineMatrix::Constant(-c.F.transpose() * Pf * c.F);
        break;
      case LmiCondition::Kind::kUnsafe:
        expr = AffineMatrix::Constant(Pf - o.eta * I);
        break;
      case LmiCondition::Kind::kDynamic: {
        const Eigen::MatrixXd ante = Pf + c.a * fixed.eps[c.from] * E;
        const Eigen::MatrixXd cons =
            c.F.transpose() * fixed.P[c.to] * c.F + c.b * fixed.eps[c.to] * E;
        if (c.implication) {
          Var g = p.AddScalar(GammaName(c), 0.0, o.multiplier_bound);
          layout->gamma[i] = g;
          expr = AffineMatrix::Scaled(g, ante) - AffineMatrix::Constant(cons);
        } else {
          expr = AffineMatrix::Constant(ante - cons);
        }
        break;
      }
    }
    for (size_t j = 0; j < c.S.size(); ++j) {
      Var lam = p.AddScalar(LambdaName(c, static_cast<int>(j)), 0.0, o.multiplier_bound);
      layout->lambda[i].push_back(lam);
      expr -= AffineMatrix::Scaled(lam, c.S[j]);
    }
    p.AddPsd(c.label, std::move(expr));
  }
  return p;
}

GbfCertificate BaseCertificate(const GbfVariant& variant, const Problem& problem,
                               const Eigen::MatrixXd& K, const WhGraph& graph,
                               const LmiOptions& o) {
  GbfCertificate c;
  c.variant = variant;
  c.graph = graph.Id();
  c.state_dim = problem.system.n();
  c.input_dim = problem.system.m();
  c.K = K;
  c.multipliers["eta"] = o.eta;
  return c;
}

// Certificate from a P-step solution.
GbfCertificate FromPStep(GbfCertificate base, const std::vector<LmiCondition>& conds,
                         const Layout& layout, const SolveOutcome& out,
                         const std::vector<double>& gammas) {
  for (int v = 0; v < layout.nodes; ++v) {
    Eigen::MatrixXd P = out.value(layout.P[v]);
    base.P.push_back(P);
    base.eps.push_back(std::max(0.0, out.value(layout.eps[v])));
  }
  for (size_t i = 0; i < conds.size(); ++i) {
    for (size_t j = 0; j < layout.lambda[i].size(); ++j) {
      base.multipliers[LambdaName(conds[i], static_cast<int>(j))] =
          std::max(0.0, out.value(layout.lambda[i][j]));
    }
    if (conds[i].implication) base.multipliers[GammaName(conds[i])] = gammas[i];
  }
  return base;
}

GbfCertificate FromGammaStep(GbfCertificate fixed, const std::vector<LmiCondition>& conds,
                             const Layout& layout, const SolveOutcome& out) {
  for (size_t i = 0; i < conds.size(); ++i) {
    for (size_t j = 0; j < layout.lambda[i].size(); ++j) {
      fixed.multipliers[LambdaName(conds[i], static_cast<int>(j))] =
          std::max(0.0, out.value(layout.lambda[i][j]));
    }
    if (layout.gamma[i].id >= 0) {
      fixed.multipliers[GammaName(conds[i])] = std::max(0.0, out.value(layout.gamma[i]));
    }
  }
  return fixed;
}

double MultiplierOr(const GbfCertificate& cert, const std::string& name, double fallback) {
  auto it = cert.multipliers.find(name);
  return it == cert.multipliers.end() ? fallback : it->second;
}

double Lookup(const GbfCertificate& cert, const std::string& name) {
  auto it = cert.multipliers.find(name);
  if (it == cert.multipliers.end()) {
    throw std::invalid_argument("certificate lacks multiplier '" + name + "'");
  }
  return it->second;
}

}  // namespace

Eigen::MatrixXd ConditionMatrix(const LmiCondition& c, const GbfCertificate& cert) {
  const Eigen::MatrixXd& Pf = cert.P.at(c.from);
  const int dim = static_cast<int>(Pf.rows());
  const Eigen::MatrixXd E = LastUnit(dim);
  Eigen::MatrixXd M;
  switch (c.kind) {
    case LmiCondition::Kind::kInit:
      M = -c.F.transpose() * Pf * c.F;
      break;
    case LmiCondition::Kind::kUnsafe:
      M = Pf - MultiplierOr(cert, "eta", 0.0) * Eigen::MatrixXd::Identity(dim, dim);
      break;
    case LmiCondition::Kind::kDynamic: {
      const double g = c.implication ? Lookup(cert, GammaName(c)) : 1.0;
      M = g * (Pf + c.a * cert.eps.at(c.from) * E) - c.F.transpose() * cert.P.at(c.to) * c.F -
          c.b * cert.eps.at(c.to) * E;
      break;
    }
  }
  for (size_t j = 0; j < c.S.size(); ++j) {
    M -= Lookup(cert, LambdaName(c, static_cast<int>(j))) * c.S[j];
  }
  return (0.5 * (M + M.transpose())).eval();
}

std::vector<ResidualEntry> RecheckResiduals(const GbfCertificate& cert, const Problem& problem,
                                            const WhGraph& graph) {
  if (cert.graph != graph.Id() || cert.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("certificate is for " + cert.graph + ", graph is " + graph.Id());
  }
  const auto conds = BuildConditions(cert.variant, problem, cert.K, graph);
  std::vector<ResidualEntry> out;
  for (const auto& c : conds) {
    out.push_back({c.label, conic::EigMin(ConditionMatrix(c, cert))});
  }
  double min_mult = conic::kInf;
  for (const auto& [k, v] : cert.multipliers) min_mult = std::min(min_mult, v);
  double min_eps = conic::kInf;
  for (double e : cert.eps) min_eps = std::min(min_eps, e);
  out.push_back({"multipliers >= 0", min_mult});
  out.push_back({"eps >= 0", min_eps});
  return out;
}

namespace {

Json ResidualJson(const std::vector<ResidualEntry>& rs) {
  Json j = Json::object();
  for (const auto& r : rs) j[r.label] = r.min_eig;
  return j;
}

double WorstResidual(const std::vector<ResidualEntry>& rs) {
  double w = conic::kInf;
  for (const auto& r : rs) w = std::min(w, r.min_eig);
  return w;
}

class Verifier {
 public:
  Verifier(const GbfVariant& variant, const Problem& problem, const Eigen::MatrixXd& K,
           const WhGraph& graph, const LmiOptions& o, const ValidationHook& hook,
           bool p1_floor)
      : variant_(variant), problem_(problem), K_(K), graph_(graph), o_(o), hook_(hook),
        p1_floor_(p1_floor) {
    conds_ = BuildConditions(variant, problem, K, graph);
    dim_ = (variant.augmented() ? problem.system.n() + problem.system.m() : problem.system.n()) + 1;
    solve_opts_.feas_tol = o.feas_tol;
  }

  CertReport Run() {
    const auto start = std::chrono::steady_clock::now();
    report_.variant = variant_;
    report_.graph = graph_.Id();
    report_.K = K_;
    if (variant_.decrease()) {
      RunDecrease();
    } else {
      RunImplication();
    }
    report_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report_;
  }

  // Best P-step iterate from the sweep or alternation.
  const std::optional<GbfCertificate>& best() const { return best_; }

 private:
  struct PSolve {
    SolveOutcome outcome;
    Layout layout;
    std::vector<double> gammas;
  };

  PSolve SolveP(const std::vector<double>& gammas) {
    PSolve s;
    s.gammas = gammas;
    ConicProblem p = EncodeP(conds_, graph_.num_nodes(), dim_, variant_, o_, gammas, p1_floor_,
                             &s.layout);
    s.outcome = conic::Solve(p, solve_opts_);
    return s;
  }

  void Count(const SolveOutcome& out) {
    ++report_.solves;
    report_.iterations += out.iterations;
  }

  void NoteBest(const GbfCertificate& cert, double margin) {
    if (!best_ || margin > report_.margin) {
      best_ = cert;
      report_.margin = margin;
    }
  }

  // Residual re-check and validation hook; fills the report on success.
  bool Accept(GbfCertificate cert, const std::string& how) {
    cert.residuals = RecheckResiduals(cert, problem_, graph_);
    const double worst = WorstResidual(cert.residuals);
    if (worst < -o_.residual_tol) {
      std::ostringstream os;
      os << how << ": solver reported feasible but the re-check found min eigenvalue " << worst;
      notes_.push_back(os.str());
      return false;
    }
    std::string why;
    if (hook_ && !hook_(cert, &why)) {
      notes_.push_back(how + ": validation hook rejected the certificate: " + why);
      return false;
    }
    report_.status = CertStatus::kCertified;
    report_.residuals = cert.residuals;
    report_.certificate = std::move(cert);
    notes_.push_back(how);
    report_.detail = Join();
    return true;
  }

  std::string Join() const {
    std::string s;
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    return s;
  }

  void RunDecrease() {
    PSolve s = SolveP(std::vector<double>(conds_.size(), 1.0));
    Count(s.outcome);
    GbfCertificate cert = FromPStep(BaseCertificate(variant_, problem_, K_, graph_, o_), conds_,
                                    s.layout, s.outcome, s.gammas);
    NoteBest(cert, s.outcome.margin);
    std::ostringstream os;
    os << "LMI " << conic::ToString(s.outcome.status) << " (margin " << s.outcome.margin
       << ", bound " << s.outcome.margin_bound << ")";
    if (s.outcome.status == SolveStatus::kFeasible && Accept(cert, os.str())) return;
    if (s.outcome.status == SolveStatus::kFeasible) {
      report_.status = CertStatus::kUnknown;
    } else if (s.outcome.status == SolveStatus::kInfeasible) {
      report_.status = CertStatus::kInfeasible;
      notes_.push_back(os.str() + ": the encoding is infeasible (not a proof of unsafety)");
    } else {
      report_.status = CertStatus::kUnknown;
      notes_.push_back(os.str() + ": " + s.outcome.diagnostic);
    }
    report_.best_iterate = best_;
    report_.detail = Join();
  }

  void RunImplication() {
    const auto& grid = o_.gamma_grid;
    std::vector<PSolve> sweep(grid.size());
    ParallelFor(static_cast<int>(grid.size()), [&](int i) {
      sweep[i] = SolveP(std::vector<double>(conds_.size(), grid[i]));
    });
    std::vector<int> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return sweep[a].outcome.margin > sweep[b].outcome.margin;
    });
    for (const auto& s : sweep) Count(s.outcome);
    for (int i : order) {
      const PSolve& s = sweep[i];
      GbfCertificate cert = FromPStep(BaseCertificate(variant_, problem_, K_, graph_, o_), conds_,
                                      s.layout, s.outcome, s.gammas);
      NoteBest(cert, s.outcome.margin);
      if (s.outcome.status != SolveStatus::kFeasible) continue;
      std::ostringstream os;
      os << "gamma sweep: feasible at gamma = " << grid[i] << " (margin " << s.outcome.margin
         << ")";
      if (Accept(cert, os.str())) {
        report_.gamma = grid[i];
        return;
      }
    }
    {
      std::ostringstream os;
      os << "gamma sweep: no feasible point (best margin " << report_.margin << " at gamma = "
         << (order.empty() ? 0.0 : grid[order[0]]) << ")";
      notes_.push_back(os.str());
    }
    if (!order.empty() && Alternate()) return;

    // Only the gamma-free part can prove the encoding infeasible.
    std::vector<LmiCondition> static_conds;
    for (const auto& c : conds_) {
      if (c.kind != LmiCondition::Kind::kDynamic) static_conds.push_back(c);
    }
    Layout layout;
    ConicProblem p = EncodeP(static_conds, graph_.num_nodes(), dim_, variant_, o_,
                             std::vector<double>(static_conds.size(), 1.0), p1_floor_, &layout);
    const SolveOutcome out = conic::Solve(p, solve_opts_);
    Count(out);
    if (out.status == SolveStatus::kInfeasible) {
      report_.status = CertStatus::kInfeasible;
      notes_.push_back("initial/unsafe conditions alone are infeasible");
    } else {
      report_.status = CertStatus::kUnknown;
      notes_.push_back("alternation budget exhausted");
    }
    report_.best_iterate = best_;
    report_.detail = Join();
  }

  bool Alternate() {
    GbfCertificate cur = *best_;
    double best_margin = report_.margin;
    int stalls = 0;
    for (int round = 0; round < o_.alternation_rounds; ++round) {
      Layout gl;
      ConicProblem gp = EncodeGamma(conds_, cur, o_, &gl);
      const SolveOutcome g = conic::Solve(gp, solve_opts_);
      Count(g);
      std::vector<double> gammas(conds_.size(), 1.0);
      for (size_t i = 0; i < conds_.size(); ++i) {
        if (gl.gamma[i].id >= 0) gammas[i] = std::max(0.0, g.value(gl.gamma[i]));
      }
      GbfCertificate gcert = FromGammaStep(cur, conds_, gl, g);
      if (g.status == SolveStatus::kFeasible &&
          Accept(gcert, "alternation round " + std::to_string(round + 1) + ": gamma step feasible")) {
        return true;
      }
      PSolve s = SolveP(gammas);
      Count(s.outcome);
      GbfCertificate pcert = FromPStep(BaseCertificate(variant_, problem_, K_, graph_, o_), conds_,
                                       s.layout, s.outcome, gammas);
      NoteBest(pcert, s.outcome.margin);
      if (s.outcome.status == SolveStatus::kFeasible &&
          Accept(pcert, "alternation round " + std::to_string(round + 1) + ": P step feasible")) {
        return true;
      }
      if (s.outcome.margin > best_margin + 1e-9) {
        best_margin = s.outcome.margin;
        stalls = 0;
      } else if (++stalls >= 3) {
        notes_.push_back("alternation stalled after " + std::to_string(round + 1) + " rounds");
        break;
      }
      cur = pcert;
    }
    return false;
  }

  const GbfVariant variant_;
  const Problem& problem_;
  const Eigen::MatrixXd K_;
  const WhGraph& graph_;
  const LmiOptions& o_;
  const ValidationHook& hook_;
  const bool p1_floor_;
  std::vector<LmiCondition> conds_;
  int dim_ = 0;
  conic::SolveOptions solve_opts_;
  CertReport report_;
  std::optional<GbfCertificate> best_;
  std::vector<std::string> notes_;
};

}  // namespace

conic::ConicProblem Encode(const GbfVariant& variant, const Problem& problem,
                           const Eigen::MatrixXd& K, const WhGraph& graph,
                           const LmiOptions& options, double gamma) {
  const auto conds = BuildConditions(variant, problem, K, graph);
  const int dim =
      (variant.augmented() ? problem.system.n() + problem.system.m() : problem.system.n()) + 1;
  Layout layout;
  return EncodeP(conds, graph.num_nodes(), dim, variant, options,
                 std::vector<double>(conds.size(), gamma), false, &layout);
}

CertReport Verify(const GbfVariant& variant, const Problem& problem, const Eigen::MatrixXd& K,
                  const WhGraph& graph, const LmiOptions& options, const ValidationHook& hook) {
  return Verifier(variant, problem, K, graph, options, hook, false).Run();
}

std::string CertReport::ToJson() const {
  Json j;
  j["status"] = whcert::ToString(status);
  j["variant"] = variant.ToString();
  j["graph"] = graph;
  j["K"] = internal::MatrixJson(K);
  j["margin"] = std::isfinite(margin) ? Json(margin) : Json(nullptr);
  if (gamma > 0.0) j["gamma"] = gamma;
  j["solves"] = solves;
  j["iterations"] = iterations;
  j["seconds"] = seconds;
  j["detail"] = detail;
  j["residuals"] = ResidualJson(residuals);
  if (certificate) {
    j["certificate"] = Json::parse(whcert::ToJson(*certificate));
  } else if (best_iterate) {
    j["best_iterate"] = Json::parse(whcert::ToJson(*best_iterate));
  }
  return j.dump(2);
}

namespace {

// K-step: P_v fixed, solve for K, gamma, delta and eps via the Schur
// complement of the GBF edge conditions.
struct KStep {
  SolveOutcome outcome;
  Eigen::MatrixXd K;
};

KStep SolveKStep(const Problem& problem, const WhGraph& graph, const GbfCertificate& fixed,
                 const LmiOptions& o) {
  const Eigen::MatrixXd& A = problem.system.A();
  const Eigen::MatrixXd& B = problem.system.B();
  const int n = problem.system.n();
  const int nu = problem.system.m();
  const bool hold = problem.strategy == Strategy::kHold;
  const auto SX = Quadratics(problem.sets.X, "X");

  ConicProblem p;
  std::vector<Var> k;
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < n; ++b) {
      k.push_back(p.AddScalar("K[" + std::to_string(a) + "," + std::to_string(b) + "]",
                              -o.gain_bound, o.gain_bound));
    }
  }
  std::vector<Var> eps;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    eps.push_back(p.AddScalar("eps_" + WhGraph::NodeName(v), o.eps_min, o.rho));
  }
  const Eigen::MatrixXd E = LastUnit(n + 1);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
  e[n] = 1.0;

  for (const auto& ed : graph.edges()) {
    const Eigen::MatrixXd& Pn = fixed.P[ed.to];
    const Eigen::MatrixXd p1 = 0.5 * (Pn.topLeftCorner(n, n) + Pn.topLeftCorner(n, n).transpose());
    const Eigen::VectorXd p2 = Pn.topRightCorner(n, 1).col(0);
    const double p3 = Pn(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(p1);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("K-step needs p1 > 0 at node " + WhGraph::NodeName(ed.to));
    }
    const Eigen::MatrixXd p1inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd Am = A;  // A^(m+1)
    Eigen::MatrixXd Cm = Eigen::MatrixXd::Identity(n, n);  // A^m or sum_{j<=m} A^j
    Eigen::MatrixXd Apow = Eigen::MatrixXd::Identity(n, n);
    for (int m = 0; m <= ed.label; ++m) {
      if (m > 0) {
        Am = (A * Am).eval();
        Apow = (A * Apow).eval();
        Cm = hold ? (Cm + Apow).eval() : Apow;
      }
      // W = [A^(m+1) + Cm B K, 0].
      Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(n, n + 1);
      W0.leftCols(n) = Am;
      AffineMatrix W = AffineMatrix::Constant(W0);
      for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < n; ++b) {
          Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n + 1);
          T.col(b) = Cm * B.col(a);
          W += AffineMatrix::Scaled(k[a * n + b], T);
        }
      }
      const std::string label = "edge " + EdgeName(ed) + " m=" + std::to_string(m);
      Var g = p.AddScalar(label + " gamma", 0.0, o.multiplier_bound);
      const AffineMatrix cross = W.LeftMultiply(e * p2.transpose());
      AffineMatrix lr = AffineMatrix::Scaled(g, fixed.P[ed.from]) -
                        AffineMatrix::Constant(p3 * E) - cross - cross.Transpose();
      if (ed.label - m != 0) lr -= AffineMatrix::Scaled(LinExpr(eps[ed.to]) * (ed.label - m), E);
      for (size_t j = 0; j < SX.size(); ++j) {
        Var d = p.AddScalar(label + " lambda" + std::to_string(j), 0.0, o.multiplier_bound);
        lr -= AffineMatrix::Scaled(d, SX[j]);
      }
      p.AddPsd(label, AffineMatrix::Blocks(AffineMatrix::Constant(p1inv), W, W.Transpose(), lr));
    }
  }
  conic::SolveOptions so;
  so.feas_tol = o.feas_tol;
  KStep r;
  r.outcome = conic::Solve(p, so);
  r.K.resize(nu, n);
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < n; ++b) r.K(a, b) = r.outcome.value(k[a * n + b]);
  }
  return r;
}

}  // namespace

SynthesisResult Synthesize(const Problem& problem, const WhGraph& graph,
                           const Eigen::MatrixXd& K_init, const LmiOptions& options,
                           const ValidationHook& hook) {
  const auto start = std::chrono::steady_clock::now();
  const GbfVariant variant{GbfTag::kGbf, problem.strategy};
  SynthesisResult res;
  res.K = K_init;
  res.gain_history.push_back(K_init);
  std::vector<std::string> notes;
  auto finish = [&](CertReport rep) {
    if (!notes.empty()) {
      std::string s;
      for (const auto& n : notes) s += n + "; ";
      rep.detail = s + rep.detail;
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.report = std::move(rep);
    return res;
  };

  CertReport rep = Verify(variant, problem, res.K, graph, options, hook);
  if (rep.status == CertStatus::kCertified) {
    notes.push_back("initial gain already certified");
    return finish(rep);
  }
  for (int round = 1; round <= options.synthesis_rounds; ++round) {
    res.rounds = round;
    Verifier pstep(variant, problem, res.K, graph, options, {}, true);
    pstep.Run();
    if (!pstep.best()) break;
    KStep ks = SolveKStep(problem, graph, *pstep.best(), options);
    if (!ks.K.allFinite()) {
      notes.push_back("K-step returned a non-finite gain in round " + std::to_string(round));
      break;
    }
    res.K = ks.K;
    res.gain_history.push_back(ks.K);
    std::ostringstream os;
    os << "round " << round << ": K-step " << conic::ToString(ks.outcome.status) << " (margin "
       << ks.outcome.margin << "), K = [" << ks.K.format(Eigen::IOFormat(6, 0, ", ", "; ")) << "]";
    notes.push_back(os.str());
    rep = Verify(variant, problem, res.K, graph, options, hook);
    if (rep.status == CertStatus::kCertified) return finish(rep);
  }
  if (rep.status == CertStatus::kInfeasible) rep.status = CertStatus::kUnknown;
  notes.push_back("synthesis budget exhausted");
  return finish(rep);
}

}  // namespace whcert
