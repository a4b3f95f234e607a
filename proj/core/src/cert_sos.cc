#include "whcert/cert_sos.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json_util.h"

namespace whcert {

using conic::AffineMatrix;
using conic::LinExpr;
using conic::SymMatVar;
using conic::Var;
using internal::Json;

namespace {

Exponent Add(const Exponent& a, const Exponent& b) {
  Exponent r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

void Accumulate(PolyExpr* p, const Polynomial& q, const LinExpr& coef) {
  const auto& c = q.coefficients();
  for (int i = 0; i < q.basis().size(); ++i) {
    if (c[i] != 0.0) (*p)[q.basis()[i]] += coef * c[i];
  }
}

void Accumulate(PolyExpr* p, const PolyExpr& q, double s) {
  for (const auto& [e, c] : q) (*p)[e] += c * s;
}

bool Trivial(const LinExpr& e) { return e.terms().empty() && e.constant() == 0.0; }

int DegreeOf(const PolyExpr& p) {
  int d = 0;
  for (const auto& [e, c] : p) {
    if (!Trivial(c)) d = std::max(d, TotalDegree(e));
  }
  return d;
}

// sum_k c_k (m_k o maps) for Psi with coefficients c over `basis`.
PolyExpr ComposePsi(const std::vector<Var>& coeffs, const MonomialBasis& basis,
                    const std::vector<Polynomial>& maps, const std::string& label) {
  PolyExpr out;
  for (int k = 0; k < basis.size(); ++k) {
    const Polynomial mono = Polynomial::FromTerms(basis.num_vars(), {{basis[k], 1.0}});
    Polynomial composed;
    try {
      composed = mono.Compose(maps);
    } catch (const DegreeOverflowError& e) {
      throw SosDegreeError(label, e.what());
    }
    Accumulate(&out, composed, LinExpr(coeffs[k]));
  }
  return out;
}

PolyExpr PsiExpr(const std::vector<Var>& coeffs, const MonomialBasis& basis) {
  PolyExpr out;
  for (int k = 0; k < basis.size(); ++k) out[basis[k]] += LinExpr(coeffs[k]);
  return out;
}

PolyExpr GramExpr(const GramBlock& g, int num_vars) {
  const MonomialBasis& b = MonomialBasis::Get(num_vars, g.half_degree);
  PolyExpr out;
  for (int i = 0; i < b.size(); ++i) {
    for (int j = i; j < b.size(); ++j) {
      out[Add(b[i], b[j])] += LinExpr(g.Q(i, j)) * (i == j ? 1.0 : 2.0);
    }
  }
  return out;
}

PolyExpr Times(const PolyExpr& p, const Polynomial& g) {
  PolyExpr out;
  const auto& c = g.coefficients();
  for (const auto& [e, lin] : p) {
    for (int i = 0; i < g.basis().size(); ++i) {
      if (c[i] != 0.0) out[Add(e, g.basis()[i])] += lin * c[i];
    }
  }
  return out;
}

double BoxScale(const std::optional<BoundingBox>& b, int i) {
  if (!b) return 1.0;
  const double s = std::max(std::abs(b->lo[i]), std::abs(b->hi[i]));
  return std::isfinite(s) && s > 0.0 ? s : 1.0;
}

class Encoder {
 public:
  Encoder(const GbfVariant& variant, const Problem& problem, const WhGraph& graph,
          const SosSettings& settings)
      : v_(variant), p_(problem), g_(graph), s_(settings) {}

  SosEncoding Run() {
    if (!v_.decrease()) {
      throw std::invalid_argument(
          "the SOS encoder handles only decrease variants (dgbf, 1dgbf): implication "
          "conditions require the set of constraints in conjunctive form");
    }
    if (!p_.controller) throw std::invalid_argument("SOS verification needs a controller");
    p_.controller->CheckCompatible(p_.system);
    if (p_.sos.n_p < 1) throw SosDegreeError("options", "n_p must be at least 1");
    if (p_.sos.multiplier_degree >= 0 && p_.sos.multiplier_degree % 2 != 0) {
      throw SosDegreeError("options", "multiplier degree must be even");
    }
    n_ = p_.system.n();
    m_ = p_.system.m();
    aug_ = v_.augmented();
    if (aug_ && !p_.sets.U) {
      throw std::invalid_argument("hold 1-step variants need a bounded input set U");
    }
    nv_ = aug_ ? n_ + m_ : n_;
    enc_.variant = v_;
    enc_.num_vars = nv_;
    enc_.state_dim = n_;
    enc_.n_p = p_.sos.n_p;
    enc_.scale.resize(nv_);
    const BoundingBox xb = BoundsOf(p_.sets.X, p_);
    for (int i = 0; i < n_; ++i) {
      enc_.scale[i] = BoxScale(std::optional<BoundingBox>(xb), i);
    }
    if (aug_) {
      for (int j = 0; j < m_; ++j) enc_.scale[n_ + j] = BoxScale(p_.sets.U->bounds(), j);
    }
    BuildMaps();

    const MonomialBasis& pb = MonomialBasis::Get(nv_, p_.sos.n_p);
    for (int v = 0; v < g_.num_nodes(); ++v) {
      const std::string name = WhGraph::NodeName(v);
      std::vector<Var> c;
      for (int k = 0; k < pb.size(); ++k) {
        c.push_back(enc_.problem.AddScalar("psi_" + name + "[" + MonomialToString(pb[k]) + "]",
                                           -s_.rho, s_.rho));
      }
      enc_.psi.push_back(std::move(c));
      enc_.eps.push_back(enc_.problem.AddScalar("eps_" + name, 0.0, s_.rho));
    }

    const auto X0 = ScaledX(p_.sets.X0.constraints(), n_);
    const auto Xu = ScaledX(p_.sets.Xu.constraints(), nv_);
    const auto X = ScaledX(p_.sets.X.constraints(), nv_);
    std::vector<Polynomial> U;
    if (aug_) U = ScaledU(p_.sets.U->constraints());
    std::vector<Polynomial> XU = X;
    XU.insert(XU.end(), U.begin(), U.end());
    std::vector<Polynomial> XuU = Xu;
    XuU.insert(XuU.end(), U.begin(), U.end());

    for (int v = 0; v < g_.num_nodes(); ++v) {
      const std::string name = WhGraph::NodeName(v);
      const std::string il = "init " + name;
      PolyExpr init;
      if (aug_) {
        Accumulate(&init, ComposePsi(enc_.psi[v], pb, init_map_, il), -1.0);
      } else {
        Accumulate(&init, PsiExpr(enc_.psi[v], pb), -1.0);
      }
      AddCondition(il, std::move(init), X0, n_);

      PolyExpr unsafe = PsiExpr(enc_.psi[v], pb);
      unsafe[Exponent(nv_, 0)] -= LinExpr(p_.sos.eta);
      AddCondition("unsafe " + name, std::move(unsafe), XuU, nv_);
    }

    const auto& edges = g_.edges();
    if (v_.one_step()) {
      std::vector<int> max_in(g_.num_nodes(), 0);
      for (const auto& e : edges) {
        max_in[e.to] = std::max(max_in[e.to], e.label);
        const std::string label = "switch " + EdgeLabel(e);
        PolyExpr t = PsiExpr(enc_.psi[e.from], pb);
        Accumulate(&t, ComposePsi(enc_.psi[e.to], pb, closed_, label), -1.0);
        t[Exponent(nv_, 0)] -= LinExpr(enc_.eps[e.to]) * e.label;
        AddCondition(label, std::move(t), XU, nv_);
      }
      for (int w = 0; w < g_.num_nodes(); ++w) {
        if (max_in[w] == 0) continue;
        const std::string label = "increase " + WhGraph::NodeName(w);
        PolyExpr t = PsiExpr(enc_.psi[w], pb);
        t[Exponent(nv_, 0)] += LinExpr(enc_.eps[w]);
        Accumulate(&t, ComposePsi(enc_.psi[w], pb, open_, label), -1.0);
        AddCondition(label, std::move(t), XU, nv_);
      }
    } else {
      for (const auto& e : edges) {
        std::vector<Polynomial> maps = closed_;
        for (int m = 0; m <= e.label; ++m) {
          const std::string label = "edge " + EdgeLabel(e) + " m=" + std::to_string(m);
          if (m > 0) maps = NextOpen(maps, label);
          PolyExpr t = PsiExpr(enc_.psi[e.from], pb);
          Accumulate(&t, ComposePsi(enc_.psi[e.to], pb, maps, label), -1.0);
          if (e.label - m != 0) t[Exponent(nv_, 0)] -= LinExpr(enc_.eps[e.to]) * (e.label - m);
          AddCondition(label, std::move(t), X, nv_);
        }
      }
    }
    return std::move(enc_);
  }

 private:
  static std::string EdgeLabel(const GraphEdge& e) {
    return WhGraph::NodeName(e.from) + "-" + std::to_string(e.label) + "->" +
           WhGraph::NodeName(e.to);
  }

  // x = D y over a ring of `ring` variables whose first n are y.
  std::vector<Polynomial> UpX(int ring) const {
    std::vector<Polynomial> up;
    for (int i = 0; i < n_; ++i) up.push_back(Polynomial::Variable(ring, i) * enc_.scale[i]);
    return up;
  }

  std::vector<Polynomial> ScaledX(const std::vector<Polynomial>& gs, int ring) const {
    std::vector<Polynomial> out;
    const auto up = UpX(ring);
    for (const auto& g : gs) out.push_back(g.Compose(up).Trimmed());
    return out;
  }

  std::vector<Polynomial> ScaledU(const std::vector<Polynomial>& gs) const {
    std::vector<Polynomial> up;
    for (int j = 0; j < m_; ++j) {
      up.push_back(Polynomial::Variable(nv_, n_ + j) * enc_.scale[n_ + j]);
    }
    std::vector<Polynomial> out;
    for (const auto& g : gs) out.push_back(g.Compose(up).Trimmed());
    return out;
  }

  // f(D x_maps, u_maps) / s per state, with x_maps already scaled.
  std::vector<Polynomial> Step(const std::vector<Polynomial>& x_scaled,
                               const std::vector<Polynomial>& u, const std::string& label) const {
    std::vector<Polynomial> args;
    for (int i = 0; i < n_; ++i) args.push_back(x_scaled[i] * enc_.scale[i]);
    args.insert(args.end(), u.begin(), u.end());
    std::vector<Polynomial> out;
    for (int i = 0; i < n_; ++i) {
      try {
        out.push_back((p_.system.polynomials()[i].Compose(args) * (1.0 / enc_.scale[i])).Trimmed());
      } catch (const DegreeOverflowError& e) {
        throw SosDegreeError(label, e.what());
      }
    }
    return out;
  }

  void BuildMaps() {
    // Controller and closed loop in the y ring.
    std::vector<Polynomial> y;
    for (int i = 0; i < n_; ++i) y.push_back(Polynomial::Variable(n_, i));
    const auto up = UpX(n_);
    for (const auto& gp : p_.controller->polynomials()) gy_.push_back(gp.Compose(up).Trimmed());
    const std::vector<Polynomial> fc = Step(y, gy_, "closed loop");
    std::vector<Polynomial> zero_u(m_, Polynomial(n_));
    if (!aug_) {
      closed_ = fc;
      open_ = Step(y, zero_u, "open loop");
      return;
    }
    // Ring (y, w) with u = s_u w.
    for (int i = 0; i < n_; ++i) closed_.push_back(fc[i].Embed(nv_));
    for (int j = 0; j < m_; ++j) closed_.push_back(gy_[j].Embed(nv_) * (1.0 / enc_.scale[n_ + j]));
    std::vector<Polynomial> yw, u;
    for (int i = 0; i < n_; ++i) yw.push_back(Polynomial::Variable(nv_, i));
    for (int j = 0; j < m_; ++j) u.push_back(Polynomial::Variable(nv_, n_ + j) * enc_.scale[n_ + j]);
    open_ = Step(yw, u, "open loop");
    for (int j = 0; j < m_; ++j) open_.push_back(Polynomial::Variable(nv_, n_ + j));
    // Initial states carry u = g(x).
    for (int i = 0; i < n_; ++i) init_map_.push_back(y[i]);
    for (int j = 0; j < m_; ++j) init_map_.push_back(gy_[j] * (1.0 / enc_.scale[n_ + j]));
  }

  // One more open-loop step after `maps` (non-augmented ring).
  std::vector<Polynomial> NextOpen(const std::vector<Polynomial>& maps,
                                   const std::string& label) const {
    if (v_.strategy == Strategy::kZero) {
      return Step(maps, std::vector<Polynomial>(m_, Polynomial(n_)), label);
    }
    return Step(maps, gy_, label);
  }

  int MultiplierDegree(const Polynomial& g) const {
    if (p_.sos.multiplier_degree >= 0) return p_.sos.multiplier_degree;
    int d = std::max(0, p_.sos.n_p - g.degree());
    return d + d % 2;
  }

  GramBlock NewGram(const std::string& name, int ring, int half_degree) {
    GramBlock b;
    b.half_degree = half_degree;
    b.Q = enc_.problem.AddSymmetric(name, MonomialBasis::Get(ring, half_degree).size());
    return b;
  }

  void AddCondition(const std::string& label, PolyExpr target,
                    const std::vector<Polynomial>& constraints, int ring) {
    SosCondition c;
    c.label = label;
    c.num_vars = ring;
    c.constraints = constraints;
    PolyExpr rest = target;
    int degree = DegreeOf(target);
    for (size_t j = 0; j < constraints.size(); ++j) {
      const int md = MultiplierDegree(constraints[j]);
      GramBlock mult = NewGram(label + " sigma" + std::to_string(j), ring, md / 2);
      Accumulate(&rest, Times(GramExpr(mult, ring), constraints[j]), -1.0);
      degree = std::max(degree, md + constraints[j].degree());
      enc_.problem.AddPsd(label + " sigma" + std::to_string(j), AffineMatrix::Of(mult.Q));
      c.multipliers.push_back(mult);
    }
    const int half = (degree + 1) / 2;
    c.gram = NewGram(label + " gram", ring, half);
    for (int id : c.gram.Q.ids()) enc_.problem.PreferPivot(Var{id});
    const PolyExpr gram = GramExpr(c.gram, ring);
    for (const auto& [e, lin] : rest) {
      if (Trivial(lin)) continue;
      if (gram.find(e) == gram.end()) {
        throw SosDegreeError(label, "monomial " + MonomialToString(e) +
                                        " has no Gram pair at basis degree " +
                                        std::to_string(half));
      }
    }
    for (const auto& [e, g] : gram) {
      LinExpr eq = g * -1.0;
      auto it = rest.find(e);
      if (it != rest.end()) eq += it->second;
      enc_.problem.AddEquality(label + " [" + MonomialToString(e) + "]", std::move(eq));
    }
    enc_.problem.AddPsd(label, AffineMatrix::Of(c.gram.Q));
    c.target = std::move(target);
    enc_.conditions.push_back(std::move(c));
  }

  const GbfVariant v_;
  const Problem& p_;
  const WhGraph& g_;
  const SosSettings s_;
  int n_ = 0;
  int m_ = 0;
  int nv_ = 0;
  bool aug_ = false;
  std::vector<Polynomial> gy_;
  std::vector<Polynomial> closed_;
  std::vector<Polynomial> open_;
  std::vector<Polynomial> init_map_;
  SosEncoding enc_;
};

Eigen::MatrixXd GramValue(const SymMatVar& Q, const Eigen::VectorXd& y) {
  Eigen::MatrixXd M(Q.dim(), Q.dim());
  for (int i = 0; i < Q.dim(); ++i) {
    for (int j = i; j < Q.dim(); ++j) M(i, j) = M(j, i) = y[Q(i, j).id];
  }
  return M;
}

std::map<Exponent, double> Numeric(const PolyExpr& p, const Eigen::VectorXd& y) {
  std::map<Exponent, double> out;
  for (const auto& [e, lin] : p) out[e] += lin.Evaluate(y);
  return out;
}

}  // namespace

SosEncoding EncodeSos(const GbfVariant& variant, const Problem& problem, const WhGraph& graph,
                      const SosSettings& settings) {
  return Encoder(variant, problem, graph, settings).Run();
}

GramCheck CheckGram(const SosEncoding& enc, const Eigen::VectorXd& y) {
  GramCheck r;
  r.min_eig = conic::kInf;
  for (const auto& c : enc.conditions) {
    const int nv = c.num_vars;
    std::map<Exponent, double> res = Numeric(c.target, y);
    for (size_t j = 0; j < c.multipliers.size(); ++j) {
      const Eigen::MatrixXd S = GramValue(c.multipliers[j].Q, y);
      r.min_eig = std::min(r.min_eig, conic::EigMin(S));
      const auto sg = Numeric(Times(GramExpr(c.multipliers[j], nv), c.constraints[j]), y);
      for (const auto& [e, v] : sg) res[e] -= v;
    }
    const Eigen::MatrixXd G = GramValue(c.gram.Q, y);
    const double ge = conic::EigMin(G);
    if (ge < r.min_eig) r.worst_label = c.label;
    r.min_eig = std::min(r.min_eig, ge);
    for (const auto& [e, v] : Numeric(GramExpr(c.gram, nv), y)) res[e] -= v;
    for (const auto& [e, v] : res) {
      r.coefficient_residual = std::max(r.coefficient_residual, std::abs(v));
    }
  }
  if (!std::isfinite(r.min_eig)) r.min_eig = 0.0;
  return r;
}

PolyGbf ExtractPolyGbf(const SosEncoding& enc, const Eigen::VectorXd& y, const WhGraph& graph) {
  PolyGbf c;
  c.variant = enc.variant;
  c.graph = graph.Id();
  c.n_p = enc.n_p;
  c.num_vars = enc.num_vars;
  c.state_dim = enc.state_dim;
  const MonomialBasis& pb = MonomialBasis::Get(enc.num_vars, enc.n_p);
  std::vector<Polynomial> down;
  for (int i = 0; i < enc.num_vars; ++i) {
    down.push_back(Polynomial::Variable(enc.num_vars, i) * (1.0 / enc.scale[i]));
  }
  for (size_t v = 0; v < enc.psi.size(); ++v) {
    std::vector<std::pair<Exponent, double>> terms;
    for (int k = 0; k < pb.size(); ++k) terms.emplace_back(pb[k], y[enc.psi[v][k].id]);
    c.psi.push_back(Polynomial::FromTerms(enc.num_vars, terms).Compose(down).Trimmed());
    c.eps.push_back(std::max(0.0, y[enc.eps[v].id]));
  }
  const GramCheck g = CheckGram(enc, y);
  c.gram_residual = g.coefficient_residual;
  c.gram_min_eig = g.min_eig;
  return c;
}

SosReport VerifySos(const GbfVariant& variant, const Problem& problem, const WhGraph& graph,
                    const SosSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  SosReport r;
  r.variant = variant;
  r.graph = graph.Id();
  SosEncoding enc = EncodeSos(variant, problem, graph, settings);
  r.conditions = static_cast<int>(enc.conditions.size());
  conic::SolveOptions so;
  so.feas_tol = settings.feas_tol;
  const conic::SolveOutcome out = conic::Solve(enc.problem, so);
  r.margin = out.margin;
  r.iterations = out.iterations;
  std::ostringstream os;
  os << "SOS " << conic::ToString(out.status) << " (margin " << out.margin << ", bound "
     << out.margin_bound << ")";
  if (out.status == conic::SolveStatus::kFeasible) {
    PolyGbf cert = ExtractPolyGbf(enc, out.assignment, graph);
    r.gram_residual = cert.gram_residual;
    r.gram_min_eig = cert.gram_min_eig;
    if (cert.gram_residual <= settings.coefficient_tol &&
        cert.gram_min_eig >= -settings.gram_eig_tol) {
      r.status = CertStatus::kCertified;
      r.certificate = std::move(cert);
    } else {
      os << "; Gram re-check failed (coefficient residual " << cert.gram_residual
         << ", min eigenvalue " << cert.gram_min_eig << ")";
    }
  } else if (out.status == conic::SolveStatus::kInfeasible) {
    r.status = CertStatus::kInfeasible;
    os << ": the encoding is infeasible at this degree";
  } else {
    os << ": " << out.diagnostic;
  }
  r.detail = os.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string SosReport::ToJson() const {
  Json j;
  j["status"] = whcert::ToString(status);
  j["variant"] = variant.ToString();
  j["graph"] = graph;
  j["margin"] = std::isfinite(margin) ? Json(margin) : Json(nullptr);
  j["gram_residual"] = gram_residual;
  j["gram_min_eig"] = gram_min_eig;
  j["conditions"] = conditions;
  j["iterations"] = iterations;
  j["seconds"] = seconds;
  j["detail"] = detail;
  if (certificate) j["certificate"] = Json::parse(whcert::ToJson(*certificate));
  return j.dump(2);
}

}  // namespace whcert
