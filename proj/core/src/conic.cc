#include "whcert/conic.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "whcert/interior_point.h"

namespace whcert {
namespace conic {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [id, c] : o.terms_) AddTerm(id, c);
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [id, c] : o.terms_) AddTerm(id, -c);
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [id, c] : terms_) c *= s;
  constant_ *= s;
  return *this;
}

void LinExpr::AddTerm(int id, double c) {
  if (id < 0) throw std::invalid_argument("LinExpr: undeclared variable");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(id, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double LinExpr::Evaluate(const Eigen::VectorXd& y) const {
  double v = constant_;
  for (const auto& [id, c] : terms_) v += c * y[id];
  return v;
}

Var SymMatVar::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= dim_) throw std::out_of_range("SymMatVar index");
  // Row-major upper triangle offset.
  const int offset = i * dim_ - i * (i - 1) / 2 + (j - i);
  return Var{ids_[offset]};
}

AffineMatrix::AffineMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(Eigen::MatrixXd::Zero(rows, cols)) {}

AffineMatrix AffineMatrix::Constant(const Eigen::MatrixXd& C) {
  AffineMatrix r(static_cast<int>(C.rows()), static_cast<int>(C.cols()));
  r.constant_ = C;
  return r;
}

AffineMatrix AffineMatrix::Of(const SymMatVar& P) {
  const int n = P.dim();
  AffineMatrix r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      r.AddTerm(P(i, j).id, E);
    }
  }
  return r;
}

AffineMatrix AffineMatrix::Scaled(Var v, const Eigen::MatrixXd& M) {
  AffineMatrix r(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  r.AddTerm(v.id, M);
  return r;
}

AffineMatrix AffineMatrix::Scaled(const LinExpr& e, const Eigen::MatrixXd& M) {
  AffineMatrix r(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  r.constant_ = e.constant() * M;
  for (const auto& [id, c] : e.terms()) r.AddTerm(id, c * M);
  return r;
}

AffineMatrix AffineMatrix::Identity(int dim, const LinExpr& scale) {
  return Scaled(scale, Eigen::MatrixXd::Identity(dim, dim));
}

AffineMatrix AffineMatrix::Blocks(const AffineMatrix& a, const AffineMatrix& b,
                                  const AffineMatrix& c, const AffineMatrix& d) {
  if (a.rows_ != b.rows_ || c.rows_ != d.rows_ || a.cols_ != c.cols_ || b.cols_ != d.cols_) {
    throw std::invalid_argument("AffineMatrix::Blocks: shape mismatch");
  }
  const int r0 = a.rows_, c0 = a.cols_;
  AffineMatrix r(r0 + c.rows_, c0 + b.cols_);
  auto place = [&](const AffineMatrix& src, int ro, int co) {
    r.constant_.block(ro, co, src.rows_, src.cols_) = src.constant_;
    for (const auto& [id, M] : src.terms_) {
      Eigen::MatrixXd full = Eigen::MatrixXd::Zero(r.rows_, r.cols_);
      full.block(ro, co, src.rows_, src.cols_) = M;
      r.AddTerm(id, full);
    }
  };
  place(a, 0, 0);
  place(b, 0, c0);
  place(c, r0, 0);
  place(d, r0, c0);
  return r;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) {
    throw std::invalid_argument("AffineMatrix: shape mismatch in +");
  }
  constant_ += o.constant_;
  for (const auto& [id, M] : o.terms_) AddTerm(id, M);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) {
    throw std::invalid_argument("AffineMatrix: shape mismatch in -");
  }
  constant_ -= o.constant_;
  for (const auto& [id, M] : o.terms_) AddTerm(id, -M);
  return *this;
}

AffineMatrix& AffineMatrix::operator*=(double s) {
  constant_ *= s;
  for (auto& [id, M] : terms_) M *= s;
  return *this;
}

AffineMatrix AffineMatrix::Transpose() const {
  AffineMatrix r(cols_, rows_);
  r.constant_ = constant_.transpose();
  for (const auto& [id, M] : terms_) r.terms_[id] = M.transpose();
  return r;
}

AffineMatrix AffineMatrix::LeftMultiply(const Eigen::MatrixXd& L) const {
  if (L.cols() != rows_) throw std::invalid_argument("AffineMatrix: bad left factor");
  AffineMatrix r(static_cast<int>(L.rows()), cols_);
  r.constant_ = L * constant_;
  for (const auto& [id, M] : terms_) r.terms_[id] = L * M;
  return r;
}

AffineMatrix AffineMatrix::RightMultiply(const Eigen::MatrixXd& R) const {
  if (R.rows() != cols_) throw std::invalid_argument("AffineMatrix: bad right factor");
  AffineMatrix r(rows_, static_cast<int>(R.cols()));
  r.constant_ = constant_ * R;
  for (const auto& [id, M] : terms_) r.terms_[id] = M * R;
  return r;
}

AffineMatrix AffineMatrix::Congruence(const Eigen::MatrixXd& F) const {
  return LeftMultiply(F.transpose()).RightMultiply(F);
}

Eigen::MatrixXd AffineMatrix::Evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd v = constant_;
  for (const auto& [id, M] : terms_) v += y[id] * M;
  return v;
}

void AffineMatrix::AddTerm(int id, const Eigen::MatrixXd& M) {
  if (id < 0) throw std::invalid_argument("AffineMatrix: undeclared variable");
  if (M.rows() != rows_ || M.cols() != cols_) {
    throw std::invalid_argument("AffineMatrix: term shape mismatch");
  }
  auto it = terms_.find(id);
  if (it == terms_.end()) {
    terms_.emplace(id, M);
  } else {
    it->second += M;
  }
}

Var ConicProblem::AddScalar(std::string name, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("AddScalar: lower > upper for " + name);
  vars_.push_back({std::move(name), lower, upper, false});
  return Var{static_cast<int>(vars_.size()) - 1};
}

SymMatVar ConicProblem::AddSymmetric(std::string name, int dim) {
  if (dim < 1) throw std::invalid_argument("AddSymmetric: dimension < 1");
  std::vector<int> ids;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      ids.push_back(AddScalar(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]").id);
    }
  }
  SymMatVar P(dim, std::move(ids));
  mats_.emplace_back(std::move(name), P);
  return P;
}

void ConicProblem::AddPsd(std::string label, AffineMatrix expr, bool margin) {
  psd_.push_back({std::move(label), std::move(expr), margin});
}

void ConicProblem::AddNonnegative(std::string label, const LinExpr& expr, bool margin) {
  AddPsd(std::move(label), AffineMatrix::Scaled(expr, Eigen::MatrixXd::Ones(1, 1)), margin);
}

void ConicProblem::AddEquality(std::string label, LinExpr expr) {
  eqs_.push_back({std::move(label), std::move(expr)});
}

void ConicProblem::SetObjective(LinExpr minimize) {
  objective_ = std::move(minimize);
  has_objective_ = true;
}

void ConicProblem::Validate() const {
  const int n = num_vars();
  auto check_ids = [&](const auto& terms, const std::string& where) {
    for (const auto& [id, unused] : terms) {
      if (id < 0 || id >= n) throw std::invalid_argument(where + ": undeclared variable");
    }
  };
  for (const auto& c : psd_) {
    if (c.expr.rows() != c.expr.cols() || c.expr.rows() == 0) {
      throw std::invalid_argument("constraint '" + c.label + "' is not square");
    }
    const double scale = std::max(1.0, c.expr.constant().cwiseAbs().maxCoeff());
    if ((c.expr.constant() - c.expr.constant().transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw std::invalid_argument("constraint '" + c.label + "' has an asymmetric constant");
    }
    for (const auto& [id, M] : c.expr.terms()) {
      const double s = std::max(1.0, M.cwiseAbs().maxCoeff());
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * s) {
        throw std::invalid_argument("constraint '" + c.label + "' has an asymmetric term");
      }
    }
    check_ids(c.expr.terms(), "constraint '" + c.label + "'");
  }
  for (const auto& e : eqs_) check_ids(e.expr.terms(), "equality '" + e.label + "'");
  check_ids(objective_.terms(), "objective");
}

std::string ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kFeasible: return "Feasible";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnknown: return "Unknown";
  }
  return "Unknown";
}

Eigen::MatrixXd SolveOutcome::value(const SymMatVar& P) const {
  Eigen::MatrixXd m(P.dim(), P.dim());
  for (int i = 0; i < P.dim(); ++i) {
    for (int j = 0; j < P.dim(); ++j) m(i, j) = assignment[P(i, j).id];
  }
  return m;
}

double EigMin(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument("EigMin: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("EigMin: matrix is not symmetric");
  }
  if (A.rows() == 1) return A(0, 0);
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

namespace {

// Original variables as affine functions of the reduced (free) variables.
struct Reduction {
  std::vector<int> reduced_index;       // original id -> reduced id or -1
  std::vector<int> free_ids;            // reduced id -> original id
  std::vector<std::optional<LinExpr>> substitution;  // over original ids
  std::string inconsistency;
};

LinExpr Substitute(const LinExpr& e, const std::vector<std::optional<LinExpr>>& subst) {
  LinExpr out(e.constant());
  for (const auto& [id, c] : e.terms()) {
    if (subst[id]) {
      LinExpr s = *subst[id];
      s *= c;
      out += s;
    } else {
      out.AddTerm(id, c);
    }
  }
  return out;
}

Reduction Eliminate(const ConicProblem& p) {
  const int n = p.num_vars();
  Reduction red;
  red.substitution.assign(n, std::nullopt);
  std::vector<int> order;
  for (const auto& eq : p.equalities()) {
    LinExpr e = Substitute(eq.expr, red.substitution);
    double max_abs = 0.0;
    for (const auto& [id, c] : e.terms()) max_abs = std::max(max_abs, std::abs(c));
    int pivot = -1;
    double best = 0.0;
    bool best_preferred = false;
    for (const auto& [id, c] : e.terms()) {
      const double a = std::abs(c);
      if (a <= 1e-12 * max_abs) continue;
      const bool pref = p.variables()[id].preferred_pivot;
      if (pivot < 0 || (pref && !best_preferred) || (pref == best_preferred && a > best)) {
        pivot = id;
        best = a;
        best_preferred = pref;
      }
    }
    if (pivot < 0) {
      if (std::abs(e.constant()) > 1e-9 * std::max(1.0, max_abs)) {
        red.inconsistency = "equality '" + eq.label + "' is inconsistent";
        return red;
      }
      continue;
    }
    const double a = e.terms().at(pivot);
    LinExpr sol(-e.constant() / a);
    for (const auto& [id, c] : e.terms()) {
      if (id != pivot) sol.AddTerm(id, -c / a);
    }
    // Keep earlier substitutions expressed in free variables only.
    for (int prev : order) {
      auto& s = *red.substitution[prev];
      auto it = s.terms().find(pivot);
      if (it == s.terms().end()) continue;
      const double c = it->second;
      LinExpr rest = s;
      rest.AddTerm(pivot, -c);
      LinExpr add = sol;
      add *= c;
      rest += add;
      s = rest;
    }
    red.substitution[pivot] = sol;
    order.push_back(pivot);
  }
  red.reduced_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!red.substitution[i]) {
      red.reduced_index[i] = static_cast<int>(red.free_ids.size());
      red.free_ids.push_back(i);
    }
  }
  return red;
}

// Block F(y) = C + sum A_i y_i over reduced variables.
struct ReducedMatrix {
  Eigen::MatrixXd C;
  std::map<int, Eigen::MatrixXd> terms;
};

ReducedMatrix Reduce(const AffineMatrix& m, const Reduction& red) {
  ReducedMatrix r;
  r.C = m.constant();
  auto add = [&](int rid, const Eigen::MatrixXd& M) {
    auto it = r.terms.find(rid);
    if (it == r.terms.end()) {
      r.terms.emplace(rid, M);
    } else {
      it->second += M;
    }
  };
  for (const auto& [id, M] : m.terms()) {
    if (!red.substitution[id]) {
      add(red.reduced_index[id], M);
      continue;
    }
    const LinExpr& s = *red.substitution[id];
    r.C += s.constant() * M;
    for (const auto& [fid, c] : s.terms()) add(red.reduced_index[fid], c * M);
  }
  return r;
}

ReducedMatrix Reduce(const LinExpr& e, const Reduction& red) {
  return Reduce(AffineMatrix::Scaled(e, Eigen::MatrixXd::Ones(1, 1)), red);
}

// Adds block F(y) - t_coeff * t I >= 0 to the SDP in IPM convention.
void AppendBlock(const ReducedMatrix& F, int t_index, double t_coeff, SdpProblem* sdp) {
  SdpBlock blk;
  blk.dim = static_cast<int>(F.C.rows());
  blk.C = 0.5 * (F.C + F.C.transpose());
  for (const auto& [rid, M] : F.terms) {
    if (M.cwiseAbs().maxCoeff() == 0.0) continue;
    blk.vars.push_back(rid);
    blk.A.push_back(-0.5 * (M + M.transpose()));
  }
  if (t_index >= 0 && t_coeff != 0.0) {
    blk.vars.push_back(t_index);
    blk.A.push_back(t_coeff * Eigen::MatrixXd::Identity(blk.dim, blk.dim));
  }
  sdp->blocks.push_back(std::move(blk));
}

struct Assembled {
  SdpProblem sdp;
  int t_index = -1;
};

Assembled Assemble(const ConicProblem& p, const Reduction& red, const SolveOptions& o,
                   bool phase_one) {
  Assembled out;
  const int nfree = static_cast<int>(red.free_ids.size());
  out.sdp.m = nfree + (phase_one ? 1 : 0);
  out.t_index = phase_one ? nfree : -1;
  out.sdp.b = Eigen::VectorXd::Zero(out.sdp.m);
  if (phase_one) {
    out.sdp.b[out.t_index] = 1.0;
  } else if (p.has_objective()) {
    const ReducedMatrix obj = Reduce(p.objective(), red);
    for (const auto& [rid, M] : obj.terms) out.sdp.b[rid] = -M(0, 0);
  }
  for (const auto& c : p.psd_constraints()) {
    AppendBlock(Reduce(c.expr, red), out.t_index, c.margin ? 1.0 : 0.0, &out.sdp);
  }
  for (int id = 0; id < p.num_vars(); ++id) {
    const auto& v = p.variables()[id];
    const bool free_var = !red.substitution[id];
    double lo = v.lower, hi = v.upper;
    if (free_var && !std::isfinite(lo)) lo = -o.free_bound;
    if (free_var && !std::isfinite(hi)) hi = o.free_bound;
    if (std::isfinite(lo)) {
      LinExpr e(Var{id});
      e -= LinExpr(lo);
      AppendBlock(Reduce(e, red), -1, 0.0, &out.sdp);
    }
    if (std::isfinite(hi)) {
      LinExpr e(hi);
      e -= LinExpr(Var{id});
      AppendBlock(Reduce(e, red), -1, 0.0, &out.sdp);
    }
  }
  if (phase_one) {
    SdpBlock cap;
    cap.dim = 1;
    cap.C = Eigen::MatrixXd::Constant(1, 1, o.margin_cap);
    cap.vars = {out.t_index};
    cap.A = {Eigen::MatrixXd::Ones(1, 1)};
    out.sdp.blocks.push_back(std::move(cap));
  }
  return out;
}

Eigen::VectorXd Expand(const Eigen::VectorXd& reduced, const Reduction& red, int n) {
  Eigen::VectorXd full(n);
  for (int rid = 0; rid < static_cast<int>(red.free_ids.size()); ++rid) {
    full[red.free_ids[rid]] = reduced[rid];
  }
  for (int id = 0; id < n; ++id) {
    if (!red.substitution[id]) continue;
    const LinExpr& s = *red.substitution[id];
    double v = s.constant();
    for (const auto& [fid, c] : s.terms()) v += c * reduced[red.reduced_index[fid]];
    full[id] = v;
  }
  return full;
}

void FillResiduals(const ConicProblem& p, SolveOutcome* out) {
  out->residuals.clear();
  double worst = 0.0;
  for (const auto& c : p.psd_constraints()) {
    Eigen::MatrixXd v = c.expr.Evaluate(out->assignment);
    v = (0.5 * (v + v.transpose())).eval();
    const double e = EigMin(v);
    out->residuals.push_back({c.label, e});
    worst = std::max(worst, -e);
  }
  for (int id = 0; id < p.num_vars(); ++id) {
    const auto& v = p.variables()[id];
    const double x = out->assignment[id];
    if (std::isfinite(v.lower)) worst = std::max(worst, v.lower - x);
    if (std::isfinite(v.upper)) worst = std::max(worst, x - v.upper);
  }
  for (const auto& e : p.equalities()) {
    worst = std::max(worst, std::abs(e.expr.Evaluate(out->assignment)));
  }
  out->max_violation = worst;
}

}  // namespace

SolveOutcome Solve(const ConicProblem& p, const SolveOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  auto finish = [&]() {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };
  p.Validate();
  const Reduction red = Eliminate(p);
  if (!red.inconsistency.empty()) {
    out.status = SolveStatus::kInfeasible;
    out.diagnostic = red.inconsistency;
    return finish();
  }
  const int n = p.num_vars();

  Assembled phase1 = Assemble(p, red, o, true);
  IpmOptions ipm;
  ipm.max_iterations = o.max_iterations;
  ipm.tolerance = o.tolerance;
  const IpmResult r = SolveSdp(phase1.sdp, ipm);
  out.iterations = r.iterations;
  out.primal_infeasibility = r.primal_infeasibility;
  out.dual_infeasibility = r.dual_infeasibility;
  out.margin = r.y.size() ? r.y[phase1.t_index] : -kInf;
  out.margin_bound = r.primal_objective;
  out.assignment = Expand(r.y.head(red.free_ids.size()), red, n);
  FillResiduals(p, &out);
  std::ostringstream diag;
  diag << "phase-I: " << r.message << ", t=" << out.margin << ", bound=" << out.margin_bound
       << ", pinf=" << r.primal_infeasibility << ", dinf=" << r.dual_infeasibility
       << ", iterations=" << r.iterations;

  const bool dual_ok = r.dual_infeasibility < 1e-7;
  const bool primal_ok = r.primal_infeasibility < 1e-7;
  if (dual_ok && out.margin >= -o.feas_tol && out.max_violation <= o.feas_tol) {
    out.status = SolveStatus::kFeasible;
  } else if (primal_ok && r.converged && out.margin_bound < -o.feas_tol) {
    out.status = SolveStatus::kInfeasible;
  } else if (primal_ok && dual_ok && out.margin_bound < -o.feas_tol &&
             out.margin < -o.feas_tol) {
    out.status = SolveStatus::kInfeasible;
  } else {
    out.status = SolveStatus::kUnknown;
  }
  if (out.status == SolveStatus::kFeasible && out.max_violation > o.feas_tol) {
    out.status = SolveStatus::kUnknown;
  }

  if (out.status == SolveStatus::kFeasible && p.has_objective()) {
    Assembled phase2 = Assemble(p, red, o, false);
    const IpmResult r2 = SolveSdp(phase2.sdp, ipm);
    SolveOutcome second = out;
    second.assignment = Expand(r2.y.head(red.free_ids.size()), red, n);
    FillResiduals(p, &second);
    diag << "; objective: " << r2.message << ", iterations=" << r2.iterations;
    out.iterations += r2.iterations;
    if (second.max_violation <= o.feas_tol) {
      out.assignment = second.assignment;
      out.residuals = second.residuals;
      out.max_violation = second.max_violation;
    } else {
      diag << " (objective solution rejected, violation " << second.max_violation << ")";
    }
  }
  if (p.has_objective()) out.objective = p.objective().Evaluate(out.assignment);
  out.diagnostic = diag.str();
  return finish();
}

namespace {

nlohmann::ordered_json MatrixToJson(const Eigen::MatrixXd& M) {
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < M.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j) {
  const int r = static_cast<int>(j.size());
  const int c = r ? static_cast<int>(j.at(0).size()) : 0;
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j.at(i).size()) != c) throw std::invalid_argument("ragged matrix");
    for (int k = 0; k < c; ++k) M(i, k) = j.at(i).at(k).get<double>();
  }
  return M;
}

nlohmann::ordered_json BoundToJson(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::ordered_json LinToJson(const LinExpr& e) {
  nlohmann::ordered_json j;
  j["constant"] = e.constant();
  auto terms = nlohmann::ordered_json::array();
  for (const auto& [id, c] : e.terms()) terms.push_back({id, c});
  j["terms"] = terms;
  return j;
}

LinExpr LinFromJson(const nlohmann::json& j) {
  LinExpr e(j.at("constant").get<double>());
  for (const auto& t : j.at("terms")) e.AddTerm(t.at(0).get<int>(), t.at(1).get<double>());
  return e;
}

}  // namespace

std::string ConicProblem::ToJson() const {
  nlohmann::ordered_json j;
  auto vars = nlohmann::ordered_json::array();
  for (const auto& v : vars_) {
    vars.push_back({{"name", v.name},
                    {"lower", BoundToJson(v.lower)},
                    {"upper", BoundToJson(v.upper)},
                    {"preferred_pivot", v.preferred_pivot}});
  }
  j["variables"] = vars;
  auto mats = nlohmann::ordered_json::array();
  for (const auto& [name, P] : mats_) {
    mats.push_back({{"name", name}, {"dim", P.dim()}, {"ids", P.ids()}});
  }
  j["matrices"] = mats;
  auto psd = nlohmann::ordered_json::array();
  for (const auto& c : psd_) {
    nlohmann::ordered_json item;
    item["label"] = c.label;
    item["margin"] = c.margin;
    item["constant"] = MatrixToJson(c.expr.constant());
    auto terms = nlohmann::ordered_json::array();
    for (const auto& [id, M] : c.expr.terms()) {
      terms.push_back({{"var", id}, {"coefficient", MatrixToJson(M)}});
    }
    item["terms"] = terms;
    psd.push_back(item);
  }
  j["psd"] = psd;
  auto eqs = nlohmann::ordered_json::array();
  for (const auto& e : eqs_) eqs.push_back({{"label", e.label}, {"expr", LinToJson(e.expr)}});
  j["equalities"] = eqs;
  j["objective"] = has_objective_ ? LinToJson(objective_) : nlohmann::ordered_json(nullptr);
  return j.dump(1);
}

ConicProblem ConicProblem::FromJson(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  ConicProblem p;
  for (const auto& v : j.at("variables")) {
    const double lo = v.at("lower").is_null() ? -kInf : v.at("lower").get<double>();
    const double hi = v.at("upper").is_null() ? kInf : v.at("upper").get<double>();
    Var id = p.AddScalar(v.at("name").get<std::string>(), lo, hi);
    if (v.value("preferred_pivot", false)) p.PreferPivot(id);
  }
  for (const auto& m : j.at("matrices")) {
    p.mats_.emplace_back(m.at("name").get<std::string>(),
                         SymMatVar(m.at("dim").get<int>(), m.at("ids").get<std::vector<int>>()));
  }
  for (const auto& c : j.at("psd")) {
    AffineMatrix expr = AffineMatrix::Constant(MatrixFromJson(c.at("constant")));
    for (const auto& t : c.at("terms")) {
      expr.AddTerm(t.at("var").get<int>(), MatrixFromJson(t.at("coefficient")));
    }
    p.AddPsd(c.at("label").get<std::string>(), std::move(expr), c.at("margin").get<bool>());
  }
  for (const auto& e : j.at("equalities")) {
    p.AddEquality(e.at("label").get<std::string>(), LinFromJson(e.at("expr")));
  }
  if (!j.at("objective").is_null()) p.SetObjective(LinFromJson(j.at("objective")));
  p.Validate();
  return p;
}

}  // namespace conic
}  // namespace whcert
