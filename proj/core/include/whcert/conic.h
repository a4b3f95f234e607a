#pragma once

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace whcert {
namespace conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Var {
  int id = -1;
};

// Sparse affine scalar expression sum c_i y_i + constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT
  LinExpr(Var v) { terms_[v.id] = 1.0; }              // NOLINT

  const std::map<int, double>& terms() const { return terms_; }
  double constant() const { return constant_; }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
  LinExpr operator+(const LinExpr& o) const { LinExpr r = *this; return r += o; }
  LinExpr operator-(const LinExpr& o) const { LinExpr r = *this; return r -= o; }
  LinExpr operator*(double s) const { LinExpr r = *this; return r *= s; }
  LinExpr operator-() const { return *this * -1.0; }

  void AddTerm(int id, double c);
  double Evaluate(const Eigen::VectorXd& y) const;

 private:
  std::map<int, double> terms_;
  double constant_ = 0.0;
};

inline LinExpr operator*(double s, const LinExpr& e) { return e * s; }
inline LinExpr operator*(double s, Var v) { return LinExpr(v) * s; }

// Symmetric matrix variable; entries (i, j) and (j, i) share one scalar.
class SymMatVar {
 public:
  SymMatVar() = default;
  SymMatVar(int dim, std::vector<int> ids) : dim_(dim), ids_(std::move(ids)) {}

  int dim() const { return dim_; }
  Var operator()(int i, int j) const;
  const std::vector<int>& ids() const { return ids_; }

 private:
  int dim_ = 0;
  std::vector<int> ids_;  // upper triangle, row-major
};

// Affine matrix expression C + sum_i y_i A_i of fixed shape.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols);
  static AffineMatrix Constant(const Eigen::MatrixXd& C);
  static AffineMatrix Of(const SymMatVar& P);
  static AffineMatrix Scaled(Var v, const Eigen::MatrixXd& M);
  static AffineMatrix Scaled(const LinExpr& e, const Eigen::MatrixXd& M);
  static AffineMatrix Identity(int dim, const LinExpr& scale);
  // [[a, b], [c, d]] with matching shapes.
  static AffineMatrix Blocks(const AffineMatrix& a, const AffineMatrix& b,
                             const AffineMatrix& c, const AffineMatrix& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  AffineMatrix& operator+=(const AffineMatrix& o);
  AffineMatrix& operator-=(const AffineMatrix& o);
  AffineMatrix& operator*=(double s);
  AffineMatrix operator+(const AffineMatrix& o) const { AffineMatrix r = *this; return r += o; }
  AffineMatrix operator-(const AffineMatrix& o) const { AffineMatrix r = *this; return r -= o; }
  AffineMatrix operator*(double s) const { AffineMatrix r = *this; return r *= s; }
  AffineMatrix operator-() const { return *this * -1.0; }

  AffineMatrix Transpose() const;
  AffineMatrix LeftMultiply(const Eigen::MatrixXd& L) const;   // L * this
  AffineMatrix RightMultiply(const Eigen::MatrixXd& R) const;  // this * R
  // F' * this * F.
  AffineMatrix Congruence(const Eigen::MatrixXd& F) const;

  Eigen::MatrixXd Evaluate(const Eigen::VectorXd& y) const;

  void AddTerm(int id, const Eigen::MatrixXd& M);

 private:
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

struct VariableInfo {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  bool preferred_pivot = false;
};

struct PsdConstraint {
  std::string label;
  AffineMatrix expr;  // required >= 0
  // Margin constraints take part in the phase-I margin; normalization and
  // bound blocks do not.
  bool margin = true;
};

struct EqualityConstraint {
  std::string label;
  LinExpr expr;  // required == 0
};

// Scalar and symmetric-matrix variables, affine PSD constraints, linear
// equalities and an optional linear objective (minimized).
class ConicProblem {
 public:
  Var AddScalar(std::string name, double lower = -kInf, double upper = kInf);
  SymMatVar AddSymmetric(std::string name, int dim);

  void AddPsd(std::string label, AffineMatrix expr, bool margin = true);
  void AddNsd(std::string label, const AffineMatrix& expr, bool margin = true) {
    AddPsd(std::move(label), -expr, margin);
  }
  // expr >= 0 as a 1x1 block.
  void AddNonnegative(std::string label, const LinExpr& expr, bool margin = false);
  void AddEquality(std::string label, LinExpr expr);
  void SetObjective(LinExpr minimize);
  // Equality elimination picks marked variables as pivots first.
  void PreferPivot(Var v) { vars_.at(v.id).preferred_pivot = true; }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  const std::vector<VariableInfo>& variables() const { return vars_; }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }
  const std::vector<EqualityConstraint>& equalities() const { return eqs_; }
  bool has_objective() const { return has_objective_; }
  const LinExpr& objective() const { return objective_; }
  const std::vector<std::pair<std::string, SymMatVar>>& matrices() const { return mats_; }

  // Throws std::invalid_argument naming the first malformed item.
  void Validate() const;

  std::string ToJson() const;
  static ConicProblem FromJson(std::string_view text);

 private:
  std::vector<VariableInfo> vars_;
  std::vector<std::pair<std::string, SymMatVar>> mats_;
  std::vector<PsdConstraint> psd_;
  std::vector<EqualityConstraint> eqs_;
  LinExpr objective_;
  bool has_objective_ = false;
};

enum class SolveStatus { kFeasible, kInfeasible, kUnknown };
std::string ToString(SolveStatus s);

struct SolveOptions {
  double feas_tol = 1e-7;
  // Bound applied to variables declared without one.
  double free_bound = 1e4;
  // Upper cap on the phase-I margin.
  double margin_cap = 1.0;
  int max_iterations = 150;
  double tolerance = 1e-10;
};

struct ConstraintResidual {
  std::string label;
  double min_eig = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kUnknown;
  // All declared variables; meaningful when Feasible.
  Eigen::VectorXd assignment;
  // Phase-I optimum: largest t with every margin block >= t I.
  double margin = -kInf;
  // Upper bound on the margin from the primal side.
  double margin_bound = kInf;
  double objective = 0.0;
  std::vector<ConstraintResidual> residuals;
  double max_violation = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  std::string diagnostic;

  double value(Var v) const { return assignment[v.id]; }
  Eigen::MatrixXd value(const SymMatVar& P) const;
};

SolveOutcome Solve(const ConicProblem& p, const SolveOptions& options = {});

// Smallest eigenvalue of a symmetric matrix; rejects asymmetry above 1e-12
// times max(1, max |a_ij|).
double EigMin(const Eigen::MatrixXd& A);

}  // namespace conic
}  // namespace whcert
