#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whcert/cert_lmi.h"
#include "whcert/certificate.h"
#include "whcert/conic.h"
#include "whcert/polynomial.h"
#include "whcert/problem.h"
#include "whcert/wh_graph.h"

namespace whcert {

// Bad degree configuration: composition overflow, odd multiplier degree or a
// target that the Gram basis cannot match. label() names the condition.
class SosDegreeError : public std::invalid_argument {
 public:
  SosDegreeError(std::string label, const std::string& message)
      : std::invalid_argument(label + ": " + message), label_(std::move(label)) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

struct SosSettings {
  // |coefficient| bound on Psi_v in scaled coordinates, and eps_v <= rho.
  double rho = 100.0;
  double feas_tol = 1e-7;
  // Acceptance thresholds for the Gram re-check.
  double coefficient_tol = 1e-9;
  double gram_eig_tol = 1e-7;
};

// Polynomial whose coefficients are affine in the decision variables.
using PolyExpr = std::map<Exponent, conic::LinExpr>;

// Gram polynomial z' Q z over MonomialBasis(num_vars, half_degree).
struct GramBlock {
  conic::SymMatVar Q;
  int half_degree = 0;
};

// target - sum_j sigma_j g_j = z' Q z.
struct SosCondition {
  std::string label;
  int num_vars = 0;
  PolyExpr target;
  std::vector<GramBlock> multipliers;
  std::vector<Polynomial> constraints;
  GramBlock gram;
};

struct SosEncoding {
  conic::ConicProblem problem;
  GbfVariant variant;
  // Ring: x (and held u for augmented variants), scaled by `scale`.
  int num_vars = 0;
  int state_dim = 0;
  Eigen::VectorXd scale;
  int n_p = 0;
  std::vector<std::vector<conic::Var>> psi;  // per node over MonomialBasis(num_vars, n_p)
  std::vector<conic::Var> eps;
  std::vector<SosCondition> conditions;
};

// Decrease-form variants only (dgbf, 1dgbf). Throws std::invalid_argument
// for implication variants or a missing controller, SosDegreeError for
// degree problems.
SosEncoding EncodeSos(const GbfVariant& variant, const Problem& problem, const WhGraph& graph,
                      const SosSettings& settings = {});

struct GramCheck {
  // Largest coefficient mismatch of target - sum sigma g - z'Qz.
  double coefficient_residual = 0.0;
  // Smallest eigenvalue over all Gram matrices.
  double min_eig = 0.0;
  std::string worst_label;
};

GramCheck CheckGram(const SosEncoding& enc, const Eigen::VectorXd& assignment);

// Psi_v in original coordinates from a solved encoding.
PolyGbf ExtractPolyGbf(const SosEncoding& enc, const Eigen::VectorXd& assignment,
                       const WhGraph& graph);

struct SosReport {
  CertStatus status = CertStatus::kUnknown;
  GbfVariant variant;
  std::string graph;
  std::optional<PolyGbf> certificate;
  double margin = -conic::kInf;
  double gram_residual = 0.0;
  double gram_min_eig = 0.0;
  int conditions = 0;
  int iterations = 0;
  double seconds = 0.0;
  std::string detail;

  std::string ToJson() const;
};

SosReport VerifySos(const GbfVariant& variant, const Problem& problem, const WhGraph& graph,
                    const SosSettings& settings = {});

}  // namespace whcert
