#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "whcert/certificate.h"
#include "whcert/conic.h"
#include "whcert/problem.h"
#include "whcert/wh_graph.h"

namespace whcert {

enum class CertStatus { kCertified, kInfeasible, kUnknown };
std::string ToString(CertStatus s);

struct LmiOptions {
  // Floor on eps_v for GBF and 1GBF; dGBF and 1dGBF use eps_v >= 0.
  double eps_min = 1e-3;
  // -rho I <= P_v <= rho I.
  double rho = 100.0;
  // Margin for the strict unsafe condition.
  double eta = 1e-6;
  double multiplier_bound = 1e4;
  double feas_tol = 1e-7;
  // Independent re-check threshold on condition min eigenvalues.
  double residual_tol = 1e-6;
  // Shared-gamma sweep for the implication variants.
  std::vector<double> gamma_grid = DefaultGammaGrid();
  int alternation_rounds = 30;
  // Synthesis.
  int synthesis_rounds = 10;
  double gain_bound = 100.0;
  double p1_floor = 1e-3;

  // 20 log-spaced points from 2^-6 to 2^3.
  static std::vector<double> DefaultGammaGrid();
};

// Reads a schedule JSON ({"gamma_grid": [...], "alternation_rounds": 30,
// ...}); unknown keys are rejected. Throws ConfigError.
LmiOptions ParseSchedule(std::string_view json_text, LmiOptions base = {});

// One matrix inequality of a GBF variant over z = [state; 1]:
//   init     -F' P_v F - sum lambda_j S_j >= 0
//   unsafe    P_v - sum lambda_j S_j - eta I >= 0
//   dynamic   gamma (P_v + a eps_v E) - F' P_w F - b eps_w E - sum lambda_j S_j >= 0
// with gamma = 1 for decrease variants and E = e_last e_last'.
struct LmiCondition {
  enum class Kind { kInit, kUnsafe, kDynamic };
  Kind kind = Kind::kDynamic;
  std::string label;
  int from = 0;
  int to = 0;
  Eigen::MatrixXd F;
  double a = 0.0;
  double b = 0.0;
  bool implication = false;
  std::vector<Eigen::MatrixXd> S;
  // Graph edge and loss count for edge conditions, -1 otherwise.
  int edge = -1;
  int m = -1;
};

// Condition list for a linear system with quadratic sets. Throws
// std::invalid_argument on polynomial dynamics, non-quadratic sets, or a
// hold 1-step variant without a bounded U.
std::vector<LmiCondition> BuildConditions(const GbfVariant& variant, const Problem& problem,
                                          const Eigen::MatrixXd& K, const WhGraph& graph);

// Homogenized map of one closed-loop step followed by m open-loop steps,
// over x or over (x, u_held) for augmented variants.
Eigen::MatrixXd SuccessorMatrix(const GbfVariant& variant, const Problem& problem,
                                const Eigen::MatrixXd& K, int m);
// Homogenized single open-loop step.
Eigen::MatrixXd OpenLoopMatrix(const GbfVariant& variant, const Problem& problem);

// Conic problem with P_v, eps_v and multipliers free and gamma fixed (1 for
// decrease variants). Multiplier and gamma names follow "<label> lambda<j>"
// and "<label> gamma".
conic::ConicProblem Encode(const GbfVariant& variant, const Problem& problem,
                           const Eigen::MatrixXd& K, const WhGraph& graph,
                           const LmiOptions& options = {}, double gamma = 1.0);

// Matrix of one condition evaluated at the certificate's values.
Eigen::MatrixXd ConditionMatrix(const LmiCondition& c, const GbfCertificate& cert);

// Rebuilds every condition from the certificate (its K, P, eps and
// multipliers) and returns min eigenvalues.
std::vector<ResidualEntry> RecheckResiduals(const GbfCertificate& cert, const Problem& problem,
                                            const WhGraph& graph);

struct CertReport {
  CertStatus status = CertStatus::kUnknown;
  GbfVariant variant;
  std::string graph;
  Eigen::MatrixXd K;
  std::optional<GbfCertificate> certificate;
  // Best iterate when not certified.
  std::optional<GbfCertificate> best_iterate;
  std::vector<ResidualEntry> residuals;
  double margin = -conic::kInf;
  double gamma = 0.0;
  int solves = 0;
  int iterations = 0;
  double seconds = 0.0;
  std::string detail;

  std::string ToJson() const;
};

// Extra acceptance step run on a candidate certificate before it is
// reported as Certified.
using ValidationHook = std::function<bool(const GbfCertificate&, std::string*)>;

CertReport Verify(const GbfVariant& variant, const Problem& problem, const Eigen::MatrixXd& K,
                  const WhGraph& graph, const LmiOptions& options = {},
                  const ValidationHook& hook = {});

struct SynthesisResult {
  Eigen::MatrixXd K;
  CertReport report;
  int rounds = 0;
  std::vector<Eigen::MatrixXd> gain_history;
};

// GBF synthesis by alternating the P-step and the Schur-complement K-step.
SynthesisResult Synthesize(const Problem& problem, const WhGraph& graph,
                           const Eigen::MatrixXd& K_init, const LmiOptions& options = {},
                           const ValidationHook& hook = {});

}  // namespace whcert
