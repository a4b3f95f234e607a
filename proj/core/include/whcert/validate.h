#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whcert/certificate.h"
#include "whcert/conic.h"
#include "whcert/problem.h"
#include "whcert/wh_graph.h"

namespace whcert {

struct ValidateOptions {
  int samples = 100000;
  uint64_t seed = 1;
  // Allowed excess on non-strict conditions.
  double slack = 1e-6;
  // Conic re-check thresholds.
  double residual_tol = 1e-6;
  double gram_residual_tol = 1e-9;
  double gram_eig_tol = 1e-7;
};

struct ConditionCheck {
  std::string label;
  bool strict = false;
  long long samples = 0;
  // Largest amount by which the condition fails (<= 0 when it holds with
  // room to spare).
  double max_violation = -conic::kInf;
  long long violations = 0;
  std::optional<Eigen::VectorXd> worst_point;
  bool passed = true;
};

struct ValidationReport {
  std::string variant;
  std::string graph;
  int samples = 0;
  std::vector<ConditionCheck> conditions;
  // Residual re-check: LMI min eigenvalues, or the stored Gram data.
  double residual_min_eig = 0.0;
  double gram_residual = 0.0;
  bool residuals_ok = true;
  double max_violation = -conic::kInf;
  bool passed = true;
  double seconds = 0.0;

  std::string ToJson() const;
};

// Samples X0, Xu and X (with U for augmented variants) and evaluates every
// condition of the certificate's variant with the plant and controller
// maps. Throws std::invalid_argument on a certificate that does not fit the
// problem or graph.
ValidationReport ValidateCertificate(const Certificate& cert, const Problem& problem,
                                     const WhGraph& graph, const ValidateOptions& options = {});

struct ContainmentReport {
  int samples = 0;
  // Per node: samples with inner <= 0 and outer > 0.
  std::vector<long long> escapes;
  std::vector<long long> inner_count;
  bool passed = true;

  std::string ToJson() const;
};

// {Psi_inner,v <= 0} inside {Psi_outer,v <= 0} on X samples for the given
// nodes.
ContainmentReport CheckContainment(const Certificate& inner, const Certificate& outer,
                                   const Problem& problem, const std::vector<int>& nodes,
                                   int samples, uint64_t seed = 1);

struct GridAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;
};

// "x1:-1:1:50,x2:-1:1:50". Throws std::invalid_argument.
std::vector<GridAxis> ParseGrid(std::string_view spec);

// CSV with one column per axis, then psi and sign (-1, 0, 1). Throws if the
// grid dimension differs from the barrier dimension.
std::string LevelsetCsv(const Certificate& cert, int node, const std::vector<GridAxis>& grid);

}  // namespace whcert
