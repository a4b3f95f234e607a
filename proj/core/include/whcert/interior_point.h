#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace whcert {
namespace conic {

// One diagonal block of Z = C - sum_i y_i A_i.
struct SdpBlock {
  int dim = 0;
  Eigen::MatrixXd C;
  std::vector<int> vars;            // ascending
  std::vector<Eigen::MatrixXd> A;   // A[k] multiplies y[vars[k]]
};

// max b'y  s.t.  C_k - sum_i y_i A_ik >= 0 for every block k.
// Primal: min sum <C_k, X_k>  s.t.  sum_k <A_ik, X_k> = b_i, X_k >= 0.
struct SdpProblem {
  int m = 0;
  Eigen::VectorXd b;
  std::vector<SdpBlock> blocks;
};

struct IpmOptions {
  int max_iterations = 150;
  double tolerance = 1e-10;
};

struct IpmResult {
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> Z;
  double primal_objective = 0.0;  // <C, X>
  double dual_objective = 0.0;    // b'y
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// Infeasible-start primal-dual path following with the HKM direction and a
// Mehrotra predictor-corrector step.
IpmResult SolveSdp(const SdpProblem& problem, const IpmOptions& options = {});

}  // namespace conic
}  // namespace whcert
