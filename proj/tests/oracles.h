#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Test-only reference implementations. Nothing here calls into whcert.
namespace whcert {
namespace testing {

// Window check written directly from the definition: every window of s
// consecutive slots, with all-success history before t = 0, holds at most
// s - r losses.
inline bool WindowOracle(const std::vector<int>& bits, int r, int s) {
  const int n = static_cast<int>(bits.size());
  for (int end = 0; end < n; ++end) {
    int losses = 0;
    for (int t = std::max(0, end - s + 1); t <= end; ++t) losses += bits[t] == 0;
    if (losses > s - r) return false;
  }
  return true;
}

inline std::vector<int> BitsOf(unsigned word, int len) {
  std::vector<int> b(len);
  for (int i = 0; i < len; ++i) b[i] = (word >> (len - 1 - i)) & 1;
  return b;
}

inline std::string BitString(const std::vector<int>& bits) {
  std::string s;
  for (int b : bits) s += b ? '1' : '0';
  return s;
}

// x(t+1) = A x + B u with u = K x on success, 0 (zero) or the last applied
// input (hold) on loss.
inline std::vector<Eigen::VectorXd> LinearRollout(const Eigen::MatrixXd& A,
                                                  const Eigen::MatrixXd& B,
                                                  const Eigen::MatrixXd& K, bool hold,
                                                  Eigen::VectorXd x,
                                                  const std::vector<int>& bits) {
  std::vector<Eigen::VectorXd> xs{x};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(B.cols());
  for (int b : bits) {
    if (b) {
      u = K * x;
    } else if (!hold) {
      u.setZero();
    }
    x = A * x + B * u;
    xs.push_back(x);
  }
  return xs;
}

inline double SpectralRadius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace testing
}  // namespace whcert
