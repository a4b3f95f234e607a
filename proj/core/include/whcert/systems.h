#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "whcert/polynomial.h"

namespace whcert {

enum class Strategy { kZero, kHold };

std::string ToString(Strategy q);
Strategy ParseStrategy(std::string_view text);

// x(t+1) = f(x(t), u(t)); linear (A x + B u) or polynomial in (x, u).
class System {
 public:
  System() = default;
  static System Linear(Eigen::MatrixXd A, Eigen::MatrixXd B);
  // Each f[i] lives in the ring (x1..xn, u1..um).
  static System PolynomialDynamics(int n, int m, std::vector<Polynomial> f);

  bool is_linear() const { return linear_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const Eigen::MatrixXd& A() const;
  const Eigen::MatrixXd& B() const;
  // Polynomials over (x, u); built from A, B for linear systems.
  const std::vector<Polynomial>& polynomials() const { return f_; }

  Eigen::VectorXd Evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

 private:
  bool linear_ = true;
  int n_ = 0;
  int m_ = 0;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd B_;
  std::vector<Polynomial> f_;
};

// u = g(x); linear (K x) or polynomial in x.
class Controller {
 public:
  Controller() = default;
  static Controller Linear(Eigen::MatrixXd K);
  static Controller PolynomialLaw(int n, std::vector<Polynomial> g);

  bool is_linear() const { return linear_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const Eigen::MatrixXd& K() const;
  const std::vector<Polynomial>& polynomials() const { return g_; }

  Eigen::VectorXd Apply(const Eigen::VectorXd& x) const;
  // Throws if dimensions disagree with the system.
  void CheckCompatible(const System& sys) const;

 private:
  bool linear_ = true;
  int n_ = 0;
  int m_ = 0;
  Eigen::MatrixXd K_;
  std::vector<Polynomial> g_;
};

struct AugmentedState {
  Eigen::VectorXd x;
  Eigen::VectorXd u_held;

  // [x; u_held]
  Eigen::VectorXd Stacked() const;
};

// f_c(x) = f(x, g(x)).
Eigen::VectorXd StepClosed(const System& sys, const Controller& ctrl, const Eigen::VectorXd& x);
// f_oz(x) = f(x, 0).
Eigen::VectorXd StepOpenZero(const System& sys, const Eigen::VectorXd& x);
// (x, u) -> (f(x, u), u).
AugmentedState StepOpenHold(const System& sys, const AugmentedState& aug);

// m open-loop steps after one closed-loop step from x. Under hold the input
// applied at the success instant, g(x), is held for the m losses.
Eigen::VectorXd IterateOpen(const System& sys, const Controller& ctrl, Strategy q,
                            const Eigen::VectorXd& x, int m);
// Augmented variant: starts from the closed-loop augmented state
// (f_c(x), g(x)) and applies m held steps.
AugmentedState IterateOpenAugmented(const System& sys, const Controller& ctrl,
                                    const Eigen::VectorXd& x, int m);

// Polynomial maps in the ring of x: closed loop x -> f(x, g(x)) and zero open
// loop x -> f(x, 0). Used by the SOS encoder.
std::vector<Polynomial> ClosedLoopMap(const System& sys, const Controller& ctrl);
std::vector<Polynomial> OpenZeroMap(const System& sys);

}  // namespace whcert
