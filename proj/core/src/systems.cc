#include "whcert/systems.h"

#include <stdexcept>

namespace whcert {

std::string ToString(Strategy q) { return q == Strategy::kZero ? "zero" : "hold"; }

Strategy ParseStrategy(std::string_view text) {
  if (text == "zero") return Strategy::kZero;
  if (text == "hold") return Strategy::kHold;
  throw std::invalid_argument("unknown strategy '" + std::string(text) + "'");
}

System System::Linear(Eigen::MatrixXd A, Eigen::MatrixXd B) {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw std::invalid_argument("LinearSystem: A must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() < 1) {
    throw std::invalid_argument("LinearSystem: B must have n rows and m >= 1 columns");
  }
  System s;
  s.linear_ = true;
  s.n_ = static_cast<int>(A.rows());
  s.m_ = static_cast<int>(B.cols());
  const int vars = s.n_ + s.m_;
  for (int i = 0; i < s.n_; ++i) {
    Polynomial p(vars, 1);
    for (int j = 0; j < s.n_; ++j) p += A(i, j) * Polynomial::Variable(vars, j);
    for (int j = 0; j < s.m_; ++j) p += B(i, j) * Polynomial::Variable(vars, s.n_ + j);
    s.f_.push_back(p);
  }
  s.A_ = std::move(A);
  s.B_ = std::move(B);
  return s;
}

System System::PolynomialDynamics(int n, int m, std::vector<Polynomial> f) {
  if (n < 1 || m < 1) throw std::invalid_argument("PolynomialSystem: need n, m >= 1");
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("PolynomialSystem: need one polynomial per state");
  }
  for (const auto& p : f) {
    if (p.num_vars() != n + m) {
      throw std::invalid_argument("PolynomialSystem: polynomial ring must be (x, u)");
    }
  }
  System s;
  s.linear_ = false;
  s.n_ = n;
  s.m_ = m;
  s.f_ = std::move(f);
  return s;
}

const Eigen::MatrixXd& System::A() const {
  if (!linear_) throw std::logic_error("System::A on a polynomial system");
  return A_;
}

const Eigen::MatrixXd& System::B() const {
  if (!linear_) throw std::logic_error("System::B on a polynomial system");
  return B_;
}

Eigen::VectorXd System::Evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != n_ || u.size() != m_) throw std::invalid_argument("System: dimension mismatch");
  if (linear_) return A_ * x + B_ * u;
  Eigen::VectorXd xu(n_ + m_);
  xu << x, u;
  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) out[i] = f_[i].Evaluate(xu);
  return out;
}

Controller Controller::Linear(Eigen::MatrixXd K) {
  if (K.rows() < 1 || K.cols() < 1) throw std::invalid_argument("LinearController: empty K");
  Controller c;
  c.linear_ = true;
  c.m_ = static_cast<int>(K.rows());
  c.n_ = static_cast<int>(K.cols());
  for (int i = 0; i < c.m_; ++i) {
    Polynomial p(c.n_, 1);
    for (int j = 0; j < c.n_; ++j) p += K(i, j) * Polynomial::Variable(c.n_, j);
    c.g_.push_back(p);
  }
  c.K_ = std::move(K);
  return c;
}

Controller Controller::PolynomialLaw(int n, std::vector<Polynomial> g) {
  if (g.empty()) throw std::invalid_argument("PolynomialController: no outputs");
  for (const auto& p : g) {
    if (p.num_vars() != n) throw std::invalid_argument("PolynomialController: ring must be x");
  }
  Controller c;
  c.linear_ = false;
  c.n_ = n;
  c.m_ = static_cast<int>(g.size());
  c.g_ = std::move(g);
  return c;
}

const Eigen::MatrixXd& Controller::K() const {
  if (!linear_) throw std::logic_error("Controller::K on a polynomial controller");
  return K_;
}

Eigen::VectorXd Controller::Apply(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw std::invalid_argument("Controller: dimension mismatch");
  if (linear_) return K_ * x;
  Eigen::VectorXd u(m_);
  for (int i = 0; i < m_; ++i) u[i] = g_[i].Evaluate(x);
  return u;
}

void Controller::CheckCompatible(const System& sys) const {
  if (n_ != sys.n() || m_ != sys.m()) {
    throw std::invalid_argument("controller is " + std::to_string(m_) + "x" +
                                std::to_string(n_) + ", system needs " +
                                std::to_string(sys.m()) + "x" + std::to_string(sys.n()));
  }
}

Eigen::VectorXd AugmentedState::Stacked() const {
  Eigen::VectorXd z(x.size() + u_held.size());
  z << x, u_held;
  return z;
}

Eigen::VectorXd StepClosed(const System& sys, const Controller& ctrl, const Eigen::VectorXd& x) {
  return sys.Evaluate(x, ctrl.Apply(x));
}

Eigen::VectorXd StepOpenZero(const System& sys, const Eigen::VectorXd& x) {
  return sys.Evaluate(x, Eigen::VectorXd::Zero(sys.m()));
}

AugmentedState StepOpenHold(const System& sys, const AugmentedState& aug) {
  return {sys.Evaluate(aug.x, aug.u_held), aug.u_held};
}

AugmentedState IterateOpenAugmented(const System& sys, const Controller& ctrl,
                                    const Eigen::VectorXd& x, int m) {
  if (m < 0) throw std::invalid_argument("IterateOpen: negative m");
  const Eigen::VectorXd u = ctrl.Apply(x);
  AugmentedState s{sys.Evaluate(x, u), u};
  for (int k = 0; k < m; ++k) s = StepOpenHold(sys, s);
  return s;
}

Eigen::VectorXd IterateOpen(const System& sys, const Controller& ctrl, Strategy q,
                            const Eigen::VectorXd& x, int m) {
  if (m < 0) throw std::invalid_argument("IterateOpen: negative m");
  if (q == Strategy::kHold) return IterateOpenAugmented(sys, ctrl, x, m).x;
  Eigen::VectorXd y = StepClosed(sys, ctrl, x);
  for (int k = 0; k < m; ++k) y = StepOpenZero(sys, y);
  return y;
}

std::vector<Polynomial> ClosedLoopMap(const System& sys, const Controller& ctrl) {
  ctrl.CheckCompatible(sys);
  const int n = sys.n();
  std::vector<Polynomial> sub;
  for (int i = 0; i < n; ++i) sub.push_back(Polynomial::Variable(n, i));
  for (const auto& g : ctrl.polynomials()) sub.push_back(g);
  std::vector<Polynomial> out;
  for (const auto& f : sys.polynomials()) out.push_back(f.Compose(sub));
  return out;
}

std::vector<Polynomial> OpenZeroMap(const System& sys) {
  const int n = sys.n();
  std::vector<Polynomial> sub;
  for (int i = 0; i < n; ++i) sub.push_back(Polynomial::Variable(n, i));
  for (int j = 0; j < sys.m(); ++j) sub.push_back(Polynomial(n, 0));
  std::vector<Polynomial> out;
  for (const auto& f : sys.polynomials()) out.push_back(f.Compose(sub));
  return out;
}

}  // namespace whcert
