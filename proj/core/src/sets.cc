#include "whcert/sets.h"

#include <cmath>
#include <stdexcept>

namespace whcert {

QuadraticForm::QuadraticForm(Eigen::MatrixXd S) : S_(std::move(S)) {
  if (S_.rows() != S_.cols() || S_.rows() < 2) {
    throw std::invalid_argument("QuadraticForm: S must be square of size >= 2");
  }
  if ((S_ - S_.transpose()).cwiseAbs().maxCoeff() > kMembershipTolerance) {
    throw std::invalid_argument("QuadraticForm: S is not symmetric");
  }
  S_ = (0.5 * (S_ + S_.transpose())).eval();
}

double QuadraticForm::Evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("QuadraticForm: dimension mismatch");
  Eigen::VectorXd z(x.size() + 1);
  z << x, 1.0;
  return z.dot(S_ * z);
}

Polynomial QuadraticForm::ToPolynomial() const {
  const int n = dim();
  Polynomial p(n, 2);
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      Exponent e(n, 0);
      if (i < n) ++e[i];
      if (j < n) ++e[j];
      p.AddTerm(e, (i == j ? 1.0 : 2.0) * S_(i, j));
    }
  }
  return p;
}

QuadraticForm QuadraticForm::FromPolynomial(const Polynomial& p) {
  if (p.degree() > 2) throw std::invalid_argument("QuadraticForm: degree above 2");
  const int n = p.num_vars();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const auto& basis = p.basis();
  for (int k = 0; k < basis.size(); ++k) {
    const double c = p.coefficients()[k];
    if (c == 0.0) continue;
    const Exponent& e = basis[k];
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < e[i]; ++r) idx.push_back(i);
    }
    while (idx.size() < 2) idx.push_back(n);
    if (idx[0] == idx[1]) {
      S(idx[0], idx[0]) += c;
    } else {
      S(idx[0], idx[1]) += 0.5 * c;
      S(idx[1], idx[0]) += 0.5 * c;
    }
  }
  return QuadraticForm(S);
}

QuadraticForm Ellipsoid(const Eigen::VectorXd& center, const Eigen::VectorXd& semi_axes) {
  const int n = static_cast<int>(center.size());
  if (semi_axes.size() != n || n == 0) {
    throw std::invalid_argument("Ellipsoid: center/axes size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (!(semi_axes[i] > 0.0) || !std::isfinite(semi_axes[i])) {
      throw std::invalid_argument("Ellipsoid: degenerate semi-axis");
    }
  }
  const Eigen::VectorXd d = semi_axes.array().square().inverse();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + 1, n + 1);
  S.topLeftCorner(n, n) = Eigen::MatrixXd((-d).asDiagonal());
  S.topRightCorner(n, 1) = d.cwiseProduct(center);
  S.bottomLeftCorner(1, n) = d.cwiseProduct(center).transpose();
  S(n, n) = 1.0 - center.dot(d.cwiseProduct(center));
  return QuadraticForm(S);
}

SemiAlgebraicSet::SemiAlgebraicSet(int dim, std::vector<Polynomial> constraints)
    : dim_(dim), constraints_(std::move(constraints)) {
  if (dim < 1) throw std::invalid_argument("SemiAlgebraicSet: dimension < 1");
  if (constraints_.empty()) {
    throw std::invalid_argument("SemiAlgebraicSet: empty constraint list");
  }
  for (const auto& g : constraints_) {
    if (g.num_vars() != dim) {
      throw std::invalid_argument("SemiAlgebraicSet: constraint ring mismatch");
    }
  }
}

int SemiAlgebraicSet::max_degree() const {
  int d = 0;
  for (const auto& g : constraints_) d = std::max(d, g.degree());
  return d;
}

bool SemiAlgebraicSet::Contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim_) throw std::invalid_argument("SemiAlgebraicSet: dimension mismatch");
  for (const auto& g : constraints_) {
    if (g.Evaluate(x) < -tol) return false;
  }
  return true;
}

std::vector<QuadraticForm> SemiAlgebraicSet::ToQuadratics() const {
  std::vector<QuadraticForm> out;
  for (const auto& g : constraints_) out.push_back(QuadraticForm::FromPolynomial(g));
  return out;
}

SemiAlgebraicSet SemiAlgebraicSet::Intersect(const SemiAlgebraicSet& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("Intersect: dimension mismatch");
  std::vector<Polynomial> all = constraints_;
  all.insert(all.end(), other.constraints_.begin(), other.constraints_.end());
  SemiAlgebraicSet r(dim_, std::move(all));
  r.empty_ = empty_ || other.empty_;
  if (bounds_ && other.bounds_) {
    r.bounds_ = BoundingBox{bounds_->lo.cwiseMax(other.bounds_->lo),
                            bounds_->hi.cwiseMin(other.bounds_->hi)};
  } else if (bounds_) {
    r.bounds_ = bounds_;
  } else {
    r.bounds_ = other.bounds_;
  }
  for (const auto* src : {&boundary_points_, &other.boundary_points_}) {
    for (const auto& p : *src) {
      if (r.Contains(p, 1e-9)) r.boundary_points_.push_back(p);
    }
  }
  return r;
}

SemiAlgebraicSet SemiAlgebraicSet::FromQuadratic(const QuadraticForm& q) {
  return SemiAlgebraicSet(q.dim(), {q.ToPolynomial()});
}

SemiAlgebraicSet SemiAlgebraicSet::Empty(int dim) {
  SemiAlgebraicSet s(dim, {Polynomial::Constant(dim, -1.0)});
  s.empty_ = true;
  return s;
}

SemiAlgebraicSet Box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  if (hi.size() != n || n == 0) throw std::invalid_argument("Box: lo/hi size mismatch");
  std::vector<Polynomial> g;
  for (int i = 0; i < n; ++i) {
    if (!(hi[i] > lo[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw std::invalid_argument("Box: degenerate side in coordinate " + std::to_string(i + 1));
    }
    Polynomial xi = Polynomial::Variable(n, i);
    g.push_back((xi - Polynomial::Constant(n, lo[i])) * (Polynomial::Constant(n, hi[i]) - xi));
  }
  SemiAlgebraicSet s(n, std::move(g));
  s.set_bounds({lo, hi});
  std::vector<Eigen::VectorXd> pts;
  const Eigen::VectorXd mid = 0.5 * (lo + hi);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a = mid, b = mid;
    a[i] = lo[i];
    b[i] = hi[i];
    pts.push_back(a);
    pts.push_back(b);
  }
  if (n <= 4) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      Eigen::VectorXd c(n);
      for (int i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? hi[i] : lo[i];
      pts.push_back(c);
    }
  }
  s.set_boundary_points(std::move(pts));
  return s;
}

SemiAlgebraicSet EllipsoidSet(const Eigen::VectorXd& center, const Eigen::VectorXd& semi_axes) {
  SemiAlgebraicSet s = SemiAlgebraicSet::FromQuadratic(Ellipsoid(center, semi_axes));
  s.set_bounds({center - semi_axes, center + semi_axes});
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < center.size(); ++i) {
    Eigen::VectorXd a = center, b = center;
    a[i] -= semi_axes[i];
    b[i] += semi_axes[i];
    pts.push_back(a);
    pts.push_back(b);
  }
  s.set_boundary_points(std::move(pts));
  return s;
}

bool Membership(const QuadraticForm& q, const Eigen::VectorXd& x) { return q.Contains(x); }
bool Membership(const SemiAlgebraicSet& s, const Eigen::VectorXd& x) { return s.Contains(x); }

}  // namespace whcert
