#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "whcert/polynomial.h"

namespace whcert {

inline constexpr double kMembershipTolerance = 1e-12;

// {x : [x;1]' S [x;1] >= 0}.
class QuadraticForm {
 public:
  explicit QuadraticForm(Eigen::MatrixXd S);

  const Eigen::MatrixXd& S() const { return S_; }
  // State dimension n (S is (n+1) x (n+1)).
  int dim() const { return static_cast<int>(S_.rows()) - 1; }

  double Evaluate(const Eigen::VectorXd& x) const;
  bool Contains(const Eigen::VectorXd& x, double tol = kMembershipTolerance) const {
    return Evaluate(x) >= -tol;
  }

  Polynomial ToPolynomial() const;
  // Throws if p has degree above 2.
  static QuadraticForm FromPolynomial(const Polynomial& p);

 private:
  Eigen::MatrixXd S_;
};

// Ellipsoid sum ((x_i - c_i) / a_i)^2 <= 1. Rejects non-positive axes.
QuadraticForm Ellipsoid(const Eigen::VectorXd& center, const Eigen::VectorXd& semi_axes);

struct BoundingBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// {x : g_i(x) >= 0 for all i}.
class SemiAlgebraicSet {
 public:
  SemiAlgebraicSet() = default;
  SemiAlgebraicSet(int dim, std::vector<Polynomial> constraints);

  int dim() const { return dim_; }
  const std::vector<Polynomial>& constraints() const { return constraints_; }
  int max_degree() const;

  bool Contains(const Eigen::VectorXd& x, double tol = kMembershipTolerance) const;

  // Quadratic forms of every constraint; throws if any has degree above 2.
  std::vector<QuadraticForm> ToQuadratics() const;

  // Optional exact outer box (set by box/ellipsoid builders).
  const std::optional<BoundingBox>& bounds() const { return bounds_; }
  // Deterministic boundary points (axis extremes) when the shape is known.
  const std::vector<Eigen::VectorXd>& boundary_points() const { return boundary_points_; }
  // True for the canonical empty set built by Empty().
  bool is_empty() const { return empty_; }

  // Intersection: constraints concatenated, bounds intersected; boundary
  // points kept only if they lie in the result.
  SemiAlgebraicSet Intersect(const SemiAlgebraicSet& other) const;

  static SemiAlgebraicSet FromQuadratic(const QuadraticForm& q);
  // Constraint -1 >= 0.
  static SemiAlgebraicSet Empty(int dim);

  void set_bounds(BoundingBox b) { bounds_ = std::move(b); }
  void set_boundary_points(std::vector<Eigen::VectorXd> pts) {
    boundary_points_ = std::move(pts);
  }

 private:
  int dim_ = 0;
  std::vector<Polynomial> constraints_;
  std::optional<BoundingBox> bounds_;
  std::vector<Eigen::VectorXd> boundary_points_;
  bool empty_ = false;
};

// One quadratic (x_i - lo_i)(hi_i - x_i) >= 0 per coordinate.
SemiAlgebraicSet Box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
SemiAlgebraicSet EllipsoidSet(const Eigen::VectorXd& center,
                              const Eigen::VectorXd& semi_axes);

bool Membership(const QuadraticForm& q, const Eigen::VectorXd& x);
bool Membership(const SemiAlgebraicSet& s, const Eigen::VectorXd& x);

}  // namespace whcert
