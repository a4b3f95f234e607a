#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace whcert {

inline constexpr int kMaxPolynomialDegree = 12;

class DegreeOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Exponent = std::vector<int>;

// All monomials in num_vars variables of total degree <= degree, in graded
// lexicographic order: by degree, then x1 before x2 before ... within a
// degree (x1^2, x1 x2, x2^2).
class MonomialBasis {
 public:
  // Cached instance; safe to call concurrently.
  static const MonomialBasis& Get(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  const Exponent& operator[](int i) const { return monomials_[i]; }
  const std::vector<Exponent>& monomials() const { return monomials_; }
  // -1 when the exponent is not in the basis.
  int IndexOf(const Exponent& e) const;

  MonomialBasis(int num_vars, int degree);

 private:
  int num_vars_;
  int degree_;
  std::vector<Exponent> monomials_;
  std::map<Exponent, int> index_;
};

int TotalDegree(const Exponent& e);
std::string MonomialToString(const Exponent& e,
                             const std::vector<std::string>& names = {});

// Dense coefficient vector over MonomialBasis(num_vars, storage degree).
class Polynomial {
 public:
  Polynomial() : Polynomial(1) {}
  explicit Polynomial(int num_vars, int storage_degree = 0);

  static Polynomial Constant(int num_vars, double c);
  static Polynomial Variable(int num_vars, int i);
  static Polynomial FromTerms(int num_vars,
                              const std::vector<std::pair<Exponent, double>>& terms);

  int num_vars() const { return num_vars_; }
  // Highest degree with a nonzero coefficient (0 for constants and zero).
  int degree() const;
  const MonomialBasis& basis() const { return *basis_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double Coefficient(const Exponent& e) const;
  void AddTerm(const Exponent& e, double c);

  double Evaluate(const Eigen::VectorXd& x) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  Polynomial Pow(int k) const;

  // p(maps[0](y), ..., maps[n-1](y)); all maps share one variable count.
  // Throws DegreeOverflowError when deg(p) * max deg(map) exceeds max_degree.
  Polynomial Compose(const std::vector<Polynomial>& maps,
                     int max_degree = kMaxPolynomialDegree) const;

  // Same polynomial in a ring with more variables; old variable i becomes
  // new variable i.
  Polynomial Embed(int num_vars) const;

  // Drops storage above the actual degree.
  Polynomial Trimmed() const;

  double MaxAbsCoefficient() const;
  // Largest coefficient difference, bases aligned.
  double MaxAbsDifference(const Polynomial& o) const;

  std::string ToString(const std::vector<std::string>& names = {}) const;

 private:
  void Grow(int storage_degree);

  int num_vars_;
  const MonomialBasis* basis_;
  std::vector<double> coeffs_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

// Parses "u1 + c_u - tau*(beta1*x1 + alpha1*x1^2)" with variables named in
// var_names and constants in params. Supports + - * / ^ (non-negative integer
// exponents), parentheses and decimal numbers. Division only by constants.
Polynomial ParsePolynomial(std::string_view text,
                           const std::vector<std::string>& var_names,
                           const std::map<std::string, double>& params = {});

}  // namespace whcert
