#include "whcert/polynomial.h"

#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

namespace whcert {

namespace {

void AppendDegree(int num_vars, int degree, int var, Exponent* current,
                  std::vector<Exponent>* out) {
  if (var == num_vars - 1) {
    (*current)[var] = degree;
    out->push_back(*current);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    (*current)[var] = k;
    AppendDegree(num_vars, degree - k, var + 1, current, out);
  }
  (*current)[var] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int num_vars, int degree)
    : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1) throw std::invalid_argument("MonomialBasis: need a variable");
  if (degree < 0) throw std::invalid_argument("MonomialBasis: negative degree");
  for (int d = 0; d <= degree; ++d) {
    Exponent current(num_vars, 0);
    AppendDegree(num_vars, d, 0, &current, &monomials_);
  }
  for (int i = 0; i < size(); ++i) index_[monomials_[i]] = i;
}

const MonomialBasis& MonomialBasis::Get(int num_vars, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<MonomialBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{num_vars, degree}];
  if (!slot) slot = std::make_unique<MonomialBasis>(num_vars, degree);
  return *slot;
}

int MonomialBasis::IndexOf(const Exponent& e) const {
  auto it = index_.find(e);
  return it == index_.end() ? -1 : it->second;
}

int TotalDegree(const Exponent& e) {
  int d = 0;
  for (int k : e) d += k;
  return d;
}

std::string MonomialToString(const Exponent& e, const std::vector<std::string>& names) {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!first) os << '*';
    first = false;
    os << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
    if (e[i] > 1) os << '^' << e[i];
  }
  if (first) os << '1';
  return os.str();
}

Polynomial::Polynomial(int num_vars, int storage_degree)
    : num_vars_(num_vars),
      basis_(&MonomialBasis::Get(num_vars, storage_degree)),
      coeffs_(basis_->size(), 0.0) {
  if (storage_degree > kMaxPolynomialDegree) {
    throw DegreeOverflowError("polynomial degree " + std::to_string(storage_degree) +
                              " exceeds cap " + std::to_string(kMaxPolynomialDegree));
  }
}

Polynomial Polynomial::Constant(int num_vars, double c) {
  Polynomial p(num_vars, 0);
  p.coeffs_[0] = c;
  return p;
}

Polynomial Polynomial::Variable(int num_vars, int i) {
  if (i < 0 || i >= num_vars) throw std::out_of_range("Polynomial::Variable index");
  Polynomial p(num_vars, 1);
  Exponent e(num_vars, 0);
  e[i] = 1;
  p.AddTerm(e, 1.0);
  return p;
}

Polynomial Polynomial::FromTerms(int num_vars,
                                 const std::vector<std::pair<Exponent, double>>& terms) {
  Polynomial p(num_vars, 0);
  for (const auto& [e, c] : terms) p.AddTerm(e, c);
  return p;
}

int Polynomial::degree() const {
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i) {
    if (coeffs_[i] != 0.0) return TotalDegree((*basis_)[i]);
  }
  return 0;
}

void Polynomial::Grow(int storage_degree) {
  if (storage_degree <= basis_->degree()) return;
  if (storage_degree > kMaxPolynomialDegree) {
    throw DegreeOverflowError("polynomial degree " + std::to_string(storage_degree) +
                              " exceeds cap " + std::to_string(kMaxPolynomialDegree));
  }
  // Graded order makes the smaller basis a prefix of the larger one.
  basis_ = &MonomialBasis::Get(num_vars_, storage_degree);
  coeffs_.resize(basis_->size(), 0.0);
}

double Polynomial::Coefficient(const Exponent& e) const {
  if (static_cast<int>(e.size()) != num_vars_) {
    throw std::invalid_argument("Polynomial::Coefficient: exponent size mismatch");
  }
  const int i = basis_->IndexOf(e);
  return i < 0 ? 0.0 : coeffs_[i];
}

void Polynomial::AddTerm(const Exponent& e, double c) {
  if (static_cast<int>(e.size()) != num_vars_) {
    throw std::invalid_argument("Polynomial::AddTerm: exponent size mismatch");
  }
  for (int k : e) {
    if (k < 0) throw std::invalid_argument("Polynomial::AddTerm: negative exponent");
  }
  Grow(TotalDegree(e));
  coeffs_[basis_->IndexOf(e)] += c;
}

double Polynomial::Evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != num_vars_) {
    throw std::invalid_argument("Polynomial::Evaluate: expected " +
                                std::to_string(num_vars_) + " values, got " +
                                std::to_string(x.size()));
  }
  const int d = basis_->degree();
  Eigen::MatrixXd powers(num_vars_, d + 1);
  for (int i = 0; i < num_vars_; ++i) {
    powers(i, 0) = 1.0;
    for (int k = 1; k <= d; ++k) powers(i, k) = powers(i, k - 1) * x[i];
  }
  double sum = 0.0;
  for (int j = 0; j < basis_->size(); ++j) {
    if (coeffs_[j] == 0.0) continue;
    double term = coeffs_[j];
    const Exponent& e = (*basis_)[j];
    for (int i = 0; i < num_vars_; ++i) term *= powers(i, e[i]);
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r = *this;
  r -= o;
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  r *= -1.0;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("Polynomial: ring mismatch");
  Grow(o.basis_->degree());
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("Polynomial: ring mismatch");
  Grow(o.basis_->degree());
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r = *this;
  r *= s;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("Polynomial: ring mismatch");
  const int d = degree() + o.degree();
  if (d > kMaxPolynomialDegree) {
    throw DegreeOverflowError("product degree " + std::to_string(d) + " exceeds cap " +
                              std::to_string(kMaxPolynomialDegree));
  }
  Polynomial r(num_vars_, d);
  Exponent e(num_vars_);
  for (int i = 0; i < basis_->size(); ++i) {
    if (coeffs_[i] == 0.0) continue;
    const Exponent& a = (*basis_)[i];
    for (int j = 0; j < o.basis_->size(); ++j) {
      if (o.coeffs_[j] == 0.0) continue;
      const Exponent& b = (*o.basis_)[j];
      for (int k = 0; k < num_vars_; ++k) e[k] = a[k] + b[k];
      r.coeffs_[r.basis_->IndexOf(e)] += coeffs_[i] * o.coeffs_[j];
    }
  }
  return r;
}

Polynomial Polynomial::Pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::Pow: negative exponent");
  if (static_cast<long long>(degree()) * k > kMaxPolynomialDegree) {
    throw DegreeOverflowError("power degree exceeds cap");
  }
  Polynomial r = Constant(num_vars_, 1.0);
  for (int i = 0; i < k; ++i) r = r * (*this);
  return r;
}

Polynomial Polynomial::Compose(const std::vector<Polynomial>& maps, int max_degree) const {
  if (static_cast<int>(maps.size()) != num_vars_) {
    throw std::invalid_argument("Polynomial::Compose: need one map per variable");
  }
  const int target_vars = maps.front().num_vars();
  int map_degree = 0;
  for (const auto& m : maps) {
    if (m.num_vars() != target_vars) {
      throw std::invalid_argument("Polynomial::Compose: maps live in different rings");
    }
    map_degree = std::max(map_degree, m.degree());
  }
  const int d = degree();
  if (d * map_degree > max_degree) {
    throw DegreeOverflowError("composition degree " + std::to_string(d * map_degree) +
                              " exceeds cap " + std::to_string(max_degree));
  }
  std::vector<std::vector<Polynomial>> powers(num_vars_);
  for (int i = 0; i < num_vars_; ++i) {
    powers[i].push_back(Constant(target_vars, 1.0));
    for (int k = 1; k <= d; ++k) powers[i].push_back(powers[i].back() * maps[i]);
  }
  Polynomial r(target_vars, d * map_degree);
  for (int j = 0; j < basis_->size(); ++j) {
    if (coeffs_[j] == 0.0) continue;
    const Exponent& e = (*basis_)[j];
    Polynomial term = Constant(target_vars, coeffs_[j]);
    for (int i = 0; i < num_vars_; ++i) {
      if (e[i] > 0) term = term * powers[i][e[i]];
    }
    r += term;
  }
  return r;
}

Polynomial Polynomial::Embed(int num_vars) const {
  if (num_vars < num_vars_) throw std::invalid_argument("Polynomial::Embed: fewer variables");
  Polynomial r(num_vars, basis_->degree());
  Exponent e(num_vars, 0);
  for (int j = 0; j < basis_->size(); ++j) {
    if (coeffs_[j] == 0.0) continue;
    const Exponent& a = (*basis_)[j];
    for (int i = 0; i < num_vars_; ++i) e[i] = a[i];
    r.AddTerm(e, coeffs_[j]);
  }
  return r;
}

Polynomial Polynomial::Trimmed() const {
  Polynomial r(num_vars_, degree());
  for (int j = 0; j < r.basis_->size(); ++j) r.coeffs_[j] = coeffs_[j];
  return r;
}

double Polynomial::MaxAbsCoefficient() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial::MaxAbsDifference(const Polynomial& o) const {
  return (*this - o).MaxAbsCoefficient();
}

std::string Polynomial::ToString(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (int j = 0; j < basis_->size(); ++j) {
    const double c = coeffs_[j];
    if (c == 0.0) continue;
    const Exponent& e = (*basis_)[j];
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    first = false;
    const double a = std::abs(c);
    if (TotalDegree(e) == 0) {
      os << a;
    } else {
      if (a != 1.0) os << a << '*';
      os << MonomialToString(e, names);
    }
  }
  if (first) os << '0';
  return os.str();
}

}  // namespace whcert
