#include <cctype>
#include <cstdlib>

#include "whcert/polynomial.h"

namespace whcert {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names,
         const std::map<std::string, double>& params)
      : text_(text), names_(names), params_(params),
        n_(static_cast<int>(names.size())) {}

  Polynomial Parse() {
    Polynomial p = Expr();
    Skip();
    if (pos_ != text_.size()) Fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw std::invalid_argument("polynomial '" + std::string(text_) + "' at offset " +
                                std::to_string(pos_) + ": " + what);
  }

  void Skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool Accept(char ch) {
    Skip();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial Expr() {
    Polynomial p = Term();
    while (true) {
      if (Accept('+')) {
        p += Term();
      } else if (Accept('-')) {
        p -= Term();
      } else {
        return p;
      }
    }
  }

  Polynomial Term() {
    Polynomial p = Unary();
    while (true) {
      if (Accept('*')) {
        p = p * Unary();
      } else if (Accept('/')) {
        Polynomial d = Unary();
        if (d.degree() != 0) Fail("division by a non-constant");
        const double c = d.coefficients()[0];
        if (c == 0.0) Fail("division by zero");
        p *= 1.0 / c;
      } else {
        return p;
      }
    }
  }

  Polynomial Unary() {
    if (Accept('-')) return -Unary();
    if (Accept('+')) return Unary();
    return Power();
  }

  Polynomial Power() {
    Polynomial base = Primary();
    if (Accept('^')) {
      Skip();
      size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) Fail("expected integer exponent");
      const int k = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      return base.Pow(k);
    }
    return base;
  }

  Polynomial Primary() {
    Skip();
    if (pos_ >= text_.size()) Fail("unexpected end");
    const char ch = text_[pos_];
    if (ch == '(') {
      ++pos_;
      Polynomial p = Expr();
      if (!Accept(')')) Fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) Fail("bad number");
      pos_ += static_cast<size_t>(end - rest.c_str());
      return Polynomial::Constant(n_, v);
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(text_.substr(start, pos_ - start));
      for (int i = 0; i < n_; ++i) {
        if (names_[i] == name) return Polynomial::Variable(n_, i);
      }
      auto it = params_.find(name);
      if (it != params_.end()) return Polynomial::Constant(n_, it->second);
      pos_ = start;
      Fail("unknown identifier '" + name + "'");
    }
    Fail("unexpected '" + std::string(1, ch) + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& names_;
  const std::map<std::string, double>& params_;
  int n_;
  size_t pos_ = 0;
};

}  // namespace

Polynomial ParsePolynomial(std::string_view text, const std::vector<std::string>& var_names,
                           const std::map<std::string, double>& params) {
  if (var_names.empty()) throw std::invalid_argument("ParsePolynomial: no variables");
  return Parser(text, var_names, params).Parse();
}

}  // namespace whcert
