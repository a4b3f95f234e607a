#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "whcert/polynomial.h"
#include "whcert/systems.h"

namespace whcert {

enum class GbfTag { kGbf, kDGbf, kOneGbf, kOneDGbf };

// "gbf", "dgbf", "1gbf", "1dgbf".
std::string ToString(GbfTag tag);
GbfTag ParseGbfTag(std::string_view text);

struct GbfVariant {
  GbfTag tag = GbfTag::kGbf;
  Strategy strategy = Strategy::kZero;

  // Decrease form (no implications): dGBF and 1dGBF.
  bool decrease() const { return tag == GbfTag::kDGbf || tag == GbfTag::kOneDGbf; }
  bool one_step() const { return tag == GbfTag::kOneGbf || tag == GbfTag::kOneDGbf; }
  // 1-step hold variants live on (x, u_held).
  bool augmented() const { return one_step() && strategy == Strategy::kHold; }

  // "1dgbf-hold".
  std::string ToString() const;
  static GbfVariant Parse(std::string_view text);

  bool operator==(const GbfVariant&) const = default;
};

struct ResidualEntry {
  std::string label;
  double min_eig = 0.0;
};

// Quadratic barrier Psi_v(z) = [z;1]' P_v [z;1] per node, z = x or (x, u_held).
struct GbfCertificate {
  GbfVariant variant;
  std::string graph;  // "K(r,s)"
  int state_dim = 0;
  int input_dim = 0;
  std::vector<Eigen::MatrixXd> P;
  std::vector<double> eps;
  std::map<std::string, double> multipliers;
  std::vector<ResidualEntry> residuals;
  // Gain the certificate was computed for.
  Eigen::MatrixXd K;

  int num_nodes() const { return static_cast<int>(P.size()); }
  // n, or n + m for augmented variants.
  int barrier_dim() const { return variant.augmented() ? state_dim + input_dim : state_dim; }
  double Evaluate(int node, const Eigen::VectorXd& z) const;
};

// Polynomial barrier per node over the ring of x (or (x, u) for hold).
struct PolyGbf {
  GbfVariant variant;
  std::string graph;
  int n_p = 0;
  int num_vars = 0;
  int state_dim = 0;
  std::vector<Polynomial> psi;
  std::vector<double> eps;
  double gram_residual = 0.0;
  double gram_min_eig = 0.0;

  int num_nodes() const { return static_cast<int>(psi.size()); }
  int barrier_dim() const { return num_vars; }
  double Evaluate(int node, const Eigen::VectorXd& z) const { return psi.at(node).Evaluate(z); }
};

using Certificate = std::variant<GbfCertificate, PolyGbf>;

const GbfVariant& VariantOf(const Certificate& c);
const std::string& GraphOf(const Certificate& c);
int NumNodes(const Certificate& c);
int BarrierDim(const Certificate& c);
const std::vector<double>& EpsOf(const Certificate& c);
double EvaluateBarrier(const Certificate& c, int node, const Eigen::VectorXd& z);

std::string ToJson(const GbfCertificate& c);
std::string ToJson(const PolyGbf& c);
std::string CertificateToJson(const Certificate& c);
// Throws std::invalid_argument on malformed input.
Certificate CertificateFromJson(std::string_view text);

}  // namespace whcert
