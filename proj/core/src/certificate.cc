#include "whcert/certificate.h"

#include <stdexcept>

#include "json_util.h"
#include "whcert/wh_graph.h"

namespace whcert {

using internal::Json;

std::string ToString(GbfTag tag) {
  switch (tag) {
    case GbfTag::kGbf: return "gbf";
    case GbfTag::kDGbf: return "dgbf";
    case GbfTag::kOneGbf: return "1gbf";
    case GbfTag::kOneDGbf: return "1dgbf";
  }
  return "gbf";
}

GbfTag ParseGbfTag(std::string_view text) {
  if (text == "gbf") return GbfTag::kGbf;
  if (text == "dgbf") return GbfTag::kDGbf;
  if (text == "1gbf") return GbfTag::kOneGbf;
  if (text == "1dgbf") return GbfTag::kOneDGbf;
  throw std::invalid_argument("unknown variant '" + std::string(text) +
                              "' (expected gbf, dgbf, 1gbf or 1dgbf)");
}

std::string GbfVariant::ToString() const {
  return whcert::ToString(tag) + "-" + whcert::ToString(strategy);
}

GbfVariant GbfVariant::Parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("variant '" + std::string(text) + "' lacks a strategy suffix");
  }
  return {ParseGbfTag(text.substr(0, dash)), ParseStrategy(text.substr(dash + 1))};
}

double GbfCertificate::Evaluate(int node, const Eigen::VectorXd& z) const {
  const Eigen::MatrixXd& S = P.at(node);
  const int d = static_cast<int>(S.rows()) - 1;
  if (z.size() != d) throw std::invalid_argument("GbfCertificate: point dimension mismatch");
  return z.dot(S.topLeftCorner(d, d) * z) + 2.0 * z.dot(S.topRightCorner(d, 1).col(0)) +
         S(d, d);
}

const GbfVariant& VariantOf(const Certificate& c) {
  return std::visit([](const auto& x) -> const GbfVariant& { return x.variant; }, c);
}

const std::string& GraphOf(const Certificate& c) {
  return std::visit([](const auto& x) -> const std::string& { return x.graph; }, c);
}

int NumNodes(const Certificate& c) {
  return std::visit([](const auto& x) { return x.num_nodes(); }, c);
}

int BarrierDim(const Certificate& c) {
  return std::visit([](const auto& x) { return x.barrier_dim(); }, c);
}

const std::vector<double>& EpsOf(const Certificate& c) {
  return std::visit([](const auto& x) -> const std::vector<double>& { return x.eps; }, c);
}

double EvaluateBarrier(const Certificate& c, int node, const Eigen::VectorXd& z) {
  return std::visit([&](const auto& x) { return x.Evaluate(node, z); }, c);
}

namespace {

Json EpsJson(const std::vector<double>& eps) {
  Json j = Json::object();
  for (size_t v = 0; v < eps.size(); ++v) j[WhGraph::NodeName(static_cast<int>(v))] = eps[v];
  return j;
}

// Node-keyed object to a dense vector indexed by node.
template <typename J, typename T, typename F>
std::vector<T> NodeMap(const J& obj, F parse) {
  if (!obj.is_object()) throw std::invalid_argument("expected a node-keyed object");
  std::vector<T> out(obj.size());
  std::vector<bool> seen(obj.size(), false);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const int v = WhGraph::ParseNodeName(it.key());
    if (v < 0 || v >= static_cast<int>(out.size()) || seen[v]) {
      throw std::invalid_argument("node keys must be v1..vN without gaps");
    }
    seen[v] = true;
    out[v] = parse(it.value());
  }
  return out;
}

}  // namespace

std::string ToJson(const GbfCertificate& c) {
  Json j;
  j["kind"] = "quadratic";
  j["variant"] = c.variant.ToString();
  j["graph"] = c.graph;
  j["state_dim"] = c.state_dim;
  j["input_dim"] = c.input_dim;
  j["K"] = internal::MatrixJson(c.K);
  j["eps"] = EpsJson(c.eps);
  Json P = Json::object();
  for (int v = 0; v < c.num_nodes(); ++v) P[WhGraph::NodeName(v)] = internal::MatrixJson(c.P[v]);
  j["P"] = P;
  Json mult = Json::object();
  for (const auto& [k, v] : c.multipliers) mult[k] = v;
  j["multipliers"] = mult;
  Json res = Json::object();
  for (const auto& r : c.residuals) res[r.label] = r.min_eig;
  j["residuals"] = res;
  return j.dump(2);
}

std::string ToJson(const PolyGbf& c) {
  Json j;
  j["kind"] = "polynomial";
  j["variant"] = c.variant.ToString();
  j["graph"] = c.graph;
  j["n_p"] = c.n_p;
  j["num_vars"] = c.num_vars;
  j["state_dim"] = c.state_dim;
  Json nodes = Json::object();
  for (int v = 0; v < c.num_nodes(); ++v) {
    const Polynomial p = c.psi[v].Trimmed();
    Json mons = Json::array();
    Json coeffs = Json::array();
    for (int i = 0; i < p.basis().size(); ++i) {
      mons.push_back(p.basis()[i]);
      coeffs.push_back(p.coefficients()[i]);
    }
    nodes[WhGraph::NodeName(v)] = {{"monomials", mons}, {"coeffs", coeffs}};
  }
  j["nodes"] = nodes;
  j["eps"] = EpsJson(c.eps);
  j["gram_residual"] = c.gram_residual;
  j["gram_min_eig"] = c.gram_min_eig;
  return j.dump(2);
}

std::string CertificateToJson(const Certificate& c) {
  return std::visit([](const auto& x) { return ToJson(x); }, c);
}

Certificate CertificateFromJson(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("certificate is not valid JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    auto eps = NodeMap<Json, double>(j.at("eps"), [](const Json& e) { return e.get<double>(); });
    if (kind == "quadratic") {
      GbfCertificate c;
      c.variant = GbfVariant::Parse(j.at("variant").get<std::string>());
      c.graph = j.at("graph").get<std::string>();
      c.state_dim = j.at("state_dim").get<int>();
      c.input_dim = j.at("input_dim").get<int>();
      c.K = internal::ParseMatrix(j.at("K"));
      c.eps = std::move(eps);
      c.P = NodeMap<Json, Eigen::MatrixXd>(j.at("P"),
                                           [](const Json& m) { return internal::ParseMatrix(m); });
      if (c.P.size() != c.eps.size()) throw std::invalid_argument("P and eps node sets differ");
      for (const auto& P : c.P) {
        if (P.rows() != P.cols() || P.rows() != c.barrier_dim() + 1) {
          throw std::invalid_argument("P has the wrong dimension for the variant");
        }
      }
      if (j.contains("multipliers")) {
        for (auto it = j["multipliers"].begin(); it != j["multipliers"].end(); ++it) {
          c.multipliers[it.key()] = it.value().get<double>();
        }
      }
      if (j.contains("residuals")) {
        for (auto it = j["residuals"].begin(); it != j["residuals"].end(); ++it) {
          c.residuals.push_back({it.key(), it.value().get<double>()});
        }
      }
      return c;
    }
    if (kind == "polynomial") {
      PolyGbf c;
      c.variant = GbfVariant::Parse(j.at("variant").get<std::string>());
      c.graph = j.at("graph").get<std::string>();
      c.n_p = j.at("n_p").get<int>();
      c.num_vars = j.at("num_vars").get<int>();
      c.state_dim = j.value("state_dim", c.num_vars);
      c.eps = std::move(eps);
      const int nv = c.num_vars;
      c.psi = NodeMap<Json, Polynomial>(j.at("nodes"), [nv](const Json& node) {
        const auto& mons = node.at("monomials");
        const auto& coeffs = node.at("coeffs");
        if (mons.size() != coeffs.size()) {
          throw std::invalid_argument("monomials and coeffs differ in length");
        }
        std::vector<std::pair<Exponent, double>> terms;
        for (size_t i = 0; i < mons.size(); ++i) {
          Exponent e = mons[i].get<Exponent>();
          if (static_cast<int>(e.size()) != nv) {
            throw std::invalid_argument("monomial exponent has the wrong length");
          }
          terms.emplace_back(std::move(e), coeffs[i].get<double>());
        }
        return Polynomial::FromTerms(nv, terms);
      });
      if (c.psi.size() != c.eps.size()) throw std::invalid_argument("nodes and eps differ");
      c.gram_residual = j.value("gram_residual", 0.0);
      c.gram_min_eig = j.value("gram_min_eig", 0.0);
      return c;
    }
    throw std::invalid_argument("unknown certificate kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace whcert
