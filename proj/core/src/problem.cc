#include "whcert/problem.h"

#include <fstream>
#include <map>
#include <sstream>

#include "json_util.h"
#include "whcert/sampling.h"

namespace whcert {

using internal::Json;

namespace {

const Json& Require(const Json& j, const std::string& ptr, const char* key) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ptr + "/" + key, "missing required field");
  return *it;
}

Eigen::MatrixXd Matrix(const Json& j, const std::string& ptr) {
  try {
    return internal::ParseMatrix(j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ptr, e.what());
  }
}

Eigen::VectorXd Vector(const Json& j, const std::string& ptr) {
  try {
    return internal::ParseVector(j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ptr, e.what());
  }
}

int Int(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return j.get<int>();
}

double Number(const Json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  return j.get<double>();
}

std::string String(const Json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> Names(const Json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a non-empty name list");
  std::vector<std::string> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(String(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

std::vector<std::string> DefaultNames(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

Polynomial Poly(const Json& j, const std::string& ptr, const std::vector<std::string>& vars,
                const std::map<std::string, double>& params) {
  try {
    return ParsePolynomial(String(j, ptr), vars, params);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ptr, e.what());
  }
}

SemiAlgebraicSet ParseSet(const Json& j, const std::string& ptr, int dim,
                          const std::vector<std::string>& vars,
                          const std::map<std::string, double>& params) {
  const std::string type = String(Require(j, ptr, "type"), ptr + "/type");
  try {
    if (type == "box") {
      Eigen::VectorXd lo = Vector(Require(j, ptr, "lo"), ptr + "/lo");
      Eigen::VectorXd hi = Vector(Require(j, ptr, "hi"), ptr + "/hi");
      if (lo.size() != dim) throw ConfigError(ptr + "/lo", "expected " + std::to_string(dim) + " entries");
      if (hi.size() != dim) throw ConfigError(ptr + "/hi", "expected " + std::to_string(dim) + " entries");
      return Box(lo, hi);
    }
    if (type == "ellipsoid") {
      Eigen::VectorXd c = Vector(Require(j, ptr, "center"), ptr + "/center");
      Eigen::VectorXd a = Vector(Require(j, ptr, "semi_axes"), ptr + "/semi_axes");
      if (c.size() != dim) throw ConfigError(ptr + "/center", "expected " + std::to_string(dim) + " entries");
      if (a.size() != dim) throw ConfigError(ptr + "/semi_axes", "expected " + std::to_string(dim) + " entries");
      if (j.contains("scale")) {
        const double s = Number(j["scale"], ptr + "/scale");
        if (!(s > 0.0)) throw ConfigError(ptr + "/scale", "scale must be positive");
        a *= s;
      }
      try {
        return EllipsoidSet(c, a);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr + "/semi_axes", e.what());
      }
    }
    if (type == "quadratic") {
      Eigen::MatrixXd S = Matrix(Require(j, ptr, "S"), ptr + "/S");
      if (S.rows() != dim + 1 || S.cols() != dim + 1) {
        throw ConfigError(ptr + "/S", "expected a " + std::to_string(dim + 1) + "x" +
                                          std::to_string(dim + 1) + " matrix");
      }
      try {
        return SemiAlgebraicSet::FromQuadratic(QuadraticForm(S));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr + "/S", e.what());
      }
    }
    if (type == "polynomial") {
      const Json& cs = Require(j, ptr, "constraints");
      if (!cs.is_array() || cs.empty()) {
        throw ConfigError(ptr + "/constraints", "expected a non-empty list of g(x) >= 0 strings");
      }
      std::vector<Polynomial> g;
      for (size_t i = 0; i < cs.size(); ++i) {
        g.push_back(Poly(cs[i], ptr + "/constraints/" + std::to_string(i), vars, params));
      }
      return SemiAlgebraicSet(dim, std::move(g));
    }
    if (type == "intersection") {
      const Json& sets = Require(j, ptr, "sets");
      if (!sets.is_array() || sets.empty()) throw ConfigError(ptr + "/sets", "expected a non-empty list");
      SemiAlgebraicSet r = ParseSet(sets[0], ptr + "/sets/0", dim, vars, params);
      for (size_t i = 1; i < sets.size(); ++i) {
        r = r.Intersect(ParseSet(sets[i], ptr + "/sets/" + std::to_string(i), dim, vars, params));
      }
      return r;
    }
    if (type == "empty") return SemiAlgebraicSet::Empty(dim);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ptr, e.what());
  }
  throw ConfigError(ptr + "/type", "unknown set type '" + type +
                                       "' (box, ellipsoid, quadratic, polynomial, intersection, empty)");
}

}  // namespace

Problem ParseProblem(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "expected a JSON object");
  Problem p;
  p.name = j.contains("name") ? String(j["name"], "/name") : "";

  std::map<std::string, double> params;
  const Json& sys = Require(j, "", "system");
  const std::string type = String(Require(sys, "/system", "type"), "/system/type");
  if (sys.contains("params")) {
    const Json& pj = sys["params"];
    if (!pj.is_object()) throw ConfigError("/system/params", "expected an object");
    for (auto it = pj.begin(); it != pj.end(); ++it) {
      params[it.key()] = Number(it.value(), "/system/params/" + it.key());
    }
  }
  if (type == "linear") {
    Eigen::MatrixXd A = Matrix(Require(sys, "/system", "A"), "/system/A");
    Eigen::MatrixXd B = Matrix(Require(sys, "/system", "B"), "/system/B");
    if (A.rows() != A.cols()) throw ConfigError("/system/A", "A must be square");
    if (B.rows() != A.rows()) throw ConfigError("/system/B", "B must have as many rows as A");
    p.system = System::Linear(A, B);
    p.state_names = sys.contains("states") ? Names(sys["states"], "/system/states")
                                           : DefaultNames("x", p.system.n());
    p.input_names = sys.contains("inputs") ? Names(sys["inputs"], "/system/inputs")
                                           : DefaultNames("u", p.system.m());
    if (static_cast<int>(p.state_names.size()) != p.system.n()) {
      throw ConfigError("/system/states", "expected one name per state");
    }
    if (static_cast<int>(p.input_names.size()) != p.system.m()) {
      throw ConfigError("/system/inputs", "expected one name per input");
    }
  } else if (type == "polynomial") {
    p.state_names = Names(Require(sys, "/system", "states"), "/system/states");
    p.input_names = Names(Require(sys, "/system", "inputs"), "/system/inputs");
    std::vector<std::string> ring = p.state_names;
    ring.insert(ring.end(), p.input_names.begin(), p.input_names.end());
    const Json& f = Require(sys, "/system", "f");
    if (!f.is_array() || f.size() != p.state_names.size()) {
      throw ConfigError("/system/f", "expected one polynomial per state");
    }
    std::vector<Polynomial> polys;
    for (size_t i = 0; i < f.size(); ++i) {
      polys.push_back(Poly(f[i], "/system/f/" + std::to_string(i), ring, params));
    }
    p.system = System::PolynomialDynamics(static_cast<int>(p.state_names.size()),
                                          static_cast<int>(p.input_names.size()), polys);
  } else {
    throw ConfigError("/system/type", "unknown system type '" + type + "' (linear, polynomial)");
  }
  const int n = p.system.n();
  const int m = p.system.m();

  if (j.contains("controller") && !j["controller"].is_null()) {
    const Json& c = j["controller"];
    if (c.contains("K")) {
      Eigen::MatrixXd K = Matrix(c["K"], "/controller/K");
      if (K.rows() != m || K.cols() != n) {
        throw ConfigError("/controller/K", "expected a " + std::to_string(m) + "x" +
                                               std::to_string(n) + " gain");
      }
      p.controller = Controller::Linear(K);
    } else if (c.contains("poly")) {
      const Json& g = c["poly"];
      if (!g.is_array() || static_cast<int>(g.size()) != m) {
        throw ConfigError("/controller/poly", "expected one polynomial per input");
      }
      std::vector<Polynomial> polys;
      for (size_t i = 0; i < g.size(); ++i) {
        polys.push_back(Poly(g[i], "/controller/poly/" + std::to_string(i), p.state_names, params));
      }
      p.controller = Controller::PolynomialLaw(n, polys);
    } else {
      throw ConfigError("/controller", "expected K, poly or null");
    }
  }

  p.strategy = [&] {
    try {
      return ParseStrategy(String(Require(j, "", "strategy"), "/strategy"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/strategy", e.what());
    }
  }();

  const Json& cj = Require(j, "", "constraint");
  const int r = Int(Require(cj, "/constraint", "r"), "/constraint/r");
  const int s = Int(Require(cj, "/constraint", "s"), "/constraint/s");
  try {
    p.constraint = WhConstraint(r, s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/constraint", e.what());
  }

  const Json& sets = Require(j, "", "sets");
  p.sets.X = ParseSet(Require(sets, "/sets", "X"), "/sets/X", n, p.state_names, params);
  if (!p.sets.X.bounds()) {
    throw ConfigError("/sets/X", "X must be bounded (box, ellipsoid, or an intersection with one)");
  }
  p.sets.X0 = ParseSet(Require(sets, "/sets", "X0"), "/sets/X0", n, p.state_names, params);
  p.sets.Xu = ParseSet(Require(sets, "/sets", "Xu"), "/sets/Xu", n, p.state_names, params);
  if (sets.contains("U") && !sets["U"].is_null()) {
    p.sets.U = ParseSet(sets["U"], "/sets/U", m, p.input_names, params);
    if (!p.sets.U->bounds()) throw ConfigError("/sets/U", "U must be bounded");
  }

  if (j.contains("sos")) {
    const Json& so = j["sos"];
    if (so.contains("n_p")) p.sos.n_p = Int(so["n_p"], "/sos/n_p");
    if (p.sos.n_p < 1) throw ConfigError("/sos/n_p", "n_p must be at least 1");
    if (so.contains("multiplier_degree") && !so["multiplier_degree"].is_null()) {
      p.sos.multiplier_degree = Int(so["multiplier_degree"], "/sos/multiplier_degree");
      if (p.sos.multiplier_degree < 0) {
        throw ConfigError("/sos/multiplier_degree", "must be non-negative");
      }
    }
    if (so.contains("eta")) p.sos.eta = Number(so["eta"], "/sos/eta");
  }
  if (j.contains("synthesis")) {
    const Json& sj = j["synthesis"];
    if (sj.contains("k_init")) {
      Eigen::MatrixXd K = Matrix(sj["k_init"], "/synthesis/k_init");
      if (K.rows() != m || K.cols() != n) {
        throw ConfigError("/synthesis/k_init", "expected a " + std::to_string(m) + "x" +
                                                   std::to_string(n) + " gain");
      }
      p.k_init = K;
    }
  }
  return p;
}

BoundingBox BoundsOf(const SemiAlgebraicSet& s, const Problem& p) {
  const BoundingBox& xb = *p.sets.X.bounds();
  if (!s.bounds()) return xb;
  return {s.bounds()->lo.cwiseMax(xb.lo), s.bounds()->hi.cwiseMin(xb.hi)};
}

void ValidateProblem(const Problem& p, uint64_t seed) {
  if (p.sets.X0.is_empty()) throw ConfigError("/sets/X0", "initial set is empty");
  if (p.sets.Xu.is_empty()) return;
  const BoundingBox box = BoundsOf(p.sets.X0, p);
  std::vector<Eigen::VectorXd> pts =
      SampleSet(p.sets.X0, box, kOverlapSamples, seed, 200LL * kOverlapSamples);
  for (const auto& b : p.sets.X0.boundary_points()) {
    if (p.sets.X0.Contains(b)) pts.push_back(b);
  }
  if (pts.empty()) throw ConfigError("/sets/X0", "no sampled point lies in the initial set");
  for (const auto& x : pts) {
    if (p.sets.Xu.Contains(x)) {
      std::ostringstream os;
      os << "initial and unsafe sets overlap, e.g. at x = [" << x.transpose() << "]";
      throw ConfigError("/sets/Xu", os.str());
    }
  }
}

Problem LoadProblem(const std::string& path, uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Problem p = ParseProblem(ss.str());
  ValidateProblem(p, seed);
  return p;
}

}  // namespace whcert
