#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "whcert/sets.h"
#include "whcert/systems.h"
#include "whcert/wh_constraint.h"

namespace whcert {

// Malformed or inconsistent configuration. pointer() is a JSON pointer to
// the offending value, e.g. "/sets/X0/semi_axes".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer.empty() ? message : pointer + ": " + message),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ProblemSets {
  SemiAlgebraicSet X;
  SemiAlgebraicSet X0;
  SemiAlgebraicSet Xu;
  // Input set over u; required for the hold 1-step variants.
  std::optional<SemiAlgebraicSet> U;
};

struct SosOptions {
  int n_p = 3;
  // Negative selects n_p - deg(g) rounded up to even.
  int multiplier_degree = -1;
  double eta = 1e-4;
};

struct Problem {
  std::string name;
  System system;
  std::optional<Controller> controller;
  Strategy strategy = Strategy::kZero;
  WhConstraint constraint{1, 1};
  ProblemSets sets;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  SosOptions sos;
  // Starting gain for synthesis when the config provides one.
  std::optional<Eigen::MatrixXd> k_init;
};

// Parses the JSON problem schema. Throws ConfigError.
Problem ParseProblem(std::string_view json_text);
// Reads and parses a file, then runs ValidateProblem.
Problem LoadProblem(const std::string& path, uint64_t seed = 1);

inline constexpr int kOverlapSamples = 20000;

// Semantic checks that need sampling: X0 and Xu must not overlap (sampled
// X0 points plus boundary points are tested against Xu).
void ValidateProblem(const Problem& p, uint64_t seed = 1);

// Outer box of a set, falling back to the bounds of X.
BoundingBox BoundsOf(const SemiAlgebraicSet& s, const Problem& p);

}  // namespace whcert
