#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "whcert/sets.h"

namespace whcert {

// Deterministic point stream in a box. Even draws come from a Halton
// sequence, odd draws from mt19937_64, so every prefix of the stream is the
// same for a given seed.
class BoxSampler {
 public:
  BoxSampler(Eigen::VectorXd lo, Eigen::VectorXd hi, uint64_t seed);

  Eigen::VectorXd Next();
  long long drawn() const { return drawn_; }

 private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  long long halton_index_ = 1;
  long long drawn_ = 0;
};

// Points of `set` drawn by rejection from the BoxSampler stream over `box`.
// Stops early when max_attempts draws are used up.
std::vector<Eigen::VectorXd> SampleSet(const SemiAlgebraicSet& set, const BoundingBox& box,
                                       int count, uint64_t seed, long long max_attempts);

// Radical inverse of index in the given prime base.
double RadicalInverse(long long index, int base);

}  // namespace whcert
