#include "whcert/sampling.h"

#include <stdexcept>

namespace whcert {

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
}

double RadicalInverse(long long index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

BoxSampler::BoxSampler(Eigen::VectorXd lo, Eigen::VectorXd hi, uint64_t seed)
    : lo_(std::move(lo)), hi_(std::move(hi)), rng_(seed) {
  if (lo_.size() != hi_.size() || lo_.size() == 0) {
    throw std::invalid_argument("BoxSampler: bad bounds");
  }
  if (lo_.size() > 16) throw std::invalid_argument("BoxSampler: dimension above 16");
  for (int i = 0; i < lo_.size(); ++i) {
    if (!(hi_[i] >= lo_[i])) throw std::invalid_argument("BoxSampler: hi < lo");
  }
}

Eigen::VectorXd BoxSampler::Next() {
  const int n = static_cast<int>(lo_.size());
  Eigen::VectorXd u(n);
  if (drawn_ % 2 == 0) {
    for (int i = 0; i < n; ++i) u[i] = RadicalInverse(halton_index_, kPrimes[i]);
    ++halton_index_;
  } else {
    for (int i = 0; i < n; ++i) u[i] = unit_(rng_);
  }
  ++drawn_;
  return lo_ + (hi_ - lo_).cwiseProduct(u);
}

std::vector<Eigen::VectorXd> SampleSet(const SemiAlgebraicSet& set, const BoundingBox& box,
                                       int count, uint64_t seed, long long max_attempts) {
  std::vector<Eigen::VectorXd> out;
  if (count <= 0 || set.is_empty()) return out;
  out.reserve(count);
  BoxSampler sampler(box.lo, box.hi, seed);
  for (long long k = 0; k < max_attempts && static_cast<int>(out.size()) < count; ++k) {
    Eigen::VectorXd x = sampler.Next();
    if (set.Contains(x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace whcert
