#include "whcert/wh_constraint.h"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace whcert {

WhConstraint::WhConstraint(int r, int s) : r_(r), s_(s) {
  if (r < 1 || s < 1 || r > s) {
    throw std::invalid_argument("WhConstraint: need 1 <= r <= s, got r=" +
                                std::to_string(r) + " s=" + std::to_string(s));
  }
}

std::string WhConstraint::ToString() const {
  return "K(" + std::to_string(r_) + "," + std::to_string(s_) + ")";
}

LossWord::LossWord(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  for (uint8_t b : bits_) {
    if (b > 1) throw std::invalid_argument("LossWord: bits must be 0 or 1");
  }
}

LossWord LossWord::FromString(std::string_view text) {
  std::vector<uint8_t> bits;
  bits.reserve(text.size());
  for (char ch : text) {
    if (ch == '0' || ch == '1') {
      bits.push_back(static_cast<uint8_t>(ch - '0'));
    } else if (ch == ' ') {
      continue;
    } else {
      throw std::invalid_argument(std::string("LossWord: unexpected character '") +
                                  ch + "'");
    }
  }
  return LossWord(std::move(bits));
}

std::string LossWord::ToString() const {
  std::string out;
  out.reserve(bits_.size());
  for (uint8_t b : bits_) out.push_back(static_cast<char>('0' + b));
  return out;
}

LabelWord::LabelWord(std::vector<int> labels) : labels_(std::move(labels)) {
  for (int l : labels_) {
    if (l < 0) throw std::invalid_argument("LabelWord: negative label");
  }
}

LossWord LabelWord::Expand() const {
  std::vector<uint8_t> bits;
  for (int l : labels_) {
    bits.push_back(1);
    bits.insert(bits.end(), l, 0);
  }
  return LossWord(std::move(bits));
}

std::string LabelWord::ToJson() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (i) os << ',';
    os << labels_[i];
  }
  os << ']';
  return os.str();
}

bool Satisfies(const LossWord& word, const WhConstraint& c) {
  const int n = word.size();
  if (n == 0) return true;
  // Every window of length <= s sits inside one of length min(s, n).
  const int w = std::min(c.s(), n);
  const int budget = c.max_losses();
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    zeros += word[i] ? 0 : 1;
    if (i >= w) zeros -= word[i - w] ? 0 : 1;
    if (zeros > budget) return false;
  }
  return true;
}

LabelWord Decompose(const LossWord& word, const WhConstraint& c) {
  if (word.empty()) throw std::invalid_argument("Decompose: empty word");
  if (!word[0]) throw std::invalid_argument("Decompose: word must start with 1");
  if (!Satisfies(word, c)) {
    throw std::invalid_argument("Decompose: word " + word.ToString() +
                                " violates " + c.ToString());
  }
  std::vector<int> labels;
  for (int i = 0; i < word.size(); ++i) {
    if (word[i]) {
      labels.push_back(0);
    } else {
      ++labels.back();
    }
  }
  return LabelWord(std::move(labels));
}

namespace {

// Bit i of mask is position i of the word (position 0 = first bit).
bool SatisfiesMask(uint32_t mask, int length, const WhConstraint& c) {
  const int w = std::min(c.s(), length);
  const uint32_t full = length == 32 ? ~0u : ((1u << length) - 1u);
  const uint32_t zeros = ~mask & full;
  const uint32_t window = (1u << w) - 1u;
  for (int start = 0; start + w <= length; ++start) {
    if (std::popcount((zeros >> start) & window) > c.max_losses()) return false;
  }
  return true;
}

}  // namespace

bool DominatesBounded(const WhConstraint& c1, const WhConstraint& c2,
                      int horizon, int max_horizon) {
  if (horizon < std::max(c1.s(), c2.s())) {
    throw std::invalid_argument("DominatesBounded: horizon below max(s1, s2)");
  }
  if (horizon > max_horizon || horizon > 30) {
    throw std::invalid_argument("DominatesBounded: horizon " +
                                std::to_string(horizon) + " exceeds limit " +
                                std::to_string(max_horizon));
  }
  for (int length = 1; length <= horizon; ++length) {
    const uint32_t count = 1u << (length - 1);
    for (uint32_t rest = 0; rest < count; ++rest) {
      const uint32_t mask = 1u | (rest << 1);
      if (SatisfiesMask(mask, length, c1) && !SatisfiesMask(mask, length, c2)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace whcert
