#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace whcert {

// "Meets r in s": any s consecutive attempts contain at least r successes.
class WhConstraint {
 public:
  WhConstraint(int r, int s);

  int r() const { return r_; }
  int s() const { return s_; }
  // Largest label, s - r.
  int max_losses() const { return s_ - r_; }

  std::string ToString() const;

  bool operator==(const WhConstraint&) const = default;

 private:
  int r_;
  int s_;
};

// Binary loss sequence, 1 = success and 0 = loss.
class LossWord {
 public:
  LossWord() = default;
  explicit LossWord(std::vector<uint8_t> bits);

  // Parses a compact "10010" string. Throws on any other character.
  static LossWord FromString(std::string_view text);

  const std::vector<uint8_t>& bits() const { return bits_; }
  int size() const { return static_cast<int>(bits_.size()); }
  bool empty() const { return bits_.empty(); }
  bool operator[](int i) const { return bits_[i] != 0; }

  std::string ToString() const;

  bool operator==(const LossWord&) const = default;

 private:
  std::vector<uint8_t> bits_;
};

// Label l stands for the block 1 0^l.
class LabelWord {
 public:
  LabelWord() = default;
  explicit LabelWord(std::vector<int> labels);

  const std::vector<int>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }

  LossWord Expand() const;
  // JSON integer array.
  std::string ToJson() const;

  bool operator==(const LabelWord&) const = default;

 private:
  std::vector<int> labels_;
};

// Finite-word satisfaction: no window of length <= s inside the word holds
// more than s - r zeros. Accepts exactly the prefixes of admissible infinite
// sequences that follow an all-success history.
bool Satisfies(const LossWord& word, const WhConstraint& c);

// Splits a word into blocks 1 0^l. Throws std::invalid_argument if the word
// starts with 0, is empty, or violates c.
LabelWord Decompose(const LossWord& word, const WhConstraint& c);

inline constexpr int kMaxDominanceHorizon = 24;

// Bounded check that every word of length <= horizon satisfying c1 satisfies
// c2. A semi-decision only; says nothing about longer words.
bool DominatesBounded(const WhConstraint& c1, const WhConstraint& c2,
                      int horizon, int max_horizon = kMaxDominanceHorizon);

}  // namespace whcert
