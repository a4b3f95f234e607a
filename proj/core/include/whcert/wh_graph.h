#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whcert/wh_constraint.h"

namespace whcert {

struct GraphEdge {
  int from;
  int label;
  int to;

  bool operator==(const GraphEdge&) const = default;
  auto operator<=>(const GraphEdge&) const = default;
};

// Labeled graph whose paths generate the admissible loss sequences of a
// constraint. Nodes are 0-based internally and named v1..vn in all output.
class WhGraph {
 public:
  // Minimal label-deterministic graph for c, nodes numbered breadth-first
  // from the all-success state.
  static WhGraph Build(const WhConstraint& c);

  // Checks determinism, reachability from `initial` and non-blocking. Labels
  // above s - r are accepted here so the language check can flag them.
  static WhGraph FromEdges(const WhConstraint& c, int num_nodes, int initial,
                           std::vector<GraphEdge> edges);

  const WhConstraint& constraint() const { return constraint_; }
  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int initial() const { return initial_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  int max_label() const { return max_label_; }

  // Successor of node under label, or -1.
  int Next(int node, int label) const;
  std::vector<GraphEdge> OutEdges(int node) const;

  // Prefix semantics: full blocks must follow edges and the trailing block
  // 1 0^j must be the start of some outgoing label >= j.
  bool Accepts(const LossWord& word) const;

  // "K(r,s)".
  std::string Id() const { return constraint_.ToString(); }

  static std::string NodeName(int node) { return "v" + std::to_string(node + 1); }
  // Inverse of NodeName; throws on malformed names.
  static int ParseNodeName(std::string_view name);

  // {nodes:[...], initial:"v1", edges:[[v,l,v'],...], constraint:{r,s}}
  std::string ToJson() const;
  static WhGraph FromJson(std::string_view text);

 private:
  WhGraph(WhConstraint c, int num_nodes, int initial, std::vector<GraphEdge> edges);

  WhConstraint constraint_;
  int num_nodes_ = 0;
  int initial_ = 0;
  int max_label_ = 0;
  std::vector<GraphEdge> edges_;
  // successor_[node * (max_label_ + 1) + label]
  std::vector<int> successor_;
};

struct LanguageCheck {
  bool equivalent = true;
  std::optional<LossWord> counterexample;
  int words_checked = 0;
};

inline constexpr int kMaxLanguageCheckLength = 20;

// Compares graph acceptance against Satisfies on every word starting with 1
// of length <= max_len, in order of length then lexicographic.
LanguageCheck CheckLanguageEquivalence(const WhGraph& g, const WhConstraint& c,
                                       int max_len);

struct GraphPath {
  std::vector<int> nodes;   // v0 .. vk
  std::vector<int> labels;  // l0 .. l(k-1)

  int ExpandedLength() const;
  LabelWord ToLabelWord() const { return LabelWord(labels); }
  LossWord Expand() const { return ToLabelWord().Expand(); }
  // "v1 0 v1 2 v3"
  std::string ToString() const;
};

enum class PathMode {
  kExactHorizon,  // expanded length == horizon
  kUpToHorizon,   // 1 <= expanded length <= horizon
};

inline constexpr int kDefaultPathHorizon = 20;

// Pull-based depth-first stream of graph paths from the initial node. One
// consumer at a time.
class PathEnumerator {
 public:
  PathEnumerator(const WhGraph& g, int horizon,
                 PathMode mode = PathMode::kExactHorizon,
                 int max_horizon = kDefaultPathHorizon);

  std::optional<GraphPath> Next();

 private:
  const WhGraph& graph_;
  int horizon_;
  PathMode mode_;
  bool done_ = false;
  int length_ = 0;
  GraphPath path_;
  std::vector<int> cursor_;
};

// Counts paths without materializing them.
long long CountPaths(const WhGraph& g, int horizon,
                     PathMode mode = PathMode::kExactHorizon);

std::string ExportDot(const WhGraph& g);

}  // namespace whcert
