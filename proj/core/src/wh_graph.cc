#include "whcert/wh_graph.h"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace whcert {

namespace {

using History = std::vector<uint8_t>;

// Appends 1 0^label to a full-length history and reports whether every
// window of length s ending in the new bits stays within budget.
bool Extend(const History& h, int label, const WhConstraint& c, History* next) {
  History bits = h;
  bits.push_back(1);
  bits.insert(bits.end(), label, 0);
  const int s = c.s();
  const int n = static_cast<int>(bits.size());
  for (int end = static_cast<int>(h.size()); end < n; ++end) {
    int zeros = 0;
    for (int i = std::max(0, end - s + 1); i <= end; ++i) zeros += bits[i] ? 0 : 1;
    if (zeros > c.max_losses()) return false;
  }
  next->assign(bits.end() - (s - 1), bits.end());
  return true;
}

}  // namespace

WhGraph::WhGraph(WhConstraint c, int num_nodes, int initial,
                 std::vector<GraphEdge> edges)
    : constraint_(c), num_nodes_(num_nodes), initial_(initial),
      edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  max_label_ = 0;
  for (const auto& e : edges_) max_label_ = std::max(max_label_, e.label);
  successor_.assign(static_cast<size_t>(num_nodes_) * (max_label_ + 1), -1);
  for (const auto& e : edges_) {
    successor_[e.from * (max_label_ + 1) + e.label] = e.to;
  }
}

WhGraph WhGraph::Build(const WhConstraint& c) {
  // Explore history states reachable at success instants.
  const int hist_len = c.s() - 1;
  std::map<History, int> index;
  std::vector<History> states;
  History start(hist_len, 1);
  index[start] = 0;
  states.push_back(start);
  std::vector<std::vector<int>> succ;  // succ[state][label], -1 if blocked
  for (size_t k = 0; k < states.size(); ++k) {
    std::vector<int> row(c.max_losses() + 1, -1);
    for (int l = 0; l <= c.max_losses(); ++l) {
      History next;
      if (!Extend(states[k], l, c, &next)) continue;
      auto [it, inserted] = index.emplace(next, static_cast<int>(states.size()));
      if (inserted) states.push_back(next);
      row[l] = it->second;
    }
    succ.push_back(std::move(row));
  }

  // Moore refinement, starting from the enabled-label signature.
  const int n = static_cast<int>(states.size());
  const int L = c.max_losses() + 1;
  std::vector<int> cls(n, 0);
  {
    std::map<std::vector<int>, int> sig;
    for (int k = 0; k < n; ++k) {
      std::vector<int> key(L);
      for (int l = 0; l < L; ++l) key[l] = succ[k][l] >= 0 ? 1 : 0;
      cls[k] = sig.emplace(key, static_cast<int>(sig.size())).first->second;
    }
  }
  while (true) {
    std::map<std::vector<int>, int> sig;
    std::vector<int> refined(n);
    for (int k = 0; k < n; ++k) {
      std::vector<int> key{cls[k]};
      for (int l = 0; l < L; ++l) key.push_back(succ[k][l] >= 0 ? cls[succ[k][l]] : -1);
      refined[k] = sig.emplace(key, static_cast<int>(sig.size())).first->second;
    }
    const int before = *std::max_element(cls.begin(), cls.end()) + 1;
    const int after = static_cast<int>(sig.size());
    cls = refined;
    if (after == before) break;
  }

  // Breadth-first naming from the initial class, labels ascending.
  const int num_classes = *std::max_element(cls.begin(), cls.end()) + 1;
  std::vector<int> representative(num_classes, -1);
  for (int k = n - 1; k >= 0; --k) representative[cls[k]] = k;
  std::vector<int> name(num_classes, -1);
  std::deque<int> queue{cls[0]};
  name[cls[0]] = 0;
  int next_name = 1;
  std::vector<GraphEdge> edges;
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    const int rep = representative[k];
    for (int l = 0; l < L; ++l) {
      const int t = succ[rep][l];
      if (t < 0) continue;
      const int tc = cls[t];
      if (name[tc] < 0) {
        name[tc] = next_name++;
        queue.push_back(tc);
      }
      edges.push_back({name[k], l, name[tc]});
    }
  }
  return WhGraph(c, next_name, 0, std::move(edges));
}

WhGraph WhGraph::FromEdges(const WhConstraint& c, int num_nodes, int initial,
                           std::vector<GraphEdge> edges) {
  if (num_nodes < 1) throw std::invalid_argument("WhGraph: no nodes");
  if (initial < 0 || initial >= num_nodes) {
    throw std::invalid_argument("WhGraph: initial node out of range");
  }
  std::map<std::pair<int, int>, int> seen;
  std::vector<int> out_degree(num_nodes, 0);
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= num_nodes || e.to < 0 || e.to >= num_nodes) {
      throw std::invalid_argument("WhGraph: edge endpoint out of range");
    }
    if (e.label < 0) throw std::invalid_argument("WhGraph: negative label");
    if (!seen.emplace(std::make_pair(e.from, e.label), e.to).second) {
      throw std::invalid_argument("WhGraph: two edges leave " + NodeName(e.from) +
                                  " with label " + std::to_string(e.label));
    }
    ++out_degree[e.from];
  }
  for (int v = 0; v < num_nodes; ++v) {
    if (out_degree[v] == 0) {
      throw std::invalid_argument("WhGraph: node " + NodeName(v) + " is blocking");
    }
  }
  std::vector<bool> reached(num_nodes, false);
  std::deque<int> queue{initial};
  reached[initial] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& e : edges) {
      if (e.from == v && !reached[e.to]) {
        reached[e.to] = true;
        queue.push_back(e.to);
      }
    }
  }
  for (int v = 0; v < num_nodes; ++v) {
    if (!reached[v]) {
      throw std::invalid_argument("WhGraph: node " + NodeName(v) + " unreachable");
    }
  }
  return WhGraph(c, num_nodes, initial, std::move(edges));
}

int WhGraph::Next(int node, int label) const {
  if (node < 0 || node >= num_nodes_ || label < 0 || label > max_label_) return -1;
  return successor_[node * (max_label_ + 1) + label];
}

std::vector<GraphEdge> WhGraph::OutEdges(int node) const {
  std::vector<GraphEdge> out;
  for (const auto& e : edges_) {
    if (e.from == node) out.push_back(e);
  }
  return out;
}

bool WhGraph::Accepts(const LossWord& word) const {
  if (word.empty() || !word[0]) return false;
  int node = initial_;
  int i = 0;
  const int n = word.size();
  while (i < n) {
    int j = i + 1;
    while (j < n && !word[j]) ++j;
    const int zeros = j - i - 1;
    if (j < n) {
      node = Next(node, zeros);
      if (node < 0) return false;
    } else {
      for (int l = zeros; l <= max_label_; ++l) {
        if (Next(node, l) >= 0) return true;
      }
      return false;
    }
    i = j;
  }
  return true;
}

int WhGraph::ParseNodeName(std::string_view name) {
  if (name.size() < 2 || name[0] != 'v') {
    throw std::invalid_argument("bad node name '" + std::string(name) + "'");
  }
  int value = 0;
  for (char ch : name.substr(1)) {
    if (ch < '0' || ch > '9') {
      throw std::invalid_argument("bad node name '" + std::string(name) + "'");
    }
    value = value * 10 + (ch - '0');
  }
  if (value < 1) throw std::invalid_argument("bad node name '" + std::string(name) + "'");
  return value - 1;
}

std::string WhGraph::ToJson() const {
  nlohmann::ordered_json j;
  j["constraint"] = {{"r", constraint_.r()}, {"s", constraint_.s()}};
  auto nodes = nlohmann::ordered_json::array();
  for (int v = 0; v < num_nodes_; ++v) nodes.push_back(NodeName(v));
  j["nodes"] = nodes;
  j["initial"] = NodeName(initial_);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : edges_) {
    edges.push_back({NodeName(e.from), e.label, NodeName(e.to)});
  }
  j["edges"] = edges;
  return j.dump(2);
}

WhGraph WhGraph::FromJson(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  WhConstraint c(j.at("constraint").at("r").get<int>(),
                 j.at("constraint").at("s").get<int>());
  const int n = static_cast<int>(j.at("nodes").size());
  std::vector<GraphEdge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({ParseNodeName(e.at(0).get<std::string>()), e.at(1).get<int>(),
                     ParseNodeName(e.at(2).get<std::string>())});
  }
  return FromEdges(c, n, ParseNodeName(j.at("initial").get<std::string>()),
                   std::move(edges));
}

LanguageCheck CheckLanguageEquivalence(const WhGraph& g, const WhConstraint& c,
                                       int max_len) {
  if (max_len < 1 || max_len > kMaxLanguageCheckLength) {
    throw std::invalid_argument("CheckLanguageEquivalence: max_len must be in [1, " +
                                std::to_string(kMaxLanguageCheckLength) + "]");
  }
  LanguageCheck result;
  for (int length = 1; length <= max_len; ++length) {
    const uint32_t count = 1u << (length - 1);
    std::vector<uint8_t> bits(length);
    for (uint32_t rest = 0; rest < count; ++rest) {
      // rest read most-significant first after the leading 1.
      bits[0] = 1;
      for (int i = 1; i < length; ++i) bits[i] = (rest >> (length - 1 - i)) & 1u;
      LossWord word(bits);
      ++result.words_checked;
      if (g.Accepts(word) != Satisfies(word, c)) {
        result.equivalent = false;
        result.counterexample = word;
        return result;
      }
    }
  }
  return result;
}

int GraphPath::ExpandedLength() const {
  int total = 0;
  for (int l : labels) total += 1 + l;
  return total;
}

std::string GraphPath::ToString() const {
  std::ostringstream os;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (i) os << ' ' << labels[i - 1] << ' ';
    os << WhGraph::NodeName(nodes[i]);
  }
  return os.str();
}

PathEnumerator::PathEnumerator(const WhGraph& g, int horizon, PathMode mode,
                               int max_horizon)
    : graph_(g), horizon_(horizon), mode_(mode) {
  if (horizon < 1 || horizon > max_horizon) {
    throw std::invalid_argument("PathEnumerator: horizon must be in [1, " +
                                std::to_string(max_horizon) + "]");
  }
  path_.nodes.push_back(g.initial());
  cursor_.push_back(0);
}

std::optional<GraphPath> PathEnumerator::Next() {
  while (!done_) {
    const int node = path_.nodes.back();
    int& cur = cursor_.back();
    int chosen = -1;
    for (int l = cur; l <= graph_.max_label(); ++l) {
      if (length_ + 1 + l > horizon_) break;
      if (graph_.Next(node, l) >= 0) {
        chosen = l;
        break;
      }
    }
    if (chosen >= 0) {
      cur = chosen + 1;
      path_.labels.push_back(chosen);
      path_.nodes.push_back(graph_.Next(node, chosen));
      length_ += 1 + chosen;
      cursor_.push_back(0);
      if (mode_ == PathMode::kUpToHorizon || length_ == horizon_) return path_;
      continue;
    }
    if (path_.labels.empty()) {
      done_ = true;
      break;
    }
    cursor_.pop_back();
    length_ -= 1 + path_.labels.back();
    path_.labels.pop_back();
    path_.nodes.pop_back();
  }
  return std::nullopt;
}

long long CountPaths(const WhGraph& g, int horizon, PathMode mode) {
  // count[len][node]: paths of expanded length len ending at node.
  std::vector<std::vector<long long>> count(
      horizon + 1, std::vector<long long>(g.num_nodes(), 0));
  count[0][g.initial()] = 1;
  for (int len = 0; len < horizon; ++len) {
    for (const auto& e : g.edges()) {
      const int next = len + 1 + e.label;
      if (next <= horizon) count[next][e.to] += count[len][e.from];
    }
  }
  long long total = 0;
  for (int len = 1; len <= horizon; ++len) {
    if (mode == PathMode::kExactHorizon && len != horizon) continue;
    for (long long c : count[len]) total += c;
  }
  return total;
}

std::string ExportDot(const WhGraph& g) {
  std::ostringstream os;
  os << "digraph \"" << g.Id() << "\" {\n";
  os << "  rankdir=LR;\n";
  for (int v = 0; v < g.num_nodes(); ++v) {
    os << "  " << WhGraph::NodeName(v)
       << (v == g.initial() ? " [shape=doublecircle];\n" : " [shape=circle];\n");
  }
  for (const auto& e : g.edges()) {
    os << "  " << WhGraph::NodeName(e.from) << " -> " << WhGraph::NodeName(e.to)
       << " [label=\"" << e.label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace whcert
