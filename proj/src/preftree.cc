// Copyright 2026 The ACV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acv/preftree.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "acv/json_io.hpp"

namespace acv {

PreferenceTree::PreferenceTree(std::string root, std::vector<TreeEdge> edges)
    : root_(std::move(root)), edges_(std::move(edges)) {
  Require(!root_.empty(), "tree root id must be non-empty");
  std::set<std::string> nodes{root_};
  for (const auto& e : edges_) {
    Require(e.weight >= 0, "edge weight must be >= 0");
    Require(e.child != root_, "root cannot have a parent");
    Require(parent_.emplace(e.child, e.parent).second,
            "node has more than one parent: " + e.child);
    nodes.insert(e.parent);
    nodes.insert(e.child);
  }
  Require(nodes.size() == edges_.size() + 1,
          "tree must have exactly nodes - 1 edges");
  // Every node must reach the root through its parent chain.
  for (const auto& id : nodes) {
    std::string cur = id;
    std::size_t hops = 0;
    while (cur != root_) {
      auto it = parent_.find(cur);
      Require(it != parent_.end(), "node not connected to root: " + cur);
      cur = it->second;
      Require(++hops <= nodes.size(), "cycle in tree");
    }
  }
  nodes_.assign(nodes.begin(), nodes.end());
  std::sort(edges_.begin(), edges_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
  });
}

bool PreferenceTree::Contains(const std::string& id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

std::vector<TreeEdge> PreferenceTree::ChildEdges(const std::string& id) const {
  std::vector<TreeEdge> out;
  for (const auto& e : edges_) {
    if (e.parent == id) out.push_back(e);
  }
  return out;
}

std::optional<std::string> PreferenceTree::Parent(const std::string& id) const {
  auto it = parent_.find(id);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

bool PreferenceTree::IsAncestor(const std::string& ancestor,
                                const std::string& id) const {
  auto p = Parent(id);
  while (p) {
    if (*p == ancestor) return true;
    p = Parent(*p);
  }
  return false;
}

namespace {

// Matches won by the dendrogram node's id within its own subtree.
int CountWins(const Dendrogram& d, int index) {
  int wins = 0;
  while (true) {
    const auto& node = d.node(index);
    if (node.children.empty()) return wins;
    if (node.children.size() == 2) ++wins;
    int next = -1;
    for (int c : node.children) {
      if (d.node(c).id == node.id) next = c;
    }
    index = next;
  }
}

void Recurse(const Dendrogram& d, int head, const std::string& emitted,
             std::vector<TreeEdge>& edges) {
  const auto& node = d.node(head);
  for (int child : node.children) {
    const auto& c = d.node(child);
    if (c.id == node.id) {
      Recurse(d, child, emitted, edges);  // skip
    } else {
      edges.push_back({emitted, c.id, CountWins(d, child)});
      Recurse(d, child, c.id, edges);
    }
  }
}

}  // namespace

PreferenceTree Condense(const Dendrogram& d) {
  ValidateDendrogram(d);
  std::vector<TreeEdge> edges;
  Recurse(d, d.root(), d.champion(), edges);
  return PreferenceTree(d.champion(), std::move(edges));
}

GroundedTree GroundRewards(const PreferenceTree& tree, GroundingParams params) {
  Require(params.r_b > 0.0 && params.r_e > 0.0, "r_b and r_e must be > 0");
  GroundedTree g{tree, params, {}, {}};
  // Top-down order by BFS; rewards are then filled in reverse.
  std::vector<std::string> order{tree.root()};
  g.depth[tree.root()] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& e : tree.ChildEdges(order[i])) {
      g.depth[e.child] = g.depth[order[i]] + 1;
      order.push_back(e.child);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto children = tree.ChildEdges(*it);
    if (children.empty()) {
      g.reward[*it] = -params.r_b;
      continue;
    }
    double sum = 0.0;
    for (const auto& e : children) {
      sum += g.reward.at(e.child) + params.r_e * e.weight;
    }
    g.reward[*it] = sum / static_cast<double>(children.size());
  }
  return g;
}

std::string_view SimilarityModeName(SimilarityMode mode) {
  return mode == SimilarityMode::kMinProduct ? "min_product" : "nearest_node";
}

SimilarityMode SimilarityModeFromName(std::string_view name) {
  if (name == "min_product") return SimilarityMode::kMinProduct;
  if (name == "nearest_node") return SimilarityMode::kNearestNode;
  Fail(ErrorCode::kInvalidArgument,
       "unknown similarity mode: " + std::string(name));
}

double PreferenceReward(
    const std::vector<double>& query, const GroundedTree& grounded,
    const std::map<std::string, std::vector<double>>& features_by_id,
    SimilarityMode mode) {
  const auto& nodes = grounded.tree.nodes();
  Require(!nodes.empty(), "preference reward over an empty tree");
  double best = std::numeric_limits<double>::infinity();
  double best_similarity = -std::numeric_limits<double>::infinity();
  double nearest_value = 0.0;
  for (const auto& id : nodes) {
    auto it = features_by_id.find(id);
    Require(it != features_by_id.end(), "missing features for node " + id);
    const double sim = CosineSimilarity(query, it->second);
    const double value =
        sim * grounded.reward.at(id) * grounded.depth.at(id);
    best = std::min(best, value);
    // Nodes are visited in id order, so similarity ties go to the smaller id.
    if (sim > best_similarity) {
      best_similarity = sim;
      nearest_value = value;
    }
  }
  return mode == SimilarityMode::kMinProduct ? best : nearest_value;
}

namespace {

std::vector<double> DepthOverlaps(const GroundedTree& a,
                                  const GroundedTree& b) {
  std::map<int, std::set<std::string>> la, lb;
  int max_depth = 0;
  for (const auto& [id, d] : a.depth) {
    la[d].insert(id);
    max_depth = std::max(max_depth, d);
  }
  for (const auto& [id, d] : b.depth) {
    lb[d].insert(id);
    max_depth = std::max(max_depth, d);
  }
  std::vector<double> out;
  for (int d = 1; d <= max_depth; ++d) {
    const auto& x = la[d];
    const auto& y = lb[d];
    std::vector<std::string> inter, uni;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(),
                          std::back_inserter(inter));
    std::set_union(x.begin(), x.end(), y.begin(), y.end(),
                   std::back_inserter(uni));
    out.push_back(uni.empty() ? 1.0
                              : static_cast<double>(inter.size()) / uni.size());
  }
  return out;
}

}  // namespace

ConformanceMetrics CompareTrees(const GroundedTree& human,
                                const GroundedTree& agent,
                                std::span<const PreferenceLabel> human_labels,
                                std::span<const int> agent_choices) {
  if (human.tree.nodes() != agent.tree.nodes()) {
    Fail(ErrorCode::kMismatch, "trees cover different entrant sets");
  }
  Require(human_labels.size() == agent_choices.size(),
          "one agent decision per human label is required");
  ConformanceMetrics m;
  m.root_agreement = human.tree.root() == agent.tree.root();
  m.structural_match = human.tree == agent.tree;
  m.per_depth_overlap = DepthOverlaps(human, agent);
  m.compared_pairs = static_cast<int>(human_labels.size());
  int agree = 0;
  for (std::size_t i = 0; i < human_labels.size(); ++i) {
    if (agent_choices[i] == human_labels[i].choice) {
      ++agree;
    } else {
      m.flipped.push_back(human_labels[i]);
    }
  }
  m.pairwise_agreement =
      human_labels.empty() ? 1.0
                           : static_cast<double>(agree) / human_labels.size();
  std::stable_sort(m.flipped.begin(), m.flipped.end(),
                   [](const auto& a, const auto& b) { return a.round > b.round; });
  return m;
}

ConformanceMetrics CompareTrees(const GroundedTree& human,
                                const GroundedTree& agent) {
  if (human.tree.nodes() != agent.tree.nodes()) {
    Fail(ErrorCode::kMismatch, "trees cover different entrant sets");
  }
  std::vector<PreferenceLabel> labels;
  std::vector<int> choices;
  for (const auto& e : human.tree.edges()) {
    // Round of the match: the child lost after winning `weight` matches.
    labels.push_back({e.parent, e.child, 0, e.weight + 1, LabelSource::kHuman});
    int choice;
    if (agent.tree.IsAncestor(e.parent, e.child)) {
      choice = 0;
    } else if (agent.tree.IsAncestor(e.child, e.parent)) {
      choice = 1;
    } else {
      const double a = agent.reward.at(e.parent) * agent.depth.at(e.parent);
      const double b = agent.reward.at(e.child) * agent.depth.at(e.child);
      choice = a > b ? 0 : (b > a ? 1 : (e.parent < e.child ? 0 : 1));
    }
    choices.push_back(choice);
  }
  return CompareTrees(human, agent, labels, choices);
}

TreeFormat TreeFormatFromName(std::string_view name) {
  if (name == "json") return TreeFormat::kJson;
  if (name == "dot") return TreeFormat::kDot;
  Fail(ErrorCode::kInvalidArgument, "unknown format: " + std::string(name));
}

namespace {

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string DotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string SerializeTree(const GroundedTree& g, TreeFormat format) {
  if (format == TreeFormat::kJson) return GroundedTreeToJson(g).dump(2) + "\n";
  std::ostringstream out;
  out << "digraph PreferenceTree {\n";
  out << "  node [shape=box];\n";
  for (const auto& id : g.tree.nodes()) {
    out << "  \"" << DotEscape(id) << "\" [label=\"" << DotEscape(id)
        << "\\nT_r=" << FormatNumber(g.reward.at(id))
        << "\\nT_d=" << g.depth.at(id) << "\"];\n";
  }
  for (const auto& e : g.tree.edges()) {
    out << "  \"" << DotEscape(e.parent) << "\" -> \"" << DotEscape(e.child)
        << "\" [label=\"w=" << e.weight << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

GroundedTree ParseGroundedTree(std::string_view json_text) {
  return GroundedTreeFromJson(ParseJson(json_text));
}

}  // namespace acv
