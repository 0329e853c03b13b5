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

// Preference trees: condensation of tournament dendrograms, bottom-up reward
// grounding, the similarity-extended preference reward, tree comparison and
// JSON/DOT serialization.

#ifndef ACV_PREFTREE_HPP_
#define ACV_PREFTREE_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acv/tournament.hpp"

namespace acv {

struct TreeEdge {
  std::string parent;
  std::string child;
  int weight = 0;

  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

// Rooted tree over distinct state ids. Edges are kept sorted by
// (parent, child); nodes are kept sorted by id.
class PreferenceTree {
 public:
  PreferenceTree() = default;
  // Throws Error(kInvalidArgument) unless the edges form a rooted tree with
  // non-negative weights in which every node appears once.
  PreferenceTree(std::string root, std::vector<TreeEdge> edges);

  const std::string& root() const { return root_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  bool Contains(const std::string& id) const;
  // Outgoing edges of `id`, sorted by child id.
  std::vector<TreeEdge> ChildEdges(const std::string& id) const;
  std::optional<std::string> Parent(const std::string& id) const;
  bool IsAncestor(const std::string& ancestor, const std::string& id) const;

  friend bool operator==(const PreferenceTree& a, const PreferenceTree& b) {
    return a.root_ == b.root_ && a.edges_ == b.edges_ && a.nodes_ == b.nodes_;
  }

 private:
  std::string root_;
  std::vector<std::string> nodes_;
  std::vector<TreeEdge> edges_;
  std::map<std::string, std::string> parent_;
};

// Depth-first condensation of a dendrogram: children repeating the parent id
// are descended through without emitting a node. The weight of edge i -> j is
// the number of matches j won before losing to i.
PreferenceTree Condense(const Dendrogram& d);

struct GroundingParams {
  double r_b = 1.0;  // Leaf penalty.
  double r_e = 0.5;  // Edge reward per unit weight.

  friend bool operator==(const GroundingParams&,
                         const GroundingParams&) = default;
};

struct GroundedTree {
  PreferenceTree tree;
  GroundingParams params;
  std::map<std::string, double> reward;  // T_r
  std::map<std::string, int> depth;      // T_d, root = 1

  friend bool operator==(const GroundedTree&, const GroundedTree&) = default;
};

// Leaves get -r_b; an internal node gets the mean over its children c of
// (T_r(c) + r_e * w_c). Evaluated bottom-up in one pass.
GroundedTree GroundRewards(const PreferenceTree& tree, GroundingParams params);

enum class SimilarityMode {
  // min over nodes s' of cos(s, s') * T_r(s') * T_d(s').
  kMinProduct,
  // cos(s, s*) * T_r(s*) * T_d(s*) for the most cosine-similar node s*.
  kNearestNode,
};

std::string_view SimilarityModeName(SimilarityMode mode);
SimilarityMode SimilarityModeFromName(std::string_view name);

// Preference reward F of a query feature vector. `features_by_id` must hold a
// vector for every tree node. Throws on an empty tree.
double PreferenceReward(const std::vector<double>& query,
                        const GroundedTree& grounded,
                        const std::map<std::string, std::vector<double>>&
                            features_by_id,
                        SimilarityMode mode = SimilarityMode::kMinProduct);

struct ConformanceMetrics {
  bool structural_match = false;
  bool root_agreement = false;
  double pairwise_agreement = 0.0;
  std::vector<double> per_depth_overlap;
  int compared_pairs = 0;
  // Human labels the agent decided the other way, final round first.
  std::vector<PreferenceLabel> flipped;
};

// `agent_choices[i]` is the agent's decision on human_labels[i]'s pair.
ConformanceMetrics CompareTrees(const GroundedTree& human,
                                const GroundedTree& agent,
                                std::span<const PreferenceLabel> human_labels,
                                std::span<const int> agent_choices);

// Tree-only comparison: the human tree's edges are the compared pairs (parent
// preferred over child). The agent tree decides a pair by ancestry, and by the
// larger T_r * T_d (ties to the smaller id) when neither is an ancestor.
ConformanceMetrics CompareTrees(const GroundedTree& human,
                                const GroundedTree& agent);

enum class TreeFormat { kJson, kDot };
TreeFormat TreeFormatFromName(std::string_view name);

std::string SerializeTree(const GroundedTree& g, TreeFormat format);
GroundedTree ParseGroundedTree(std::string_view json_text);

}  // namespace acv

#endif  // ACV_PREFTREE_HPP_
