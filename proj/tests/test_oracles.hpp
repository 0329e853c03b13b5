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

// Independent reference implementations used only by tests.

#ifndef ACV_TESTS_TEST_ORACLES_HPP_
#define ACV_TESTS_TEST_ORACLES_HPP_

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "acv/agent.hpp"
#include "acv/envsim.hpp"
#include "acv/preftree.hpp"
#include "acv/tournament.hpp"

namespace acv::testing {

// Tree straight from the label list: every loser hangs under the player who
// eliminated it, weighted by the loser's own number of wins.
inline PreferenceTree BruteForceCondense(
    const std::vector<std::string>& entrants,
    const std::vector<PreferenceLabel>& labels) {
  std::map<std::string, int> wins;
  std::map<std::string, std::string> eliminated_by;
  for (const auto& l : labels) {
    ++wins[l.winner()];
    eliminated_by[l.loser()] = l.winner();
  }
  std::string root;
  for (const auto& id : entrants) {
    if (!eliminated_by.count(id)) root = id;
  }
  std::vector<TreeEdge> edges;
  for (const auto& [loser, winner] : eliminated_by) {
    edges.push_back({winner, loser, wins[loser]});
  }
  return PreferenceTree(root, edges);
}

inline double NaiveReward(const PreferenceTree& t, const std::string& id,
                          GroundingParams p) {
  const auto children = t.ChildEdges(id);
  if (children.empty()) return -p.r_b;
  double sum = 0.0;
  for (const auto& e : children) sum += NaiveReward(t, e.child, p) + p.r_e * e.weight;
  return sum / static_cast<double>(children.size());
}

inline int NaiveDepth(const PreferenceTree& t, const std::string& id) {
  auto parent = t.Parent(id);
  return parent ? NaiveDepth(t, *parent) + 1 : 1;
}

// Optimal undiscounted return from `from` in a deterministic grid with a
// per-step penalty: the shortest path, if it fits within the step budget.
inline double BfsOptimalReturn(const GridWorld& world, Cell from) {
  std::vector<int> dist(world.CellCount(), -1);
  std::queue<Cell> q;
  dist[world.Index(from)] = 0;
  q.push(from);
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop();
    for (Action a : kAllActions) {
      const Cell n = world.Move(c, a);
      if (dist[world.Index(n)] < 0) {
        dist[world.Index(n)] = dist[world.Index(c)] + 1;
        q.push(n);
      }
    }
  }
  const int steps = dist[world.Index(world.goal())];
  if (steps < 0 || steps > world.max_episode_steps()) {
    return world.max_episode_steps() * world.step_penalty();
  }
  return world.goal_reward() + (steps - 1) * world.step_penalty();
}

// Players p00, p01, ... whose env_reward doubles as their ability.
inline std::vector<CandidateState> Players(const std::vector<double>& ability) {
  std::vector<CandidateState> out;
  for (std::size_t i = 0; i < ability.size(); ++i) {
    CandidateState c;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p%02zu", i);
    c.id = buf;
    c.env_reward = ability[i];
    c.features = {1.0};
    out.push_back(c);
  }
  return out;
}

inline double Ability(const CandidateState& c) { return c.env_reward; }

// Random rooted tree on n nodes with weights in [0, max_weight].
inline PreferenceTree RandomTree(int n, Rng& rng, int max_weight = 5) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "n%03d", i);
    ids.push_back(buf);
  }
  for (int i = n - 1; i > 0; --i) std::swap(ids[i], ids[rng.Below(i + 1)]);
  std::vector<TreeEdge> edges;
  for (int i = 1; i < n; ++i) {
    edges.push_back({ids[rng.Below(i)], ids[i],
                     static_cast<int>(rng.Below(max_weight + 1))});
  }
  return PreferenceTree(ids[0], edges);
}

}  // namespace acv::testing

#endif  // ACV_TESTS_TEST_ORACLES_HPP_
