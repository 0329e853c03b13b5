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

#include "acv/tournament.hpp"

#include <algorithm>
#include <set>

namespace acv {

std::string_view LabelSourceName(LabelSource source) {
  switch (source) {
    case LabelSource::kSimulated:
      return "simulated";
    case LabelSource::kHuman:
      return "human";
    case LabelSource::kAgent:
      return "agent";
  }
  return "?";
}

LabelSource LabelSourceFromName(std::string_view name) {
  for (auto s : {LabelSource::kSimulated, LabelSource::kHuman,
                 LabelSource::kAgent}) {
    if (LabelSourceName(s) == name) return s;
  }
  Fail(ErrorCode::kParse, "unknown label source: " + std::string(name));
}

Round PairRound(std::span<const std::string> entrants) {
  Round round;
  std::size_t i = 0;
  for (; i + 1 < entrants.size(); i += 2) {
    round.matches.push_back({entrants[i], entrants[i + 1], std::nullopt});
  }
  if (i < entrants.size()) round.bye = entrants[i];
  return round;
}

Bracket SeedBracket(std::span<const CandidateState> candidates,
                    std::uint64_t seed) {
  Require(candidates.size() >= 2, "a bracket needs at least 2 candidates");
  std::vector<std::string> ids;
  for (const auto& c : candidates) ids.push_back(c.id);
  Require(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size(),
          "candidate ids must be unique");
  Rng rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng.Below(i + 1)]);
  }
  Bracket b;
  b.seed = seed;
  b.entrants = ids;
  b.rounds.push_back(PairRound(ids));
  return b;
}

Dendrogram::Dendrogram(std::vector<DendrogramNode> nodes, int root)
    : nodes_(std::move(nodes)), root_(root) {}

std::vector<std::string> Dendrogram::LeafIds() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.children.empty()) out.push_back(n.id);
  }
  return out;
}

void ValidateDendrogram(const Dendrogram& d) {
  const auto& nodes = d.nodes();
  const int n = static_cast<int>(nodes.size());
  Require(d.root() >= 0 && d.root() < n, "dendrogram: bad root");
  std::vector<int> parent_count(n, 0);
  for (const auto& node : nodes) {
    Require(node.children.size() <= 2, "dendrogram: more than two children");
    int same = 0;
    for (int c : node.children) {
      Require(c >= 0 && c < n, "dendrogram: child index out of range");
      ++parent_count[c];
      if (nodes[c].id == node.id) ++same;
    }
    if (!node.children.empty()) {
      Require(same == 1, "dendrogram: internal node id must match one child");
    }
  }
  Require(parent_count[d.root()] == 0, "dendrogram: root has a parent");
  // Reachability from the root, each node exactly once.
  std::vector<char> seen(n, 0);
  std::vector<int> stack{d.root()};
  int visited = 0;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    Require(!seen[i], "dendrogram: node reached twice");
    seen[i] = 1;
    ++visited;
    for (int c : nodes[i].children) stack.push_back(c);
  }
  Require(visited == n, "dendrogram: unreachable nodes");
  auto leaves = d.LeafIds();
  Require(std::set<std::string>(leaves.begin(), leaves.end()).size() ==
              leaves.size(),
          "dendrogram: repeated entrant leaf");
}

SimulatedOracle::SimulatedOracle(
    std::function<double(const CandidateState&)> ability, BMParams bm,
    std::uint64_t seed)
    : ability_(std::move(ability)), bm_(bm), rng_(seed) {
  Require(bm_.p >= 0.0 && bm_.p <= 0.5, "BM p must lie in [0, 0.5]");
}

std::optional<int> SimulatedOracle::Choose(const CandidateState& left,
                                           const CandidateState& right) {
  const double a = ability_(left);
  const double b = ability_(right);
  if (a == b) return left.id < right.id ? 0 : 1;
  const int stronger = a > b ? 0 : 1;
  const bool upset = rng_.Uniform() < bm_.p;
  return upset ? 1 - stronger : stronger;
}

std::optional<int> ScoreOracle::Choose(const CandidateState& left,
                                       const CandidateState& right) {
  const double a = score_(left);
  const double b = score_(right);
  if (a > b) return 0;
  if (b > a) return 1;
  return left.id < right.id ? 0 : 1;
}

Tournament::Tournament(const Bracket& bracket, LabelSource source) {
  Require(!bracket.rounds.empty(), "bracket has no round 1");
  Require(bracket.entrants.size() >= 2, "bracket needs >= 2 entrants");
  Require(std::set<std::string>(bracket.entrants.begin(),
                                bracket.entrants.end())
                  .size() == bracket.entrants.size(),
          "bracket entrants must be unique");
  const Round expected = PairRound(bracket.entrants);
  const Round& first = bracket.rounds.front();
  Require(first.matches.size() == expected.matches.size(),
          "round 1 does not pair the entrants");
  for (std::size_t i = 0; i < expected.matches.size(); ++i) {
    Require(first.matches[i].left == expected.matches[i].left &&
                first.matches[i].right == expected.matches[i].right,
            "round 1 does not pair the entrants");
  }
  bracket_.seed = bracket.seed;
  bracket_.entrants = bracket.entrants;
  bracket_.rounds.push_back(expected);
  Advance();
  // Replay recorded choices in round order.
  for (std::size_t r = 0; r < bracket.rounds.size(); ++r) {
    for (const Match& m : bracket.rounds[r].matches) {
      if (!m.choice.has_value()) return;
      Submit(m.left, m.right, *m.choice, source);
    }
  }
}

std::optional<std::pair<std::string, std::string>> Tournament::NextPending()
    const {
  if (complete()) return std::nullopt;
  for (const Match& m : bracket_.rounds.back().matches) {
    if (!m.choice.has_value()) return std::make_pair(m.left, m.right);
  }
  return std::nullopt;
}

void Tournament::Submit(const std::string& left, const std::string& right,
                        int choice, LabelSource source) {
  if (choice != 0 && choice != 1) {
    Fail(ErrorCode::kInvalidArgument, "choice must be 0 or 1");
  }
  auto pending = NextPending();
  if (!pending || pending->first != left || pending->second != right) {
    Fail(ErrorCode::kMismatch, "stale or mismatched pair");
  }
  const int round_no = static_cast<int>(bracket_.rounds.size());
  for (Match& m : bracket_.rounds.back().matches) {
    if (!m.choice.has_value()) {
      m.choice = choice;
      break;
    }
  }
  labels_.push_back({left, right, choice, round_no, source});
  Advance();
}

void Tournament::Advance() {
  // Form successive rounds while the current one is fully decided.
  while (!complete()) {
    const Round& current = bracket_.rounds.back();
    for (const Match& m : current.matches) {
      if (!m.choice.has_value()) return;
    }
    std::vector<std::string> advancing;
    for (const Match& m : current.matches) {
      advancing.push_back(*m.choice == 0 ? m.left : m.right);
    }
    if (current.bye) advancing.push_back(*current.bye);
    if (advancing.size() == 1) {
      champion_ = advancing.front();
      return;
    }
    bracket_.rounds.push_back(PairRound(advancing));
  }
}

const std::string& Tournament::champion() const {
  if (!champion_) Fail(ErrorCode::kInvalidArgument, "tournament incomplete");
  return *champion_;
}

Dendrogram Tournament::BuildDendrogram() const {
  if (!complete()) Fail(ErrorCode::kInvalidArgument, "tournament incomplete");
  std::vector<DendrogramNode> nodes;
  std::map<std::string, int> latest;
  for (const auto& id : bracket_.entrants) {
    latest[id] = static_cast<int>(nodes.size());
    nodes.push_back({id, {}, 0});
  }
  for (std::size_t r = 0; r < bracket_.rounds.size(); ++r) {
    const Round& round = bracket_.rounds[r];
    const int round_no = static_cast<int>(r) + 1;
    std::vector<std::pair<std::string, int>> created;
    for (const Match& m : round.matches) {
      const std::string& winner = *m.choice == 0 ? m.left : m.right;
      created.emplace_back(winner, static_cast<int>(nodes.size()));
      nodes.push_back({winner, {latest.at(m.left), latest.at(m.right)},
                       round_no});
    }
    if (round.bye) {
      created.emplace_back(*round.bye, static_cast<int>(nodes.size()));
      nodes.push_back({*round.bye, {latest.at(*round.bye)}, round_no});
    }
    for (const auto& [id, index] : created) latest[id] = index;
  }
  return Dendrogram(std::move(nodes), latest.at(*champion_));
}

TournamentResult RunTournament(const Bracket& bracket,
                               std::span<const CandidateState> candidates,
                               Oracle& oracle) {
  const auto by_id = IndexById(candidates);
  Require(by_id.size() == bracket.entrants.size(),
          "bracket/candidate mismatch");
  for (const auto& id : bracket.entrants) {
    Require(by_id.count(id) == 1, "bracket entrant without candidate: " + id);
  }
  Tournament t(InitialPairings(bracket));
  while (auto pending = t.NextPending()) {
    const auto choice =
        oracle.Choose(*by_id.at(pending->first), *by_id.at(pending->second));
    if (!choice) throw OracleUnresolvedError(t.labels());
    t.Submit(pending->first, pending->second, *choice, oracle.source());
  }
  return {t.BuildDendrogram(), t.labels(), t.bracket()};
}

TournamentResult ReplayTournament(const Bracket& bracket, LabelSource source) {
  Tournament t(bracket, source);
  if (!t.complete()) {
    Fail(ErrorCode::kSessionIncomplete, "session-incomplete");
  }
  return {t.BuildDendrogram(), t.labels(), t.bracket()};
}

Bracket InitialPairings(const Bracket& bracket) {
  Require(!bracket.rounds.empty(), "bracket has no round 1");
  Bracket out;
  out.seed = bracket.seed;
  out.entrants = bracket.entrants;
  out.rounds.push_back(bracket.rounds.front());
  for (Match& m : out.rounds.front().matches) m.choice.reset();
  return out;
}

std::map<std::string, const CandidateState*> IndexById(
    std::span<const CandidateState> candidates) {
  std::map<std::string, const CandidateState*> out;
  for (const auto& c : candidates) {
    Require(out.emplace(c.id, &c).second, "duplicate candidate id: " + c.id);
  }
  return out;
}

}  // namespace acv
