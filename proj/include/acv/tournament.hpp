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

// Single-elimination preference tournaments: random initial pairings, a
// round-by-round state machine driven by a preference oracle, and the
// resulting dendrogram plus the raw label set.

#ifndef ACV_TOURNAMENT_HPP_
#define ACV_TOURNAMENT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acv/common.hpp"
#include "acv/envsim.hpp"

namespace acv {

enum class LabelSource { kSimulated, kHuman, kAgent };

std::string_view LabelSourceName(LabelSource source);
LabelSource LabelSourceFromName(std::string_view name);

// choice 0 means the left state was preferred, 1 the right one.
struct PreferenceLabel {
  std::string left_id;
  std::string right_id;
  int choice = 0;
  int round = 1;
  LabelSource source = LabelSource::kSimulated;

  const std::string& winner() const { return choice == 0 ? left_id : right_id; }
  const std::string& loser() const { return choice == 0 ? right_id : left_id; }
};

struct Match {
  std::string left;
  std::string right;
  std::optional<int> choice;
};

struct Round {
  std::vector<Match> matches;
  std::optional<std::string> bye;
};

struct Bracket {
  std::uint64_t seed = 0;
  std::vector<std::string> entrants;  // Round-1 order.
  std::vector<Round> rounds;
};

// Pairs `entrants` consecutively; an odd count leaves the last one a bye.
Round PairRound(std::span<const std::string> entrants);

// Uniformly shuffles the candidates and pairs them for round 1.
Bracket SeedBracket(std::span<const CandidateState> candidates,
                    std::uint64_t seed);

struct DendrogramNode {
  std::string id;
  std::vector<int> children;  // 0 (leaf), 1 (bye) or 2 (match).
  int round = 0;              // 0 for leaves.
};

class Dendrogram {
 public:
  Dendrogram() = default;
  Dendrogram(std::vector<DendrogramNode> nodes, int root);

  const std::vector<DendrogramNode>& nodes() const { return nodes_; }
  const DendrogramNode& node(int index) const { return nodes_.at(index); }
  int root() const { return root_; }
  const std::string& champion() const { return nodes_.at(root_).id; }
  // Leaf ids in node order.
  std::vector<std::string> LeafIds() const;

 private:
  std::vector<DendrogramNode> nodes_;
  int root_ = -1;
};

// Throws Error(kInvalidArgument) unless every internal node carries the id of
// exactly one child, the tree is rooted, and every node is reachable once.
void ValidateDendrogram(const Dendrogram& d);

// Preference oracle. Choose returns nullopt when the decision is deferred
// (a live human who has not answered yet).
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::optional<int> Choose(const CandidateState& left,
                                    const CandidateState& right) = 0;
  virtual LabelSource source() const = 0;
};

struct BMParams {
  double p = 0.3;
};

// Noisy comparisons: the higher-ability state wins with probability 1 - p.
// Exact ties go to the lexicographically smaller id without consuming noise.
class SimulatedOracle : public Oracle {
 public:
  SimulatedOracle(std::function<double(const CandidateState&)> ability,
                  BMParams bm, std::uint64_t seed);

  std::optional<int> Choose(const CandidateState& left,
                            const CandidateState& right) override;
  LabelSource source() const override { return LabelSource::kSimulated; }

 private:
  std::function<double(const CandidateState&)> ability_;
  BMParams bm_;
  Rng rng_;
};

// Deterministic oracle ranking states by a scalar score (larger wins, exact
// ties to the smaller id).
class ScoreOracle : public Oracle {
 public:
  ScoreOracle(std::function<double(const CandidateState&)> score,
              LabelSource source)
      : score_(std::move(score)), source_(source) {}

  std::optional<int> Choose(const CandidateState& left,
                            const CandidateState& right) override;
  LabelSource source() const override { return source_; }

 private:
  std::function<double(const CandidateState&)> score_;
  LabelSource source_;
};

// Sequential tournament state machine. Rounds after the first are formed
// lazily from the winners of the previous round in bracket order, with a
// carried-over bye entrant appended last.
class Tournament {
 public:
  // `bracket` must define round 1; recorded choices in it are replayed and
  // labelled with `source`.
  explicit Tournament(const Bracket& bracket,
                      LabelSource source = LabelSource::kHuman);

  std::optional<std::pair<std::string, std::string>> NextPending() const;
  // Throws Error(kMismatch) unless (left, right) is the pending pair, and
  // Error(kInvalidArgument) for a choice outside {0, 1}.
  void Submit(const std::string& left, const std::string& right, int choice,
              LabelSource source);

  bool complete() const { return champion_.has_value(); }
  const std::string& champion() const;
  int answered() const { return static_cast<int>(labels_.size()); }
  int total() const { return static_cast<int>(bracket_.entrants.size()) - 1; }
  const std::vector<PreferenceLabel>& labels() const { return labels_; }
  const Bracket& bracket() const { return bracket_; }

  // Requires a complete tournament.
  Dendrogram BuildDendrogram() const;

 private:
  void Advance();

  Bracket bracket_;
  std::vector<PreferenceLabel> labels_;
  std::optional<std::string> champion_;
};

class OracleUnresolvedError : public Error {
 public:
  explicit OracleUnresolvedError(std::vector<PreferenceLabel> partial)
      : Error(ErrorCode::kOracleUnresolved, "oracle-unresolved"),
        partial_(std::move(partial)) {}
  const std::vector<PreferenceLabel>& partial() const { return partial_; }

 private:
  std::vector<PreferenceLabel> partial_;
};

struct TournamentResult {
  Dendrogram dendrogram;
  std::vector<PreferenceLabel> labels;
  Bracket bracket;  // With every choice filled in.
};

// Plays the bracket to completion. Throws OracleUnresolvedError (carrying the
// labels gathered so far) if the oracle defers.
TournamentResult RunTournament(const Bracket& bracket,
                               std::span<const CandidateState> candidates,
                               Oracle& oracle);

// Reconstructs a finished tournament from a bracket with recorded choices.
TournamentResult ReplayTournament(const Bracket& bracket,
                                 LabelSource source = LabelSource::kHuman);

// Copy of `bracket` keeping only round-1 pairings, without choices.
Bracket InitialPairings(const Bracket& bracket);

std::map<std::string, const CandidateState*> IndexById(
    std::span<const CandidateState> candidates);

}  // namespace acv

#endif  // ACV_TOURNAMENT_HPP_
