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

// End-to-end advice-conformance experiments: elicit a human preference tree,
// train a shaped agent on it, extract the agent's tree at every checkpoint
// and compare the two.

#ifndef ACV_VERIFY_HPP_
#define ACV_VERIFY_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acv/agent.hpp"
#include "acv/envsim.hpp"
#include "acv/json_io.hpp"
#include "acv/preftree.hpp"
#include "acv/tournament.hpp"

namespace acv {

enum class AdviceKind { kGood, kBad, kCustom };

std::string_view AdviceKindName(AdviceKind kind);
AdviceKind AdviceKindFromName(std::string_view name);

struct AdviceScenario {
  AdviceKind kind = AdviceKind::kGood;
  std::function<double(const CandidateState&)> ability;
  BMParams bm;
};

// good: ability = stateReward. bad: ability = goalReward - stateReward.
// custom: `ability` must be supplied. A bad scenario is rejected unless its
// ability has Pearson r <= -0.5 with stateReward over `candidates`.
AdviceScenario MakeAdviceScenario(
    AdviceKind kind, const GridWorld& world,
    std::span<const CandidateState> candidates, BMParams bm,
    std::function<double(const CandidateState&)> ability = {});

double PearsonCorrelation(std::span<const double> a, std::span<const double> b);

struct ExperimentConfig {
  AdviceKind kind = AdviceKind::kGood;
  double p = 0.3;
  int k = 16;
  std::uint64_t seed = 42;
  std::string world_name = "default";  // "custom" when `world` is explicit.
  GridWorldConfig world = GridWorld::Default().config();
  GroundingParams grounding;
  TrainingConfig training;
  SimilarityMode similarity = SimilarityMode::kNearestNode;
  ShapingMode shaping = ShapingMode::kScalar;
  OracleBasis basis = OracleBasis::kShapedValue;
  double threshold = 0.9;
};

Json ExperimentConfigToJson(const ExperimentConfig& c);
ExperimentConfig ExperimentConfigFromJson(const Json& j);

struct CheckpointResult {
  int episode = 0;
  GroundedTree agent_tree;
  ConformanceMetrics metrics;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CandidateState> candidates;
  Bracket human_bracket;  // Fully decided.
  std::vector<PreferenceLabel> human_labels;
  GroundedTree human_tree;
  std::vector<CheckpointResult> checkpoints;
  TrainingTrace trace;
  double optimal_return = 0.0;
  double final_env_return = 0.0;

  const CheckpointResult& final() const { return checkpoints.back(); }
};

Json ReportToJson(const ExperimentReport& r);
ExperimentReport ReportFromJson(const Json& j);

// The candidate sample and seeded bracket used by RunScenario; live sessions
// with the same config draw the same ones.
std::vector<CandidateState> SampleExperimentCandidates(
    const ExperimentConfig& config);
Bracket SeedExperimentBracket(const ExperimentConfig& config,
                              std::span<const CandidateState> candidates);

// Samples candidates, runs the simulated human tournament and continues with
// RunFromHumanTournament. Custom scenarios take their ability from
// `scenario`; otherwise it is derived from config.kind.
ExperimentReport RunScenario(const ExperimentConfig& config,
                             const std::optional<AdviceScenario>& scenario =
                                 std::nullopt);

// Continues an experiment from an already-decided human bracket (e.g. a live
// session). Throws Error(kSessionIncomplete) if the bracket is not finished.
ExperimentReport RunFromHumanTournament(
    const ExperimentConfig& config, std::vector<CandidateState> candidates,
    const Bracket& human_bracket, LabelSource source = LabelSource::kHuman);

struct Summary {
  bool conformed = false;
  std::string text;
  int exit_status() const { return conformed ? 0 : 1; }
};

// CONFORMED iff the final checkpoint has a structural match and pairwise
// agreement >= threshold; DEVIATED otherwise.
Summary Summarize(const ExperimentReport& report, double threshold = 0.9);
Summary SummarizeMetrics(const ConformanceMetrics& m, double threshold = 0.9);

}  // namespace acv

#endif  // ACV_VERIFY_HPP_
