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

// Reward-shaped tabular agent. The shaped reward is R + z * F where F is the
// preference reward grounded from a human preference tree and z is a learned
// shaping weight that is adapted to protect the environment-only return.

#ifndef ACV_AGENT_HPP_
#define ACV_AGENT_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acv/envsim.hpp"
#include "acv/json_io.hpp"
#include "acv/preftree.hpp"
#include "acv/tournament.hpp"

namespace acv {

// Lazily evaluated, memoized per-cell preference reward F.
class PreferenceField {
 public:
  PreferenceField(const GridWorld& world, std::function<double(Cell)> fn);

  // F over the world's cells from a grounded human tree whose nodes are the
  // given candidates.
  static std::shared_ptr<const PreferenceField> FromTree(
      const GridWorld& world, const GroundedTree& tree,
      std::span<const CandidateState> candidates, SimilarityMode mode);
  static std::shared_ptr<const PreferenceField> Constant(const GridWorld& world,
                                                         double value);

  double At(Cell cell) const;
  // T_r of a tree node, when built from a tree.
  std::optional<double> TreeReward(const std::string& id) const;

 private:
  int width_;
  std::function<double(Cell)> fn_;
  std::optional<GroundedTree> tree_;
  mutable std::mutex mu_;
  mutable std::vector<std::optional<double>> memo_;
};

enum class ShapingMode { kScalar, kPerState };

std::string_view ShapingModeName(ShapingMode mode);
ShapingMode ShapingModeFromName(std::string_view name);

struct ShapingModel {
  ShapingMode mode = ShapingMode::kScalar;
  std::vector<double> z;  // One entry (scalar) or one per cell index.
  std::shared_ptr<const PreferenceField> field;

  static ShapingModel Make(const GridWorld& world, ShapingMode mode,
                           std::shared_ptr<const PreferenceField> field,
                           double z_init = 1.0);

  double ZAt(const GridWorld& world, Cell cell) const;
  double F(Cell cell) const { return field->At(cell); }
};

double ShapedReward(const GridWorld& world, Cell before, Action action,
                    Cell after, double env_reward, const ShapingModel& model);

struct TrainingConfig {
  double learning_rate = 0.1;
  double discount = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int episodes = 5000;
  int meta_interval = 200;   // K
  int eval_episodes = 20;    // e
  int probe_episodes = 400;  // Episodes trained per finite-difference probe.
  int probe_repeats = 3;
  double probe_delta = 0.125;
  double meta_step = 0.125;
  double z_min = -5.0;
  double z_max = 5.0;
  bool learn_z = true;
};

Json TrainingConfigToJson(const TrainingConfig& c);
// Missing keys keep their defaults.
TrainingConfig TrainingConfigFromJson(const Json& j);

struct Policy {
  std::vector<std::array<double, 4>> q;  // Indexed by cell, then Action.
  TrainingConfig config;

  // Ties break in lexicographic action-name order.
  Action Greedy(int cell_index) const;
};

struct TraceCheckpoint {
  int episode = 0;
  double mean_env_return = 0.0;
  double z_mean = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
};

struct TrainingTrace {
  std::vector<TraceCheckpoint> checkpoints;
};

std::string TraceToCsv(const TrainingTrace& trace);
Json TraceToJson(const TrainingTrace& trace);

class DivergenceError : public Error {
 public:
  explicit DivergenceError(TrainingTrace trace)
      : Error(ErrorCode::kDivergence, "divergence"), trace_(std::move(trace)) {}
  const TrainingTrace& trace() const { return trace_; }

 private:
  TrainingTrace trace_;
};

struct TrainResult {
  Policy policy;
  ShapingModel model;
  TrainingTrace trace;
};

using CheckpointCallback =
    std::function<void(int episode, const Policy&, const ShapingModel&)>;

// Tabular Q-learning on the shaped reward, alternating with finite-difference
// updates of z every `meta_interval` episodes. Deterministic under `seed`.
TrainResult Train(const GridWorld& world, ShapingModel model,
                  const TrainingConfig& config, std::uint64_t seed,
                  const CheckpointCallback& on_checkpoint = {});

// Undiscounted environment-only return of one greedy rollout from `from`.
double GreedyEnvReturn(const GridWorld& world, const Policy& policy, Cell from);

// Optimal undiscounted environment return from the start cell, by
// finite-horizon value iteration over maxEpisodeSteps.
double OptimalReturn(const GridWorld& world);

enum class OracleBasis { kShapedValue, kTreeReward };

// stateReward(s) + z(s) * F(s).
double ShapedStateValue(const GridWorld& world, const ShapingModel& model,
                        Cell cell);

// Deterministic agent preference: larger value wins, ties to the smaller id.
// kTreeReward ranks tree nodes by T_r (other states fall back to the shaped
// value).
class AgentOracle : public Oracle {
 public:
  AgentOracle(const GridWorld& world, const ShapingModel& model,
              OracleBasis basis = OracleBasis::kShapedValue);

  std::optional<int> Choose(const CandidateState& left,
                            const CandidateState& right) override;
  LabelSource source() const override { return LabelSource::kAgent; }
  double Value(const CandidateState& s) const;

 private:
  const GridWorld& world_;
  const ShapingModel& model_;
  OracleBasis basis_;
};

// Replays a tournament from the human's round-1 pairings with the agent
// oracle, condenses and grounds it.
GroundedTree ExtractAgentTree(const Bracket& human_bracket,
                              std::span<const CandidateState> candidates,
                              const GridWorld& world, const ShapingModel& model,
                              GroundingParams params,
                              OracleBasis basis = OracleBasis::kShapedValue);

// The agent's decision on each human-labelled pair.
std::vector<int> AgentDecisions(std::span<const PreferenceLabel> labels,
                                std::span<const CandidateState> candidates,
                                const GridWorld& world,
                                const ShapingModel& model,
                                OracleBasis basis = OracleBasis::kShapedValue);

// {mode, z:{...}, qTable:{...}, config, seed, episodeIndex}
Json CheckpointToJson(const GridWorld& world, const Policy& policy,
                      const ShapingModel& model, std::uint64_t seed,
                      int episode_index);

}  // namespace acv

#endif  // ACV_AGENT_HPP_
