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

// Desk-scale gridworld MDP, state featurization, uniform candidate sampling
// and resolution-independent scene descriptions for human queries.

#ifndef ACV_ENVSIM_HPP_
#define ACV_ENVSIM_HPP_

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace acv {

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Action { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline constexpr std::array<Action, 4> kAllActions = {
    Action::kUp, Action::kDown, Action::kLeft, Action::kRight};

// Action names in lexicographic order; greedy tie-breaking walks this list.
inline constexpr std::array<Action, 4> kLexicographicActions = {
    Action::kDown, Action::kLeft, Action::kRight, Action::kUp};

std::string_view ActionName(Action action);
Action ActionFromName(std::string_view name);

struct GridWorldConfig {
  int width = 0;
  int height = 0;
  std::vector<Cell> walls;
  Cell start;
  Cell goal;
  double step_penalty = -0.05;
  double goal_reward = 1.0;
  int max_episode_steps = 200;
};

// Immutable, validated gridworld. Construction fails unless start and goal are
// distinct open cells connected by a path.
class GridWorld {
 public:
  explicit GridWorld(GridWorldConfig config);

  // The built-in 9x9 benchmark world.
  static GridWorld Default();
  // Resolves a named built-in ("default").
  static GridWorld Named(std::string_view name);

  const GridWorldConfig& config() const { return config_; }
  int width() const { return config_.width; }
  int height() const { return config_.height; }
  Cell start() const { return config_.start; }
  Cell goal() const { return config_.goal; }
  double step_penalty() const { return config_.step_penalty; }
  double goal_reward() const { return config_.goal_reward; }
  int max_episode_steps() const { return config_.max_episode_steps; }

  bool InBounds(Cell c) const;
  bool IsWall(Cell c) const;
  bool IsOpen(Cell c) const { return InBounds(c) && !IsWall(c); }
  int CellCount() const { return config_.width * config_.height; }
  int Index(Cell c) const { return c.y * config_.width + c.x; }
  Cell CellAt(int index) const;
  // Open cells in row-major order.
  const std::vector<Cell>& OpenCells() const { return open_cells_; }

  // Deterministic move; walls and the grid boundary leave the cell unchanged.
  Cell Move(Cell from, Action action) const;

  // Manhattan distance to the goal divided by (width - 1 + height - 1).
  double NormalizedGoalDistance(Cell c) const;
  // goalReward * (1 - NormalizedGoalDistance(c)); the tournament "ability".
  double StateReward(Cell c) const;
  // Length of the shortest open path from `from` to the goal, -1 if none.
  int ShortestPathLength(Cell from) const;

 private:
  GridWorldConfig config_;
  std::vector<char> wall_mask_;
  std::vector<Cell> open_cells_;
};

struct EpisodeState {
  Cell cell;
  int steps = 0;
  bool done = false;
};

struct StepResult {
  EpisodeState next;
  double reward = 0.0;
  bool done = false;
};

EpisodeState Reset(const GridWorld& world);
// Throws Error(kEpisodeTerminated) when `state.done`.
StepResult Step(const GridWorld& world, const EpisodeState& state,
                Action action);

// [x/width, y/height, normalized goal distance, wall adjacency fraction, 1].
// Wall adjacency counts wall cells among the 4-neighbourhood; the grid
// boundary is not a wall.
std::vector<double> Featurize(const GridWorld& world, Cell cell);

double CosineSimilarity(const std::vector<double>& a,
                        const std::vector<double>& b);

// Scene description consumed by the web UI and DOT export.
struct RenderScene {
  int width = 0;
  int height = 0;
  std::vector<Cell> walls;
  Cell goal;
  Cell agent;
};

RenderScene RenderState(const GridWorld& world, Cell agent);

struct CandidateState {
  std::string id;
  Cell cell;
  std::vector<double> features;
  double env_reward = 0.0;
  RenderScene render;
};

// Id assigned to a sampled cell, e.g. "c3_7".
std::string CandidateId(Cell cell);

CandidateState MakeCandidate(const GridWorld& world, Cell cell);

// Samples k distinct open cells uniformly without replacement.
std::vector<CandidateState> SampleCandidates(const GridWorld& world, int k,
                                             std::uint64_t seed);

}  // namespace acv

#endif  // ACV_ENVSIM_HPP_
