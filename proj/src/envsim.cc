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

#include "acv/envsim.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <utility>

#include "acv/common.hpp"

namespace acv {

std::string_view ActionName(Action action) {
  switch (action) {
    case Action::kUp:
      return "up";
    case Action::kDown:
      return "down";
    case Action::kLeft:
      return "left";
    case Action::kRight:
      return "right";
  }
  return "?";
}

Action ActionFromName(std::string_view name) {
  for (Action a : kAllActions) {
    if (ActionName(a) == name) return a;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown action: " + std::string(name));
}

GridWorld::GridWorld(GridWorldConfig config) : config_(std::move(config)) {
  Require(config_.width > 0 && config_.height > 0,
          "grid dimensions must be positive");
  Require(config_.max_episode_steps > 0, "maxEpisodeSteps must be positive");
  Require(config_.step_penalty <= 0.0, "stepPenalty must be <= 0");
  Require(config_.goal_reward > 0.0, "goalReward must be > 0");
  wall_mask_.assign(CellCount(), 0);
  for (const Cell& w : config_.walls) {
    Require(InBounds(w), "wall out of bounds");
    wall_mask_[Index(w)] = 1;
  }
  Require(InBounds(config_.start) && InBounds(config_.goal),
          "start/goal out of bounds");
  Require(!(config_.start == config_.goal), "start must differ from goal");
  Require(!IsWall(config_.start) && !IsWall(config_.goal),
          "start/goal must not be walls");
  for (int y = 0; y < config_.height; ++y) {
    for (int x = 0; x < config_.width; ++x) {
      if (!IsWall({x, y})) open_cells_.push_back({x, y});
    }
  }
  Require(ShortestPathLength(config_.start) >= 0,
          "no path from start to goal");
}

GridWorld GridWorld::Default() {
  GridWorldConfig c;
  c.width = 9;
  c.height = 9;
  c.start = {0, 0};
  c.goal = {8, 8};
  // Vertical segment in column 4; the only crossing is at the top row.
  for (int y = 1; y < 9; ++y) c.walls.push_back({4, y});
  c.step_penalty = -0.05;
  c.goal_reward = 1.0;
  c.max_episode_steps = 200;
  return GridWorld(std::move(c));
}

GridWorld GridWorld::Named(std::string_view name) {
  if (name == "default") return Default();
  Fail(ErrorCode::kInvalidArgument, "unknown world: " + std::string(name));
}

bool GridWorld::InBounds(Cell c) const {
  return c.x >= 0 && c.y >= 0 && c.x < config_.width && c.y < config_.height;
}

bool GridWorld::IsWall(Cell c) const { return wall_mask_[Index(c)] != 0; }

Cell GridWorld::CellAt(int index) const {
  return {index % config_.width, index / config_.width};
}

Cell GridWorld::Move(Cell from, Action action) const {
  Cell to = from;
  switch (action) {
    case Action::kUp:
      --to.y;
      break;
    case Action::kDown:
      ++to.y;
      break;
    case Action::kLeft:
      --to.x;
      break;
    case Action::kRight:
      ++to.x;
      break;
  }
  return IsOpen(to) ? to : from;
}

double GridWorld::NormalizedGoalDistance(Cell c) const {
  const int manhattan =
      std::abs(c.x - config_.goal.x) + std::abs(c.y - config_.goal.y);
  const int span = (config_.width - 1) + (config_.height - 1);
  return span == 0 ? 0.0 : static_cast<double>(manhattan) / span;
}

double GridWorld::StateReward(Cell c) const {
  return config_.goal_reward * (1.0 - NormalizedGoalDistance(c));
}

int GridWorld::ShortestPathLength(Cell from) const {
  if (!IsOpen(from)) return -1;
  std::vector<int> dist(CellCount(), -1);
  std::deque<Cell> frontier{from};
  dist[Index(from)] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    if (c == config_.goal) return dist[Index(c)];
    for (Action a : kAllActions) {
      const Cell n = Move(c, a);
      if (dist[Index(n)] < 0) {
        dist[Index(n)] = dist[Index(c)] + 1;
        frontier.push_back(n);
      }
    }
  }
  return -1;
}

EpisodeState Reset(const GridWorld& world) {
  return EpisodeState{world.start(), 0, false};
}

StepResult Step(const GridWorld& world, const EpisodeState& state,
                Action action) {
  if (state.done) Fail(ErrorCode::kEpisodeTerminated, "episode-terminated");
  StepResult r;
  r.next.cell = world.Move(state.cell, action);
  r.next.steps = state.steps + 1;
  const bool at_goal = r.next.cell == world.goal();
  r.reward = at_goal ? world.goal_reward() : world.step_penalty();
  r.done = at_goal || r.next.steps >= world.max_episode_steps();
  r.next.done = r.done;
  return r;
}

std::vector<double> Featurize(const GridWorld& world, Cell cell) {
  Require(world.InBounds(cell), "featurize: cell out of bounds");
  int adjacent_walls = 0;
  for (Action a : kAllActions) {
    Cell n = cell;
    switch (a) {
      case Action::kUp:
        --n.y;
        break;
      case Action::kDown:
        ++n.y;
        break;
      case Action::kLeft:
        --n.x;
        break;
      case Action::kRight:
        ++n.x;
        break;
    }
    if (world.InBounds(n) && world.IsWall(n)) ++adjacent_walls;
  }
  return {static_cast<double>(cell.x) / world.width(),
          static_cast<double>(cell.y) / world.height(),
          world.NormalizedGoalDistance(cell), adjacent_walls / 4.0, 1.0};
}

double CosineSimilarity(const std::vector<double>& a,
                        const std::vector<double>& b) {
  Require(a.size() == b.size(), "cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  Require(na > 0.0 && nb > 0.0, "cosine: zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RenderScene RenderState(const GridWorld& world, Cell agent) {
  return RenderScene{world.width(), world.height(), world.config().walls,
                     world.goal(), agent};
}

std::string CandidateId(Cell cell) {
  return "c" + std::to_string(cell.x) + "_" + std::to_string(cell.y);
}

CandidateState MakeCandidate(const GridWorld& world, Cell cell) {
  Require(world.IsOpen(cell), "candidate cell must be open");
  return CandidateState{CandidateId(cell), cell, Featurize(world, cell),
                        world.StateReward(cell), RenderState(world, cell)};
}

std::vector<CandidateState> SampleCandidates(const GridWorld& world, int k,
                                             std::uint64_t seed) {
  const auto& open = world.OpenCells();
  Require(k > 0, "k must be positive");
  Require(static_cast<std::size_t>(k) <= open.size(),
          "k exceeds the number of open cells");
  std::vector<Cell> pool = open;
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<CandidateState> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(MakeCandidate(world, pool[i]));
  return out;
}

}  // namespace acv
