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

#include "acv/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace acv {

PreferenceField::PreferenceField(const GridWorld& world,
                                 std::function<double(Cell)> fn)
    : width_(world.width()), fn_(std::move(fn)), memo_(world.CellCount()) {}

std::shared_ptr<const PreferenceField> PreferenceField::FromTree(
    const GridWorld& world, const GroundedTree& tree,
    std::span<const CandidateState> candidates, SimilarityMode mode) {
  std::map<std::string, std::vector<double>> features;
  for (const auto& c : candidates) features[c.id] = c.features;
  // The world is captured by value so the field outlives its caller.
  auto fn = [world, tree, features = std::move(features), mode](Cell cell) {
    return PreferenceReward(Featurize(world, cell), tree, features, mode);
  };
  auto field = std::make_shared<PreferenceField>(world, std::move(fn));
  field->tree_ = tree;
  return field;
}

std::shared_ptr<const PreferenceField> PreferenceField::Constant(
    const GridWorld& world, double value) {
  return std::make_shared<PreferenceField>(world,
                                           [value](Cell) { return value; });
}

double PreferenceField::At(Cell cell) const {
  const auto index = static_cast<std::size_t>(cell.y * width_ + cell.x);
  std::lock_guard<std::mutex> lock(mu_);
  Require(index < memo_.size(), "preference field: cell out of range");
  if (!memo_[index]) memo_[index] = fn_(cell);
  return *memo_[index];
}

std::optional<double> PreferenceField::TreeReward(const std::string& id) const {
  if (!tree_) return std::nullopt;
  auto it = tree_->reward.find(id);
  if (it == tree_->reward.end()) return std::nullopt;
  return it->second;
}

std::string_view ShapingModeName(ShapingMode mode) {
  return mode == ShapingMode::kScalar ? "scalar" : "perState";
}

ShapingMode ShapingModeFromName(std::string_view name) {
  if (name == "scalar") return ShapingMode::kScalar;
  if (name == "perState") return ShapingMode::kPerState;
  Fail(ErrorCode::kInvalidArgument, "unknown shaping mode: " + std::string(name));
}

ShapingModel ShapingModel::Make(const GridWorld& world, ShapingMode mode,
                                std::shared_ptr<const PreferenceField> field,
                                double z_init) {
  Require(field != nullptr, "shaping model needs a preference field");
  Require(std::isfinite(z_init), "z must be finite");
  ShapingModel m;
  m.mode = mode;
  m.z.assign(mode == ShapingMode::kScalar ? 1 : world.CellCount(), z_init);
  m.field = std::move(field);
  return m;
}

double ShapingModel::ZAt(const GridWorld& world, Cell cell) const {
  return mode == ShapingMode::kScalar ? z.at(0) : z.at(world.Index(cell));
}

double ShapedReward(const GridWorld& world, Cell /*before*/, Action /*action*/,
                    Cell after, double env_reward, const ShapingModel& model) {
  return env_reward + model.ZAt(world, after) * model.F(after);
}

Json TrainingConfigToJson(const TrainingConfig& c) {
  return Json{{"learningRate", c.learning_rate},
              {"discount", c.discount},
              {"epsilonStart", c.epsilon_start},
              {"epsilonEnd", c.epsilon_end},
              {"episodes", c.episodes},
              {"metaInterval", c.meta_interval},
              {"evalEpisodes", c.eval_episodes},
              {"probeEpisodes", c.probe_episodes},
              {"probeRepeats", c.probe_repeats},
              {"probeDelta", c.probe_delta},
              {"metaStep", c.meta_step},
              {"zMin", c.z_min},
              {"zMax", c.z_max},
              {"learnZ", c.learn_z}};
}

TrainingConfig TrainingConfigFromJson(const Json& j) {
  TrainingConfig c;
  if (j.is_null()) return c;
  try {
    c.learning_rate = j.value("learningRate", c.learning_rate);
    c.discount = j.value("discount", c.discount);
    c.epsilon_start = j.value("epsilonStart", c.epsilon_start);
    c.epsilon_end = j.value("epsilonEnd", c.epsilon_end);
    c.episodes = j.value("episodes", c.episodes);
    c.meta_interval = j.value("metaInterval", c.meta_interval);
    c.eval_episodes = j.value("evalEpisodes", c.eval_episodes);
    c.probe_episodes = j.value("probeEpisodes", c.probe_episodes);
    c.probe_repeats = j.value("probeRepeats", c.probe_repeats);
    c.probe_delta = j.value("probeDelta", c.probe_delta);
    c.meta_step = j.value("metaStep", c.meta_step);
    c.z_min = j.value("zMin", c.z_min);
    c.z_max = j.value("zMax", c.z_max);
    c.learn_z = j.value("learnZ", c.learn_z);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("training config: ") + e.what());
  }
  Require(c.learning_rate > 0 && c.learning_rate <= 1, "learningRate in (0,1]");
  Require(c.discount > 0 && c.discount <= 1, "discount in (0,1]");
  Require(c.episodes > 0 && c.meta_interval > 0, "episode counts must be > 0");
  Require(c.eval_episodes > 0 && c.probe_episodes >= 0 &&
              c.probe_repeats > 0,
          "evaluation counts must be positive");
  Require(c.z_min <= c.z_max, "zMin must not exceed zMax");
  return c;
}

Action Policy::Greedy(int cell_index) const {
  const auto& row = q.at(cell_index);
  Action best = kLexicographicActions[0];
  for (Action a : kLexicographicActions) {
    if (row[static_cast<int>(a)] > row[static_cast<int>(best)]) best = a;
  }
  return best;
}

std::string TraceToCsv(const TrainingTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "episode,meanEnvReturn,zMean,zMin,zMax\n";
  for (const auto& c : trace.checkpoints) {
    out << c.episode << ',' << c.mean_env_return << ',' << c.z_mean << ','
        << c.z_min << ',' << c.z_max << '\n';
  }
  return out.str();
}

Json TraceToJson(const TrainingTrace& trace) {
  Json out = Json::array();
  for (const auto& c : trace.checkpoints) {
    out.push_back(Json{{"episode", c.episode},
                       {"meanEnvReturn", c.mean_env_return},
                       {"zMean", c.z_mean},
                       {"zMin", c.z_min},
                       {"zMax", c.z_max}});
  }
  return out;
}

double GreedyEnvReturn(const GridWorld& world, const Policy& policy,
                       Cell from) {
  EpisodeState s{from, 0, false};
  if (from == world.goal()) return 0.0;
  double total = 0.0;
  while (!s.done) {
    const auto r = Step(world, s, policy.Greedy(world.Index(s.cell)));
    total += r.reward;
    s = r.next;
  }
  return total;
}

double OptimalReturn(const GridWorld& world) {
  const int n = world.CellCount();
  // value[s] = best return with `h` steps remaining; the goal is absorbing.
  std::vector<double> value(n, 0.0), next(n, 0.0);
  for (int h = 1; h <= world.max_episode_steps(); ++h) {
    for (const Cell& c : world.OpenCells()) {
      if (c == world.goal()) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (Action a : kAllActions) {
        const Cell to = world.Move(c, a);
        const double v = to == world.goal()
                             ? world.goal_reward()
                             : world.step_penalty() + value[world.Index(to)];
        best = std::max(best, v);
      }
      next[world.Index(c)] = best;
    }
    std::swap(value, next);
  }
  return value[world.Index(world.start())];
}

namespace {

struct Learner {
  const GridWorld& world;
  const TrainingConfig& config;

  double Epsilon(int episode) const {
    const double horizon = std::max(1.0, config.episodes / 2.0);
    const double frac = std::min(1.0, episode / horizon);
    return config.epsilon_start +
           (config.epsilon_end - config.epsilon_start) * frac;
  }

  // Probes replay the full exploration schedule within their own budget.
  double ProbeEpsilon(int probe_episode) const {
    const double horizon = std::max(1.0, config.probe_episodes / 2.0);
    const double frac = std::min(1.0, probe_episode / horizon);
    return config.epsilon_start +
           (config.epsilon_end - config.epsilon_start) * frac;
  }

  void RunEpisode(std::vector<std::array<double, 4>>& q,
                  const ShapingModel& model, double epsilon, Cell start,
                  Rng& rng) const {
    EpisodeState s{start, 0, false};
    if (start == world.goal()) return;
    while (!s.done) {
      const int si = world.Index(s.cell);
      Action a;
      if (rng.Uniform() < epsilon) {
        a = kAllActions[rng.Below(4)];
      } else {
        a = kLexicographicActions[0];
        for (Action b : kLexicographicActions) {
          if (q[si][static_cast<int>(b)] > q[si][static_cast<int>(a)]) a = b;
        }
      }
      const StepResult r = Step(world, s, a);
      const double shaped =
          ShapedReward(world, s.cell, a, r.next.cell, r.reward, model);
      const int ni = world.Index(r.next.cell);
      const bool terminal = r.next.cell == world.goal();
      double target = shaped;
      if (!terminal) {
        target += config.discount *
                  *std::max_element(q[ni].begin(), q[ni].end());
      }
      double& qa = q[si][static_cast<int>(a)];
      qa += config.learning_rate * (target - qa);
      s = r.next;
    }
  }
};

TraceCheckpoint Summarize(int episode, double env_return,
                          const std::vector<double>& z) {
  TraceCheckpoint c;
  c.episode = episode;
  c.mean_env_return = env_return;
  c.z_min = *std::min_element(z.begin(), z.end());
  c.z_max = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += v;
  c.z_mean = sum / static_cast<double>(z.size());
  return c;
}

bool AllFinite(const std::vector<std::array<double, 4>>& q) {
  for (const auto& row : q) {
    for (double v : row) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

TrainResult Train(const GridWorld& world, ShapingModel model,
                  const TrainingConfig& config, std::uint64_t seed,
                  const CheckpointCallback& on_checkpoint) {
  Require(model.field != nullptr, "shaping model needs a preference field");
  for (double v : model.z) Require(std::isfinite(v), "z must be finite");
  const Learner learner{world, config};
  TrainResult result;
  result.policy.q.assign(world.CellCount(), {0.0, 0.0, 0.0, 0.0});
  result.policy.config = config;
  Rng rng(Rng::Derive(seed, 1));

  int episode = 0;
  int meta_index = 0;
  while (episode < config.episodes) {
    const int block_end = std::min(config.episodes, episode + config.meta_interval);
    for (; episode < block_end; ++episode) {
      learner.RunEpisode(result.policy.q, model, learner.Epsilon(episode),
                         world.start(), rng);
    }
    if (!AllFinite(result.policy.q)) {
      result.trace.checkpoints.push_back(Summarize(
          episode, GreedyEnvReturn(world, result.policy, world.start()),
          model.z));
      throw DivergenceError(result.trace);
    }

    if (config.learn_z && episode < config.episodes &&
        config.probe_episodes > 0) {
      // Probes {z, z + delta*d, z - delta*d, 0}: each candidate trains a
      // fresh table probe_repeats times with common random numbers and is
      // scored by the mean environment-only greedy return from the start.
      // A winning zero probe pulls z toward zero.
      const std::uint64_t probe_seed = Rng::Derive(seed, 1000 + meta_index);
      std::vector<double> direction(model.z.size(), 1.0);
      if (model.mode == ShapingMode::kPerState) {
        Rng dir_rng(Rng::Derive(probe_seed, 7));
        for (double& d : direction) d = dir_rng.Below(2) == 0 ? -1.0 : 1.0;
      }
      constexpr double kSigns[3] = {0.0, 1.0, -1.0};
      constexpr int kZeroProbe = 3;
      int best = 0;
      double best_score = 0.0;
      std::vector<std::array<double, 4>> best_q;
      // Tie order: current z, then zero, then the two perturbations.
      for (int side : {0, kZeroProbe, 1, 2}) {
        ShapingModel probe = model;
        for (std::size_t i = 0; i < probe.z.size(); ++i) {
          probe.z[i] =
              side == kZeroProbe
                  ? 0.0
                  : std::clamp(model.z[i] + kSigns[side] * config.probe_delta *
                                                direction[i],
                               config.z_min, config.z_max);
        }
        double score = 0.0;
        double best_replica = -std::numeric_limits<double>::infinity();
        std::vector<std::array<double, 4>> replica_q;
        for (int rep = 0; rep < config.probe_repeats; ++rep) {
          Policy probe_policy{
              std::vector<std::array<double, 4>>(world.CellCount(),
                                                 {0.0, 0.0, 0.0, 0.0}),
              config};
          Rng probe_rng(Rng::Derive(probe_seed, rep));
          for (int i = 0; i < config.probe_episodes; ++i) {
            learner.RunEpisode(probe_policy.q, probe, learner.ProbeEpsilon(i),
                               world.start(), probe_rng);
          }
          const double r = GreedyEnvReturn(world, probe_policy, world.start());
          score += r / config.probe_repeats;
          if (r > best_replica) {
            best_replica = r;
            replica_q = std::move(probe_policy.q);
          }
        }
        constexpr double kTolerance = 1e-9;
        if (side == 0 || score > best_score + kTolerance) {
          best = side;
          best_score = score;
          best_q = std::move(replica_q);
        }
      }
      if (best != 0) {
        for (std::size_t i = 0; i < model.z.size(); ++i) {
          const double move =
              best == kZeroProbe
                  ? -std::clamp(model.z[i], -config.meta_step, config.meta_step)
                  : kSigns[best] * config.meta_step * direction[i];
          model.z[i] =
              std::clamp(model.z[i] + move, config.z_min, config.z_max);
        }
        // Values learned under the old weight are discarded.
        result.policy.q = std::move(best_q);
      }
      ++meta_index;
    }

    double env_return = 0.0;
    for (int i = 0; i < config.eval_episodes; ++i) {
      env_return += GreedyEnvReturn(world, result.policy, world.start());
    }
    env_return /= config.eval_episodes;
    result.trace.checkpoints.push_back(Summarize(episode, env_return, model.z));
    if (on_checkpoint) on_checkpoint(episode, result.policy, model);
  }
  result.model = std::move(model);
  return result;
}

double ShapedStateValue(const GridWorld& world, const ShapingModel& model,
                        Cell cell) {
  return world.StateReward(cell) + model.ZAt(world, cell) * model.F(cell);
}

AgentOracle::AgentOracle(const GridWorld& world, const ShapingModel& model,
                         OracleBasis basis)
    : world_(world), model_(model), basis_(basis) {}

double AgentOracle::Value(const CandidateState& s) const {
  if (basis_ == OracleBasis::kTreeReward) {
    if (auto r = model_.field->TreeReward(s.id)) return *r;
  }
  return ShapedStateValue(world_, model_, s.cell);
}

std::optional<int> AgentOracle::Choose(const CandidateState& left,
                                       const CandidateState& right) {
  const double a = Value(left);
  const double b = Value(right);
  if (a > b) return 0;
  if (b > a) return 1;
  return left.id < right.id ? 0 : 1;
}

GroundedTree ExtractAgentTree(const Bracket& human_bracket,
                              std::span<const CandidateState> candidates,
                              const GridWorld& world, const ShapingModel& model,
                              GroundingParams params, OracleBasis basis) {
  AgentOracle oracle(world, model, basis);
  const auto result =
      RunTournament(InitialPairings(human_bracket), candidates, oracle);
  return GroundRewards(Condense(result.dendrogram), params);
}

std::vector<int> AgentDecisions(std::span<const PreferenceLabel> labels,
                                std::span<const CandidateState> candidates,
                                const GridWorld& world,
                                const ShapingModel& model, OracleBasis basis) {
  const auto by_id = IndexById(candidates);
  AgentOracle oracle(world, model, basis);
  std::vector<int> out;
  for (const auto& l : labels) {
    auto left = by_id.find(l.left_id);
    auto right = by_id.find(l.right_id);
    Require(left != by_id.end() && right != by_id.end(),
            "label refers to an unknown candidate");
    out.push_back(*oracle.Choose(*left->second, *right->second));
  }
  return out;
}

Json CheckpointToJson(const GridWorld& world, const Policy& policy,
                      const ShapingModel& model, std::uint64_t seed,
                      int episode_index) {
  auto key = [](Cell c) {
    return std::to_string(c.x) + "," + std::to_string(c.y);
  };
  Json z = Json::object();
  if (model.mode == ShapingMode::kScalar) {
    z["scalar"] = model.z.at(0);
  } else {
    for (const Cell& c : world.OpenCells()) z[key(c)] = model.z[world.Index(c)];
  }
  Json q = Json::object();
  for (const Cell& c : world.OpenCells()) {
    Json row = Json::object();
    for (Action a : kAllActions) {
      row[std::string(ActionName(a))] =
          policy.q.at(world.Index(c))[static_cast<int>(a)];
    }
    q[key(c)] = row;
  }
  return Json{{"mode", std::string(ShapingModeName(model.mode))},
              {"z", z},
              {"qTable", q},
              {"config", TrainingConfigToJson(policy.config)},
              {"seed", seed},
              {"episodeIndex", episode_index}};
}

}  // namespace acv
