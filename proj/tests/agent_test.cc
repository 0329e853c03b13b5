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

#include <cmath>

#include "gtest/gtest.h"
#include "test_oracles.hpp"

namespace acv {
namespace {

ShapingModel ZeroModel(const GridWorld& w) {
  return ShapingModel::Make(w, ShapingMode::kScalar,
                            PreferenceField::Constant(w, 0.0), 0.0);
}

TEST(ShapedRewardTest, AddsScaledFieldAtNextState) {
  const GridWorld w = GridWorld::Default();
  auto field = std::make_shared<PreferenceField>(
      w, [](Cell c) { return -0.1 * c.x - 0.01 * c.y; });
  const auto model = ShapingModel::Make(w, ShapingMode::kScalar, field, 2.0);
  EXPECT_DOUBLE_EQ(ShapedReward(w, {0, 0}, Action::kRight, {1, 0}, -0.05, model),
                   -0.05 + 2.0 * -0.1);
  EXPECT_DOUBLE_EQ(ShapedReward(w, {0, 0}, Action::kRight, {1, 0}, -0.05,
                                ZeroModel(w)),
                   -0.05);
  ShapingModel per = ShapingModel::Make(w, ShapingMode::kPerState, field, 0.0);
  per.z[w.Index({2, 3})] = -1.0;
  EXPECT_DOUBLE_EQ(ShapedReward(w, {2, 2}, Action::kDown, {2, 3}, 1.0, per),
                   1.0 + 0.23);
  EXPECT_DOUBLE_EQ(ShapedReward(w, {1, 3}, Action::kRight, {2, 2}, 1.0, per), 1.0);
  EXPECT_THROW(ShapingModel::Make(w, ShapingMode::kScalar, nullptr), Error);
  EXPECT_THROW(ShapingModel::Make(w, ShapingMode::kScalar, field, NAN), Error);
}

TEST(OptimalReturnTest, MatchesBfsOracle) {
  const GridWorld w = GridWorld::Default();
  EXPECT_NEAR(OptimalReturn(w), testing::BfsOptimalReturn(w, w.start()), 1e-12);
  EXPECT_NEAR(OptimalReturn(w), 0.25, 1e-12);
  GridWorldConfig c;
  c.width = 6;
  c.height = 4;
  c.start = {5, 3};
  c.goal = {0, 0};
  c.walls = {{2, 0}, {2, 1}, {2, 2}, {4, 3}, {4, 2}};
  const GridWorld other{c};
  EXPECT_NEAR(OptimalReturn(other), testing::BfsOptimalReturn(other, other.start()),
              1e-12);
}

TEST(TrainTest, FrozenZeroConvergesToOptimum) {
  const GridWorld w = GridWorld::Default();
  TrainingConfig config;
  config.learn_z = false;
  const auto result = Train(w, ZeroModel(w), config, 42);
  const double optimum = testing::BfsOptimalReturn(w, w.start());
  const double achieved = GreedyEnvReturn(w, result.policy, w.start());
  EXPECT_GE(achieved, optimum - 0.01 * std::abs(optimum));
  EXPECT_EQ(result.trace.checkpoints.back().episode, config.episodes);
  EXPECT_DOUBLE_EQ(result.model.z[0], 0.0);
}

TEST(TrainTest, DeterministicForSeed) {
  const GridWorld w = GridWorld::Default();
  TrainingConfig config;
  config.episodes = 400;
  config.probe_episodes = 100;
  config.probe_repeats = 2;
  auto field = std::make_shared<PreferenceField>(
      w, [&w](Cell c) { return -w.NormalizedGoalDistance(c); });
  const auto model = ShapingModel::Make(w, ShapingMode::kScalar, field, 1.0);
  const auto a = Train(w, model, config, 5);
  const auto b = Train(w, model, config, 5);
  EXPECT_EQ(a.policy.q, b.policy.q);
  EXPECT_EQ(a.model.z, b.model.z);
  EXPECT_EQ(TraceToCsv(a.trace), TraceToCsv(b.trace));
  const auto c = Train(w, model, config, 6);
  EXPECT_NE(a.policy.q, c.policy.q);
}

TEST(TrainTest, CheckpointCallbackEveryInterval) {
  const GridWorld w = GridWorld::Default();
  TrainingConfig config;
  config.episodes = 600;
  config.learn_z = false;
  std::vector<int> seen;
  Train(w, ZeroModel(w), config, 1,
        [&](int episode, const Policy&, const ShapingModel&) {
          seen.push_back(episode);
        });
  EXPECT_EQ(seen, (std::vector<int>{200, 400, 600}));
}

TEST(TrainTest, DivergenceCarriesTrace) {
  const GridWorld w = GridWorld::Default();
  const auto model = ShapingModel::Make(w, ShapingMode::kScalar,
                                        PreferenceField::Constant(w, 1e308), 5.0);
  TrainingConfig config;
  config.episodes = 400;
  try {
    Train(w, model, config, 3);
    FAIL() << "overflowing rewards did not diverge";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
    EXPECT_FALSE(e.trace().checkpoints.empty());
  }
}

TEST(TrainingConfigTest, JsonRoundTripAndValidation) {
  TrainingConfig c;
  c.episodes = 123;
  c.probe_delta = 0.5;
  c.learn_z = false;
  const Json j = TrainingConfigToJson(c);
  EXPECT_EQ(TrainingConfigToJson(TrainingConfigFromJson(j)), j);
  Json bad = j;
  bad["probeRepeats"] = 0;
  EXPECT_THROW(TrainingConfigFromJson(bad), Error);
  bad = j;
  bad["discount"] = 1.5;
  EXPECT_THROW(TrainingConfigFromJson(bad), Error);
}

TEST(AgentOracleTest, ZeroShapingMatchesEnvironmentOnAllPairs) {
  const GridWorld w = GridWorld::Default();
  const auto model = ZeroModel(w);
  AgentOracle oracle(w, model);
  for (const Cell& a : w.OpenCells()) {
    for (const Cell& b : w.OpenCells()) {
      if (a == b) continue;
      const auto ca = MakeCandidate(w, a);
      const auto cb = MakeCandidate(w, b);
      const double ra = w.StateReward(a), rb = w.StateReward(b);
      const int expected = ra > rb ? 0 : (rb > ra ? 1 : (ca.id < cb.id ? 0 : 1));
      ASSERT_EQ(*oracle.Choose(ca, cb), expected) << ca.id << " " << cb.id;
    }
  }
}

TEST(AgentOracleTest, TiesGoToSmallerId) {
  const GridWorld w = GridWorld::Default();
  const auto model = ZeroModel(w);
  AgentOracle oracle(w, model);
  // Same Manhattan distance to the goal.
  const auto a = MakeCandidate(w, {8, 6});
  const auto b = MakeCandidate(w, {6, 8});
  ASSERT_EQ(w.StateReward(a.cell), w.StateReward(b.cell));
  const int smaller_left = a.id < b.id ? 0 : 1;
  EXPECT_EQ(*oracle.Choose(a, b), smaller_left);
  EXPECT_EQ(*oracle.Choose(b, a), 1 - smaller_left);
}

// A field that is itself an affine function of the state reward, scaled by a
// positive z, induces the same order as the environment alone.
TEST(AgentOracleTest, InvariantUnderPositiveAffineShaping) {
  const GridWorld w = GridWorld::Default();
  const auto base = ZeroModel(w);
  AgentOracle env(w, base);
  Rng rng(99);
  const auto& cells = w.OpenCells();
  for (int i = 0; i < 1000; ++i) {
    const double alpha = 3.0 * rng.Uniform();
    const double beta = 10.0 * (rng.Uniform() - 0.5);
    auto field = std::make_shared<PreferenceField>(
        w, [&w, alpha, beta](Cell c) { return alpha * w.StateReward(c) + beta; });
    const auto model = ShapingModel::Make(w, ShapingMode::kScalar, field,
                                          0.1 + rng.Uniform());
    AgentOracle shaped(w, model);
    const auto a = MakeCandidate(w, cells[rng.Below(cells.size())]);
    const auto b = MakeCandidate(w, cells[rng.Below(cells.size())]);
    if (a.id == b.id || w.StateReward(a.cell) == w.StateReward(b.cell)) continue;
    ASSERT_EQ(*shaped.Choose(a, b), *env.Choose(a, b));
  }
}

TEST(AgentOracleTest, TreeRewardBasisUsesNodeRewards) {
  const GridWorld w = GridWorld::Default();
  const std::vector<CandidateState> cands = {MakeCandidate(w, {0, 0}),
                                             MakeCandidate(w, {8, 7})};
  // The far cell is preferred in the tree.
  const auto tree =
      GroundRewards(PreferenceTree(cands[0].id, {{cands[0].id, cands[1].id, 0}}), {});
  const auto field =
      PreferenceField::FromTree(w, tree, cands, SimilarityMode::kNearestNode);
  const auto model = ShapingModel::Make(w, ShapingMode::kScalar, field, 0.0);
  AgentOracle by_tree(w, model, OracleBasis::kTreeReward);
  AgentOracle by_value(w, model);
  EXPECT_EQ(*by_tree.Choose(cands[0], cands[1]), 0);
  EXPECT_EQ(*by_value.Choose(cands[0], cands[1]), 1);
  EXPECT_DOUBLE_EQ(*field->TreeReward(cands[0].id), -1.0);
  EXPECT_FALSE(field->TreeReward("c4_0").has_value());
}

TEST(CheckpointTest, JsonCoversOpenCells) {
  const GridWorld w = GridWorld::Default();
  TrainingConfig config;
  config.episodes = 200;
  config.learn_z = false;
  const auto result = Train(w, ZeroModel(w), config, 8);
  const Json j = CheckpointToJson(w, result.policy, result.model, 8, 200);
  EXPECT_EQ(j.at("mode"), "scalar");
  EXPECT_EQ(j.at("z").at("scalar"), 0.0);
  EXPECT_EQ(j.at("qTable").size(), w.OpenCells().size());
  EXPECT_EQ(j.at("qTable").at("0,0").size(), 4u);
  EXPECT_FALSE(j.at("qTable").contains("4,4"));
  EXPECT_EQ(j.at("seed"), 8);
  EXPECT_EQ(j.at("episodeIndex"), 200);
}

TEST(TraceTest, CsvHeaderAndRows) {
  TrainingTrace t;
  t.checkpoints.push_back({200, 0.25, 1.0, 1.0, 1.0});
  t.checkpoints.push_back({400, -10.0, 0.5, 0.5, 0.5});
  const std::string csv = TraceToCsv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "episode,meanEnvReturn,zMean,zMin,zMax");
  EXPECT_NE(csv.find("\n400,-10,0.5,0.5,0.5\n"), std::string::npos);
  EXPECT_EQ(TraceToJson(t).size(), 2u);
}

TEST(PolicyTest, GreedyBreaksTiesByActionName) {
  Policy p;
  p.q = {{0.0, 0.0, 0.0, 0.0}};
  // "down" < "left" < "right" < "up".
  EXPECT_EQ(p.Greedy(0), Action::kDown);
  p.q[0][static_cast<int>(Action::kUp)] = 1.0;
  EXPECT_EQ(p.Greedy(0), Action::kUp);
}

}  // namespace
}  // namespace acv
