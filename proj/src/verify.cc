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

#include "acv/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace acv {

namespace {

// Sub-stream identifiers for Rng::Derive.
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kBracketStream = 2;
constexpr std::uint64_t kOracleStream = 3;
constexpr std::uint64_t kTrainStream = 4;

std::string Fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view AdviceKindName(AdviceKind kind) {
  switch (kind) {
    case AdviceKind::kGood:
      return "good";
    case AdviceKind::kBad:
      return "bad";
    case AdviceKind::kCustom:
      return "custom";
  }
  return "?";
}

AdviceKind AdviceKindFromName(std::string_view name) {
  for (auto k : {AdviceKind::kGood, AdviceKind::kBad, AdviceKind::kCustom}) {
    if (AdviceKindName(k) == name) return k;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown advice kind: " + std::string(name));
}

double PearsonCorrelation(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size() && a.size() >= 2, "pearson: need paired data");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

AdviceScenario MakeAdviceScenario(
    AdviceKind kind, const GridWorld& world,
    std::span<const CandidateState> candidates, BMParams bm,
    std::function<double(const CandidateState&)> ability) {
  AdviceScenario s;
  s.kind = kind;
  s.bm = bm;
  switch (kind) {
    case AdviceKind::kGood:
      s.ability = [](const CandidateState& c) { return c.env_reward; };
      break;
    case AdviceKind::kBad: {
      const double offset = world.goal_reward();
      s.ability = [offset](const CandidateState& c) {
        return offset - c.env_reward;
      };
      break;
    }
    case AdviceKind::kCustom:
      Require(static_cast<bool>(ability), "custom advice needs an ability");
      s.ability = std::move(ability);
      break;
  }
  if (kind == AdviceKind::kBad && candidates.size() >= 2) {
    std::vector<double> a, r;
    for (const auto& c : candidates) {
      a.push_back(s.ability(c));
      r.push_back(c.env_reward);
    }
    Require(PearsonCorrelation(a, r) <= -0.5,
            "bad advice must anti-correlate with stateReward (r <= -0.5)");
  }
  return s;
}

Json ExperimentConfigToJson(const ExperimentConfig& c) {
  return Json{{"case", std::string(AdviceKindName(c.kind))},
              {"p", c.p},
              {"players", c.k},
              {"seed", c.seed},
              {"worldName", c.world_name},
              {"world", WorldConfigToJson(c.world)},
              {"grounding", Json{{"r_b", c.grounding.r_b}, {"r_e", c.grounding.r_e}}},
              {"training", TrainingConfigToJson(c.training)},
              {"similarity", std::string(SimilarityModeName(c.similarity))},
              {"shaping", std::string(ShapingModeName(c.shaping))},
              {"oracleBasis",
               c.basis == OracleBasis::kShapedValue ? "shapedValue" : "treeReward"},
              {"threshold", c.threshold}};
}

ExperimentConfig ExperimentConfigFromJson(const Json& j) {
  ExperimentConfig c;
  try {
    c.kind = AdviceKindFromName(j.value("case", "good"));
    c.p = j.value("p", c.p);
    c.k = j.value("players", c.k);
    c.seed = j.value("seed", c.seed);
    c.world_name = j.value("worldName", c.world_name);
    if (j.contains("world")) {
      c.world = WorldConfigFromJson(j.at("world"));
    } else {
      c.world = GridWorld::Named(c.world_name).config();
    }
    if (j.contains("grounding")) {
      c.grounding.r_b = j.at("grounding").value("r_b", c.grounding.r_b);
      c.grounding.r_e = j.at("grounding").value("r_e", c.grounding.r_e);
    }
    c.training = TrainingConfigFromJson(j.value("training", Json::object()));
    c.similarity = SimilarityModeFromName(
        j.value("similarity", std::string(SimilarityModeName(c.similarity))));
    c.shaping = ShapingModeFromName(
        j.value("shaping", std::string(ShapingModeName(c.shaping))));
    const auto basis = j.value("oracleBasis", std::string("shapedValue"));
    Require(basis == "shapedValue" || basis == "treeReward",
            "unknown oracleBasis: " + basis);
    c.basis = basis == "shapedValue" ? OracleBasis::kShapedValue
                                     : OracleBasis::kTreeReward;
    c.threshold = j.value("threshold", c.threshold);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("experiment config: ") + e.what());
  }
  Require(c.p >= 0.0 && c.p <= 0.5, "p must lie in [0, 0.5]");
  Require(c.k >= 2, "players must be >= 2");
  Require(c.grounding.r_b > 0 && c.grounding.r_e > 0, "r_b and r_e must be > 0");
  return c;
}

Json ReportToJson(const ExperimentReport& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) candidates.push_back(CandidateToJson(c));
  Json labels = Json::array();
  for (const auto& l : r.human_labels) labels.push_back(LabelToJson(l));
  Json checkpoints = Json::array();
  for (const auto& c : r.checkpoints) {
    checkpoints.push_back(Json{{"episode", c.episode},
                               {"agentTree", GroundedTreeToJson(c.agent_tree)},
                               {"metrics", MetricsToJson(c.metrics)}});
  }
  const Summary summary = Summarize(r, r.config.threshold);
  return Json{{"config", ExperimentConfigToJson(r.config)},
              {"candidates", candidates},
              {"humanBracket", BracketToJson(r.human_bracket)},
              {"humanLabels", labels},
              {"humanTree", GroundedTreeToJson(r.human_tree)},
              {"checkpoints", checkpoints},
              {"trace", TraceToJson(r.trace)},
              {"optimalReturn", r.optimal_return},
              {"finalEnvReturn", r.final_env_return},
              {"verdict", summary.conformed ? "CONFORMED" : "DEVIATED"}};
}

ExperimentReport ReportFromJson(const Json& j) {
  ExperimentReport r;
  try {
    r.config = ExperimentConfigFromJson(j.at("config"));
    for (const auto& c : j.at("candidates")) {
      r.candidates.push_back(CandidateFromJson(c));
    }
    r.human_bracket = BracketFromJson(j.at("humanBracket"));
    for (const auto& l : j.at("humanLabels")) {
      r.human_labels.push_back(LabelFromJson(l));
    }
    r.human_tree = GroundedTreeFromJson(j.at("humanTree"));
    for (const auto& c : j.at("checkpoints")) {
      r.checkpoints.push_back({c.at("episode").get<int>(),
                               GroundedTreeFromJson(c.at("agentTree")),
                               MetricsFromJson(c.at("metrics"))});
    }
    for (const auto& t : j.at("trace")) {
      r.trace.checkpoints.push_back({t.at("episode").get<int>(),
                                     t.at("meanEnvReturn").get<double>(),
                                     t.at("zMean").get<double>(),
                                     t.at("zMin").get<double>(),
                                     t.at("zMax").get<double>()});
    }
    r.optimal_return = j.at("optimalReturn").get<double>();
    r.final_env_return = j.at("finalEnvReturn").get<double>();
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("report: ") + e.what());
  }
  if (r.checkpoints.empty()) Fail(ErrorCode::kParse, "report has no checkpoints");
  return r;
}

std::vector<CandidateState> SampleExperimentCandidates(
    const ExperimentConfig& config) {
  const GridWorld world(config.world);
  return SampleCandidates(world, config.k,
                          Rng::Derive(config.seed, kSampleStream));
}

Bracket SeedExperimentBracket(const ExperimentConfig& config,
                              std::span<const CandidateState> candidates) {
  return SeedBracket(candidates, Rng::Derive(config.seed, kBracketStream));
}

ExperimentReport RunScenario(const ExperimentConfig& config,
                             const std::optional<AdviceScenario>& scenario) {
  const GridWorld world(config.world);
  auto candidates = SampleExperimentCandidates(config);
  const AdviceScenario advice =
      scenario ? *scenario
               : MakeAdviceScenario(config.kind, world, candidates,
                                    BMParams{config.p});
  SimulatedOracle human(advice.ability, advice.bm,
                        Rng::Derive(config.seed, kOracleStream));
  const Bracket bracket = SeedExperimentBracket(config, candidates);
  const auto played = RunTournament(bracket, candidates, human);
  return RunFromHumanTournament(config, std::move(candidates), played.bracket,
                                LabelSource::kSimulated);
}

ExperimentReport RunFromHumanTournament(const ExperimentConfig& config,
                                        std::vector<CandidateState> candidates,
                                        const Bracket& human_bracket,
                                        LabelSource source) {
  const GridWorld world(config.world);
  const auto human = ReplayTournament(human_bracket, source);

  ExperimentReport report;
  report.config = config;
  report.candidates = std::move(candidates);
  report.human_bracket = human.bracket;
  report.human_labels = human.labels;
  report.human_tree =
      GroundRewards(Condense(human.dendrogram), config.grounding);

  auto field = PreferenceField::FromTree(world, report.human_tree,
                                         report.candidates, config.similarity);
  ShapingModel model =
      ShapingModel::Make(world, config.shaping, std::move(field));

  auto on_checkpoint = [&](int episode, const Policy&, const ShapingModel& m) {
    CheckpointResult cp;
    cp.episode = episode;
    cp.agent_tree = ExtractAgentTree(report.human_bracket, report.candidates,
                                     world, m, config.grounding, config.basis);
    const auto choices = AgentDecisions(report.human_labels, report.candidates,
                                        world, m, config.basis);
    cp.metrics = CompareTrees(report.human_tree, cp.agent_tree,
                              report.human_labels, choices);
    report.checkpoints.push_back(std::move(cp));
  };
  auto trained = Train(world, std::move(model), config.training,
                       Rng::Derive(config.seed, kTrainStream), on_checkpoint);
  report.trace = std::move(trained.trace);
  report.optimal_return = OptimalReturn(world);
  report.final_env_return =
      GreedyEnvReturn(world, trained.policy, world.start());
  return report;
}

Summary SummarizeMetrics(const ConformanceMetrics& m, double threshold) {
  Summary s;
  s.conformed = m.structural_match && m.pairwise_agreement >= threshold;
  std::ostringstream out;
  out << (s.conformed ? "CONFORMED" : "DEVIATED") << "\n";
  out << "structuralMatch: " << (m.structural_match ? "true" : "false") << "\n";
  out << "rootAgreement: " << (m.root_agreement ? "true" : "false") << "\n";
  out << "pairwiseAgreement: " << Fixed(m.pairwise_agreement) << " ("
      << m.compared_pairs - static_cast<int>(m.flipped.size()) << "/"
      << m.compared_pairs << ", threshold " << Fixed(threshold, 2) << ")\n";
  if (!s.conformed) {
    out << "flipped pairs:\n";
    if (m.flipped.empty()) out << "  (none)\n";
    for (const auto& l : m.flipped) {
      out << "  round " << l.round << ": human preferred " << l.winner()
          << " over " << l.loser() << ", agent preferred " << l.loser()
          << "\n";
    }
    out << "depth overlap:\n";
    for (std::size_t d = 0; d < m.per_depth_overlap.size(); ++d) {
      out << "  depth " << d + 1 << ": " << Fixed(m.per_depth_overlap[d])
          << "\n";
    }
  }
  s.text = out.str();
  return s;
}

Summary Summarize(const ExperimentReport& report, double threshold) {
  Require(!report.checkpoints.empty(), "report has no checkpoints");
  return SummarizeMetrics(report.final().metrics, threshold);
}

}  // namespace acv
