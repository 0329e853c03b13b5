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

#include "acv/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace acv {

Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp);
    out << contents;
    out.flush();
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "rename failed for " + path + ": " + ec.message());
}

namespace {

// Wraps nlohmann type/key errors in the library's parse error.
template <typename F>
auto Guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json CellToJson(Cell c) { return Json::array({c.x, c.y}); }

Cell CellFromJson(const Json& j) {
  return Guard("cell", [&] {
    if (!j.is_array() || j.size() != 2) {
      Fail(ErrorCode::kParse, "cell must be [x, y]");
    }
    return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
  });
}

Json WorldConfigToJson(const GridWorldConfig& c) {
  Json walls = Json::array();
  for (const auto& w : c.walls) walls.push_back(CellToJson(w));
  return Json{{"width", c.width},
              {"height", c.height},
              {"walls", walls},
              {"start", CellToJson(c.start)},
              {"goal", CellToJson(c.goal)},
              {"stepPenalty", c.step_penalty},
              {"goalReward", c.goal_reward},
              {"maxEpisodeSteps", c.max_episode_steps}};
}

GridWorldConfig WorldConfigFromJson(const Json& j) {
  return Guard("world config", [&] {
    GridWorldConfig c;
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    for (const auto& w : j.value("walls", Json::array())) {
      c.walls.push_back(CellFromJson(w));
    }
    c.start = CellFromJson(j.at("start"));
    c.goal = CellFromJson(j.at("goal"));
    c.step_penalty = j.value("stepPenalty", -0.05);
    c.goal_reward = j.value("goalReward", 1.0);
    c.max_episode_steps = j.value("maxEpisodeSteps", 200);
    return c;
  });
}

Json RenderSceneToJson(const RenderScene& s) {
  Json walls = Json::array();
  for (const auto& w : s.walls) walls.push_back(CellToJson(w));
  return Json{{"width", s.width},
              {"height", s.height},
              {"walls", walls},
              {"goal", CellToJson(s.goal)},
              {"agent", CellToJson(s.agent)}};
}

RenderScene RenderSceneFromJson(const Json& j) {
  return Guard("render scene", [&] {
    RenderScene s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    for (const auto& w : j.at("walls")) s.walls.push_back(CellFromJson(w));
    s.goal = CellFromJson(j.at("goal"));
    s.agent = CellFromJson(j.at("agent"));
    return s;
  });
}

Json CandidateToJson(const CandidateState& c) {
  return Json{{"id", c.id},
              {"cell", CellToJson(c.cell)},
              {"features", c.features},
              {"envReward", c.env_reward},
              {"render", RenderSceneToJson(c.render)}};
}

CandidateState CandidateFromJson(const Json& j) {
  return Guard("candidate", [&] {
    CandidateState c;
    c.id = j.at("id").get<std::string>();
    c.cell = CellFromJson(j.at("cell"));
    c.features = j.at("features").get<std::vector<double>>();
    c.env_reward = j.at("envReward").get<double>();
    c.render = RenderSceneFromJson(j.at("render"));
    return c;
  });
}

Json BracketToJson(const Bracket& b) {
  Json rounds = Json::array();
  for (const auto& r : b.rounds) {
    Json matches = Json::array();
    for (const auto& m : r.matches) {
      matches.push_back(Json{{"left", m.left},
                             {"right", m.right},
                             {"choice", m.choice ? Json(*m.choice) : Json()}});
    }
    rounds.push_back(matches);
  }
  return Json{{"seed", b.seed}, {"entrants", b.entrants}, {"rounds", rounds}};
}

Bracket BracketFromJson(const Json& j) {
  return Guard("bracket", [&] {
    Bracket b;
    b.seed = j.at("seed").get<std::uint64_t>();
    b.entrants = j.at("entrants").get<std::vector<std::string>>();
    std::vector<std::string> advancing = b.entrants;
    for (const auto& round : j.at("rounds")) {
      Round r;
      for (const auto& m : round) {
        Match match{m.at("left").get<std::string>(),
                    m.at("right").get<std::string>(), std::nullopt};
        if (m.contains("choice") && !m.at("choice").is_null()) {
          match.choice = m.at("choice").get<int>();
        }
        r.matches.push_back(std::move(match));
      }
      // Byes are implied by the entrants of the round.
      if (advancing.size() % 2 == 1) r.bye = advancing.back();
      std::vector<std::string> next;
      for (const auto& m : r.matches) {
        next.push_back(m.choice.value_or(0) == 0 ? m.left : m.right);
      }
      if (r.bye) next.push_back(*r.bye);
      advancing = std::move(next);
      b.rounds.push_back(std::move(r));
    }
    return b;
  });
}

Json LabelToJson(const PreferenceLabel& l) {
  return Json{{"leftId", l.left_id},
              {"rightId", l.right_id},
              {"choice", l.choice},
              {"round", l.round},
              {"source", std::string(LabelSourceName(l.source))}};
}

PreferenceLabel LabelFromJson(const Json& j) {
  return Guard("label", [&] {
    PreferenceLabel l;
    l.left_id = j.at("leftId").get<std::string>();
    l.right_id = j.at("rightId").get<std::string>();
    l.choice = j.at("choice").get<int>();
    l.round = j.value("round", 1);
    l.source = LabelSourceFromName(j.value("source", "human"));
    if (l.choice != 0 && l.choice != 1) Fail(ErrorCode::kParse, "bad choice");
    if (l.left_id == l.right_id) Fail(ErrorCode::kParse, "self-pair label");
    return l;
  });
}

Json GroundedTreeToJson(const GroundedTree& g) {
  Json nodes = Json::array();
  for (const auto& id : g.tree.nodes()) {
    nodes.push_back(
        Json{{"id", id}, {"reward", g.reward.at(id)}, {"depth", g.depth.at(id)}});
  }
  Json edges = Json::array();
  for (const auto& e : g.tree.edges()) {
    edges.push_back(
        Json{{"parent", e.parent}, {"child", e.child}, {"weight", e.weight}});
  }
  return Json{{"root", g.tree.root()},
              {"params", Json{{"r_b", g.params.r_b}, {"r_e", g.params.r_e}}},
              {"nodes", nodes},
              {"edges", edges}};
}

GroundedTree GroundedTreeFromJson(const Json& j) {
  return Guard("grounded tree", [&] {
    std::vector<TreeEdge> edges;
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at("parent").get<std::string>(),
                       e.at("child").get<std::string>(),
                       e.at("weight").get<int>()});
    }
    GroundedTree g;
    try {
      g.tree = PreferenceTree(j.at("root").get<std::string>(), std::move(edges));
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, e.what());
    }
    g.params.r_b = j.at("params").at("r_b").get<double>();
    g.params.r_e = j.at("params").at("r_e").get<double>();
    for (const auto& n : j.at("nodes")) {
      const auto id = n.at("id").get<std::string>();
      g.reward[id] = n.at("reward").get<double>();
      g.depth[id] = n.at("depth").get<int>();
    }
    if (g.reward.size() != g.tree.nodes().size()) {
      Fail(ErrorCode::kParse, "node list does not match edges");
    }
    for (const auto& id : g.tree.nodes()) {
      if (!g.depth.count(id)) Fail(ErrorCode::kParse, "missing node " + id);
      auto parent = g.tree.Parent(id);
      const int expected = parent ? g.depth.at(*parent) + 1 : 1;
      if (g.depth.at(id) != expected) {
        Fail(ErrorCode::kParse, "inconsistent depth for " + id);
      }
    }
    return g;
  });
}

Json MetricsToJson(const ConformanceMetrics& m) {
  Json flipped = Json::array();
  for (const auto& l : m.flipped) flipped.push_back(LabelToJson(l));
  return Json{{"structuralMatch", m.structural_match},
              {"rootAgreement", m.root_agreement},
              {"pairwiseAgreement", m.pairwise_agreement},
              {"perDepthOverlap", m.per_depth_overlap},
              {"comparedPairs", m.compared_pairs},
              {"flipped", flipped}};
}

ConformanceMetrics MetricsFromJson(const Json& j) {
  return Guard("metrics", [&] {
    ConformanceMetrics m;
    m.structural_match = j.at("structuralMatch").get<bool>();
    m.root_agreement = j.at("rootAgreement").get<bool>();
    m.pairwise_agreement = j.at("pairwiseAgreement").get<double>();
    m.per_depth_overlap = j.at("perDepthOverlap").get<std::vector<double>>();
    m.compared_pairs = j.value("comparedPairs", 0);
    for (const auto& l : j.value("flipped", Json::array())) {
      m.flipped.push_back(LabelFromJson(l));
    }
    return m;
  });
}

}  // namespace acv
