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

// JSON documents shared by the CLI, the session service and report files.
// Parse functions throw Error(kParse) on malformed input.

#ifndef ACV_JSON_IO_HPP_
#define ACV_JSON_IO_HPP_

#include <string>
#include <string_view>

#include "acv/envsim.hpp"
#include "acv/preftree.hpp"
#include "acv/tournament.hpp"
#include "json.hpp"

namespace acv {

using Json = nlohmann::json;

Json ParseJson(std::string_view text);
std::string ReadFile(const std::string& path);
// Writes to a sibling temporary file, then renames over `path`.
void WriteFileAtomic(const std::string& path, const std::string& contents);

Json CellToJson(Cell c);
Cell CellFromJson(const Json& j);

// {width, height, walls:[[x,y]...], start, goal, stepPenalty, goalReward,
//  maxEpisodeSteps}
Json WorldConfigToJson(const GridWorldConfig& c);
GridWorldConfig WorldConfigFromJson(const Json& j);

Json RenderSceneToJson(const RenderScene& s);
RenderScene RenderSceneFromJson(const Json& j);

Json CandidateToJson(const CandidateState& c);
CandidateState CandidateFromJson(const Json& j);

// {seed, entrants:[...], rounds:[[{left,right,choice|null}],...]}
Json BracketToJson(const Bracket& b);
Bracket BracketFromJson(const Json& j);

Json LabelToJson(const PreferenceLabel& l);
PreferenceLabel LabelFromJson(const Json& j);

// {root, params:{r_b,r_e}, nodes:[{id,reward,depth}], edges:[{parent,child,
//  weight}]}
Json GroundedTreeToJson(const GroundedTree& g);
GroundedTree GroundedTreeFromJson(const Json& j);

Json MetricsToJson(const ConformanceMetrics& m);
ConformanceMetrics MetricsFromJson(const Json& j);

}  // namespace acv

#endif  // ACV_JSON_IO_HPP_
