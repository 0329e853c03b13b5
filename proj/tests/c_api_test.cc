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

// Exercises libacv through its C header only.

#include "acv/acv.h"

#include <filesystem>
#include <string>
#include <thread>

#include "gtest/gtest.h"
#include "httplib.h"

namespace {

constexpr const char* kConfig =
    R"({"case": "good", "players": 6, "p": 0.0, "seed": 2,
        "training": {"episodes": 400, "probeEpisodes": 100}})";

std::string Take(char* s) {
  std::string out = s ? s : "";
  acv_string_free(s);
  return out;
}

TEST(CApiTest, StatusNamesAndVersion) {
  EXPECT_STREQ(acv_version(), "0.1.0");
  EXPECT_STREQ(acv_status_name(ACV_OK), "ok");
  EXPECT_STRNE(acv_status_name(ACV_ERR_MISMATCH), acv_status_name(ACV_ERR_IO));
}

TEST(CApiTest, SimulateRenderAndRoundTrip) {
  acv_report* report = nullptr;
  ASSERT_EQ(acv_simulate(kConfig, &report), ACV_OK) << acv_last_error();
  char* json = nullptr;
  ASSERT_EQ(acv_report_to_json(report, &json), ACV_OK);
  const std::string text = Take(json);

  acv_report* again = nullptr;
  ASSERT_EQ(acv_simulate(kConfig, &again), ACV_OK);
  ASSERT_EQ(acv_report_to_json(again, &json), ACV_OK);
  EXPECT_EQ(Take(json), text);
  acv_report_free(again);

  acv_report* loaded = nullptr;
  ASSERT_EQ(acv_report_from_json(text.c_str(), &loaded), ACV_OK);
  ASSERT_EQ(acv_report_to_json(loaded, &json), ACV_OK);
  EXPECT_EQ(Take(json), text);

  char* dot = nullptr;
  ASSERT_EQ(acv_report_tree(loaded, "human", "dot", &dot), ACV_OK);
  EXPECT_EQ(Take(dot).rfind("digraph", 0), 0u);
  char* human = nullptr;
  char* agent = nullptr;
  ASSERT_EQ(acv_report_tree(loaded, "human", "json", &human), ACV_OK);
  ASSERT_EQ(acv_report_tree(loaded, "agent", "json", &agent), ACV_OK);
  const std::string human_json = Take(human), agent_json = Take(agent);
  EXPECT_EQ(acv_report_tree(loaded, "robot", "json", &human),
            ACV_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(acv_report_tree(loaded, "human", "svg", &human),
            ACV_ERR_INVALID_ARGUMENT);

  char* summary = nullptr;
  int conformed = -1;
  ASSERT_EQ(acv_report_summary(loaded, 0.9, &summary, &conformed), ACV_OK);
  const std::string s = Take(summary);
  EXPECT_EQ(s.rfind(conformed ? "CONFORMED" : "DEVIATED", 0), 0u);

  char* compared = nullptr;
  ASSERT_EQ(acv_compare_trees(human_json.c_str(), human_json.c_str(), 0.9,
                              &compared, &conformed),
            ACV_OK);
  EXPECT_EQ(conformed, 1);
  Take(compared);
  ASSERT_EQ(acv_compare_trees(human_json.c_str(), agent_json.c_str(), 0.9,
                              &compared, &conformed),
            ACV_OK);
  Take(compared);

  char* rendered = nullptr;
  ASSERT_EQ(acv_render_tree(human_json.c_str(), "json", &rendered), ACV_OK);
  EXPECT_EQ(Take(rendered), human_json);

  acv_report_free(loaded);
  acv_report_free(report);
  acv_report_free(nullptr);
}

TEST(CApiTest, ErrorsMapToStatusCodes) {
  acv_report* report = nullptr;
  EXPECT_EQ(acv_report_from_json("{", &report), ACV_ERR_PARSE);
  EXPECT_NE(std::string(acv_last_error()), "");
  EXPECT_EQ(report, nullptr);
  EXPECT_EQ(acv_simulate(R"({"p": 0.9})", &report), ACV_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(acv_simulate(nullptr, nullptr), ACV_ERR_INVALID_ARGUMENT);
  char* text = nullptr;
  int conformed = 0;
  EXPECT_EQ(acv_compare_trees(
                R"({"root": "a", "edges": [], "params": {"r_b": 1, "r_e": 0.5},
                    "nodes": [{"id": "a", "reward": -1, "depth": 1}]})",
                R"({"root": "b", "edges": [], "params": {"r_b": 1, "r_e": 0.5},
                    "nodes": [{"id": "b", "reward": -1, "depth": 1}]})",
                0.9, &text, &conformed),
            ACV_ERR_MISMATCH);
}

TEST(CApiTest, ServerLifecycle) {
  const auto dir = std::filesystem::temp_directory_path() / "acv_c_api_server";
  std::filesystem::remove_all(dir);
  acv_server* server = nullptr;
  ASSERT_EQ(acv_server_create(dir.string().c_str(), &server), ACV_OK);
  int port = 0;
  ASSERT_EQ(acv_server_bind(server, "127.0.0.1", 0, &port), ACV_OK);
  ASSERT_GT(port, 0);
  std::thread listener([&] { acv_server_listen(server); });
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/sessions", R"({"k": 4})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  acv_server_stop(server);
  listener.join();
  acv_server_free(server);
  std::filesystem::remove_all(dir);
}

}  // namespace
