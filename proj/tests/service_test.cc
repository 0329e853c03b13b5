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

#include "acv/service.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <unistd.h>

#include "gtest/gtest.h"
#include "httplib.h"

namespace acv {
namespace {

namespace fs = std::filesystem;

constexpr const char* kQuickTraining =
    R"({"episodes": 400, "probeEpisodes": 100, "probeRepeats": 1})";

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("acv_service_") + info->name() + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static Json Body(const HttpResult& r) { return ParseJson(r.body); }

  static std::string Create(SessionService& svc, int k) {
    const auto r = svc.CreateSession(Json{{"k", k}, {"seed", 11}}.dump(), "");
    EXPECT_EQ(r.status, 201) << r.body;
    return Body(r).at("sessionId");
  }

  // Answers the pending pair by picking the candidate nearer the goal.
  static HttpResult AnswerOne(SessionService& svc, const std::string& id) {
    const Json q = Body(svc.GetQuery(id));
    const Json& pair = q.at("pair");
    const int choice = pair.at("left").at("envReward").get<double>() >=
                               pair.at("right").at("envReward").get<double>()
                           ? 0
                           : 1;
    return svc.SubmitLabel(id, Json{{"leftId", pair.at("left").at("id")},
                                    {"rightId", pair.at("right").at("id")},
                                    {"choice", choice}}
                                   .dump());
  }

  static void AnswerAll(SessionService& svc, const std::string& id) {
    while (!Body(svc.GetQuery(id)).at("pair").is_null()) {
      ASSERT_EQ(AnswerOne(svc, id).status, 200);
    }
  }

  fs::path dir_;
};

TEST_F(ServiceTest, CreateReturnsFirstQuery) {
  SessionService svc(dir_.string());
  const auto r = svc.CreateSession(R"({"k": 4})", "");
  ASSERT_EQ(r.status, 201);
  const Json j = Body(r);
  const std::string id = j.at("sessionId");
  EXPECT_EQ(id.size(), 16u);
  EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_FALSE(j.at("firstQuery").at("pair").is_null());
  EXPECT_EQ(j.at("firstQuery").at("progress"),
            (Json{{"answered", 0}, {"total", 3}}));
  EXPECT_TRUE(fs::exists(dir_ / (id + ".session.json")));
  EXPECT_EQ(Body(svc.GetSession(id)).at("status"), "collecting");

  EXPECT_EQ(svc.CreateSession(R"({"k": 74})", "").status, 400);
  EXPECT_EQ(svc.CreateSession(R"({"k": 1})", "").status, 400);
  EXPECT_EQ(svc.CreateSession(R"({"k": 4, "worldName": "moon"})", "").status, 400);
  EXPECT_EQ(svc.CreateSession("[1]", "").status, 400);
  EXPECT_EQ(svc.CreateSession("{", "").status, 400);
  EXPECT_EQ(svc.CreateSession("", "").status, 201);
}

TEST_F(ServiceTest, IdempotencyKey) {
  SessionService svc(dir_.string());
  const auto a = svc.CreateSession(R"({"k": 6, "seed": 3})", "key-1");
  ASSERT_EQ(a.status, 201);
  const auto b = svc.CreateSession(R"({"seed": 3, "k": 6})", "key-1");
  EXPECT_EQ(b.status, 200);
  EXPECT_EQ(Body(a).at("sessionId"), Body(b).at("sessionId"));
  const auto c = svc.CreateSession(R"({"k": 8})", "key-1");
  EXPECT_EQ(c.status, 409);
  EXPECT_EQ(Body(c).at("error").at("code"), "idempotency-conflict");
  const auto d = svc.CreateSession(R"({"k": 6, "seed": 3})", "key-2");
  EXPECT_NE(Body(d).at("sessionId"), Body(a).at("sessionId"));

  // Keys survive a restart.
  SessionService again(dir_.string());
  const auto e = again.CreateSession(R"({"k": 6, "seed": 3})", "key-1");
  EXPECT_EQ(e.status, 200);
  EXPECT_EQ(Body(e).at("sessionId"), Body(a).at("sessionId"));
}

TEST_F(ServiceTest, LabelValidation) {
  SessionService svc(dir_.string());
  const std::string id = Create(svc, 4);
  const Json pair = Body(svc.GetQuery(id)).at("pair");
  const std::string l = pair.at("left").at("id"), r = pair.at("right").at("id");
  auto label = [&](const Json& body) { return svc.SubmitLabel(id, body.dump()); };

  EXPECT_EQ(label({{"leftId", l}, {"rightId", r}, {"choice", 2}}).status, 422);
  EXPECT_EQ(label({{"leftId", l}, {"rightId", r}, {"choice", "0"}}).status, 422);
  EXPECT_EQ(label({{"leftId", l}, {"rightId", r}, {"choice", 0.5}}).status, 422);
  EXPECT_EQ(label({{"leftId", l}, {"choice", 0}}).status, 400);
  EXPECT_EQ(svc.SubmitLabel(id, "nope").status, 400);
  const auto stale = label({{"leftId", r}, {"rightId", l}, {"choice", 0}});
  EXPECT_EQ(stale.status, 409);
  EXPECT_EQ(Body(stale).at("error").at("code"), "stale-pair");
  EXPECT_EQ(svc.SubmitLabel("0000000000000000", "{}").status, 404);

  const auto ok = label({{"leftId", l}, {"rightId", r}, {"choice", 1}});
  ASSERT_EQ(ok.status, 200);
  EXPECT_TRUE(Body(ok).at("accepted"));
  EXPECT_EQ(Body(ok).at("progress").at("answered"), 1);
  // Replaying the same answer is now stale.
  EXPECT_EQ(label({{"leftId", l}, {"rightId", r}, {"choice", 1}}).status, 409);
}

TEST_F(ServiceTest, TreeEndpoints) {
  SessionService svc(dir_.string());
  const std::string id = Create(svc, 5);
  EXPECT_EQ(svc.GetTree(id, "human").status, 409);
  EXPECT_EQ(svc.GetTree(id, "forest").status, 404);
  EXPECT_EQ(svc.GetTree("ffffffffffffffff", "human").status, 404);
  AnswerAll(svc, id);
  const auto human = svc.GetTree(id, "human");
  ASSERT_EQ(human.status, 200);
  EXPECT_EQ(Body(human).at("edges").size(), 4u);
  const auto agent = svc.GetTree(id, "agent");
  EXPECT_EQ(agent.status, 409);
  EXPECT_EQ(Body(agent).at("error").at("code"), "untrained");
}

TEST_F(ServiceTest, TrainingLifecycle) {
  SessionService svc(dir_.string());
  const std::string id = Create(svc, 6);
  EXPECT_EQ(svc.StartTraining(id, kQuickTraining).status, 409);
  EXPECT_EQ(svc.GetReport(id).status, 409);
  AnswerAll(svc, id);
  EXPECT_EQ(Body(svc.GetQuery(id)).at("progress"),
            (Json{{"answered", 5}, {"total", 5}}));
  EXPECT_EQ(svc.StartTraining(id, R"({"discount": 2})").status, 400);

  const auto started = svc.StartTraining(id, kQuickTraining);
  ASSERT_EQ(started.status, 202);
  EXPECT_EQ(Body(started).at("reportUrl"), "/sessions/" + id + "/report");
  const int again = svc.StartTraining(id, kQuickTraining).status;
  EXPECT_TRUE(again == 202 || again == 200) << again;
  svc.WaitForJobs();

  EXPECT_EQ(svc.StartTraining(id, kQuickTraining).status, 200);
  const auto report = svc.GetReport(id);
  ASSERT_EQ(report.status, 200);
  const Json rj = Body(report);
  EXPECT_EQ(rj.at("humanLabels").size(), 5u);
  for (const auto& l : rj.at("humanLabels")) EXPECT_EQ(l.at("source"), "human");
  EXPECT_EQ(rj.at("config").at("training").at("episodes"), 400);
  EXPECT_EQ(svc.GetTree(id, "agent").status, 200);
  EXPECT_EQ(Body(svc.GetTree(id, "agent")), rj.at("checkpoints").back().at("agentTree"));
  EXPECT_EQ(Body(svc.GetSession(id)).at("status"), "reported");
  EXPECT_TRUE(fs::exists(dir_ / (id + ".report.json")));
}

TEST_F(ServiceTest, RestartReplaysSessions) {
  std::string id, query_before, report_before, human_before, agent_before;
  std::string done_id;
  {
    SessionService svc(dir_.string());
    id = Create(svc, 8);
    for (int i = 0; i < 4; ++i) ASSERT_EQ(AnswerOne(svc, id).status, 200);
    query_before = svc.GetQuery(id).body;

    done_id = Create(svc, 4);
    AnswerAll(svc, done_id);
    ASSERT_EQ(svc.StartTraining(done_id, kQuickTraining).status, 202);
    svc.WaitForJobs();
    report_before = svc.GetReport(done_id).body;
    human_before = svc.GetTree(done_id, "human").body;
    agent_before = svc.GetTree(done_id, "agent").body;
  }
  SessionService svc(dir_.string());
  EXPECT_EQ(svc.GetQuery(id).body, query_before);
  EXPECT_EQ(Body(svc.GetSession(id)).at("progress").at("answered"), 4);
  AnswerAll(svc, id);
  EXPECT_EQ(svc.GetTree(id, "human").status, 200);

  EXPECT_EQ(Body(svc.GetSession(done_id)).at("status"), "reported");
  EXPECT_EQ(svc.GetReport(done_id).body, report_before);
  EXPECT_EQ(svc.GetTree(done_id, "human").body, human_before);
  EXPECT_EQ(svc.GetTree(done_id, "agent").body, agent_before);
}

TEST_F(ServiceTest, CorruptSessionDocumentIsAParseError) {
  fs::create_directories(dir_);
  {
    std::ofstream out(dir_ / "deadbeefdeadbeef.session.json");
    out << "{\"id\": 3";
  }
  try {
    SessionService svc(dir_.string());
    FAIL() << "corrupt document loaded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}

TEST_F(ServiceTest, ConcurrentSubmitsOnlyOneWins) {
  SessionService svc(dir_.string());
  const std::string id = Create(svc, 16);
  const Json pair = Body(svc.GetQuery(id)).at("pair");
  const std::string body = Json{{"leftId", pair.at("left").at("id")},
                                {"rightId", pair.at("right").at("id")},
                                {"choice", 0}}
                               .dump();
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      const int status = svc.SubmitLabel(id, body).status;
      if (status == 200) ++ok;
      if (status == 409) ++conflict;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 7);
  EXPECT_EQ(Body(svc.GetQuery(id)).at("progress").at("answered"), 1);
}

TEST_F(ServiceTest, AbandonIsTerminal) {
  SessionService svc(dir_.string());
  const std::string id = Create(svc, 4);
  ASSERT_EQ(svc.Abandon(id).status, 200);
  EXPECT_EQ(svc.Abandon(id).status, 200);
  EXPECT_EQ(Body(svc.GetSession(id)).at("status"), "abandoned");
  const auto label = AnswerOne(svc, id);
  EXPECT_EQ(label.status, 409);
  EXPECT_EQ(Body(label).at("error").at("code"), "abandoned");
  EXPECT_EQ(svc.StartTraining(id, "").status, 409);
  EXPECT_EQ(svc.Abandon("0123456789abcdef").status, 404);

  SessionService again(dir_.string());
  EXPECT_EQ(Body(again.GetSession(id)).at("status"), "abandoned");
}

TEST_F(ServiceTest, HttpRoundTrip) {
  SessionService svc(dir_.string());
  HttpServer server(svc);
  const int port = server.Bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread listener([&] { server.Listen(); });

  httplib::Client client("127.0.0.1", port);
  httplib::Headers headers = {{"Idempotency-Key", "http-1"}};
  auto created = client.Post("/sessions", headers, R"({"k": 3})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Content-Type"), "application/json");
  const std::string id = ParseJson(created->body).at("sessionId");
  auto repeat = client.Post("/sessions", headers, R"({"k": 3})", "application/json");
  ASSERT_TRUE(repeat);
  EXPECT_EQ(repeat->status, 200);

  auto session = client.Get("/sessions/" + id);
  ASSERT_TRUE(session);
  EXPECT_EQ(session->status, 200);
  EXPECT_FALSE(session->get_header_value("Access-Control-Allow-Origin").empty());
  auto missing = client.Get("/sessions/ffffffffffffffff/query");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto options = client.Options("/sessions");
  ASSERT_TRUE(options);
  EXPECT_EQ(options->status, 204);

  for (int i = 0; i < 2; ++i) {
    auto q = client.Get("/sessions/" + id + "/query");
    ASSERT_TRUE(q);
    const Json pair = ParseJson(q->body).at("pair");
    auto posted = client.Post(
        "/sessions/" + id + "/label",
        Json{{"leftId", pair.at("left").at("id")},
             {"rightId", pair.at("right").at("id")},
             {"choice", 0}}
            .dump(),
        "application/json");
    ASSERT_TRUE(posted);
    EXPECT_EQ(posted->status, 200);
  }
  auto tree = client.Get("/sessions/" + id + "/tree?which=human");
  ASSERT_TRUE(tree);
  EXPECT_EQ(tree->status, 200);
  auto bad_tree = client.Get("/sessions/" + id + "/tree?which=shrub");
  ASSERT_TRUE(bad_tree);
  EXPECT_EQ(bad_tree->status, 404);
  auto train = client.Post("/sessions/" + id + "/train", kQuickTraining,
                           "application/json");
  ASSERT_TRUE(train);
  EXPECT_EQ(train->status, 202);
  svc.WaitForJobs();
  auto report = client.Get("/sessions/" + id + "/report");
  ASSERT_TRUE(report);
  EXPECT_EQ(report->status, 200);
  EXPECT_EQ(ParseJson(report->body).at("humanLabels").size(), 2u);

  server.Stop();
  listener.join();
}

}  // namespace
}  // namespace acv
