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

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>

#include "httplib.h"
#include "acv/verify.hpp"

namespace acv {

namespace fs = std::filesystem;

namespace {

constexpr const char* kJsonType = "application/json";

HttpResult Reply(int status, const Json& body) {
  return {status, body.dump()};
}

HttpResult ErrorReply(int status, const std::string& code,
                      const std::string& message) {
  return Reply(status,
               Json{{"error", Json{{"code", code}, {"message", message}}}});
}

HttpResult NotFound(const std::string& id) {
  return ErrorReply(404, "not-found", "unknown session: " + id);
}

std::string NowUtc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string NewSessionId() {
  static std::mutex mu;
  static std::mt19937_64 gen(std::random_device{}());
  std::lock_guard<std::mutex> lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(gen()));
  return buf;
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string_view SessionStatusName(SessionStatus status) {
  switch (status) {
    case SessionStatus::kCollecting:
      return "collecting";
    case SessionStatus::kTrained:
      return "trained";
    case SessionStatus::kReported:
      return "reported";
    case SessionStatus::kAbandoned:
      return "abandoned";
  }
  return "?";
}

SessionStatus SessionStatusFromName(std::string_view name) {
  for (auto s : {SessionStatus::kCollecting, SessionStatus::kTrained,
                 SessionStatus::kReported, SessionStatus::kAbandoned}) {
    if (SessionStatusName(s) == name) return s;
  }
  Fail(ErrorCode::kParse, "unknown session status: " + std::string(name));
}

enum class JobState { kIdle, kRunning, kDone, kFailed, kCancelled };

namespace {

std::string_view JobName(JobState s) {
  switch (s) {
    case JobState::kIdle:
      return "idle";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kFailed:
      return "failed";
    case JobState::kCancelled:
      return "cancelled";
  }
  return "?";
}

JobState JobFromName(std::string_view name) {
  for (auto s : {JobState::kIdle, JobState::kRunning, JobState::kDone,
                 JobState::kFailed, JobState::kCancelled}) {
    if (JobName(s) == name) return s;
  }
  Fail(ErrorCode::kParse, "unknown job state: " + std::string(name));
}

}  // namespace

struct SessionService::Session {
  std::mutex mu;
  std::string id;
  SessionStatus status = SessionStatus::kCollecting;
  std::string created_at;
  std::string updated_at;
  std::string idempotency_key;
  Json request;
  ExperimentConfig config;
  std::vector<CandidateState> candidates;
  Bracket initial;  // Round-1 pairings only.
  std::optional<Tournament> tournament;
  JobState job = JobState::kIdle;
  Json job_training = Json::object();
  std::string job_error;
  Json job_trace = Json::array();
  std::optional<GroundedTree> agent_tree;

  Json Progress() const {
    return Json{{"answered", tournament->answered()},
                {"total", tournament->total()}};
  }

  Json Query() const {
    Json pair;
    if (auto pending = tournament->NextPending()) {
      const auto by_id = IndexById(candidates);
      pair = Json{{"left", CandidateToJson(*by_id.at(pending->first))},
                  {"right", CandidateToJson(*by_id.at(pending->second))}};
    }
    return Json{{"pair", pair}, {"progress", Progress()}};
  }

  Json Summary() const {
    return Json{{"sessionId", id},
                {"status", std::string(SessionStatusName(status))},
                {"createdAt", created_at},
                {"updatedAt", updated_at},
                {"progress", Progress()},
                {"complete", tournament->complete()},
                {"job", std::string(JobName(job))},
                {"config", ExperimentConfigToJson(config)}};
  }

  Json ToJson() const {
    Json labels = Json::array();
    for (const auto& l : tournament->labels()) labels.push_back(LabelToJson(l));
    Json candidates_json = Json::array();
    for (const auto& c : candidates) candidates_json.push_back(CandidateToJson(c));
    Json job_json{{"state", std::string(JobName(job))},
                  {"training", job_training}};
    if (!job_error.empty()) job_json["error"] = job_error;
    if (!job_trace.empty()) job_json["trace"] = job_trace;
    Json doc{{"id", id},
             {"status", std::string(SessionStatusName(status))},
             {"createdAt", created_at},
             {"updatedAt", updated_at},
             {"idempotencyKey", idempotency_key},
             {"request", request},
             {"config", ExperimentConfigToJson(config)},
             {"candidates", candidates_json},
             {"bracket", BracketToJson(initial)},
             {"labels", labels},
             {"job", job_json}};
    if (agent_tree) doc["agentTree"] = GroundedTreeToJson(*agent_tree);
    return doc;
  }

  static std::shared_ptr<Session> FromJson(const Json& j) {
    auto s = std::make_shared<Session>();
    try {
      s->id = j.at("id").get<std::string>();
      s->status = SessionStatusFromName(j.at("status").get<std::string>());
      s->created_at = j.at("createdAt").get<std::string>();
      s->updated_at = j.at("updatedAt").get<std::string>();
      s->idempotency_key = j.value("idempotencyKey", "");
      s->request = j.value("request", Json::object());
      s->config = ExperimentConfigFromJson(j.at("config"));
      for (const auto& c : j.at("candidates")) {
        s->candidates.push_back(CandidateFromJson(c));
      }
      s->initial = InitialPairings(BracketFromJson(j.at("bracket")));
      s->tournament.emplace(s->initial);
      for (const auto& l : j.at("labels")) {
        const PreferenceLabel label = LabelFromJson(l);
        s->tournament->Submit(label.left_id, label.right_id, label.choice,
                              label.source);
      }
      const Json& job = j.at("job");
      s->job = JobFromName(job.at("state").get<std::string>());
      s->job_training = job.value("training", Json::object());
      s->job_error = job.value("error", "");
      s->job_trace = job.value("trace", Json::array());
      if (j.contains("agentTree")) {
        s->agent_tree = GroundedTreeFromJson(j.at("agentTree"));
      }
    } catch (const Json::exception& e) {
      Fail(ErrorCode::kParse, std::string("session document: ") + e.what());
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, std::string("session document: ") + e.what());
    }
    // A job cut short by a restart can be started again.
    if (s->job == JobState::kRunning) s->job = JobState::kIdle;
    return s;
  }
};

SessionService::SessionService(std::string data_dir)
    : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + data_dir_ + ": " + ec.message());
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && EndsWith(name, ".session.json")) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    auto s = Session::FromJson(ParseJson(ReadFile(path.string())));
    if (!s->idempotency_key.empty()) idempotency_[s->idempotency_key] = s->id;
    sessions_[s->id] = std::move(s);
  }
}

SessionService::~SessionService() { WaitForJobs(); }

std::string SessionService::SessionPath(const std::string& id) const {
  return (fs::path(data_dir_) / (id + ".session.json")).string();
}

std::string SessionService::ReportPath(const std::string& id) const {
  return (fs::path(data_dir_) / (id + ".report.json")).string();
}

void SessionService::Persist(const Session& s) const {
  WriteFileAtomic(SessionPath(s.id), s.ToJson().dump(2) + "\n");
}

std::shared_ptr<SessionService::Session> SessionService::Find(
    const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpResult SessionService::CreateSession(const std::string& body,
                                         const std::string& idempotency_key) {
  Json request;
  ExperimentConfig config;
  try {
    request = body.empty() ? Json::object() : ParseJson(body);
    if (!request.is_object()) {
      return ErrorReply(400, "invalid-config", "body must be a JSON object");
    }
    Json cfg = Json::object();
    for (const char* key :
         {"seed", "similarity", "shaping", "oracleBasis", "threshold"}) {
      if (request.contains(key)) cfg[key] = request.at(key);
    }
    cfg["players"] = request.value("k", 16);
    if (request.contains("worldConfig")) {
      cfg["world"] = request.at("worldConfig");
      cfg["worldName"] = "custom";
    } else {
      cfg["worldName"] = request.value("worldName", "default");
    }
    if (request.contains("groundingParams")) {
      cfg["grounding"] = request.at("groundingParams");
    }
    config = ExperimentConfigFromJson(cfg);
  } catch (const Error& e) {
    return ErrorReply(400, "invalid-config", e.what());
  } catch (const Json::exception& e) {
    return ErrorReply(400, "invalid-config", e.what());
  }

  std::lock_guard<std::mutex> lock(mu_);
  if (!idempotency_key.empty()) {
    auto it = idempotency_.find(idempotency_key);
    if (it != idempotency_.end()) {
      auto existing = sessions_.at(it->second);
      std::lock_guard<std::mutex> session_lock(existing->mu);
      if (existing->request != request) {
        return ErrorReply(409, "idempotency-conflict",
                          "idempotency key reused with a different body");
      }
      return Reply(200, Json{{"sessionId", existing->id},
                             {"firstQuery", existing->Query()}});
    }
  }

  auto s = std::make_shared<Session>();
  try {
    s->config = config;
    s->candidates = SampleExperimentCandidates(config);
    s->initial = InitialPairings(SeedExperimentBracket(config, s->candidates));
    s->tournament.emplace(s->initial);
  } catch (const Error& e) {
    return ErrorReply(400, "invalid-config", e.what());
  }
  do {
    s->id = NewSessionId();
  } while (sessions_.count(s->id));
  s->created_at = s->updated_at = NowUtc();
  s->idempotency_key = idempotency_key;
  s->request = request;
  try {
    Persist(*s);
  } catch (const Error& e) {
    return ErrorReply(500, "io", e.what());
  }
  sessions_[s->id] = s;
  if (!idempotency_key.empty()) idempotency_[idempotency_key] = s->id;
  return Reply(201, Json{{"sessionId", s->id}, {"firstQuery", s->Query()}});
}

HttpResult SessionService::GetSession(const std::string& id) const {
  auto s = Find(id);
  if (!s) return NotFound(id);
  std::lock_guard<std::mutex> lock(s->mu);
  return Reply(200, s->Summary());
}

HttpResult SessionService::GetQuery(const std::string& id) const {
  auto s = Find(id);
  if (!s) return NotFound(id);
  std::lock_guard<std::mutex> lock(s->mu);
  return Reply(200, s->Query());
}

HttpResult SessionService::SubmitLabel(const std::string& id,
                                       const std::string& body) {
  auto s = Find(id);
  if (!s) return NotFound(id);
  std::string left, right;
  Json choice;
  try {
    const Json j = ParseJson(body);
    left = j.at("leftId").get<std::string>();
    right = j.at("rightId").get<std::string>();
    choice = j.at("choice");
  } catch (const Error& e) {
    return ErrorReply(400, "bad-request", e.what());
  } catch (const Json::exception& e) {
    return ErrorReply(400, "bad-request", e.what());
  }
  if (!choice.is_number_integer() ||
      (choice.get<long long>() != 0 && choice.get<long long>() != 1)) {
    return ErrorReply(422, "invalid-choice", "choice must be 0 or 1");
  }

  std::lock_guard<std::mutex> lock(s->mu);
  if (s->status == SessionStatus::kAbandoned) {
    return ErrorReply(409, "abandoned", "session was abandoned");
  }
  const Tournament before = *s->tournament;
  try {
    s->tournament->Submit(left, right, choice.get<int>(), LabelSource::kHuman);
  } catch (const Error& e) {
    return ErrorReply(409, "stale-pair", e.what());
  }
  const std::string previous_update = s->updated_at;
  s->updated_at = NowUtc();
  try {
    Persist(*s);
  } catch (const Error& e) {
    *s->tournament = before;
    s->updated_at = previous_update;
    return ErrorReply(500, "io", e.what());
  }
  Json next;
  if (s->tournament->NextPending()) next = s->Query();
  return Reply(200, Json{{"accepted", true},
                         {"nextQuery", next},
                         {"progress", s->Progress()}});
}

HttpResult SessionService::GetTree(const std::string& id,
                                   const std::string& which) const {
  auto s = Find(id);
  if (!s) return NotFound(id);
  if (which != "human" && which != "agent") {
    return ErrorReply(404, "not-found", "unknown tree: " + which);
  }
  std::lock_guard<std::mutex> lock(s->mu);
  if (!s->tournament->complete()) {
    return ErrorReply(409, "session-incomplete", "tournament incomplete");
  }
  if (which == "human") {
    const auto tree = GroundRewards(Condense(s->tournament->BuildDendrogram()),
                                    s->config.grounding);
    return Reply(200, GroundedTreeToJson(tree));
  }
  if (!s->agent_tree) {
    return ErrorReply(409, "untrained", "agent has not been trained");
  }
  return Reply(200, GroundedTreeToJson(*s->agent_tree));
}

HttpResult SessionService::StartTraining(const std::string& id,
                                         const std::string& body) {
  auto s = Find(id);
  if (!s) return NotFound(id);
  Json training = Json::object();
  try {
    if (!body.empty()) training = ParseJson(body);
    if (!training.is_object()) {
      return ErrorReply(400, "bad-request", "body must be a JSON object");
    }
    TrainingConfigFromJson(training);
  } catch (const Error& e) {
    return ErrorReply(400, "bad-request", e.what());
  }
  const Json ref{{"reportUrl", "/sessions/" + id + "/report"}};

  std::lock_guard<std::mutex> lock(s->mu);
  if (s->status == SessionStatus::kAbandoned) {
    return ErrorReply(409, "abandoned", "session was abandoned");
  }
  if (!s->tournament->complete()) {
    return ErrorReply(409, "session-incomplete",
                      "tournament still collecting labels");
  }
  if (s->job == JobState::kRunning || s->job == JobState::kDone) {
    Json out = ref;
    out["job"] = std::string(JobName(s->job));
    return Reply(s->job == JobState::kDone ? 200 : 202, out);
  }
  s->job = JobState::kRunning;
  s->job_training = training;
  s->job_error.clear();
  s->job_trace = Json::array();
  s->updated_at = NowUtc();
  try {
    Persist(*s);
  } catch (const Error& e) {
    s->job = JobState::kIdle;
    return ErrorReply(500, "io", e.what());
  }
  {
    std::lock_guard<std::mutex> service_lock(mu_);
    jobs_.emplace_back([this, s] { RunJob(s); });
  }
  Json out = ref;
  out["job"] = std::string(JobName(JobState::kRunning));
  return Reply(202, out);
}

void SessionService::RunJob(std::shared_ptr<Session> s) {
  ExperimentConfig config;
  std::vector<CandidateState> candidates;
  Bracket bracket;
  {
    std::lock_guard<std::mutex> lock(s->mu);
    config = s->config;
    config.training = TrainingConfigFromJson(s->job_training);
    candidates = s->candidates;
    bracket = s->tournament->bracket();
  }
  std::optional<ExperimentReport> report;
  std::string error;
  Json trace = Json::array();
  try {
    report = RunFromHumanTournament(config, candidates, bracket,
                                    LabelSource::kHuman);
  } catch (const DivergenceError& e) {
    error = e.what();
    trace = TraceToJson(e.trace());
  } catch (const std::exception& e) {
    error = e.what();
  }

  std::lock_guard<std::mutex> lock(s->mu);
  s->updated_at = NowUtc();
  try {
    if (s->status == SessionStatus::kAbandoned) {
      s->job = JobState::kCancelled;
    } else if (!report) {
      s->job = JobState::kFailed;
      s->job_error = error;
      s->job_trace = trace;
    } else {
      s->agent_tree = report->final().agent_tree;
      s->status = SessionStatus::kTrained;
      Persist(*s);
      WriteFileAtomic(ReportPath(s->id), ReportToJson(*report).dump(2) + "\n");
      s->status = SessionStatus::kReported;
      s->job = JobState::kDone;
    }
    Persist(*s);
  } catch (const Error& e) {
    s->job = JobState::kFailed;
    s->job_error = e.what();
  }
}

HttpResult SessionService::GetReport(const std::string& id) const {
  auto s = Find(id);
  if (!s) return NotFound(id);
  std::lock_guard<std::mutex> lock(s->mu);
  switch (s->job) {
    case JobState::kIdle:
    case JobState::kCancelled:
      return ErrorReply(409, "no-job", "training has not been started");
    case JobState::kRunning:
      return Reply(202, Json{{"job", "running"}});
    case JobState::kFailed:
      return Reply(500, Json{{"error", Json{{"code", "training-failed"},
                                            {"message", s->job_error}}},
                             {"trace", s->job_trace}});
    case JobState::kDone:
      break;
  }
  try {
    return {200, ReadFile(ReportPath(id))};
  } catch (const Error& e) {
    return ErrorReply(500, "io", e.what());
  }
}

HttpResult SessionService::Abandon(const std::string& id) {
  auto s = Find(id);
  if (!s) return NotFound(id);
  std::lock_guard<std::mutex> lock(s->mu);
  if (s->status != SessionStatus::kAbandoned) {
    const SessionStatus previous = s->status;
    s->status = SessionStatus::kAbandoned;
    s->updated_at = NowUtc();
    try {
      Persist(*s);
    } catch (const Error& e) {
      s->status = previous;
      return ErrorReply(500, "io", e.what());
    }
  }
  return Reply(200, s->Summary());
}

void SessionService::WaitForJobs() {
  for (;;) {
    std::vector<std::thread> running;
    {
      std::lock_guard<std::mutex> lock(mu_);
      running.swap(jobs_);
    }
    if (running.empty()) return;
    for (auto& t : running) t.join();
  }
}

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;
  bool bound = false;

  explicit Impl(SessionService& svc) : service(svc) {
    server.set_default_headers(
        {{"Access-Control-Allow-Origin", "*"},
         {"Access-Control-Allow-Headers", "Content-Type, Idempotency-Key"},
         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    auto send = [](httplib::Response& res, const HttpResult& r) {
      res.status = r.status;
      res.set_content(r.body, kJsonType);
    };
    server.Post("/sessions", [this, send](const httplib::Request& req,
                                          httplib::Response& res) {
      send(res, service.CreateSession(req.body,
                                      req.get_header_value("Idempotency-Key")));
    });
    server.Get(R"(/sessions/([^/]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, service.GetSession(req.matches[1]));
               });
    server.Get(R"(/sessions/([^/]+)/query)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, service.GetQuery(req.matches[1]));
               });
    server.Post(R"(/sessions/([^/]+)/label)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.SubmitLabel(req.matches[1], req.body));
                });
    server.Get(R"(/sessions/([^/]+)/tree)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, service.GetTree(req.matches[1],
                                           req.get_param_value("which")));
               });
    server.Post(R"(/sessions/([^/]+)/train)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.StartTraining(req.matches[1], req.body));
                });
    server.Get(R"(/sessions/([^/]+)/report)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, service.GetReport(req.matches[1]));
               });
    server.Post(R"(/sessions/([^/]+)/abandon)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.Abandon(req.matches[1]));
                });
  }
};

HttpServer::HttpServer(SessionService& service)
    : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  Require(port >= 0 && port <= 65535, "port out of range");
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) bound = 0;
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = 0;
  }
  if (bound == 0) {
    Fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void HttpServer::Listen() {
  Require(impl_->bound, "Listen requires a successful Bind");
  impl_->server.listen_after_bind();
}

void HttpServer::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace acv
