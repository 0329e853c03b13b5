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

// Session service for live preference tournaments. SessionService holds the
// transport-independent handlers; HttpServer exposes them over HTTP+JSON.
//
//   POST /sessions                      create (Idempotency-Key honoured)
//   GET  /sessions/{id}                 session summary
//   GET  /sessions/{id}/query           next pending pair and progress
//   POST /sessions/{id}/label           submit {leftId, rightId, choice}
//   GET  /sessions/{id}/tree?which=     human | agent
//   POST /sessions/{id}/train           start the training job
//   GET  /sessions/{id}/report          202 until ready
//   POST /sessions/{id}/abandon

#ifndef ACV_SERVICE_HPP_
#define ACV_SERVICE_HPP_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "acv/json_io.hpp"

namespace acv {

enum class SessionStatus { kCollecting, kTrained, kReported, kAbandoned };

std::string_view SessionStatusName(SessionStatus status);
SessionStatus SessionStatusFromName(std::string_view name);

struct HttpResult {
  int status = 200;
  std::string body;  // JSON text.
};

class SessionService {
 public:
  // Loads and replays every session persisted under `data_dir` (created if
  // missing). Throws Error(kParse) on a corrupt session document.
  explicit SessionService(std::string data_dir);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  HttpResult CreateSession(const std::string& body,
                           const std::string& idempotency_key);
  HttpResult GetSession(const std::string& id) const;
  HttpResult GetQuery(const std::string& id) const;
  HttpResult SubmitLabel(const std::string& id, const std::string& body);
  HttpResult GetTree(const std::string& id, const std::string& which) const;
  HttpResult StartTraining(const std::string& id, const std::string& body);
  HttpResult GetReport(const std::string& id) const;
  HttpResult Abandon(const std::string& id);

  // Blocks until every running training job has finished.
  void WaitForJobs();

  const std::string& data_dir() const { return data_dir_; }

 private:
  struct Session;

  std::shared_ptr<Session> Find(const std::string& id) const;
  void Persist(const Session& s) const;
  std::string SessionPath(const std::string& id) const;
  std::string ReportPath(const std::string& id) const;
  void RunJob(std::shared_ptr<Session> s);

  std::string data_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::string> idempotency_;  // key -> session id
  std::vector<std::thread> jobs_;
};

class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  // Returns the bound port; port 0 picks an ephemeral one. Throws
  // Error(kIo) when binding fails.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Requires a successful Bind.
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace acv

#endif  // ACV_SERVICE_HPP_
