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

#include "acv/acv.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "acv/service.hpp"
#include "acv/verify.hpp"

struct acv_report {
  acv::ExperimentReport report;
};

struct acv_server {
  std::unique_ptr<acv::SessionService> service;
  std::unique_ptr<acv::HttpServer> http;
};

namespace {

thread_local std::string last_error;

acv_status ToStatus(acv::ErrorCode code) {
  switch (code) {
    case acv::ErrorCode::kInvalidArgument:
      return ACV_ERR_INVALID_ARGUMENT;
    case acv::ErrorCode::kParse:
      return ACV_ERR_PARSE;
    case acv::ErrorCode::kEpisodeTerminated:
      return ACV_ERR_EPISODE_TERMINATED;
    case acv::ErrorCode::kOracleUnresolved:
      return ACV_ERR_ORACLE_UNRESOLVED;
    case acv::ErrorCode::kDivergence:
      return ACV_ERR_DIVERGENCE;
    case acv::ErrorCode::kSessionIncomplete:
      return ACV_ERR_SESSION_INCOMPLETE;
    case acv::ErrorCode::kMismatch:
      return ACV_ERR_MISMATCH;
    case acv::ErrorCode::kIo:
      return ACV_ERR_IO;
  }
  return ACV_ERR_INTERNAL;
}

template <typename F>
acv_status Guard(F&& f) {
  last_error.clear();
  try {
    f();
    return ACV_OK;
  } catch (const acv::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return ACV_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return ACV_ERR_INTERNAL;
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void NotNull(const void* p, const char* what) {
  acv::Require(p != nullptr, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* acv_version(void) { return "0.1.0"; }

const char* acv_status_name(acv_status status) {
  switch (status) {
    case ACV_OK:
      return "ok";
    case ACV_ERR_INVALID_ARGUMENT:
      return "invalid-argument";
    case ACV_ERR_PARSE:
      return "parse";
    case ACV_ERR_EPISODE_TERMINATED:
      return "episode-terminated";
    case ACV_ERR_ORACLE_UNRESOLVED:
      return "oracle-unresolved";
    case ACV_ERR_DIVERGENCE:
      return "divergence";
    case ACV_ERR_SESSION_INCOMPLETE:
      return "session-incomplete";
    case ACV_ERR_MISMATCH:
      return "mismatch";
    case ACV_ERR_IO:
      return "io";
    case ACV_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* acv_last_error(void) { return last_error.c_str(); }

void acv_string_free(char* s) { std::free(s); }

acv_status acv_simulate(const char* config_json, acv_report** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = nullptr;
    const acv::Json j = config_json ? acv::ParseJson(config_json)
                                    : acv::Json::object();
    auto report = std::make_unique<acv_report>();
    report->report = acv::RunScenario(acv::ExperimentConfigFromJson(j));
    *out = report.release();
  });
}

acv_status acv_report_from_json(const char* json, acv_report** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    *out = nullptr;
    auto report = std::make_unique<acv_report>();
    report->report = acv::ReportFromJson(acv::ParseJson(json));
    *out = report.release();
  });
}

acv_status acv_report_to_json(const acv_report* report, char** out) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(out, "out");
    *out = Dup(acv::ReportToJson(report->report).dump(2) + "\n");
  });
}

acv_status acv_report_tree(const acv_report* report, const char* which,
                           const char* format, char** out) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(which, "which");
    NotNull(out, "out");
    const std::string w = which;
    acv::Require(w == "human" || w == "agent", "which must be human or agent");
    const auto fmt = acv::TreeFormatFromName(format ? format : "json");
    const auto& tree = w == "human" ? report->report.human_tree
                                    : report->report.final().agent_tree;
    *out = Dup(acv::SerializeTree(tree, fmt));
  });
}

acv_status acv_report_summary(const acv_report* report, double threshold,
                              char** text, int* conformed) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(text, "text");
    const auto summary = acv::Summarize(report->report, threshold);
    *text = Dup(summary.text);
    if (conformed) *conformed = summary.conformed ? 1 : 0;
  });
}

void acv_report_free(acv_report* report) { delete report; }

acv_status acv_compare_trees(const char* human_json, const char* agent_json,
                             double threshold, char** text, int* conformed) {
  return Guard([&] {
    NotNull(human_json, "human_json");
    NotNull(agent_json, "agent_json");
    NotNull(text, "text");
    const auto human = acv::ParseGroundedTree(human_json);
    const auto agent = acv::ParseGroundedTree(agent_json);
    const auto summary =
        acv::SummarizeMetrics(acv::CompareTrees(human, agent), threshold);
    *text = Dup(summary.text);
    if (conformed) *conformed = summary.conformed ? 1 : 0;
  });
}

acv_status acv_render_tree(const char* tree_json, const char* format,
                           char** out) {
  return Guard([&] {
    NotNull(tree_json, "tree_json");
    NotNull(out, "out");
    const auto fmt = acv::TreeFormatFromName(format ? format : "json");
    *out = Dup(acv::SerializeTree(acv::ParseGroundedTree(tree_json), fmt));
  });
}

acv_status acv_server_create(const char* data_dir, acv_server** out) {
  return Guard([&] {
    NotNull(data_dir, "data_dir");
    NotNull(out, "out");
    *out = nullptr;
    auto server = std::make_unique<acv_server>();
    server->service = std::make_unique<acv::SessionService>(data_dir);
    server->http = std::make_unique<acv::HttpServer>(*server->service);
    *out = server.release();
  });
}

acv_status acv_server_bind(acv_server* server, const char* host, int port,
                           int* bound_port) {
  return Guard([&] {
    NotNull(server, "server");
    const int bound = server->http->Bind(host ? host : "0.0.0.0", port);
    if (bound_port) *bound_port = bound;
  });
}

acv_status acv_server_listen(acv_server* server) {
  return Guard([&] {
    NotNull(server, "server");
    server->http->Listen();
  });
}

void acv_server_stop(acv_server* server) {
  if (server) server->http->Stop();
}

void acv_server_free(acv_server* server) {
  if (!server) return;
  server->http.reset();
  server->service.reset();
  delete server;
}

}  // extern "C"
