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

// acv: command-line front end over the C API.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "acv/acv.h"

namespace {

constexpr int kExitError = 2;

// Owns a library-allocated string.
struct LibString {
  char* p = nullptr;
  ~LibString() { acv_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ReportHandle {
  acv_report* p = nullptr;
  ~ReportHandle() { acv_report_free(p); }
};

int Report(acv_status status) {
  std::cerr << "acv: " << acv_status_name(status) << ": " << acv_last_error()
            << "\n";
  return kExitError;
}

bool ReadText(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "acv: cannot read " << path << "\n";
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

bool WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "acv: cannot write " << path << "\n";
    return false;
  }
  return true;
}

int Serve(int port, const std::string& host, std::string data_dir) {
  if (const char* env = std::getenv("ACV_DATA_DIR"); env && *env) {
    data_dir = env;
  }
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  acv_server* server = nullptr;
  if (auto s = acv_server_create(data_dir.c_str(), &server); s != ACV_OK) {
    return Report(s);
  }
  int bound = 0;
  if (auto s = acv_server_bind(server, host.c_str(), port, &bound);
      s != ACV_OK) {
    acv_server_free(server);
    return Report(s);
  }
  std::cout << "acv: serving on " << host << ":" << bound << " (data "
            << data_dir << ")" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    acv_server_stop(server);
  });
  const acv_status status = acv_server_listen(server);
  if (status != ACV_OK) {
    // Wake the waiter so it can exit.
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  acv_server_free(server);
  return status == ACV_OK ? 0 : Report(status);
}

int Simulate(const std::string& kind, int players, double p,
             unsigned long long seed, const std::string& world,
             const std::string& config_path, const std::string& out_path) {
  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) {
    std::string text;
    if (!ReadText(config_path, &text)) return kExitError;
    config = nlohmann::json::parse(text, nullptr, false);
    if (config.is_discarded() || !config.is_object()) {
      std::cerr << "acv: " << config_path << " is not a JSON object\n";
      return kExitError;
    }
  }
  config["case"] = kind;
  config["players"] = players;
  config["p"] = p;
  config["seed"] = seed;
  config["worldName"] = world;

  ReportHandle report;
  if (auto s = acv_simulate(config.dump().c_str(), &report.p); s != ACV_OK) {
    return Report(s);
  }
  LibString json;
  if (auto s = acv_report_to_json(report.p, &json.p); s != ACV_OK) {
    return Report(s);
  }
  if (!WriteText(out_path, json.str())) return kExitError;
  LibString text;
  int conformed = 0;
  const double threshold = config.value("threshold", 0.9);
  if (auto s = acv_report_summary(report.p, threshold, &text.p, &conformed);
      s != ACV_OK) {
    return Report(s);
  }
  std::cout << text.str() << "report written to " << out_path << "\n";
  return 0;
}

int LoadReport(const std::string& path, ReportHandle* report) {
  std::string text;
  if (!ReadText(path, &text)) return kExitError;
  if (auto s = acv_report_from_json(text.c_str(), &report->p); s != ACV_OK) {
    return Report(s);
  }
  return 0;
}

int Render(const std::string& path, const std::string& format,
           const std::string& out_dir) {
  ReportHandle report;
  if (int rc = LoadReport(path, &report)) return rc;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "acv: cannot create " << out_dir << ": " << ec.message()
              << "\n";
    return kExitError;
  }
  for (const char* which : {"human", "agent"}) {
    LibString tree;
    if (auto s = acv_report_tree(report.p, which, format.c_str(), &tree.p);
        s != ACV_OK) {
      return Report(s);
    }
    const auto file = std::filesystem::path(out_dir) /
                      (std::string(which) + "Tree." + format);
    if (!WriteText(file.string(), tree.str())) return kExitError;
    std::cout << file.string() << "\n";
  }
  return 0;
}

int Summarize(const std::string& path, double threshold) {
  ReportHandle report;
  if (int rc = LoadReport(path, &report)) return rc;
  LibString text;
  int conformed = 0;
  if (auto s = acv_report_summary(report.p, threshold, &text.p, &conformed);
      s != ACV_OK) {
    return Report(s);
  }
  std::cout << text.str();
  return conformed ? 0 : 1;
}

int Compare(const std::string& human_path, const std::string& agent_path,
            double threshold) {
  std::string human, agent;
  if (!ReadText(human_path, &human) || !ReadText(agent_path, &agent)) {
    return kExitError;
  }
  LibString text;
  int conformed = 0;
  if (auto s = acv_compare_trees(human.c_str(), agent.c_str(), threshold,
                                 &text.p, &conformed);
      s != ACV_OK) {
    return Report(s);
  }
  std::cout << text.str();
  return conformed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Advice-conformance verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(acv_version()));

  auto* serve = app.add_subcommand("serve", "Run the session HTTP service");
  int port = 8080;
  std::string host = "0.0.0.0";
  std::string data_dir = "./sessions";
  serve->add_option("--port", port, "Port (0 picks a free one)")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir,
                    "Session directory (ACV_DATA_DIR overrides)");

  auto* simulate = app.add_subcommand("simulate", "Run a simulated experiment");
  std::string kind = "good";
  int players = 16;
  double p = 0.3;
  unsigned long long seed = 42;
  std::string world = "default";
  std::string config_path;
  std::string out_path = "report.json";
  simulate->add_option("--case", kind, "Advice case")
      ->check(CLI::IsMember({"good", "bad"}));
  simulate->add_option("--players", players, "Number of candidate states")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--p", p, "Upset probability")->check(CLI::Range(0.0, 0.5));
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--world", world, "World name");
  simulate->add_option("--config", config_path,
                       "JSON file with further experiment settings");
  simulate->add_option("--out", out_path, "Report path");

  auto* render = app.add_subcommand("render", "Write humanTree/agentTree files");
  std::string report_path;
  std::string format = "dot";
  std::string out_dir = ".";
  render->add_option("report", report_path, "Report JSON")->required();
  render->add_option("--format", format, "Tree format")
      ->check(CLI::IsMember({"dot", "json"}));
  render->add_option("--out-dir", out_dir, "Output directory");

  auto* summarize = app.add_subcommand("summarize", "Print a report's verdict");
  double threshold = 0.9;
  summarize->add_option("report", report_path, "Report JSON")->required();
  summarize->add_option("--threshold", threshold, "Pairwise agreement threshold");

  auto* compare = app.add_subcommand("compare", "Compare two tree documents");
  std::string human_path, agent_path;
  compare->add_option("human", human_path, "Human tree JSON")->required();
  compare->add_option("agent", agent_path, "Agent tree JSON")->required();
  compare->add_option("--threshold", threshold, "Pairwise agreement threshold");

  CLI11_PARSE(app, argc, argv);

  if (*serve) return Serve(port, host, data_dir);
  if (*simulate) {
    return Simulate(kind, players, p, seed, world, config_path, out_path);
  }
  if (*render) return Render(report_path, format, out_dir);
  if (*summarize) return Summarize(report_path, threshold);
  return Compare(human_path, agent_path, threshold);
}
