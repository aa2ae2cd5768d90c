#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kfuks/kfuks.h"

int main(int argc, char** argv) {
  CLI::App app{"Bergman and Kobayashi-Fuks invariants, boundary limits and verification suites"};
  std::string config_path, task, out_dir = "kfuks_out", suite;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  long long seed = -1;
  bool list_suites = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--task", task, "kernel | metric | limits | verify | sweep (overrides the config)");
  app.add_option("--out", out_dir, "output directory for result.json and trace_*.csv");
  app.add_option("--threads", threads, "worker threads (default: logical cores)");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--suite", suite, "verify suite name (overrides the config)");
  app.add_flag("--list-suites", list_suites, "print the verify suite names and exit");
  CLI11_PARSE(app, argc, argv);

  if (list_suites) {
    for (const char* s : {"pointwise", "extremal-identity", "corollary", "corollary-ball", "corollary-ball-n2", "corollary-disc",
                          "theorem-egg", "kobayashi-bound", "monotonicity", "stability-egg", "ramadanov",
                          "localization-disc"})
      std::cout << s << '\n';
    return 0;
  }

  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "error: cannot read " << config_path << '\n';
      return 2;
    }
    try {
      config = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << '\n';
      return 2;
    }
    if (!config.is_object()) {
      std::cerr << "error: configuration must be a JSON object\n";
      return 2;
    }
  }
  if (!task.empty()) config["task"] = task;
  if (!suite.empty()) {
    config["suite"] = suite;
    if (!config.contains("task")) config["task"] = "verify";
  }
  if (seed >= 0) config["seed"] = seed;
  if (config.contains("out") && !app.count("--out") && config["out"].is_string())
    out_dir = config["out"].get<std::string>();

  if (threads < 1) threads = 1;
  if (kf_set_threads(threads) != KF_OK) {
    std::cerr << "error: " << kf_last_error() << '\n';
    return 2;
  }

  const int rc = kf_run(config.dump().c_str(), out_dir.c_str());
  const std::string diag = kf_last_error();
  if (!diag.empty()) std::cerr << "error: " << diag << '\n';

  std::ifstream res(out_dir + "/result.json");
  if (res) {
    try {
      const auto j = nlohmann::json::parse(res);
      std::cout << j.value("status", std::string("?")) << ' ' << out_dir << "/result.json\n";
    } catch (const nlohmann::json::exception&) {
    }
  }
  return rc;
}
