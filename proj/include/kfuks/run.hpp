#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kfuks/verify.hpp"

namespace kfuks {

enum ExitCode : int {
  kExitOk = 0,
  kExitFail = 1,
  kExitSchema = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

int exit_code_for(ErrorCode code);

struct RayConfig {
  Point vertex;
  Point normal;
  double aperture = kPi / 6.0;
  int k_min = 3;
  int k_max = 10;
  std::vector<double> weights;
  std::vector<Point> directions;
  std::optional<DomainSpec> model;
  double tolerance = 0.05;
};

struct SweepConfig {
  std::string kind;  // stability | inside | localization
  int m = 1;
  double lead = 1.0;
  std::vector<double> deltas;
  std::vector<DomainSpec> domains;
  std::optional<BallDomain> neighborhood;
  Point vertex, normal;
  std::vector<double> t;
};

struct RunConfig {
  std::string task;  // kernel | metric | limits | verify | sweep
  std::optional<DomainSpec> domain;
  EngineOptions engine;
  std::uint64_t seed = 1;
  std::optional<Point> point;
  std::optional<Point> w;
  std::optional<Point> vector;
  std::optional<RayConfig> ray;
  std::optional<SweepConfig> sweep;
  std::string suite;
  std::string out;

  /// Throws Schema on unknown keys or malformed values.
  static RunConfig from_json(const nlohmann::json& j);
};

struct RunOutput {
  int exit_code = kExitOk;
  nlohmann::json result;
  std::vector<std::pair<std::string, std::string>> traces;  // (file stem, csv)
};

RunOutput run(const RunConfig& config, const GramCache* cache = nullptr);

/// Writes result.json and trace_<stem>.csv files into dir (created if needed).
void write_outputs(const RunOutput& out, const std::string& dir);

/// Parse, run, write. Errors become a result.json with status ERROR and the
/// mapped exit code; `diagnostic` receives the message.
int run_config(const nlohmann::json& config, const std::string& out_dir, std::string* diagnostic = nullptr);

}  // namespace kfuks
