#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kfuks/asymptotics.hpp"

namespace kfuks {

/// Every pass/fail threshold and runtime budget used by the verify suites.
struct Thresholds {
  double pointwise_rel = 1e-6;
  double pointwise_seconds = 1.0;

  double extremal_rel = 1e-3;
  int extremal_points = 20;
  int extremal_degree = 12;
  double extremal_seconds = 120.0;

  int ray_k_min = 3;
  int ray_k_max = 10;
  double corollary_rel = 1e-2;
  double corollary_model_rel = 2e-2;
  double corollary_seconds = 60.0;

  double theorem_rel = 5e-2;
  double theorem_seconds = 600.0;

  int bound_samples = 200;

  double monotone_law_rel = 1e-3;

  double stability_oracle_rel = 1e-6;
  double stability_converged_rel = 1e-2;
  double stability_seconds = 120.0;

  double ramadanov_law_rel = 1e-8;
  double ramadanov_limit_rel = 1e-6;
  int ramadanov_steps = 10;

  double localization_rel = 0.10;
  double localization_d = 1e-2;
  double localization_seconds = 300.0;

  nlohmann::json to_json() const;
};

const Thresholds& thresholds();

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;  // relative, or a count for property checks
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

struct SuiteResult {
  std::string suite;
  int criterion = 0;
  bool pass = false;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> traces;  // (file stem, csv)
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json to_json() const;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
};

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace kfuks
