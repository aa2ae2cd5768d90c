// One line per acceptance criterion; nonzero exit if any criterion fails or
// exceeds its runtime budget.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <string>
#include <vector>

#include "kfuks/verify.hpp"

using namespace kfuks;

namespace {

struct Criterion {
  int id;
  std::string suite;
  std::string what;
  double budget;  // seconds, 0 = unbounded
};

}  // namespace

int main(int argc, char** argv) {
  const auto& T = thresholds();
  const std::vector<Criterion> criteria = {
      {1, "pointwise", "disc and ball pointwise stack", T.pointwise_seconds},
      {2, "extremal-identity", "Btilde^2 = I/K = M/(K^{n+1} J) across pipelines", T.extremal_seconds},
      {3, "corollary", "ball and disc boundary limits", T.corollary_seconds},
      {4, "theorem-egg", "E2 scaled limits against the model", T.theorem_seconds},
      {5, "kobayashi-bound", "Ric < n+1 and Gtilde > 0 on random samples", 0.0},
      {6, "monotonicity", "M and T decrease under inclusion; disc radius law", 0.0},
      {7, "stability-egg", "bumped egg family against the scaling oracle", T.stability_seconds},
      {8, "ramadanov", "inside convergence of discs and balls", 0.0},
      {9, "localization-disc", "localization ratios at d = 1e-2", T.localization_seconds},
  };
  // optional filter: acceptance 3 4
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string note;
    try {
      const SuiteResult r = run_suite(c.suite);
      pass = r.pass;
      int bad = 0;
      for (const auto& ch : r.checks)
        if (!ch.pass) {
          if (bad++ == 0) note = "first failing check: " + ch.name;
        }
      if (bad == 0) note = std::to_string(r.checks.size()) + " checks";
    } catch (const Error& e) {
      note = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char budget[64] = "";
    if (c.budget > 0.0) {
      std::snprintf(budget, sizeof budget, " / %.0fs", c.budget);
      if (secs > c.budget) {
        pass = false;
        note += "; over the runtime budget";
      }
    }
    std::printf("criterion %d %-5s %-18s %8.2fs%s  %s (%s)\n", c.id, pass ? "PASS" : "FAIL", c.suite.c_str(), secs,
                budget, c.what.c_str(), note.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  return failed ? 1 : 0;
}
