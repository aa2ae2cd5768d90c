#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kfuks/run.hpp"
#include "oracles.hpp"

using namespace kfuks;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kfuks_test_run_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config schema") {
  const json ok = {{"task", "metric"}, {"domain", {{"kind", "disc"}}}, {"point", {0.1}}};
  CHECK_NOTHROW(RunConfig::from_json(ok));
  json extra = ok;
  extra["colour"] = "blue";
  CHECK_THROWS_AS(RunConfig::from_json(extra), Error);
  CHECK_THROWS_AS(RunConfig::from_json({{"task", "dance"}}), Error);
  CHECK_THROWS_AS(RunConfig::from_json({{"task", "metric"}, {"domain", {{"kind", "disc"}}}}), Error);
  CHECK_THROWS_AS(RunConfig::from_json({{"task", "metric"}, {"domain", {{"kind", "disc"}}}, {"point", {0.1, 0.2}}}),
                  Error);
  CHECK_THROWS_AS(RunConfig::from_json({{"task", "verify"}}), Error);
  json ray = {{"task", "limits"},
              {"domain", {{"kind", "disc"}}},
              {"ray", {{"vertex", {1.0}}, {"normal", {-1.0}}, {"weights", {1}}, {"k_min", 3}, {"k_max", 5}}}};
  CHECK_THROWS_AS(RunConfig::from_json(ray), Error);
  try {
    RunConfig::from_json(extra);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::Schema) == 2);
  CHECK(exit_code_for(ErrorCode::Domain) == 2);
  CHECK(exit_code_for(ErrorCode::Numerical) == 3);
  CHECK(exit_code_for(ErrorCode::IllConditioned) == 3);
  CHECK(exit_code_for(ErrorCode::Io) == 4);
}

TEST_CASE("metric task") {
  const auto out = run(RunConfig::from_json(
      {{"task", "metric"}, {"domain", {{"kind", "disc"}}}, {"point", {0.0}}, {"vector", {1.0}},
       {"engine", {{"kind", "gram"}, {"degree", 16}}}}));
  CHECK(out.exit_code == 0);
  const json& r = out.result["result"];
  CHECK(out.result["status"] == "OK");
  CHECK(r["K"].get<double>() == doctest::Approx(1.0 / oracle::pi).epsilon(1e-12));
  CHECK(r["Btilde"].get<double>() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-8));
  CHECK(r["I"].get<double>() == doctest::Approx(6.0 / oracle::pi).epsilon(1e-10));
  CHECK(r["M"].get<double>() == doctest::Approx(12.0 / oracle::pi).epsilon(1e-10));
  for (const char* k : {"z", "G", "Ric", "Gtilde", "J", "gtilde", "T", "B", "ricci_curvature", "engine"})
    CHECK(r.contains(k));
}

TEST_CASE("kernel task with off-diagonal point") {
  const auto out = run(RunConfig::from_json(
      {{"task", "kernel"}, {"domain", {{"kind", "ball"}, {"n", 2}}}, {"point", {0.1, 0.2}}, {"w", {json{0.0, 0.3}, 0.1}}}));
  oracle::Vec z(2), w(2);
  z << 0.1, 0.2;
  w << oracle::cplx(0.0, 0.3), 0.1;
  const auto ref = oracle::ball_kernel(z, w);
  const auto k = out.result["result"]["kernel"];
  CHECK(k[0].get<double>() == doctest::Approx(ref.real()).epsilon(1e-12));
  CHECK(k[1].get<double>() == doctest::Approx(ref.imag()).epsilon(1e-12));
}

TEST_CASE("verify task writes PASS and traces") {
  const fs::path dir = scratch("verify");
  const int rc = run_config({{"task", "verify"}, {"suite", "corollary-disc"}}, dir.string());
  CHECK(rc == 0);
  const json r = json::parse(slurp(dir / "result.json"));
  CHECK(r["status"] == "PASS");
  CHECK(r["task"] == "verify");
  for (const auto& t : r["result"]["traces"]) {
    const std::string csv = slurp(dir / t.get<std::string>());
    CHECK(csv.rfind("k,d,value,running_extrapolant", 0) == 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("errors become result files with mapped exit codes") {
  const fs::path dir = scratch("errors");
  std::string diag;
  CHECK(run_config({{"task", "metric"}, {"colour", 1}}, dir.string(), &diag) == 2);
  CHECK_FALSE(diag.empty());
  CHECK(json::parse(slurp(dir / "result.json"))["status"] == "ERROR");
  CHECK(run_config({{"task", "metric"}, {"domain", {{"kind", "ball"}, {"n", 2}}}, {"point", {0.9, 0.9}}},
                   dir.string()) == 2);
  CHECK(run_config({{"task", "verify"}, {"suite", "nonexistent"}}, dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("outputs are bit-identical across runs and thread counts") {
  const json cfg = {{"task", "limits"},
                    {"domain", {{"kind", "ball"}, {"n", 2}}},
                    {"ray",
                     {{"vertex", {1.0, 0.0}},
                      {"normal", {-1.0, 0.0}},
                      {"weights", {1, 2}},
                      {"directions", {{1.0, 0.0}, {0.0, 1.0}}},
                      {"model", {{"kind", "model"}, {"lead", 2}, {"P", {{1, 1, 1.0, 0.0}}}, {"weights", {1, 2}}}}}}};
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  set_thread_count(1);
  CHECK(run_config(cfg, a.string()) == 0);
  set_thread_count(4);
  CHECK(run_config(cfg, b.string()) == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++files;
  }
  CHECK(files >= 5);
  CHECK(json::parse(slurp(a / "result.json"))["status"] == "PASS");
  fs::remove_all(a);
  fs::remove_all(b);
}
