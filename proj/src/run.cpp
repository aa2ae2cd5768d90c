#include "kfuks/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>

namespace kfuks {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Numerical:
    case ErrorCode::Truncation:
    case ErrorCode::Infeasible:
    case ErrorCode::IllConditioned:
    case ErrorCode::StepTooLarge:
      return kExitNumerical;
    case ErrorCode::Io:
      return kExitIo;
    default:
      return kExitSchema;
  }
}

namespace {

void reject_unknown(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorCode::Schema, std::string(where) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(ErrorCode::Schema, "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) fail(ErrorCode::Schema, std::string(where) + " needs '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Schema, std::string("bad value for '") + key + "' in " + where + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, const char* where, T def) {
  return j.contains(key) ? get<T>(j, key, where) : def;
}

RayConfig ray_from_json(const json& j) {
  reject_unknown(j, "ray", {"vertex", "normal", "aperture", "k_min", "k_max", "weights", "directions", "model", "tolerance"});
  RayConfig r;
  if (!j.contains("vertex") || !j.contains("normal")) fail(ErrorCode::Schema, "ray needs 'vertex' and 'normal'");
  r.vertex = point_from_json(j["vertex"]);
  r.normal = point_from_json(j["normal"]);
  r.aperture = get_or(j, "aperture", "ray", r.aperture);
  r.k_min = get_or(j, "k_min", "ray", r.k_min);
  r.k_max = get_or(j, "k_max", "ray", r.k_max);
  r.weights = get<std::vector<double>>(j, "weights", "ray");
  if (j.contains("directions")) {
    if (!j["directions"].is_array()) fail(ErrorCode::Schema, "ray directions must be an array");
    for (const auto& d : j["directions"]) r.directions.push_back(point_from_json(d));
  }
  if (j.contains("model")) r.model = DomainSpec::from_json(j["model"]);
  r.tolerance = get_or(j, "tolerance", "ray", r.tolerance);
  if (r.k_max - r.k_min + 1 < 4) fail(ErrorCode::Schema, "ray needs at least 4 samples (k_max - k_min >= 3)");
  if (static_cast<int>(r.weights.size()) != r.vertex.size()) fail(ErrorCode::Schema, "ray weights dimension mismatch");
  return r;
}

SweepConfig sweep_from_json(const json& j) {
  reject_unknown(j, "sweep", {"kind", "m", "lead", "deltas", "domains", "neighborhood", "vertex", "normal", "t"});
  SweepConfig s;
  s.kind = get<std::string>(j, "kind", "sweep");
  if (s.kind == "stability") {
    s.m = get<int>(j, "m", "sweep");
    s.lead = get_or(j, "lead", "sweep", 1.0);
    s.deltas = get<std::vector<double>>(j, "deltas", "sweep");
  } else if (s.kind == "inside") {
    if (!j.contains("domains") || !j["domains"].is_array()) fail(ErrorCode::Schema, "inside sweep needs 'domains'");
    for (const auto& d : j["domains"]) s.domains.push_back(DomainSpec::from_json(d));
  } else if (s.kind == "localization") {
    if (!j.contains("neighborhood")) fail(ErrorCode::Schema, "localization sweep needs 'neighborhood'");
    const auto& nb = j["neighborhood"];
    reject_unknown(nb, "neighborhood", {"center", "radius"});
    BallDomain b;
    if (!nb.contains("center")) fail(ErrorCode::Schema, "neighborhood needs 'center'");
    b.center = point_from_json(nb["center"]);
    b.n = static_cast<int>(b.center.size());
    b.radius = get<double>(nb, "radius", "neighborhood");
    s.neighborhood = b;
    if (!j.contains("vertex") || !j.contains("normal")) fail(ErrorCode::Schema, "localization sweep needs 'vertex' and 'normal'");
    s.vertex = point_from_json(j["vertex"]);
    s.normal = point_from_json(j["normal"]);
    s.t = get<std::vector<double>>(j, "t", "sweep");
  } else {
    fail(ErrorCode::Schema, "unknown sweep kind '" + s.kind + "'");
  }
  return s;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, "config", {"task", "domain", "engine", "seed", "point", "w", "vector", "ray", "sweep", "suite", "out"});
  RunConfig c;
  c.task = get<std::string>(j, "task", "config");
  if (c.task != "kernel" && c.task != "metric" && c.task != "limits" && c.task != "verify" && c.task != "sweep")
    fail(ErrorCode::Schema, "unknown task '" + c.task + "'");
  if (j.contains("domain")) c.domain = DomainSpec::from_json(j["domain"]);
  if (j.contains("engine")) c.engine = EngineOptions::from_json(j["engine"]);
  c.seed = get_or<std::uint64_t>(j, "seed", "config", 1);
  if (j.contains("point")) c.point = point_from_json(j["point"]);
  if (j.contains("w")) c.w = point_from_json(j["w"]);
  if (j.contains("vector")) c.vector = point_from_json(j["vector"]);
  if (j.contains("ray")) c.ray = ray_from_json(j["ray"]);
  if (j.contains("sweep")) c.sweep = sweep_from_json(j["sweep"]);
  c.suite = get_or<std::string>(j, "suite", "config", "");
  c.out = get_or<std::string>(j, "out", "config", "");

  auto need = [&](bool have, const char* what) {
    if (!have) fail(ErrorCode::Schema, "task '" + c.task + "' needs '" + what + "'");
  };
  if (c.task == "kernel" || c.task == "metric") {
    need(c.domain.has_value(), "domain");
    need(c.point.has_value(), "point");
  } else if (c.task == "limits") {
    need(c.domain.has_value(), "domain");
    need(c.ray.has_value(), "ray");
  } else if (c.task == "verify") {
    need(!c.suite.empty(), "suite");
  } else if (c.task == "sweep") {
    need(c.sweep.has_value(), "sweep");
    if (c.sweep->kind != "stability") need(c.domain.has_value(), "domain");
    if (c.sweep->kind != "localization") {
      need(c.point.has_value(), "point");
      need(c.vector.has_value(), "vector");
    }
  }
  if (c.domain) {
    const int n = c.domain->dim();
    for (const auto* p : {&c.point, &c.w, &c.vector})
      if (*p && (*p)->size() != n) fail(ErrorCode::Schema, "point or vector dimension does not match the domain");
  }
  return c;
}

namespace {

json task_kernel(const RunConfig& c, const EngineOptions& eo) {
  auto e = make_engine(*c.domain, eo);
  json r;
  r["z"] = point_to_json(*c.point);
  r["K"] = e->kernel_diag(*c.point);
  if (c.w) {
    const cplx k = e->kernel(*c.point, *c.w);
    r["w"] = point_to_json(*c.w);
    r["kernel"] = {k.real(), k.imag()};
  }
  r["engine"] = e->descriptor();
  return r;
}

json task_metric(const RunConfig& c, const EngineOptions& eo) {
  auto e = make_engine(*c.domain, eo);
  const auto m = kobayashi_fuks(*e, *c.point);
  json r = m.to_json();
  if (c.vector) {
    const Point& u = *c.vector;
    r["u"] = point_to_json(u);
    r["B"] = m.B(u);
    r["Btilde"] = m.Btilde(u);
    r["ricci_curvature"] = m.ricci_curvature(u);
    if (const auto* g = dynamic_cast<const GramBasisEngine*>(e.get())) {
      r["I"] = maximal_I(*g, *c.point, u).value;
      r["M"] = maximal_M(*g, *c.point, u).value;
    } else {
      const double bt = m.Btilde(u);
      r["I"] = bt * bt * m.K;
      r["M"] = std::pow(m.K, m.dim() + 1) * m.J * bt * bt;
    }
  }
  r["engine"] = e->descriptor();
  return r;
}

RunOutput task_limits(const RunConfig& c, const EngineOptions& eo) {
  const RayConfig& ray = *c.ray;
  auto e = make_engine(*c.domain, eo);
  const Cone cone = make_cone(ray.vertex, ray.normal, ray.aperture);
  const auto s = sample_ray(*e, cone, geometric_schedule(ray.k_min, ray.k_max));
  const Weights w = Weights::from_doubles(ray.weights);

  RunOutput out;
  json seqs = json::array();
  bool pass = true;
  auto add = [&](RaySequence& q, const std::string& stem, std::optional<double> ref) {
    if (ref) {
      q.reference = ref;
      q.tolerance = ray.tolerance;
      pass = pass && q.pass();
    }
    json j = q.to_json();
    j["trace"] = "trace_" + stem + ".csv";
    seqs.push_back(j);
    out.traces.push_back({stem, q.to_csv()});
  };

  std::optional<ModelReference> base;
  json refs = json::array();
  if (ray.model) {
    Point u0 = Point::Zero(c.domain->dim());
    u0[0] = 1.0;
    base = model_reference(*ray.model, u0, eo);
    refs.push_back(base->to_json());
  }
  auto det = scaled_kf_det(s, w);
  add(det, "det", base ? std::optional<double>(base->gtilde) : std::nullopt);
  auto [k, J] = scaled_kernel_and_J(s, w);
  add(k, "kernel", base ? std::optional<double>(base->K) : std::nullopt);
  add(J, "J", base ? std::optional<double>(base->J) : std::nullopt);
  for (std::size_t i = 0; i < ray.directions.size(); ++i) {
    const Point& u = ray.directions[i];
    auto b = scaled_kf_length(s, u, w);
    std::optional<double> ref;
    if (ray.model) {
      const auto mr = model_reference(*ray.model, limiting_direction(u, w), eo);
      refs.push_back(mr.to_json());
      ref = mr.Btilde;
    }
    add(b, "btilde_" + std::to_string(i), ref);
  }
  out.result = {{"sequences", seqs}, {"model_references", refs}, {"engine", e->descriptor()}};
  out.result["pass"] = ray.model ? json(pass) : json(nullptr);
  if (ray.model && !pass) out.exit_code = kExitFail;
  return out;
}

RunOutput task_sweep(const RunConfig& c, const EngineOptions& eo) {
  const SweepConfig& sw = *c.sweep;
  RunOutput out;
  if (sw.kind == "stability") {
    const auto t = stability_sweep(sw.m, *c.point, *c.vector, sw.deltas, sw.lead);
    out.result = t.to_json();
    out.traces.push_back({"stability", t.to_csv()});
  } else if (sw.kind == "inside") {
    const auto t = inside_convergence(sw.domains, *c.domain, *c.point, *c.vector, eo);
    out.result = t.to_json();
    out.traces.push_back({"inside", t.to_csv()});
  } else {
    const auto tr = localization_ratio(*c.domain, *sw.neighborhood, make_cone(sw.vertex, sw.normal), sw.t, eo);
    json seqs = json::array();
    for (const RaySequence* s : {&tr.J, &tr.M, &tr.gtilde}) {
      seqs.push_back(s->to_json());
      out.traces.push_back({s->quantity, s->to_csv()});
    }
    out.result = {{"sequences", seqs}};
  }
  out.result["kind"] = sw.kind;
  return out;
}

}  // namespace

RunOutput run(const RunConfig& c, const GramCache* cache) {
  EngineOptions eo = c.engine;
  eo.cache = cache;
  RunOutput out;
  if (c.task == "kernel") {
    out.result = task_kernel(c, eo);
  } else if (c.task == "metric") {
    out.result = task_metric(c, eo);
  } else if (c.task == "limits") {
    out = task_limits(c, eo);
  } else if (c.task == "sweep") {
    out = task_sweep(c, eo);
  } else {
    SuiteOptions so;
    so.seed = c.seed;
    const auto r = run_suite(c.suite, so);
    out.result = r.to_json();
    for (const auto& t : r.traces) out.traces.push_back({r.suite + "_" + t.first, t.second});
    out.result["traces"] = json::array();
    for (const auto& t : out.traces) out.result["traces"].push_back("trace_" + t.first + ".csv");
    if (!r.pass) out.exit_code = kExitFail;
  }
  json wrapped;
  wrapped["task"] = c.task;
  wrapped["status"] = out.exit_code == kExitOk ? (c.task == "verify" || (c.task == "limits" && c.ray->model) ? "PASS" : "OK")
                                               : "FAIL";
  wrapped["result"] = std::move(out.result);
  out.result = std::move(wrapped);
  return out;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::Io, "cannot open " + p.string() + " for writing");
  f << data;
  f.close();
  if (!f) fail(ErrorCode::Io, "failed writing " + p.string());
}

}  // namespace

void write_outputs(const RunOutput& out, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  write_file(d / "result.json", out.result.dump(2) + "\n");
  for (const auto& [stem, csv] : out.traces) write_file(d / ("trace_" + stem + ".csv"), csv);
}

int run_config(const json& config, const std::string& out_dir, std::string* diagnostic) {
  RunOutput out;
  try {
    const RunConfig c = RunConfig::from_json(config);
    const GramCache cache;
    out = run(c, &cache);
  } catch (const Error& e) {
    if (diagnostic) *diagnostic = std::string(error_code_name(e.code())) + ": " + e.what();
    out.exit_code = exit_code_for(e.code());
    out.result = {{"status", "ERROR"}, {"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
    out.traces.clear();
  } catch (const std::exception& e) {
    if (diagnostic) *diagnostic = e.what();
    out.exit_code = kExitNumerical;
    out.result = {{"status", "ERROR"}, {"error", {{"code", "internal"}, {"message", e.what()}}}};
    out.traces.clear();
  }
  try {
    write_outputs(out, out_dir);
  } catch (const Error& e) {
    if (diagnostic) *diagnostic = e.what();
    return out.exit_code == kExitOk ? kExitIo : out.exit_code;
  }
  return out.exit_code;
}

}  // namespace kfuks
