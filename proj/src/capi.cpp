#include "kfuks/kfuks.h"

#include <cstring>
#include <string>

#include "kfuks/run.hpp"

struct kf_domain {
  kfuks::DomainSpec spec;
};

struct kf_engine {
  kfuks::EnginePtr engine;
};

namespace {

thread_local std::string g_last_error;

kf_status status_of(kfuks::ErrorCode c) { return static_cast<kf_status>(static_cast<int>(c)); }

template <class F>
kf_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return KF_OK;
  } catch (const kfuks::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return KF_ERR_SCHEMA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return KF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) kfuks::fail(kfuks::ErrorCode::Argument, std::string("null ") + what);
}

kfuks::Point point(const double* v, int n) {
  need(v, "vector");
  kfuks::Point z(n);
  for (int j = 0; j < n; ++j) z[j] = kfuks::cplx(v[2 * j], v[2 * j + 1]);
  return z;
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const kfuks::GramBasisEngine& gram(const kf_engine* e) {
  need(e, "engine");
  const auto* g = dynamic_cast<const kfuks::GramBasisEngine*>(e->engine.get());
  if (!g) kfuks::fail(kfuks::ErrorCode::Unsupported, "extremal problems need a Gram engine");
  return *g;
}

}  // namespace

extern "C" {

const char* kf_last_error(void) { return g_last_error.c_str(); }

const char* kf_version(void) { return "0.1.0"; }

kf_status kf_set_threads(int threads) {
  return guarded([&] { kfuks::set_thread_count(threads); });
}

kf_status kf_domain_from_json(const char* json, kf_domain** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "output");
    *out = nullptr;
    auto j = nlohmann::json::parse(json);
    *out = new kf_domain{kfuks::DomainSpec::from_json(j)};
  });
}

void kf_domain_free(kf_domain* d) { delete d; }

int kf_domain_dim(const kf_domain* d) { return d ? d->spec.dim() : 0; }

kf_status kf_domain_contains(const kf_domain* d, const double* z, int* inside) {
  return guarded([&] {
    need(d, "domain");
    need(inside, "output");
    *inside = d->spec.contains(point(z, d->spec.dim())) ? 1 : 0;
  });
}

kf_status kf_boundary_distance(const kf_domain* d, const double* z, double* out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "output");
    *out = kfuks::boundary_distance(d->spec, point(z, d->spec.dim()));
  });
}

kf_status kf_engine_create(const kf_domain* d, const char* options_json, kf_engine** out) {
  return guarded([&] {
    need(d, "domain");
    need(out, "output");
    *out = nullptr;
    kfuks::EngineOptions o;
    if (options_json) o = kfuks::EngineOptions::from_json(nlohmann::json::parse(options_json));
    *out = new kf_engine{kfuks::make_engine(d->spec, o)};
  });
}

void kf_engine_free(kf_engine* e) { delete e; }

kf_status kf_kernel(const kf_engine* e, const double* z, const double* w, double* re, double* im) {
  return guarded([&] {
    need(e, "engine");
    need(re, "output");
    need(im, "output");
    const int n = e->engine->dim();
    const kfuks::cplx k = e->engine->kernel(point(z, n), point(w, n));
    *re = k.real();
    *im = k.imag();
  });
}

kf_status kf_kernel_diag(const kf_engine* e, const double* z, double* out) {
  return guarded([&] {
    need(e, "engine");
    need(out, "output");
    *out = e->engine->kernel_diag(point(z, e->engine->dim()));
  });
}

kf_status kf_metric_report_json(const kf_engine* e, const double* z, char** out) {
  return guarded([&] {
    need(e, "engine");
    need(out, "output");
    *out = nullptr;
    const auto r = kfuks::kobayashi_fuks(*e->engine, point(z, e->engine->dim()));
    *out = dup(r.to_json().dump());
  });
}

kf_status kf_kobayashi_fuks_length(const kf_engine* e, const double* z, const double* u, double* out) {
  return guarded([&] {
    need(e, "engine");
    need(out, "output");
    const int n = e->engine->dim();
    *out = kfuks::kobayashi_fuks(*e->engine, point(z, n)).Btilde(point(u, n));
  });
}

kf_status kf_maximal_I(const kf_engine* e, const double* z, const double* u, double* out) {
  return guarded([&] {
    need(out, "output");
    const auto& g = gram(e);
    *out = kfuks::maximal_I(g, point(z, g.dim()), point(u, g.dim())).value;
  });
}

kf_status kf_maximal_M(const kf_engine* e, const double* z, const double* u, double* out) {
  return guarded([&] {
    need(out, "output");
    const auto& g = gram(e);
    *out = kfuks::maximal_M(g, point(z, g.dim()), point(u, g.dim())).value;
  });
}

kf_status kf_min_integrals(const kf_engine* e, const double* z, const double* u, double* I0, double* I1) {
  return guarded([&] {
    need(I0, "output");
    need(I1, "output");
    const auto& g = gram(e);
    const auto zz = point(z, g.dim());
    *I0 = kfuks::min_integral_I0(g, zz);
    *I1 = kfuks::min_integral_I1(g, zz, point(u, g.dim()));
  });
}

int kf_run(const char* config_json, const char* out_dir) {
  if (!config_json || !out_dir) {
    g_last_error = "null argument";
    return kfuks::kExitSchema;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return kfuks::kExitSchema;
  }
  std::string diag;
  const int rc = kfuks::run_config(j, out_dir, &diag);
  g_last_error = diag;
  return rc;
}

kf_status kf_verify(const char* suite, uint64_t seed, char** out, int* pass) {
  return guarded([&] {
    need(suite, "suite");
    need(out, "output");
    need(pass, "output");
    *out = nullptr;
    kfuks::SuiteOptions o;
    o.seed = seed;
    const auto r = kfuks::run_suite(suite, o);
    *pass = r.pass ? 1 : 0;
    *out = dup(r.to_json().dump());
  });
}

void kf_string_free(char* s) { delete[] s; }

}  // extern "C"
