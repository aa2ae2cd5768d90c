#include "kfuks/asymptotics.hpp"

#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>

namespace kfuks {

Point limiting_direction(const Point& u, const Weights& m) {
  if (u.size() != m.size()) fail(ErrorCode::Argument, "direction and weights differ in dimension");
  double mmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < u.size(); ++j)
    if (u[j] != cplx(0.0)) mmin = std::min(mmin, m[j].value());
  if (!std::isfinite(mmin)) fail(ErrorCode::Argument, "limiting direction of the zero vector");
  Point r = Point::Zero(u.size());
  for (int j = 0; j < u.size(); ++j)
    if (u[j] != cplx(0.0) && m[j].value() == mmin) r[j] = u[j];
  return r / r.norm();
}

// ------------------------------------------------------------ extrapolation

namespace {

// One Aitken step on each consecutive triple.
std::vector<double> aitken(const std::vector<double>& v) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 2 < v.size(); ++k) {
    const double d0 = v[k + 1] - v[k], d1 = v[k + 2] - v[k + 1];
    const double den = d1 - d0;
    const double scale = std::max({std::abs(v[k]), std::abs(v[k + 1]), std::abs(v[k + 2]), 1e-300});
    if (std::abs(den) <= 1e-13 * scale || std::abs(d1) <= 1e-15 * scale)
      out.push_back(v[k + 2]);
    else
      out.push_back(v[k + 2] - d1 * d1 / den);
  }
  return out;
}

struct Fit {
  double limit, error;
  int level;
};

Fit best_level(const std::vector<double>& v) {
  std::vector<std::vector<double>> levels{v};
  while (levels.back().size() >= 3) levels.push_back(aitken(levels.back()));
  Fit best{v.back(), std::numeric_limits<double>::infinity(), 0};
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& a = levels[l];
    if (a.size() < 2) continue;
    const double spread = std::abs(a[a.size() - 1] - a[a.size() - 2]);
    if (spread < best.error) best = {a.back(), spread, static_cast<int>(l)};
  }
  if (!std::isfinite(best.error)) best.error = 0.0;
  return best;
}

}  // namespace

Extrapolation richardson_extrapolate(const std::vector<double>& values, const std::vector<double>& d) {
  if (values.size() != d.size()) fail(ErrorCode::Argument, "values and distances differ in length");
  if (values.size() < 4) fail(ErrorCode::Argument, "extrapolation needs at least 4 samples");
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!std::isfinite(values[k])) fail(ErrorCode::Numerical, "non-finite value in extrapolation");
    if (!(d[k] > 0.0)) fail(ErrorCode::Argument, "distances must be positive");
    if (k > 0 && !(d[k] < d[k - 1])) fail(ErrorCode::Argument, "distances must decrease");
  }
  Extrapolation e;
  const std::size_t N = values.size();
  e.running.assign(N, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 2; k < N; ++k) {
    std::vector<double> head(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k + 1));
    e.running[k] = best_level(head).limit;
  }
  const Fit f = best_level(values);
  e.limit = f.limit;
  e.error = f.error;
  e.level = f.level;

  const double d1 = values[N - 1] - values[N - 2], d0 = values[N - 2] - values[N - 3];
  const double ratio = d[N - 1] / d[N - 2];
  if (d0 != 0.0 && d1 / d0 > 0.0) e.theta = std::log(d1 / d0) / std::log(ratio);

  // Tail monotonicity against a noise floor relative to the values.
  const double floor = 1e-9 * std::max(std::abs(values.back()), 1e-300);
  double tail_spread = 0.0;
  int sign = 0;
  for (std::size_t k = N - 3; k + 1 < N; ++k) {
    const double dk = values[k + 1] - values[k];
    tail_spread = std::max(tail_spread, std::abs(dk));
    if (std::abs(dk) <= floor) continue;
    const int s = dk > 0 ? 1 : -1;
    if (sign != 0 && s != sign) e.warning = true;
    sign = s;
  }
  if (e.warning) {
    warn("extrapolation: non-monotone tail, returning the last value");
    e.limit = values.back();
    e.error = std::max(e.error, tail_spread);
    e.level = 0;
  }
  return e;
}

// ----------------------------------------------------------------- sequences

double RaySequence::relative_error() const {
  if (!reference) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(fit.limit - *reference) / std::abs(*reference);
}

bool RaySequence::pass() const { return reference && relative_error() <= tolerance; }

std::string RaySequence::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "k,d,value,running_extrapolant\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    os << k << ',' << d[k] << ',' << values[k] << ',';
    if (std::isfinite(fit.running[k])) os << fit.running[k];
    os << '\n';
  }
  return os.str();
}

nlohmann::json RaySequence::to_json() const {
  nlohmann::json j;
  j["quantity"] = quantity;
  j["limit"] = fit.limit;
  j["error"] = fit.error;
  j["theta"] = fit.theta;
  j["samples"] = values.size();
  j["extrapolation_warning"] = fit.warning;
  if (reference) {
    j["reference"] = *reference;
    j["relative_error"] = relative_error();
    j["tolerance"] = tolerance;
    j["pass"] = pass();
  } else {
    j["reference"] = nullptr;
    j["pass"] = nullptr;
  }
  return j;
}

RaySamples sample_ray(const KernelEngine& engine, const Cone& cone, const std::vector<double>& t,
                      const RicciOptions& opt) {
  RaySamples s;
  s.cone = cone;
  s.z = cone_samples(cone, engine.domain(), t);
  const std::size_t N = s.z.size();
  s.d.resize(N);
  s.reports.resize(N);
  std::vector<std::exception_ptr> errors(N);
  std::vector<std::string> dropped(N);
  parallel_for(N, [&](std::size_t k) {
    try {
      s.d[k] = boundary_distance(engine.domain(), s.z[k]);
      s.reports[k] = kobayashi_fuks(engine, s.z[k], opt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Numerical)
        dropped[k] = e.what();
      else
        errors[k] = std::current_exception();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (std::size_t k = 0; k < N; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    if (!dropped[k].empty()) warn("ray sample " + std::to_string(k) + " dropped: " + dropped[k]);
  }
  return s;
}

namespace {

template <class F>
RaySequence build(const RaySamples& s, std::string quantity, F&& value) {
  RaySequence r;
  r.quantity = std::move(quantity);
  r.cone = s.cone;
  for (std::size_t k = 0; k < s.z.size(); ++k) {
    if (!s.reports[k]) continue;
    r.z.push_back(s.z[k]);
    r.d.push_back(s.d[k]);
    r.values.push_back(value(*s.reports[k], s.d[k]));
  }
  if (r.values.size() < 4) fail(ErrorCode::Numerical, r.quantity + ": fewer than 4 valid ray samples");
  r.fit = richardson_extrapolate(r.values, r.d);
  return r;
}

}  // namespace

RaySequence scaled_kf_length(const RaySamples& s, const Point& u, const Weights& m) {
  if (u.size() != m.size()) fail(ErrorCode::Argument, "direction and weights differ in dimension");
  return build(s, "scaled_kf_length", [&](const MetricReport& r, double d) {
    return r.Btilde(u) / dilate(1.0 / d, u, m).norm();
  });
}

RaySequence scaled_kf_det(const RaySamples& s, const Weights& m) {
  const double e = m.volume_exponent();
  return build(s, "scaled_kf_det", [&](const MetricReport& r, double d) { return std::pow(d, e) * r.gtilde_det; });
}

std::pair<RaySequence, RaySequence> scaled_kernel_and_J(const RaySamples& s, const Weights& m) {
  const double e = m.volume_exponent();
  return {build(s, "scaled_kernel", [&](const MetricReport& r, double d) { return std::pow(d, e) * r.K; }),
          build(s, "J", [&](const MetricReport& r, double) { return r.J; })};
}

// ------------------------------------------------------------ model values

nlohmann::json ModelReference::to_json() const {
  return {{"b_star", point_to_json(b_star)}, {"u_star", point_to_json(u_star)},
          {"Btilde", Btilde},                 {"gtilde", gtilde},
          {"K", K},                           {"J", J}};
}

ModelReference model_reference(const DomainSpec& model, const Point& u_star, const EngineOptions& opt) {
  if (!model.is_model()) fail(ErrorCode::Argument, "model_reference needs a model domain");
  const int n = model.dim();
  if (u_star.size() != n) fail(ErrorCode::Argument, "direction dimension does not match the model");
  ModelReference ref;
  ref.b_star = Point::Zero(n);
  ref.b_star[0] = -1.0;
  ref.u_star = u_star;
  auto engine = make_engine(model, opt);
  ref.report = kobayashi_fuks(*engine, ref.b_star);
  ref.Btilde = ref.report.Btilde(u_star);
  ref.gtilde = ref.report.gtilde_det;
  ref.K = ref.report.K;
  ref.J = ref.report.J;
  return ref;
}

// ----------------------------------------------------------------- sweeps

namespace {

SweepRow row_from(const MetricReport& r, const Point& u, double param) {
  const int n = r.dim();
  SweepRow row;
  row.param = param;
  row.K = r.K;
  row.J = r.J;
  row.gtilde = r.gtilde_det;
  const double bt = r.Btilde(u);
  row.M = std::pow(r.K, n + 1) * r.J * bt * bt;
  return row;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void finish(SweepTable& t) {
  const auto& L = t.limit;
  auto diff = [&](const SweepRow& r) { return std::max({rel(r.J, L.J), rel(r.M, L.M), rel(r.gtilde, L.gtilde)}); };
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    const double dr = diff(r);
    if (dr > prev * (1.0 + 1e-9) + 1e-14) t.monotone = false;
    prev = dr;
  }
  t.last_relative_change = t.rows.empty() ? 0.0 : diff(t.rows.back());

  // least-squares slope of log diff against log param, worst quantity
  double worst = std::numeric_limits<double>::infinity();
  for (int q = 0; q < 3; ++q) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& r : t.rows) {
      const double v = q == 0 ? rel(r.J, L.J) : q == 1 ? rel(r.M, L.M) : rel(r.gtilde, L.gtilde);
      if (!(v > 1e-13) || !(r.param > 0.0)) continue;
      const double x = std::log(r.param), y = std::log(v);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++cnt;
    }
    if (cnt >= 2) {
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      worst = std::min(worst, slope);
    }
  }
  t.rate = std::isfinite(worst) ? worst : 0.0;
}

}  // namespace

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "param,K,J,M,gtilde,oracle_K\n";
  auto line = [&](const SweepRow& r) {
    os << r.param << ',' << r.K << ',' << r.J << ',' << r.M << ',' << r.gtilde << ',' << r.oracle_K << '\n';
  };
  for (const auto& r : rows) line(r);
  line(limit);
  return os.str();
}

nlohmann::json SweepTable::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  auto row = [](const SweepRow& r) {
    return nlohmann::json{{"param", r.param}, {"K", r.K},           {"J", r.J},
                          {"M", r.M},         {"gtilde", r.gtilde}, {"oracle_K", r.oracle_K}};
  };
  for (const auto& r : rows) rs.push_back(row(r));
  return {{"rows", rs},
          {"limit", row(limit)},
          {"max_oracle_error", max_oracle_error},
          {"last_relative_change", last_relative_change},
          {"rate", rate},
          {"monotone", monotone}};
}

SweepTable stability_sweep(int m, const Point& z, const Point& u, const std::vector<double>& deltas, double lead) {
  if (m < 1) fail(ErrorCode::Argument, "stability sweep needs m >= 1");
  if (z.size() != 2 || u.size() != 2) fail(ErrorCode::Argument, "stability sweep works in C^2");
  if (deltas.empty()) fail(ErrorCode::Argument, "empty delta grid");
  for (double d : deltas)
    if (!(d > 0.0 && d <= 0.5)) fail(ErrorCode::Argument, "delta must lie in (0, 1/2]");

  const Weights w({Rational(2 * m)});
  const auto P = WeightedPolynomial::modulus_power(1, 0, m, 1.0, w);
  const DomainSpec D0 = DomainSpec::egg_model(m, lead, 1.0);
  if (!D0.contains(z)) fail(ErrorCode::Domain, "sweep point must lie in the limit model");
  auto e0 = make_engine(D0);

  SweepTable t;
  t.rows.resize(deltas.size());
  std::vector<std::exception_ptr> errors(deltas.size());
  parallel_for(deltas.size() + 1, [&](std::size_t k) {
    try {
      if (k == deltas.size()) {
        t.limit = row_from(kobayashi_fuks(*e0, z), u, 0.0);
        t.limit.oracle_K = t.limit.K;
        return;
      }
      const double delta = deltas[k];
      const DomainSpec Dd = DomainSpec::bumped_model(lead, P, P, delta);
      auto e = make_engine(Dd);
      SweepRow r = row_from(kobayashi_fuks(*e, z), u, delta);
      Point zs = z;
      zs[1] *= std::pow(1.0 - delta, 1.0 / (2.0 * m));
      r.oracle_K = std::pow(1.0 - delta, 1.0 / m) * e0->kernel_diag(zs);
      t.rows[k] = r;
    } catch (...) {
      errors[k < deltas.size() ? k : 0] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& r : t.rows) t.max_oracle_error = std::max(t.max_oracle_error, rel(r.K, r.oracle_K));
  // order by decreasing delta so the convergence checks read towards the limit
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.param > b.param; });
  finish(t);
  return t;
}

SweepTable inside_convergence(const std::vector<DomainSpec>& inner, const DomainSpec& limit, const Point& z,
                              const Point& u, const EngineOptions& opt) {
  if (inner.empty()) fail(ErrorCode::Argument, "inside convergence needs at least one inner domain");
  for (std::size_t j = 0; j < inner.size(); ++j) {
    const DomainSpec& outer = j + 1 < inner.size() ? inner[j + 1] : limit;
    if (inner[j].dim() != limit.dim()) fail(ErrorCode::Argument, "domains differ in dimension");
    for (const Point& p : sample_interior(inner[j], 400, 11 + j))
      if (!outer.contains(p))
        fail(ErrorCode::Argument, "domains are not nested: " + inner[j].name() + " is not inside " + outer.name());
    if (!inner[j].contains(z)) fail(ErrorCode::Domain, "evaluation point outside " + inner[j].name());
  }

  SweepTable t;
  t.rows.resize(inner.size());
  std::vector<std::exception_ptr> errors(inner.size() + 1);
  parallel_for(inner.size() + 1, [&](std::size_t k) {
    try {
      const DomainSpec& D = k < inner.size() ? inner[k] : limit;
      auto e = make_engine(D, opt);
      SweepRow r = row_from(kobayashi_fuks(*e, z), u, static_cast<double>(k + 1));
      if (k < inner.size())
        t.rows[k] = r;
      else
        t.limit = r;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& r : t.rows) r.oracle_K = t.limit.K;
  // K decreases along an increasing sequence of domains
  for (std::size_t j = 0; j + 1 < t.rows.size(); ++j)
    if (t.rows[j + 1].K > t.rows[j].K * (1.0 + 1e-12)) t.monotone = false;
  const bool kmono = t.monotone;
  // the rate is in the index j here
  finish(t);
  t.monotone = t.monotone && kmono;
  t.max_oracle_error = rel(t.rows.back().K, t.limit.K);
  return t;
}

LocalizationTrace localization_ratio(const DomainSpec& omega, const BallDomain& U, const Cone& cone,
                                     const std::vector<double>& t, const EngineOptions& opt) {
  const DomainSpec local = DomainSpec::intersection(omega, U);
  if (!U.center.size() || U.center.size() != omega.dim()) fail(ErrorCode::Argument, "neighborhood dimension mismatch");
  if ((cone.vertex - U.center).norm() >= U.radius) fail(ErrorCode::Argument, "cone vertex must lie inside U");

  EnginePtr eo = make_engine(omega, opt);
  EnginePtr el;
  EngineOptions o = opt;
  for (;;) {
    try {
      el = make_engine(local, o);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IllConditioned || o.degree <= 2) throw;
      o.degree -= 2;
      warn("localization: ill-conditioned Gram matrix, retrying with degree " + std::to_string(o.degree));
    }
  }

  const auto zs = cone_samples(cone, local, t);
  const std::size_t N = zs.size();
  std::vector<std::optional<std::pair<MetricReport, MetricReport>>> reps(N);
  std::vector<double> d(N);
  std::vector<std::exception_ptr> errors(N);
  parallel_for(N, [&](std::size_t k) {
    try {
      d[k] = boundary_distance(omega, zs[k]);
      reps[k] = std::make_pair(kobayashi_fuks(*eo, zs[k]), kobayashi_fuks(*el, zs[k]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numerical) errors[k] = std::current_exception();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const Point u = cone.normal;
  auto seq = [&](const std::string& name, auto&& f) {
    RaySequence r;
    r.quantity = name;
    r.cone = cone;
    for (std::size_t k = 0; k < N; ++k) {
      if (!reps[k]) continue;
      r.z.push_back(zs[k]);
      r.d.push_back(d[k]);
      r.values.push_back(f(reps[k]->first) / f(reps[k]->second));
    }
    if (r.values.size() < 4) fail(ErrorCode::Numerical, name + ": fewer than 4 valid ray samples");
    r.fit = richardson_extrapolate(r.values, r.d);
    r.reference = 1.0;
    return r;
  };
  LocalizationTrace tr;
  tr.J = seq("J_ratio", [](const MetricReport& r) { return r.J; });
  tr.M = seq("M_ratio", [&](const MetricReport& r) {
    const double bt = r.Btilde(u);
    return std::pow(r.K, r.dim() + 1) * r.J * bt * bt;
  });
  tr.gtilde = seq("gtilde_ratio", [](const MetricReport& r) { return r.gtilde_det; });
  return tr;
}

}  // namespace kfuks
