#include "kfuks/verify.hpp"

#include <cmath>
#include <array>
#include <exception>
#include <limits>
#include <optional>
#include <functional>
#include <map>
#include <random>

namespace kfuks {

using nlohmann::json;

json Thresholds::to_json() const {
  return {{"pointwise_rel", pointwise_rel},
          {"extremal_rel", extremal_rel},
          {"extremal_points", extremal_points},
          {"extremal_degree", extremal_degree},
          {"ray_k_min", ray_k_min},
          {"ray_k_max", ray_k_max},
          {"corollary_rel", corollary_rel},
          {"corollary_model_rel", corollary_model_rel},
          {"theorem_rel", theorem_rel},
          {"bound_samples", bound_samples},
          {"monotone_law_rel", monotone_law_rel},
          {"stability_oracle_rel", stability_oracle_rel},
          {"stability_converged_rel", stability_converged_rel},
          {"ramadanov_law_rel", ramadanov_law_rel},
          {"ramadanov_limit_rel", ramadanov_limit_rel},
          {"localization_rel", localization_rel},
          {"localization_d", localization_d}};
}

const Thresholds& thresholds() {
  static const Thresholds t;
  return t;
}

json Check::to_json() const {
  return {{"name", name},   {"value", value},         {"reference", reference},
          {"error", error}, {"tolerance", tolerance}, {"pass", pass}};
}

json SuiteResult::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  json tr = json::array();
  for (const auto& t : traces) tr.push_back("trace_" + t.first + ".csv");
  return {{"suite", suite}, {"criterion", criterion}, {"pass", pass},
          {"checks", cs},   {"traces", tr},           {"details", details}};
}

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Check rel_check(std::string name, double value, double reference, double tol) {
  Check c{std::move(name), value, reference, rel(value, reference), tol, false};
  c.pass = std::isfinite(c.error) && c.error <= tol;
  return c;
}

// Property check: `count` violations, none allowed.
Check count_check(std::string name, double count) {
  return Check{std::move(name), count, 0.0, count, 0.0, count == 0.0};
}

Check bool_check(std::string name, bool ok) { return count_check(std::move(name), ok ? 0.0 : 1.0); }

Check seq_check(const RaySequence& s, const std::string& name) {
  Check c{name, s.fit.limit, *s.reference, s.relative_error(), s.tolerance, s.pass()};
  return c;
}

void finalize(SuiteResult& r) {
  r.pass = !r.checks.empty();
  for (const auto& c : r.checks) r.pass = r.pass && c.pass;
}

Point vec(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) p[i++] = x;
  return p;
}

Point random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Point u(n);
  for (int j = 0; j < n; ++j) u[j] = cplx(g(rng), g(rng));
  return u / u.norm();
}

std::vector<double> ray_schedule() {
  const auto& T = thresholds();
  return geometric_schedule(T.ray_k_min, T.ray_k_max);
}

// ------------------------------------------------------------------ suites

SuiteResult pointwise(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 1;
  {
    auto e = make_engine(DomainSpec::disc());
    const auto m = kobayashi_fuks(*e, vec({0.0}));
    const Point u = vec({1.0});
    r.checks.push_back(rel_check("disc K(0)", m.K, 1.0 / kPi, T.pointwise_rel));
    r.checks.push_back(rel_check("disc G(0)", m.G(0, 0).real(), 2.0, T.pointwise_rel));
    r.checks.push_back(rel_check("disc Ric(0)", m.ricci_curvature(u), -1.0, T.pointwise_rel));
    r.checks.push_back(rel_check("disc Gtilde(0)", m.Gtilde(0, 0).real(), 6.0, T.pointwise_rel));
    r.checks.push_back(rel_check("disc J(0)", m.J, 2.0 * kPi, T.pointwise_rel));
    r.details["disc"] = m.to_json();
  }
  {
    auto e = make_engine(DomainSpec::ball(2));
    const auto m = kobayashi_fuks(*e, vec({0.0, 0.0}));
    const double dev = (m.Gtilde - 12.0 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() / 12.0;
    Check c{"ball C2 Gtilde(0) = 12 Id", m.Gtilde.cwiseAbs().maxCoeff(), 12.0, dev, T.pointwise_rel, dev <= T.pointwise_rel};
    r.checks.push_back(c);
    r.details["ball"] = m.to_json();
  }
  return r;
}

SuiteResult extremal_identity(const SuiteOptions& opt) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 2;
  const std::vector<std::pair<std::string, DomainSpec>> domains = {
      {"disc", DomainSpec::disc()}, {"ball", DomainSpec::ball(2)}, {"egg2", DomainSpec::egg(2)}};
  json rows = json::array();
  for (std::size_t di = 0; di < domains.size(); ++di) {
    const auto& [label, D] = domains[di];
    GramBasisEngine g(D, T.extremal_degree, QuadratureScheme::exact());
    const auto pts = sample_interior(D, static_cast<std::size_t>(T.extremal_points), opt.seed + 101 * di);
    std::mt19937_64 rng(opt.seed + 7 * di);
    std::vector<Point> us;
    for (std::size_t k = 0; k < pts.size(); ++k) us.push_back(random_direction(rng, D.dim()));
    std::vector<std::array<double, 3>> vals(pts.size());
    std::vector<std::exception_ptr> errs(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) {
      try {
        const auto m = kobayashi_fuks(g, pts[k]);
        const double bt = m.Btilde(us[k]);
        const double I = maximal_I(g, pts[k], us[k]).value;
        const double M = maximal_M(g, pts[k], us[k]).value;
        vals[k] = {bt * bt, I / m.K, M / (std::pow(m.K, D.dim() + 1) * m.J)};
      } catch (...) {
        errs[k] = std::current_exception();
      }
    });
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
    double worst = 0.0;
    std::size_t worst_k = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& v = vals[k];
      const double d = std::max({rel(v[1], v[0]), rel(v[2], v[0]), rel(v[2], v[1])});
      if (d > worst) worst = d, worst_k = k;
      rows.push_back({{"domain", label},
                      {"z", point_to_json(pts[k])},
                      {"u", point_to_json(us[k])},
                      {"Btilde2", v[0]},
                      {"I_over_K", v[1]},
                      {"M_over_KJ", v[2]}});
    }
    r.checks.push_back(Check{label + " three-way agreement (worst point)", vals[worst_k][1], vals[worst_k][0], worst,
                             T.extremal_rel, worst <= T.extremal_rel});
  }
  r.details["points"] = rows;
  return r;
}

void corollary_ball(SuiteResult& r) {
  const auto& T = thresholds();
  auto e = make_engine(DomainSpec::ball(2));
  const Cone cone = make_cone(vec({1.0, 0.0}), vec({-1.0, 0.0}));
  const auto s = sample_ray(*e, cone, ray_schedule());
  const Weights w({Rational(1), Rational(2)});
  const auto model = model_reference(DomainSpec::siegel(2), vec({1.0, 0.0}));
  const auto model2 = model_reference(DomainSpec::siegel(2), vec({0.0, 1.0}));

  auto det = scaled_kf_det(s, w);
  det.reference = 18.0, det.tolerance = T.corollary_rel;
  auto b1 = scaled_kf_length(s, vec({1.0, 0.0}), w);
  b1.reference = std::sqrt(3.0), b1.tolerance = T.corollary_rel;
  auto b2 = scaled_kf_length(s, vec({0.0, 1.0}), w);
  b2.reference = std::sqrt(6.0), b2.tolerance = T.corollary_rel;
  auto [k, J] = scaled_kernel_and_J(s, w);
  k.reference = model.K, k.tolerance = T.corollary_rel;
  J.reference = 4.5 * kPi * kPi, J.tolerance = T.corollary_rel;

  r.checks.push_back(seq_check(det, "ball d^3 gtilde -> 18"));
  r.checks.push_back(seq_check(b1, "ball scaled Btilde(e1) -> sqrt 3"));
  r.checks.push_back(seq_check(b2, "ball scaled Btilde(e2) -> sqrt 6"));
  r.checks.push_back(seq_check(k, "ball d^3 K -> model K(b*)"));
  r.checks.push_back(seq_check(J, "ball J -> 9 pi^2 / 2"));
  r.checks.push_back(rel_check("ball gtilde limit vs model", det.fit.limit, model.gtilde, T.corollary_model_rel));
  r.checks.push_back(rel_check("ball Btilde(e1) limit vs model", b1.fit.limit, model.Btilde, T.corollary_model_rel));
  r.checks.push_back(rel_check("ball Btilde(e2) limit vs model", b2.fit.limit, model2.Btilde, T.corollary_model_rel));
  // d(z) / (|r(z)| / |grad r(p)|) at the innermost sample, r = |z|^2 - 1
  const Point zl = s.z.back();
  const double ratio = s.d.back() / ((1.0 - zl.squaredNorm()) / 2.0);
  r.checks.push_back(rel_check("ball d / |r| ratio", ratio, 1.0, T.corollary_rel));

  r.details["ball_model"] = model.to_json();
  r.traces.push_back({"ball_det", det.to_csv()});
  r.traces.push_back({"ball_btilde_e1", b1.to_csv()});
  r.traces.push_back({"ball_btilde_e2", b2.to_csv()});
  r.traces.push_back({"ball_kernel", k.to_csv()});
  r.traces.push_back({"ball_J", J.to_csv()});
  r.details["ball_sequences"] = {det.to_json(), b1.to_json(), b2.to_json(), k.to_json(), J.to_json()};
}

void corollary_disc(SuiteResult& r) {
  const auto& T = thresholds();
  auto e = make_engine(DomainSpec::disc());
  const Cone cone = make_cone(vec({1.0}), vec({-1.0}));
  const auto s = sample_ray(*e, cone, ray_schedule());
  const Weights w({Rational(1)});
  auto det = scaled_kf_det(s, w);
  det.reference = 1.5, det.tolerance = T.corollary_rel;
  auto b = scaled_kf_length(s, vec({1.0}), w);
  b.reference = 0.5 * std::sqrt(6.0), b.tolerance = T.corollary_rel;
  auto [k, J] = scaled_kernel_and_J(s, w);
  k.reference = 1.0 / (4.0 * kPi), k.tolerance = T.corollary_rel;
  J.reference = 2.0 * kPi, J.tolerance = T.corollary_rel;
  r.checks.push_back(seq_check(det, "disc d^2 gtilde -> 3/2"));
  r.checks.push_back(seq_check(b, "disc scaled Btilde -> sqrt 6 / 2"));
  r.checks.push_back(seq_check(k, "disc d^2 K -> 1/(4 pi)"));
  r.checks.push_back(seq_check(J, "disc J -> 2 pi"));
  const auto model = model_reference(DomainSpec::siegel(1), vec({1.0}));
  r.checks.push_back(rel_check("disc gtilde limit vs model", det.fit.limit, model.gtilde, T.corollary_model_rel));
  r.details["disc_model"] = model.to_json();
  r.traces.push_back({"disc_det", det.to_csv()});
  r.traces.push_back({"disc_btilde", b.to_csv()});
  r.traces.push_back({"disc_kernel", k.to_csv()});
  r.traces.push_back({"disc_J", J.to_csv()});
  r.details["disc_sequences"] = {det.to_json(), b.to_json(), k.to_json(), J.to_json()};
}

SuiteResult corollary(const SuiteOptions&, bool ball, bool disc) {
  SuiteResult r;
  r.criterion = 3;
  if (ball) corollary_ball(r);
  if (disc) corollary_disc(r);
  return r;
}

SuiteResult theorem_egg(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 4;
  const DomainSpec E = DomainSpec::egg(2);
  const Weights w({Rational(1), Rational(4)});
  auto e = make_engine(E);
  const Cone cone = make_cone(vec({1.0, 0.0}), vec({-1.0, 0.0}));
  const auto s = sample_ray(*e, cone, ray_schedule());
  // local model at (1, 0): 2 Re z1 + |z2|^4 < 0 after translating p to the origin
  const DomainSpec model = DomainSpec::egg_model(2, 2.0, 1.0);

  const std::vector<std::pair<std::string, Point>> dirs = {{"e1", vec({1.0, 0.0})}, {"e2", vec({0.0, 1.0})}};
  json refs = json::array();
  std::optional<ModelReference> base;
  for (const auto& [label, u] : dirs) {
    const Point us = limiting_direction(u, w);
    const auto ref = model_reference(model, us);
    if (!base) base = ref;
    auto b = scaled_kf_length(s, u, w);
    b.reference = ref.Btilde, b.tolerance = T.theorem_rel;
    r.checks.push_back(seq_check(b, "egg scaled Btilde(" + label + ") -> model"));
    r.traces.push_back({"egg_btilde_" + label, b.to_csv()});
    refs.push_back(ref.to_json());
    r.details["sequence_btilde_" + label] = b.to_json();
  }
  auto det = scaled_kf_det(s, w);
  det.reference = base->gtilde, det.tolerance = T.theorem_rel;
  auto [k, J] = scaled_kernel_and_J(s, w);
  k.reference = base->K, k.tolerance = T.theorem_rel;
  J.reference = base->J, J.tolerance = T.theorem_rel;
  r.checks.push_back(seq_check(det, "egg d^{5/2} gtilde -> model"));
  r.checks.push_back(seq_check(k, "egg d^{5/2} K -> model"));
  r.checks.push_back(seq_check(J, "egg J -> model"));
  r.traces.push_back({"egg_det", det.to_csv()});
  r.traces.push_back({"egg_kernel", k.to_csv()});
  r.traces.push_back({"egg_J", J.to_csv()});
  r.details["model_references"] = refs;
  r.details["sequence_det"] = det.to_json();
  r.details["sequence_kernel"] = k.to_json();
  r.details["sequence_J"] = J.to_json();
  return r;
}

std::vector<std::pair<std::string, DomainSpec>> catalog() {
  return {{"disc", DomainSpec::disc()},
          {"ball2", DomainSpec::ball(2)},
          {"polydisc2", DomainSpec::polydisc({1.0, 1.0})},
          {"egg2", DomainSpec::egg(2)},
          {"lens", DomainSpec::intersection(DomainSpec::disc(), BallDomain{1, 0.5, vec({1.0})})}};
}

SuiteResult kobayashi_bound(const SuiteOptions& opt) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 5;
  const auto cat = catalog();
  const std::size_t per = static_cast<std::size_t>(T.bound_samples) / cat.size();
  double violations = 0.0;
  json rows = json::array();
  for (std::size_t di = 0; di < cat.size(); ++di) {
    const auto& [label, D] = cat[di];
    auto e = make_engine(D);
    const std::size_t cnt = di + 1 == cat.size() ? T.bound_samples - per * (cat.size() - 1) : per;
    const auto pts = sample_interior(D, cnt, opt.seed + 31 * di);
    std::mt19937_64 rng(opt.seed + 13 * di);
    std::vector<Point> us;
    for (std::size_t k = 0; k < pts.size(); ++k) us.push_back(random_direction(rng, D.dim()));
    std::vector<double> ric(pts.size(), 0.0);
    std::vector<int> bad(pts.size(), 0);
    std::vector<std::exception_ptr> errs(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) {
      try {
        const auto m = kobayashi_fuks(*e, pts[k]);
        ric[k] = m.ricci_curvature(us[k]);
        if (!(ric[k] < D.dim() + 1) || !positive_definite(m.Gtilde)) bad[k] = 1;
      } catch (const Error& err) {
        if (err.code() == ErrorCode::Numerical)
          bad[k] = 1;
        else
          errs[k] = std::current_exception();
      }
    });
    for (auto& x : errs)
      if (x) std::rethrow_exception(x);
    double worst = -std::numeric_limits<double>::infinity();
    int nbad = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) worst = std::max(worst, ric[k]), nbad += bad[k];
    violations += nbad;
    rows.push_back({{"domain", label}, {"samples", pts.size()}, {"max_ricci_curvature", worst},
                    {"bound", D.dim() + 1}, {"violations", nbad}});
  }
  r.checks.push_back(count_check("Ric < n + 1 and Gtilde positive definite", violations));
  r.details["domains"] = rows;
  return r;
}

SuiteResult monotonicity(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 6;
  const std::vector<double> radii = {1.0, 1.5, 2.0};
  json rows = json::array();
  for (int n : {1, 2}) {
    const Point z = Point::Zero(n);
    const Point u = n == 1 ? vec({1.0}) : vec({0.6, 0.8});
    std::vector<double> Ms, Ts;
    for (double rad : radii) {
      const DomainSpec D = n == 1 ? DomainSpec::disc(rad) : DomainSpec::ball(2, rad);
      GramBasisEngine g(D, thresholds().extremal_degree, QuadratureScheme::exact());
      const double M = maximal_M(g, z, u).value;
      const double Tv = kobayashi_fuks(g, z).T;
      Ms.push_back(M), Ts.push_back(Tv);
      rows.push_back({{"n", n}, {"radius", rad}, {"M", M}, {"T", Tv}});
      if (n == 1) {
        const double law = 12.0 / (kPi * std::pow(rad, 6));
        r.checks.push_back(rel_check("disc T(0) law, r = " + std::to_string(rad).substr(0, 3), Tv, law,
                                     T.monotone_law_rel));
      }
    }
    const std::string label = n == 1 ? "discs" : "balls";
    int mbad = 0, tbad = 0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
      if (Ms[i + 1] > Ms[i]) ++mbad;
      if (Ts[i + 1] > Ts[i]) ++tbad;
    }
    r.checks.push_back(count_check("M monotone on nested " + label, mbad));
    r.checks.push_back(count_check("T monotone on nested " + label, tbad));
  }
  r.details["values"] = rows;
  return r;
}

SuiteResult stability_egg(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 7;
  std::vector<double> deltas;
  for (int k = 1; k <= 10; ++k) deltas.push_back(std::ldexp(1.0, -k));
  for (int m : {1, 2}) {
    const auto t = stability_sweep(m, vec({-1.0, 0.3}), vec({0.6, 0.8}), deltas);
    const std::string label = "m = " + std::to_string(m);
    r.checks.push_back(Check{"scaling-law oracle, " + label, t.max_oracle_error, 0.0, t.max_oracle_error,
                             T.stability_oracle_rel, t.max_oracle_error <= T.stability_oracle_rel});
    r.checks.push_back(Check{"J, M, gtilde converge, " + label, t.last_relative_change, 0.0, t.last_relative_change,
                             T.stability_converged_rel,
                             t.monotone && t.last_relative_change <= T.stability_converged_rel});
    r.details["sweep_m" + std::to_string(m)] = t.to_json();
    r.traces.push_back({"stability_m" + std::to_string(m), t.to_csv()});
  }
  return r;
}

SuiteResult ramadanov(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 8;
  for (int n : {1, 2}) {
    std::vector<DomainSpec> inner;
    std::vector<double> radii, d;
    for (int j = 1; j <= T.ramadanov_steps; ++j) {
      const double rad = 1.0 - std::ldexp(1.0, -j);
      radii.push_back(rad), d.push_back(std::ldexp(1.0, -j));
      inner.push_back(n == 1 ? DomainSpec::disc(rad) : DomainSpec::ball(2, rad));
    }
    const DomainSpec limit = n == 1 ? DomainSpec::disc() : DomainSpec::ball(2);
    const Point z = Point::Zero(n);
    const Point u = n == 1 ? vec({1.0}) : vec({0.6, 0.8});
    auto t = inside_convergence(inner, limit, z, u);
    const double K0 = n == 1 ? 1.0 / kPi : 2.0 / (kPi * kPi);
    double law = 0.0;
    std::vector<double> K;
    for (std::size_t j = 0; j < t.rows.size(); ++j) {
      t.rows[j].oracle_K = K0 / std::pow(radii[j], 2 * n);
      law = std::max(law, rel(t.rows[j].K, t.rows[j].oracle_K));
      K.push_back(t.rows[j].K);
    }
    const std::string label = n == 1 ? "discs" : "balls C2";
    r.checks.push_back(Check{"scaling law, " + label, law, 0.0, law, T.ramadanov_law_rel, law <= T.ramadanov_law_rel});
    r.checks.push_back(bool_check("K decreasing, " + label, t.monotone));
    const auto ex = richardson_extrapolate(K, d);
    r.checks.push_back(rel_check("K_j(0) limit, " + label, ex.limit, K0, T.ramadanov_limit_rel));
    r.checks.push_back(rel_check("K(0) of the limit domain, " + label, t.limit.K, K0, T.ramadanov_law_rel));
    r.details[n == 1 ? "discs" : "balls"] = t.to_json();
    r.traces.push_back({n == 1 ? "ramadanov_discs" : "ramadanov_balls", t.to_csv()});
  }
  return r;
}

SuiteResult localization_disc(const SuiteOptions&) {
  const auto& T = thresholds();
  SuiteResult r;
  r.criterion = 9;
  const BallDomain U{1, 0.5, vec({1.0})};
  const Cone cone = make_cone(vec({1.0}), vec({-1.0}));
  const double d0 = T.localization_d;
  const auto tr = localization_ratio(DomainSpec::disc(), U, cone, {8 * d0, 4 * d0, 2 * d0, d0});
  for (const RaySequence* s : {&tr.J, &tr.M, &tr.gtilde}) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < s->d.size(); ++k)
      if (std::abs(std::log(s->d[k] / d0)) < std::abs(std::log(s->d[best] / d0))) best = k;
    r.checks.push_back(rel_check(s->quantity + " at d = 1e-2", s->values[best], 1.0, T.localization_rel));
    r.traces.push_back({"localization_" + s->quantity, s->to_csv()});
    r.details[s->quantity] = s->to_json();
  }
  return r;
}

using SuiteFn = std::function<SuiteResult(const SuiteOptions&)>;

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> m = {
      {"pointwise", pointwise},
      {"extremal-identity", extremal_identity},
      {"corollary", [](const SuiteOptions& o) { return corollary(o, true, true); }},
      {"corollary-ball", [](const SuiteOptions& o) { return corollary(o, true, false); }},
      {"corollary-ball-n2", [](const SuiteOptions& o) { return corollary(o, true, false); }},
      {"corollary-disc", [](const SuiteOptions& o) { return corollary(o, false, true); }},
      {"theorem-egg", theorem_egg},
      {"kobayashi-bound", kobayashi_bound},
      {"monotonicity", monotonicity},
      {"stability-egg", stability_egg},
      {"ramadanov", ramadanov},
      {"localization-disc", localization_disc},
  };
  return m;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opt) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) fail(ErrorCode::Schema, "unknown verify suite '" + name + "'");
  SuiteResult r = it->second(opt);
  r.suite = name;
  finalize(r);
  r.details["thresholds"] = thresholds().to_json();
  return r;
}

}  // namespace kfuks
