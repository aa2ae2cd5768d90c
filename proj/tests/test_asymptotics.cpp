#include <doctest.h>

#include "kfuks/asymptotics.hpp"
#include "oracles.hpp"

using namespace kfuks;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) p[i++] = x;
  return p;
}

Weights wts(std::initializer_list<int> m) {
  std::vector<Rational> r;
  for (int x : m) r.emplace_back(x);
  return Weights(r);
}

std::vector<double> halves(int k0, int k1) {
  std::vector<double> d;
  for (int k = k0; k <= k1; ++k) d.push_back(std::ldexp(1.0, -k));
  return d;
}

}  // namespace

TEST_CASE("limiting direction") {
  CHECK((limiting_direction(pt({1.0, 1.0}), wts({1, 2})) - pt({1.0, 0.0})).norm() < 1e-15);
  CHECK((limiting_direction(pt({0.0, 1.0}), wts({1, 2})) - pt({0.0, 1.0})).norm() < 1e-15);
  CHECK((limiting_direction(pt({cplx(0.0, 2.0), 5.0}), wts({1, 4})) - pt({cplx(0.0, 1.0), 0.0})).norm() < 1e-15);
  // positive scaling and phase rotation
  const Point u = pt({cplx(0.3, 0.4), 2.0, cplx(0.0, -1.0)});
  const Weights m = wts({2, 2, 4});
  const Point a = limiting_direction(u, m);
  CHECK((limiting_direction(7.5 * u, m) - a).norm() < 1e-15);
  Point v = u;
  v[1] *= std::polar(1.0, 0.7);
  Point b = a;
  b[1] *= std::polar(1.0, 0.7);
  CHECK((limiting_direction(v, m) - b).norm() < 1e-15);
  CHECK_THROWS_AS(limiting_direction(pt({0.0, 0.0}), wts({1, 2})), Error);
}

TEST_CASE("richardson extrapolation") {
  const auto d = halves(1, 8);
  std::vector<double> c(d.size(), 5.0), lin, root;
  for (double x : d) lin.push_back(2.0 + x);
  const auto fc = richardson_extrapolate(c, d);
  CHECK(fc.limit == 5.0);
  CHECK(fc.error == 0.0);
  CHECK_FALSE(fc.warning);
  const auto fl = richardson_extrapolate(lin, d);
  CHECK(std::abs(fl.limit - 2.0) < 1e-8);
  CHECK(fl.theta == doctest::Approx(1.0).epsilon(1e-8));

  const auto d12 = halves(1, 12);
  for (double x : d12) root.push_back(1.0 + std::sqrt(x));
  const auto fr = richardson_extrapolate(root, d12);
  CHECK(std::abs(fr.limit - 1.0) < 1e-4);
  CHECK(fr.theta == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::isnan(fr.running[0]));
  CHECK(std::isfinite(fr.running.back()));

  // oscillating tail
  std::vector<double> osc;
  for (std::size_t k = 0; k < d.size(); ++k) osc.push_back(3.0 + (k % 2 ? 1e-3 : -1e-3));
  const auto fo = richardson_extrapolate(osc, d);
  CHECK(fo.warning);
  CHECK(fo.limit == osc.back());
  CHECK(fo.error >= 1e-3);

  CHECK_THROWS_AS(richardson_extrapolate({1.0, 2.0, 3.0}, {0.5, 0.25, 0.125}), Error);
  CHECK_THROWS_AS(richardson_extrapolate({1.0, 2.0, 3.0, 4.0}, {0.5, 0.5, 0.25, 0.125}), Error);
}

TEST_CASE("model references") {
  const auto s2 = model_reference(DomainSpec::siegel(2), pt({1.0, 0.0}));
  CHECK(s2.Btilde == doctest::Approx(std::sqrt(3.0)).epsilon(1e-8));
  CHECK(s2.gtilde == doctest::Approx(18.0).epsilon(1e-6));
  CHECK(s2.J == doctest::Approx(9.0 * oracle::pi * oracle::pi / 2.0).epsilon(1e-8));
  CHECK((s2.b_star - pt({-1.0, 0.0})).norm() == 0.0);
  CHECK(model_reference(DomainSpec::siegel(2), pt({0.0, 1.0})).Btilde == doctest::Approx(std::sqrt(6.0)).epsilon(1e-8));
  const auto s1 = model_reference(DomainSpec::siegel(1), pt({1.0}));
  CHECK(s1.gtilde == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(s1.Btilde == doctest::Approx(std::sqrt(6.0) / 2.0).epsilon(1e-8));
  CHECK(s1.K == doctest::Approx(oracle::halfplane_kernel(-1.0)).epsilon(1e-12));
  CHECK(s2.to_json().contains("Btilde"));
}

TEST_CASE("ball ray limits") {
  const ClosedFormEngine ball(DomainSpec::ball(2));
  const Cone cone = make_cone(pt({1.0, 0.0}), pt({-1.0, 0.0}));
  const auto s = sample_ray(ball, cone, geometric_schedule(3, 10));
  REQUIRE(s.reports.size() == 8);
  const Weights m = wts({1, 2});
  for (std::size_t k = 0; k < s.d.size(); ++k) CHECK(s.d[k] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(k) - 3)));
  auto det = scaled_kf_det(s, m);
  CHECK(det.fit.limit == doctest::Approx(18.0).epsilon(1e-2));
  auto b1 = scaled_kf_length(s, pt({1.0, 0.0}), m);
  CHECK(b1.fit.limit == doctest::Approx(std::sqrt(3.0)).epsilon(1e-2));
  auto b2 = scaled_kf_length(s, pt({0.0, 1.0}), m);
  CHECK(b2.fit.limit == doctest::Approx(std::sqrt(6.0)).epsilon(1e-2));
  auto [K, J] = scaled_kernel_and_J(s, m);
  for (double v : J.values) CHECK(v == doctest::Approx(9.0 * oracle::pi * oracle::pi / 2.0).epsilon(1e-9));
  CHECK(K.fit.limit == doctest::Approx(1.0 / (4.0 * oracle::pi * oracle::pi)).epsilon(1e-2));

  det.reference = 18.0;
  det.tolerance = 1e-2;
  CHECK(det.pass());
  CHECK(det.to_csv().rfind("k,d,value,running_extrapolant\n", 0) == 0);
}

TEST_CASE("disc kernel along the ray") {
  const ClosedFormEngine disc(DomainSpec::disc());
  const auto s = sample_ray(disc, make_cone(pt({1.0}), pt({-1.0})), geometric_schedule(3, 10));
  auto [K, J] = scaled_kernel_and_J(s, wts({1}));
  CHECK(K.fit.limit == doctest::Approx(1.0 / (4.0 * oracle::pi)).epsilon(1e-3));
  for (double v : J.values) CHECK(v == doctest::Approx(2.0 * oracle::pi).epsilon(1e-9));
  CHECK(J.fit.limit == doctest::Approx(2.0 * oracle::pi).epsilon(1e-12));
}

TEST_CASE("stability sweep") {
  const auto t = stability_sweep(1, pt({-1.0, 0.3}), pt({0.6, 0.8}), {0.5, 0.25, 0.125, 0.0625, 0.03125});
  CHECK(t.max_oracle_error < 1e-6);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows.front().param > t.rows.back().param);
  CHECK(std::abs(t.rows.back().J - t.limit.J) / t.limit.J < 0.05);
  CHECK_THROWS_AS(stability_sweep(1, pt({-1.0, 0.3}), pt({0.6, 0.8}), {0.5, 0.0}), Error);
  CHECK_THROWS_AS(stability_sweep(1, pt({-1.0, 0.3}), pt({0.6, 0.8}), {0.75}), Error);
}

TEST_CASE("inside convergence") {
  std::vector<DomainSpec> discs;
  for (int j = 1; j <= 6; ++j) discs.push_back(DomainSpec::disc(1.0 - std::ldexp(1.0, -j)));
  const auto t = inside_convergence(discs, DomainSpec::disc(), pt({0.0}), pt({1.0}));
  for (std::size_t j = 0; j < t.rows.size(); ++j) {
    const double r = 1.0 - std::ldexp(1.0, -static_cast<int>(j) - 1);
    CHECK(t.rows[j].K == doctest::Approx(1.0 / (oracle::pi * r * r)).epsilon(1e-10));
  }
  CHECK(t.monotone);
  CHECK(t.limit.K == doctest::Approx(1.0 / oracle::pi).epsilon(1e-12));

  std::vector<DomainSpec> balls;
  for (int j = 1; j <= 4; ++j) balls.push_back(DomainSpec::ball(2, 1.0 - std::ldexp(1.0, -j)));
  const auto tb = inside_convergence(balls, DomainSpec::ball(2), pt({0.0, 0.0}), pt({1.0, 0.0}));
  CHECK(tb.rows.back().K == doctest::Approx(2.0 / (oracle::pi * oracle::pi * std::pow(15.0 / 16.0, 4))).epsilon(1e-10));

  const std::vector<DomainSpec> same(4, DomainSpec::disc());
  const auto ts = inside_convergence(same, DomainSpec::disc(), pt({0.1}), pt({1.0}));
  for (const auto& row : ts.rows) {
    CHECK(row.K == ts.rows.front().K);
    CHECK(row.M == ts.rows.front().M);
  }
  CHECK_THROWS_AS(inside_convergence({DomainSpec::disc(2.0)}, DomainSpec::disc(), pt({0.0}), pt({1.0})), Error);
}

TEST_CASE("localization with a huge neighborhood") {
  const BallDomain U{1, 100.0, pt({1.0})};
  const Cone cone = make_cone(pt({1.0}), pt({-1.0}));
  const auto tr = localization_ratio(DomainSpec::disc(), U, cone, {0.08, 0.04, 0.02, 0.01});
  for (double v : tr.J.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : tr.M.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : tr.gtilde.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}
