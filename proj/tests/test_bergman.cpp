#include <doctest.h>

#include <random>

#include "kfuks/bergman.hpp"
#include "oracles.hpp"

using namespace kfuks;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) p[i++] = x;
  return p;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("closed-form kernels") {
  const ClosedFormEngine disc(DomainSpec::disc());
  CHECK(disc.kernel_diag(pt({0.0})) == doctest::Approx(1.0 / oracle::pi).epsilon(1e-15));
  for (cplx z : {cplx(0.5, 0.0), cplx(-0.3, 0.6), cplx(0.0, 0.99)})
    CHECK(disc.kernel_diag(pt({z})) == doctest::Approx(oracle::disc_kernel(z)).epsilon(1e-13));
  const ClosedFormEngine small(DomainSpec::disc(0.5));
  CHECK(small.kernel_diag(pt({0.2})) == doctest::Approx(oracle::disc_kernel(0.2, 0.5)).epsilon(1e-13));

  const ClosedFormEngine ball(DomainSpec::ball(3));
  const Point z = pt({0.1, cplx(0.2, -0.3), 0.4}), w = pt({cplx(0.0, 0.5), -0.2, 0.1});
  CHECK(rel(ball.kernel(z, w), oracle::ball_kernel(z, w)) < 1e-13);
  CHECK(rel(ball.kernel(w, z), std::conj(ball.kernel(z, w))) < 1e-14);

  const ClosedFormEngine poly(DomainSpec::polydisc({1.0, 2.0}));
  const Point p = pt({0.3, cplx(1.0, 0.5)});
  CHECK(poly.kernel_diag(p) ==
        doctest::Approx(oracle::disc_kernel(0.3) * oracle::disc_kernel(cplx(1.0, 0.5), 2.0)).epsilon(1e-13));
}

TEST_CASE("series kernel against the monomial sum") {
  const ReinhardtSeriesEngine egg(DomainSpec::egg(2));
  for (const Point& z : {pt({0.0, 0.0}), pt({0.3, cplx(0.0, 0.5)}), pt({cplx(0.6, 0.2), 0.6}), pt({0.9, 0.1})}) {
    const Eigen::VectorXcd zz = z;
    CHECK(egg.kernel_diag(z) == doctest::Approx(oracle::ellipsoid_kernel_diag({1, 2}, zz, 4000)).epsilon(1e-10));
  }
  // with p = (1, 1) it is the ball
  const ReinhardtSeriesEngine ball(DomainSpec::ellipsoid({1, 1}));
  const Point z = pt({0.5, cplx(0.1, 0.6)}), w = pt({-0.2, 0.3});
  CHECK(rel(ball.kernel(z, w), oracle::ball_kernel(z, w)) < 1e-11);
  CHECK(ball.last_stats(z, 0).tail < 1e-12);
}

TEST_CASE("gram kernel converges to the closed form") {
  const GramBasisEngine g(DomainSpec::ball(2), 12);
  const Point z = pt({0.2, cplx(0.0, 0.1)}), w = pt({0.1, 0.15});
  CHECK(rel(g.kernel(z, w), oracle::ball_kernel(z, w)) < 1e-12);
  CHECK(g.rank() == indices_up_to(2, 12).size());

  const GramBasisEngine d(DomainSpec::disc(), 30);
  CHECK(rel(d.kernel_diag(pt({0.3})), oracle::disc_kernel(0.3)) < 1e-12);
  // truncation error grows towards the boundary
  CHECK(rel(d.kernel_diag(pt({0.9})), oracle::disc_kernel(0.9)) > 1e-6);
}

TEST_CASE("kernel jets") {
  const ClosedFormEngine disc(DomainSpec::disc());
  const auto j0 = disc.jet(pt({0.0}), 4);
  CHECK(j0.K() == doctest::Approx(1.0 / oracle::pi));
  CHECK(std::abs(j0({1}, {1}) - 2.0 / oracle::pi) < 1e-13);
  CHECK(std::abs(j0({2}, {2}) - 12.0 / oracle::pi) < 1e-12);
  CHECK(std::abs(j0({1}, {0})) < 1e-15);

  // engines agree away from the origin
  const Point z = pt({cplx(0.3, -0.2)});
  const auto a = disc.jet(z, 3);
  const auto b = GramBasisEngine(DomainSpec::disc(), 60).jet(z, 3);
  const auto c = ReinhardtSeriesEngine(DomainSpec::ellipsoid({1})).jet(z, 3);
  for (const auto& [p, q] : std::vector<std::pair<MultiIndex, MultiIndex>>{{{0}, {0}}, {{1}, {0}}, {{1}, {1}}, {{2}, {1}}}) {
    CHECK(rel(b(p, q), a(p, q)) < 1e-10);
    CHECK(rel(c(p, q), a(p, q)) < 1e-10);
  }
  // finite-difference oracle for the mixed derivative
  auto K = [](const Eigen::VectorXcd& w) { return oracle::disc_kernel(w[0]); };
  const auto H = oracle::complex_hessian(K, z, 1e-4);
  CHECK(std::abs(H(0, 0) - a({1}, {1})) / std::abs(a({1}, {1})) < 1e-6);
  CHECK(a.to_csv().find('\n') != std::string::npos);

  const ClosedFormEngine ball(DomainSpec::ball(2));
  const Point zb = pt({0.2, cplx(0.1, 0.3)});
  const auto jb = ball.jet(zb, 2);
  auto Kb = [](const Eigen::VectorXcd& w) { return oracle::ball_kernel(w, w).real(); };
  const auto Hb = oracle::complex_hessian(Kb, zb, 1e-4);
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s)
      CHECK(std::abs(Hb(r, s) - jb(unit_index(2, r), unit_index(2, s))) < 1e-5 * std::abs(jb({0, 0}, {0, 0})));
}

TEST_CASE("minimum integrals") {
  const GramBasisEngine disc(DomainSpec::disc(), 20);
  CHECK(min_integral_I0(disc, pt({0.0})) == doctest::Approx(oracle::pi).epsilon(1e-13));
  CHECK(min_integral_I1(disc, pt({0.0}), pt({1.0})) == doctest::Approx(oracle::pi / 2).epsilon(1e-13));
  const GramBasisEngine half(DomainSpec::disc(0.5), 20);
  CHECK(min_integral_I0(half, pt({0.0})) == doctest::Approx(oracle::pi / 4).epsilon(1e-13));
  CHECK(min_integral_I1(half, pt({0.0}), pt({1.0})) == doctest::Approx(oracle::pi / 32).epsilon(1e-13));

  const GramBasisEngine ball(DomainSpec::ball(2), 6);
  CHECK(min_integral_I0(ball, pt({0.0, 0.0})) == doctest::Approx(oracle::pi * oracle::pi / 2).epsilon(1e-13));
  CHECK(min_integral_I1(ball, pt({0.0, 0.0}), pt({1.0, 0.0})) ==
        doctest::Approx(oracle::pi * oracle::pi / 6).epsilon(1e-13));

  // I0 = 1/K and I1 = 1/(K g) in one variable
  const double r = 0.3;
  CHECK(min_integral_I0(disc, pt({r})) == doctest::Approx(1.0 / oracle::disc_kernel(r)).epsilon(1e-8));
  const double g = 2.0 / std::pow(1.0 - r * r, 2);
  CHECK(min_integral_I1(disc, pt({r}), pt({1.0})) == doctest::Approx(1.0 / (oracle::disc_kernel(r) * g)).epsilon(1e-8));

  const GramBasisEngine constant(DomainSpec::disc(), 0);
  CHECK_THROWS_AS(min_integral_I1(constant, pt({0.0}), pt({1.0})), Error);
  CHECK_THROWS_AS(min_integral_I1(disc, pt({0.0}), pt({0.0})), Error);
  CHECK_THROWS_AS(min_integral_I0(disc, pt({1.5})), Error);
  try {
    min_integral_I1(constant, pt({0.0}), pt({1.0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}

TEST_CASE("model pullbacks") {
  // half-plane Re z < 0
  const auto h = make_engine(DomainSpec::siegel(1));
  CHECK(h->kind() == "pullback");
  for (cplx z : {cplx(-1.0, 0.0), cplx(-0.1, 3.0), cplx(-7.0, -2.0)})
    CHECK(h->kernel_diag(pt({z})) == doctest::Approx(oracle::halfplane_kernel(z)).epsilon(1e-12));

  // 2 Re z1 + |z2|^2 < 0 is affinely the Siegel domain: K = 2 / (pi^2 rho^3)
  const auto s = make_engine(DomainSpec::siegel(2));
  for (const Point& z : {pt({-1.0, 0.0}), pt({cplx(-0.5, 2.0), cplx(0.3, 0.4)}), pt({-3.0, 1.5})}) {
    const double rho = -(2.0 * z[0].real() + std::norm(z[1]));
    CHECK(s->kernel_diag(z) == doctest::Approx(2.0 / (oracle::pi * oracle::pi * std::pow(rho, 3))).epsilon(1e-12));
  }
  CHECK(s->kernel_diag(pt({-1.0, 0.0})) == doctest::Approx(1.0 / (4.0 * oracle::pi * oracle::pi)).epsilon(1e-13));

  const auto lens = DomainSpec::intersection(DomainSpec::disc(), BallDomain{1, 0.5, pt({1.0})});
  const auto le = make_engine(lens);
  // monotonicity under inclusion
  CHECK(le->kernel_diag(pt({0.8})) >= oracle::disc_kernel(0.8));
}

TEST_CASE("engine options") {
  const auto o = EngineOptions::from_json({{"kind", "gram"}, {"degree", 8}});
  CHECK(o.degree == 8);
  CHECK(make_engine(DomainSpec::disc(), o)->kind() == "gram");
  CHECK(make_engine(DomainSpec::egg(2))->kind() == "series");
  CHECK(make_engine(DomainSpec::ball(2))->kind() == "closed");
  CHECK_THROWS_AS(EngineOptions::from_json({{"kind", "gram"}, {"bogus", 1}}), Error);
  CHECK(make_engine(DomainSpec::disc(), o)->descriptor().dump() == make_engine(DomainSpec::disc(), o)->descriptor().dump());
}

TEST_CASE("kernel properties") {
  CHECK(ClosedFormEngine(DomainSpec::disc()).kernel_diag(pt({0.5})) == doctest::Approx(1.0 / (oracle::pi * 0.5625)));
  CHECK(ClosedFormEngine(DomainSpec::ball(2)).kernel_diag(pt({0.0, 0.0})) ==
        doctest::Approx(2.0 / (oracle::pi * oracle::pi)));

  // series against the closed form up to |z| = 0.9
  const ReinhardtSeriesEngine series(DomainSpec::ellipsoid({1}));
  for (double r : {0.0, 0.3, 0.6, 0.9})
    CHECK(rel(series.kernel_diag(pt({cplx(r, 0.0) * std::polar(1.0, 0.4)})), oracle::disc_kernel(r)) < 1e-8);

  // K_N grows with the basis
  const Point z = pt({0.4, cplx(0.1, 0.5)});
  double prev = 0.0;
  for (int N = 0; N <= 12; N += 2) {
    const double k = GramBasisEngine(DomainSpec::egg(2), N).kernel_diag(z);
    CHECK(k >= prev * (1.0 - 1e-14));
    prev = k;
  }

  // ball jet at 0: d dbar K = (n + 1) K
  const auto jb = ClosedFormEngine(DomainSpec::ball(2)).jet(pt({0.0, 0.0}), 2);
  CHECK(std::abs(jb({1, 0}, {1, 0}) - 3.0 * jb.K()) < 1e-13);
  CHECK_THROWS_AS(ClosedFormEngine(DomainSpec::disc()).jet(pt({0.0}), 5), Error);

  // conjugate symmetry of a jet table
  const auto j = GramBasisEngine(DomainSpec::egg(2), 10).jet(z, 4);
  for (const auto& a : indices_up_to(2, 2))
    for (const auto& b : indices_up_to(2, 2))
      CHECK(std::abs(j(a, b) - std::conj(j(b, a))) <= 1e-12 * std::abs(j(a, b)) + 1e-300);
}

TEST_CASE("gram kernel reproduces basis elements under its own quadrature") {
  const auto scheme = QuadratureScheme::qmc(1 << 14, 5);
  const GramBasisEngine g(DomainSpec::disc(), 5, scheme);
  const Point w = pt({cplx(0.2, -0.3)});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd c(static_cast<Eigen::Index>(g.basis().size()));
    for (auto& x : c) x = cplx(N(rng), N(rng));
    auto f = [&](const Point& z) { return cplx(g.basis().values(z).transpose() * c); };
    const auto [ip, err] = integrate(DomainSpec::disc(), [&](const Point& z) { return f(z) * std::conj(g.kernel(z, w)); },
                                     scheme);
    (void)err;
    CHECK(std::abs(ip - f(w)) < 1e-6 * std::max(1.0, std::abs(f(w))));
  }
}

TEST_CASE("minimum integral scaling") {
  const GramBasisEngine disc(DomainSpec::disc(), 8);
  CHECK(min_integral_I1(disc, pt({0.0}), pt({2.0})) == doctest::Approx(oracle::pi / 8).epsilon(1e-13));
  const double b = std::sqrt(min_integral_I0(disc, pt({0.0})) / min_integral_I1(disc, pt({0.0}), pt({1.0})));
  CHECK(b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  const GramBasisEngine ball(DomainSpec::ball(2), 4);
  const double bb = std::sqrt(min_integral_I0(ball, pt({0.0, 0.0})) / min_integral_I1(ball, pt({0.0, 0.0}), pt({1.0, 0.0})));
  CHECK(bb == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
}
