#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kfuks/quadrature.hpp"
#include "oracles.hpp"

using namespace kfuks;

TEST_CASE("reinhardt moments") {
  const auto disc = DomainSpec::disc();
  for (int k = 0; k < 8; ++k) CHECK(reinhardt_moment(disc, {k}) == doctest::Approx(oracle::pi / (k + 1)).epsilon(1e-14));
  CHECK(reinhardt_moment(DomainSpec::ball(2), {0, 0}) == doctest::Approx(oracle::pi * oracle::pi / 2).epsilon(1e-14));
  CHECK(reinhardt_moment(DomainSpec::disc(2.0), {1}, 2.0) == doctest::Approx(4.0 * oracle::pi / 2).epsilon(1e-14));
  for (const auto& a : indices_up_to(2, 6)) {
    const double ref = oracle::ellipsoid_moment({1, 2}, a);
    CHECK(reinhardt_moment(DomainSpec::egg(2), a) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::exp(log_reinhardt_moment(DomainSpec::egg(2), a)) == doctest::Approx(ref).epsilon(1e-12));
  }
  const auto t = reinhardt_moments(DomainSpec::ball(2), indices_up_to(2, 2));
  CHECK(t.at({1, 0}) == doctest::Approx(oracle::pi * oracle::pi / 6));
  CHECK(t.to_csv().rfind("alpha", 0) == 0);
}

TEST_CASE("volume by quadrature") {
  const auto egg = DomainSpec::egg(2);
  const double vol = oracle::ellipsoid_volume({1, 2});
  auto one = [](const Point&) { return cplx(1.0); };
  CHECK(reinhardt_moment(egg, {0, 0}) == doctest::Approx(vol).epsilon(1e-14));
  const auto [q, err] = integrate(egg, one, QuadratureScheme::qmc(1 << 23, 1));
  CHECK(std::abs(q.real() - vol) / vol < 1e-4);
  CHECK(err >= 0.0);
  CHECK_THROWS_AS(integrate(egg, one, QuadratureScheme::exact()), Error);
}

TEST_CASE("gauss-legendre rule") {
  std::vector<double> x, w;
  gauss_legendre(10, x, w);
  double s = 0.0, m8 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i], m8 += w[i] * std::pow(x[i], 8);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m8 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
  CHECK_THROWS_AS(gauss_legendre(0, x, w), Error);
}

TEST_CASE("gram matrices") {
  const auto ball = DomainSpec::ball(2);
  const auto basis = MonomialBasis::up_to_degree(ball, 1);
  REQUIRE(basis.size() == 3);
  const auto exact = gram_matrix(ball, basis, QuadratureScheme::exact());
  CMatrix ref = CMatrix::Zero(3, 3);
  ref(0, 0) = oracle::pi * oracle::pi / 2;
  ref(1, 1) = ref(2, 2) = oracle::pi * oracle::pi / 6;
  CHECK((exact.S - ref).norm() < 1e-13);

  const auto disc = DomainSpec::disc();
  const auto b1 = MonomialBasis::up_to_degree(disc, 1);
  const auto d_exact = gram_matrix(disc, b1, QuadratureScheme::exact());
  CHECK(d_exact.S(0, 0).real() == doctest::Approx(oracle::pi));
  CHECK(d_exact.S(1, 1).real() == doctest::Approx(oracle::pi / 2));
  const auto d_qmc = gram_matrix(disc, b1, QuadratureScheme::qmc(100000, 1));
  CHECK((d_qmc.S - d_exact.S).norm() / d_exact.S.norm() < 1e-3);
  CHECK((d_qmc.S - d_qmc.S.adjoint()).norm() == 0.0);

  MonomialBasis empty;
  empty.center = Point::Zero(1);
  CHECK(gram_matrix(disc, empty, QuadratureScheme::exact()).S.size() == 0);
}

TEST_CASE("quadrature schema") {
  CHECK(QuadratureScheme::from_json({{"kind", "qmc"}, {"nodes", 64}}).kind == QuadratureScheme::Kind::Qmc);
  CHECK_THROWS_AS(QuadratureScheme::from_json({{"kind", "simpson"}}), Error);
  CHECK_THROWS_AS(QuadratureScheme::from_json({{"kind", "gauss"}}), Error);
  CHECK_THROWS_AS(QuadratureScheme::from_json({{"kind", "gauss"}, {"nodes", 4}, {"extra", 1}}), Error);
}

TEST_CASE("gram cache") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kfuks_test_cache";
  fs::remove_all(dir);
  GramCache cache(dir.string());
  const auto disc = DomainSpec::disc();
  const auto basis = MonomialBasis::up_to_degree(disc, 3);
  const auto scheme = QuadratureScheme::qmc(4096, 2);
  const auto key = GramCache::key(disc, basis, scheme);
  CHECK(key == GramCache::key(disc, basis, scheme));
  CHECK(key != GramCache::key(DomainSpec::disc(0.5), basis, scheme));
  CHECK(key != GramCache::key(disc, basis, QuadratureScheme::qmc(128)));
  CHECK(key != GramCache::key(disc, MonomialBasis::up_to_degree(disc, 4), scheme));
  // exact moments are never cached
  CHECK_FALSE(gram_matrix_cached(disc, basis, QuadratureScheme::exact(), &cache).cache_hit);
  CHECK_FALSE(cache.get(key).has_value());

  const auto first = gram_matrix_cached(disc, basis, scheme, &cache);
  CHECK_FALSE(first.cache_hit);
  const auto second = gram_matrix_cached(disc, basis, scheme, &cache);
  CHECK(second.cache_hit);
  CHECK((second.S - first.S).norm() == 0.0);

  // flip one byte: the entry is discarded with a warning
  {
    std::fstream f(cache.path(key), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    f.put('\x5a');
  }
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  const auto third = gram_matrix_cached(disc, basis, scheme, &cache);
  set_warning_sink(nullptr);
  CHECK_FALSE(third.cache_hit);
  CHECK_FALSE(warnings.empty());
  CHECK((third.S - first.S).norm() == 0.0);
  fs::remove_all(dir);
}
