#include <doctest.h>

#include "kfuks/domains.hpp"

using namespace kfuks;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) p[i++] = x;
  return p;
}

WeightedPolynomial modulus(int k, int m) {
  return WeightedPolynomial::modulus_power(1, 0, k, 1.0, Weights({Rational(m)}));
}

}  // namespace

TEST_CASE("dilation") {
  const Weights m({Rational(1), Rational(2)});
  CHECK((dilate(1.0, pt({2.0, cplx(0, 3)}), m) - pt({2.0, cplx(0, 3)})).norm() == 0.0);
  CHECK((dilate(4.0, pt({1.0, 1.0}), m) - pt({4.0, 2.0})).norm() < 1e-15);
  CHECK((dilate(1.0 / 0.01, pt({0.0, 1.0}), m) - pt({0.0, 10.0})).norm() < 1e-12);
  CHECK(m.volume_exponent() == doctest::Approx(3.0));
  CHECK(Weights({Rational(1), Rational(4)}).volume_exponent() == doctest::Approx(2.5));
}

TEST_CASE("weighted homogeneity") {
  CHECK(is_weighted_homogeneous(modulus(2, 4)).homogeneous);
  CHECK_FALSE(is_weighted_homogeneous(modulus(1, 4)).homogeneous);

  const Weights w({Rational(2)});
  WeightedPolynomial p({{{1}, {1}, 1.0}, {{2}, {0}, 0.25}, {{0}, {2}, 0.25}}, w);
  const auto r = is_weighted_homogeneous(p);
  CHECK(r.homogeneous);
  CHECK(r.max_residual < 1e-12);
  CHECK(p(pt({cplx(1.0, 0.0)})) == doctest::Approx(1.5));
  CHECK(p(pt({cplx(0.0, 1.0)})) == doctest::Approx(0.5));
}

TEST_CASE("polynomials must be real") {
  const Weights w({Rational(2)});
  CHECK_THROWS_AS(WeightedPolynomial({{{2}, {0}, 1.0}}, w), Error);
}

TEST_CASE("Levi form checks") {
  const auto grid = default_psh_grid(1);
  auto r = levi_psd_check(modulus(1, 2), grid, true);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(1.0));

  const auto shell = radial_grid(1, 0.1, 2.0, 8, 8);
  r = levi_psd_check(modulus(2, 4), shell, true);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(0.04).epsilon(1e-9));

  const auto neg = WeightedPolynomial::modulus_power(1, 0, 1, -1.0, Weights({Rational(2)}));
  CHECK_FALSE(levi_psd_check(neg, grid, false).pass);
}

TEST_CASE("bumping validation") {
  const auto p = modulus(2, 4);
  auto r = validate_bumping(p, p, {0.25, 0.5, 1.0});
  CHECK(r.positive);
  CHECK(r.homogeneous);
  REQUIRE(r.levi.size() == 3);
  CHECK(r.levi[0].pass);
  CHECK(r.levi[1].pass);
  CHECK_FALSE(r.levi[2].pass);
  CHECK_FALSE(r.pass);

  const auto q = modulus(1, 2);
  CHECK(validate_bumping(q, q, {0.5}).pass);

  const auto neg = WeightedPolynomial::modulus_power(1, 0, 1, -1.0, Weights({Rational(2)}));
  r = validate_bumping(q, neg, {0.5});
  CHECK_FALSE(r.positive);
  CHECK_FALSE(r.pass);
}

TEST_CASE("domain json round trip and schema errors") {
  const auto egg = DomainSpec::from_json(nlohmann::json::parse(R"({"kind": "egg", "m": 2})"));
  CHECK(egg.dim() == 2);
  CHECK(egg.bounded());
  CHECK(DomainSpec::from_json(egg.to_json()).to_json() == egg.to_json());

  const auto model = DomainSpec::from_json(
      nlohmann::json::parse(R"({"kind": "model", "lead": 1, "P": [[2, 2, 1, 0]], "weights": [1, 4]})"));
  CHECK(model.is_model());
  CHECK_FALSE(model.bounded());
  CHECK(model.contains(pt({-1.0, 0.5})));
  CHECK_FALSE(model.contains(pt({-0.01, 0.5})));

  CHECK_THROWS_AS(DomainSpec::from_json(nlohmann::json::parse(R"({"kind": "egg", "m": 2, "x": 1})")), Error);
  CHECK_THROWS_AS(DomainSpec::from_json(nlohmann::json::parse(R"({"kind": "torus"})")), Error);
  try {
    DomainSpec::from_json(nlohmann::json::parse(R"({"kind": "egg", "m": 2, "x": 1})"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
  // pure terms are rejected in a model
  CHECK_THROWS_AS(DomainSpec::from_json(nlohmann::json::parse(
                      R"({"kind": "model", "lead": 1, "P": [[2, 0, 1, 0], [0, 2, 1, 0]], "weights": [1, 2]})")),
                  Error);
}

TEST_CASE("boundary distance") {
  CHECK(boundary_distance(DomainSpec::ball(2), pt({0.9, 0.0})) == doctest::Approx(0.1));
  CHECK(boundary_distance(DomainSpec::disc(), pt({0.0})) == doctest::Approx(1.0));
  CHECK(boundary_distance(DomainSpec::polydisc({1.0, 0.5}), pt({0.2, 0.1})) == doctest::Approx(0.4));

  // E_2: bounded above by the distance to (1, 0) and below by |r| / sup |grad r|
  const auto egg = DomainSpec::egg(2);
  const Point z = pt({0.99, 0.0});
  const double d = boundary_distance(egg, z);
  CHECK(d <= 1.0 - 0.99 + 1e-8);
  const double r = -egg.defining(z);
  CHECK(d >= r / 4.0);
  CHECK(d == doctest::Approx(0.01).epsilon(1e-6));

  // off-axis point of E_2 checked against dense boundary sampling
  const Point w = pt({cplx(0.3, 0.1), cplx(0.5, 0.2)});
  double best = 1e9;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j < 64; ++j)
      for (int k = 0; k < 64; ++k) {
        const double s = static_cast<double>(i) / 400.0;  // |b2|^4 = s
        const double r1 = std::sqrt(1.0 - s), r2 = std::pow(s, 0.25);
        const cplx b1 = std::polar(r1, 2 * kPi * j / 64.0), b2 = std::polar(r2, 2 * kPi * k / 64.0);
        best = std::min(best, std::sqrt(std::norm(b1 - w[0]) + std::norm(b2 - w[1])));
      }
  const double dw = boundary_distance(egg, w);
  CHECK(dw <= best + 1e-12);
  CHECK(dw >= best - 0.02);
}

TEST_CASE("cones and schedules") {
  const Cone c = make_cone(pt({1.0, 0.0}), pt({-1.0, 0.0}));
  const auto zs = cone_samples(c, DomainSpec::ball(2), {0.5, 0.25, 0.125});
  REQUIRE(zs.size() == 3);
  CHECK((zs[0] - pt({0.5, 0.0})).norm() < 1e-15);
  CHECK((zs[1] - pt({0.75, 0.0})).norm() < 1e-15);
  CHECK((zs[2] - pt({0.875, 0.0})).norm() < 1e-15);

  const Cone axis = make_cone(pt({1.0}), pt({-1.0}), 0.0);
  CHECK(cone_contains(axis, pt({0.5})));
  CHECK_FALSE(cone_contains(axis, pt({cplx(0.5, 0.01)})));

  const double th = kPi / 6.0;
  auto at = [](double a) { return pt({1.0 - 0.1 * std::cos(a) + cplx(0.0, 0.1 * std::sin(a))}); };
  const Cone cone = make_cone(pt({1.0}), pt({-1.0}));
  CHECK(cone_contains(cone, at(th / 2)));
  CHECK_FALSE(cone_contains(cone, at(2 * th)));

  const auto t = geometric_schedule(3, 10);
  REQUIRE(t.size() == 8);
  CHECK(t.front() == 0.125);
  CHECK(t.back() == std::ldexp(1.0, -10));
  CHECK_THROWS_AS(cone_samples(c, DomainSpec::ball(2), {0.5, 0.5}), Error);
}

TEST_CASE("interior sampling is deterministic and interior") {
  const auto d = DomainSpec::egg(3);
  const auto a = sample_interior(d, 50, 9), b = sample_interior(d, 50, 9);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(d.contains(a[i]));
    CHECK((a[i] - b[i]).norm() == 0.0);
  }
}
