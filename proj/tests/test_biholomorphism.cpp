#include <doctest.h>

#include "kfuks/biholomorphism.hpp"

using namespace kfuks;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) p[i++] = x;
  return p;
}

// Central-difference Jacobian of a holomorphic map.
CMatrix numeric_jacobian(const Biholomorphism& F, const Point& z, double h = 1e-6) {
  const int n = static_cast<int>(z.size());
  CMatrix J(n, n);
  for (int k = 0; k < n; ++k) {
    Point a = z, b = z;
    a[k] += h;
    b[k] -= h;
    J.col(k) = (F(a) - F(b)) / (2.0 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("Siegel Cayley map at b*") {
  const auto F = model_to_bounded(DomainSpec::siegel(2));
  const Point b = pt({-1.0, 0.0});
  CHECK(F(b).norm() < 1e-14);
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = -0.5;
  expect(1, 1) = -1.0 / std::sqrt(2.0);
  CHECK((F.jacobian(b) - expect).norm() < 1e-12);
  CHECK((numeric_jacobian(F, b) - expect).norm() < 1e-8);
  CHECK(F.check(300).pass);
}

TEST_CASE("egg Cayley maps") {
  for (int m : {1, 2, 3}) {
    const auto model = DomainSpec::egg_model(m, 2.0, 1.0);
    const auto F = model_to_bounded(model);
    const Point b = pt({-1.0, 0.0});
    CHECK(F(b).norm() < 1e-12);
    CHECK((F.jacobian(b) - numeric_jacobian(F, b)).norm() < 1e-7);
    const auto c = F.check(300);
    CHECK(c.pass);
    CHECK(c.max_roundtrip < 1e-10);
  }
  // m = 1 egg map is the Siegel map
  const auto e1 = model_to_bounded(DomainSpec::egg_model(1, 2.0, 1.0));
  const auto s2 = model_to_bounded(DomainSpec::siegel(2));
  for (const Point& z : sample_source(DomainSpec::siegel(2), 20, 3)) CHECK((e1(z) - s2(z)).norm() < 1e-12);
}

TEST_CASE("half-plane map and composition") {
  const auto F = model_to_bounded(DomainSpec::siegel(1));
  CHECK(F.check(200).pass);
  const auto id = Biholomorphism::identity(F.target());
  const auto G = compose(F, id);
  const Point z = pt({cplx(-0.4, 1.3)});
  CHECK((G(z) - F(z)).norm() < 1e-15);
  CHECK(std::abs(G.det_jacobian(z) - F.det_jacobian(z)) < 1e-14);
}

TEST_CASE("bumped models map through P - delta a") {
  const Weights w({Rational(4)});
  const auto P = WeightedPolynomial::modulus_power(1, 0, 2, 1.0, w);
  const auto D = DomainSpec::bumped_model(1.0, P, P, 0.25);
  const auto F = model_to_bounded(D);
  CHECK(F.check(200).pass);
}

TEST_CASE("lens conformal map") {
  const auto lens = DomainSpec::intersection(DomainSpec::disc(), BallDomain{1, 0.5, pt({1.0})});
  const auto F = lens_to_disc(lens);
  const auto c = F.check(500);
  CHECK(c.pass);
  CHECK(c.max_target_violation <= 1e-10);
  // containment degenerates to an affine map
  const auto big = DomainSpec::intersection(DomainSpec::disc(), BallDomain{1, 5.0, pt({0.0})});
  const auto A = lens_to_disc(big);
  CHECK((A(pt({0.3})) - pt({0.3})).norm() < 1e-14);
}

TEST_CASE("cut power branch") {
  // arg(z - 1) in (0, 2 pi): just below the positive real cut from 1
  const cplx above = cut_power(cplx(2.0, 1e-12), 0.5), below = cut_power(cplx(2.0, -1e-12), 0.5);
  CHECK(std::abs(above - 1.0) < 1e-6);
  CHECK(std::abs(below + 1.0) < 1e-6);
  CHECK(std::abs(cut_power(cplx(0.0, 0.0), 0.5) - cplx(0.0, 1.0)) < 1e-14);
}
