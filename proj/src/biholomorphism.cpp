#include "kfuks/biholomorphism.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace kfuks {

Biholomorphism::Biholomorphism(std::string name, DomainSpec source, DomainSpec target, Map forward, Map inverse,
                               Jacobian jacobian, Jacobian inverse_jacobian)
    : name_(std::move(name)),
      source_(std::move(source)),
      target_(std::move(target)),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      jacobian_(std::move(jacobian)),
      inverse_jacobian_(std::move(inverse_jacobian)) {
  if (source_.dim() != target_.dim()) fail(ErrorCode::Argument, "biholomorphism source and target differ in dimension");
}

Biholomorphism Biholomorphism::identity(const DomainSpec& domain) {
  const int n = domain.dim();
  auto id = [](const Point& z) { return z; };
  auto jac = [n](const Point&) -> CMatrix { return CMatrix::Identity(n, n); };
  return Biholomorphism("identity", domain, domain, id, id, jac, jac);
}

Biholomorphism Biholomorphism::affine(const DomainSpec& source, const DomainSpec& target, Point shift, Point scale) {
  const int n = source.dim();
  if (shift.size() != n || scale.size() != n) fail(ErrorCode::Argument, "affine map parameters have wrong dimension");
  for (int j = 0; j < n; ++j)
    if (scale[j] == cplx(0.0)) fail(ErrorCode::Argument, "affine map scale must be nonzero");
  auto fwd = [shift, scale](const Point& z) -> Point { return (z - shift).cwiseQuotient(scale); };
  auto inv = [shift, scale](const Point& w) -> Point { return w.cwiseProduct(scale) + shift; };
  auto jac = [scale](const Point&) -> CMatrix { return scale.cwiseInverse().asDiagonal(); };
  auto ijac = [scale](const Point&) -> CMatrix { return scale.asDiagonal(); };
  return Biholomorphism("affine", source, target, fwd, inv, jac, ijac);
}

cplx Biholomorphism::det_jacobian(const Point& z) const { return jacobian_(z).determinant(); }

std::vector<Point> sample_source(const DomainSpec& domain, std::size_t count, std::uint64_t seed) {
  if (!domain.is_model()) return sample_interior(domain, count, seed);
  // Models: pick z', a depth s > 0 and Im z1, then solve for Re z1.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> logs(-3.0, 3.0);
  std::uniform_real_distribution<double> im(-4.0, 4.0);
  const int n = domain.dim();
  double lead = 1.0;
  if (const auto* m = std::get_if<ModelDomain>(&domain.kind())) lead = m->lead;
  if (const auto* m = std::get_if<BumpedModelDomain>(&domain.kind())) lead = m->lead;
  std::vector<Point> out;
  while (out.size() < count) {
    Point z(n);
    z[0] = cplx(0.0, im(rng));
    for (int j = 1; j < n; ++j) z[j] = cplx(u(rng), u(rng));
    const double rest = domain.defining(z);  // lead * 0 + P(z') [- delta a]
    z[0] = cplx(-(rest + std::exp(logs(rng))) / lead, z[0].imag());
    if (domain.contains(z)) out.push_back(z);
  }
  return out;
}

BiholomorphismCheck Biholomorphism::check(std::size_t count, std::uint64_t seed) const {
  BiholomorphismCheck rep;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& z : sample_source(source_, count, seed)) {
    const Point w = forward_(z);
    const Point back = inverse_(w);
    const double rt = (back - z).norm() / (1.0 + z.norm());
    const cplx d = jacobian_(z).determinant();
    const cplx di = inverse_jacobian_(w).determinant();
    const double chain = std::abs(d * di - 1.0);
    const double viol = std::max(0.0, target_.defining(w));
    rep.max_roundtrip = std::max(rep.max_roundtrip, rt);
    rep.max_chain = std::max(rep.max_chain, chain);
    rep.max_target_violation = std::max(rep.max_target_violation, viol);
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(d));
    if (!(rt < 1e-10) || !(chain < 1e-8) || !(viol <= 1e-10) || !(std::abs(d) > 0.0)) ok = false;
    ++rep.samples;
  }
  rep.pass = ok;
  return rep;
}

void Biholomorphism::validate(std::size_t count, std::uint64_t seed) const {
  const auto rep = check(count, seed);
  if (!rep.pass)
    fail(ErrorCode::Validation, name_ + " failed validation: roundtrip " + std::to_string(rep.max_roundtrip) +
                                    ", chain " + std::to_string(rep.max_chain) + ", target violation " +
                                    std::to_string(rep.max_target_violation));
}

Biholomorphism compose(const Biholomorphism& f, const Biholomorphism& g) {
  auto fwd = [f, g](const Point& z) { return g(f(z)); };
  auto inv = [f, g](const Point& w) { return f.inverse(g.inverse(w)); };
  auto jac = [f, g](const Point& z) -> CMatrix { return g.jacobian(f(z)) * f.jacobian(z); };
  auto ijac = [f, g](const Point& w) -> CMatrix {
    const Point v = g.inverse(w);
    return f.inverse_jacobian(v) * g.inverse_jacobian(w);
  };
  return Biholomorphism(g.name() + "*" + f.name(), f.source(), g.target(), fwd, inv, jac, ijac);
}

// --------------------------------------------------------------- Cayley maps

cplx cut_power(cplx z, double q) {
  const cplx s = z - 1.0;
  if (s == cplx(0.0)) fail(ErrorCode::Domain, "branch point reached");
  double arg = std::arg(s);
  if (arg <= 0.0) arg += 2.0 * kPi;
  return std::polar(std::pow(std::abs(s), q), q * arg);
}

namespace {

struct ModelShape {
  double lead = 1.0;
  double kappa = 1.0;
  int m = 1;          // egg exponent (n == 2 only)
  bool siegel = true;  // kappa |z'|^2
};

ModelShape model_shape(const DomainSpec& model) {
  ModelShape s;
  WeightedPolynomial p;
  if (const auto* md = std::get_if<ModelDomain>(&model.kind())) {
    s.lead = md->lead;
    p = md->p;
  } else if (const auto* bd = std::get_if<BumpedModelDomain>(&model.kind())) {
    s.lead = bd->lead;
    p = bd->p.minus(bd->a, bd->delta);
  } else {
    fail(ErrorCode::Unsupported, "model_to_bounded needs a model domain");
  }
  if (p.nvars() == 0) return s;
  if (auto k = p.as_squared_norm()) {
    s.kappa = *k;
    return s;
  }
  if (auto mp = p.as_modulus_power()) {
    s.siegel = false;
    s.kappa = mp->first;
    s.m = mp->second;
    if (s.m == 1) s.siegel = true;
    return s;
  }
  fail(ErrorCode::Unsupported, "unsupported model: P must be kappa |z'|^2 or kappa |z2|^{2m}");
}

}  // namespace

Biholomorphism model_to_bounded(const DomainSpec& model) {
  const ModelShape s = model_shape(model);
  const int n = model.dim();
  if (s.siegel) {
    const double c = std::sqrt(4.0 * s.kappa / s.lead);
    auto fwd = [c, n](const Point& z) -> Point {
      Point w(n);
      const cplx q = z[0] - 1.0;
      w[0] = (z[0] + 1.0) / q;
      for (int j = 1; j < n; ++j) w[j] = c * z[j] / q;
      return w;
    };
    auto inv = [c, n](const Point& w) -> Point {
      Point z(n);
      z[0] = (w[0] + 1.0) / (w[0] - 1.0);
      const cplx q = z[0] - 1.0;
      for (int j = 1; j < n; ++j) z[j] = w[j] * q / c;
      return z;
    };
    auto jac = [c, n](const Point& z) -> CMatrix {
      CMatrix J = CMatrix::Zero(n, n);
      const cplx q = z[0] - 1.0;
      J(0, 0) = -2.0 / (q * q);
      for (int j = 1; j < n; ++j) {
        J(j, 0) = -c * z[j] / (q * q);
        J(j, j) = c / q;
      }
      return J;
    };
    auto ijac = [c, n](const Point& w) -> CMatrix {
      CMatrix J = CMatrix::Zero(n, n);
      const cplx r = w[0] - 1.0;
      const cplx dz1 = -2.0 / (r * r);
      const cplx q = 2.0 / r;  // z1 - 1
      J(0, 0) = dz1;
      for (int j = 1; j < n; ++j) {
        J(j, 0) = w[j] * dz1 / c;
        J(j, j) = q / c;
      }
      return J;
    };
    Biholomorphism f("cayley", model, DomainSpec::ball(n), fwd, inv, jac, ijac);
    f.validate();
    return f;
  }

  const int m = s.m;
  const double c = std::pow(4.0 * s.kappa / s.lead, 1.0 / (2.0 * m));
  const double q = 1.0 / m;
  auto fwd = [c, q](const Point& z) -> Point {
    Point w(2);
    w[0] = (z[0] + 1.0) / (z[0] - 1.0);
    w[1] = c * z[1] / cut_power(z[0], q);
    return w;
  };
  auto inv = [c, q](const Point& w) -> Point {
    Point z(2);
    z[0] = (w[0] + 1.0) / (w[0] - 1.0);
    z[1] = w[1] * cut_power(z[0], q) / c;
    return z;
  };
  auto jac = [c, q](const Point& z) -> CMatrix {
    CMatrix J = CMatrix::Zero(2, 2);
    const cplx s1 = z[0] - 1.0;
    J(0, 0) = -2.0 / (s1 * s1);
    J(1, 0) = -c * q * z[1] * cut_power(z[0], -q - 1.0);
    J(1, 1) = c * cut_power(z[0], -q);
    return J;
  };
  auto ijac = [c, q](const Point& w) -> CMatrix {
    CMatrix J = CMatrix::Zero(2, 2);
    const cplx r = w[0] - 1.0;
    const cplx dz1 = -2.0 / (r * r);
    const cplx z1 = (w[0] + 1.0) / r;
    J(0, 0) = dz1;
    J(1, 0) = w[1] / c * q * cut_power(z1, q - 1.0) * dz1;
    J(1, 1) = cut_power(z1, q) / c;
    return J;
  };
  Biholomorphism f("egg-cayley", model, DomainSpec::egg(m), fwd, inv, jac, ijac);
  f.validate();
  return f;
}

// ----------------------------------------------------------------- lens map

Biholomorphism lens_to_disc(const DomainSpec& domain) {
  const auto* in = std::get_if<IntersectionDomain>(&domain.kind());
  const BallDomain* base = in ? std::get_if<BallDomain>(&in->base->kind()) : nullptr;
  if (!in || !base || base->n != 1) fail(ErrorCode::Unsupported, "lens map needs the intersection of two discs");
  const cplx c0 = base->center[0], c1 = in->neighborhood.center[0];
  const double r0 = base->radius, r1 = in->neighborhood.radius;
  const double dist = std::abs(c1 - c0);
  const DomainSpec unit = DomainSpec::disc();
  auto to_unit = [&](cplx c, double r) {
    Point shift(1), scale(1);
    shift[0] = c;
    scale[0] = r;
    return Biholomorphism::affine(domain, unit, shift, scale);
  };
  if (dist + r1 <= r0) return to_unit(c1, r1);
  if (dist + r0 <= r1) return to_unit(c0, r0);
  if (dist >= r0 + r1) fail(ErrorCode::Domain, "discs do not intersect");

  // Corner points of the lens.
  const cplx e = (c1 - c0) / dist;
  const double x = (dist * dist + r0 * r0 - r1 * r1) / (2.0 * dist);
  const double h = std::sqrt(std::max(0.0, r0 * r0 - x * x));
  const cplx a = c0 + e * cplx(x, h);
  const cplx b = c0 + e * cplx(x, -h);
  auto mob = [a, b](cplx z) { return (z - a) / (z - b); };

  // The two arcs go to rays; find the sector that holds the lens.
  const double t0 = std::arg(mob(c0 + r0 * e));
  const double t1 = std::arg(mob(c1 - r1 * e));
  double lo = std::min(t0, t1), hi = std::max(t0, t1);
  double beta = hi - lo, start = lo;
  const double probe = std::arg(mob(0.5 * ((c0 + r0 * e) + (c1 - r1 * e))));
  if (!(probe > lo && probe < hi)) {
    start = hi;
    beta = 2.0 * kPi - beta;
  }
  const cplx rot = std::polar(1.0, -start);
  const double k = kPi / beta;
  const cplx I(0.0, 1.0);

  auto sector_arg = [](cplx v) {
    double t = std::arg(v);
    if (t < -kPi / 2) t += 2.0 * kPi;
    return t;
  };
  auto power = [sector_arg](cplx v, double p) { return std::polar(std::pow(std::abs(v), p), p * sector_arg(v)); };

  auto fwd = [=](const Point& z) -> Point {
    const cplx xi = power(rot * mob(z[0]), k);
    Point w(1);
    w[0] = (xi - I) / (xi + I);
    return w;
  };
  auto inv = [=](const Point& w) -> Point {
    const cplx xi = I * (1.0 + w[0]) / (1.0 - w[0]);
    const cplx zeta = power(xi, 1.0 / k) / rot;
    Point z(1);
    z[0] = (a - b * zeta) / (1.0 - zeta);
    return z;
  };
  auto jac = [=](const Point& z) -> CMatrix {
    const cplx m = mob(z[0]);
    const cplx eta = rot * m;
    const cplx xi = power(eta, k);
    const cplx d = (a - b) / ((z[0] - b) * (z[0] - b)) * rot * k * xi / eta * 2.0 * I / ((xi + I) * (xi + I));
    CMatrix J(1, 1);
    J(0, 0) = d;
    return J;
  };
  auto ijac = [=](const Point& w) -> CMatrix {
    const cplx xi = I * (1.0 + w[0]) / (1.0 - w[0]);
    const cplx dxi = 2.0 * I / ((1.0 - w[0]) * (1.0 - w[0]));
    const cplx eta = power(xi, 1.0 / k);
    const cplx deta = eta / (k * xi) * dxi;
    const cplx zeta = eta / rot;
    const cplx dz = (a - b) / ((1.0 - zeta) * (1.0 - zeta)) * deta / rot;
    CMatrix J(1, 1);
    J(0, 0) = dz;
    return J;
  };
  Biholomorphism f("lens", domain, unit, fwd, inv, jac, ijac);
  f.validate();
  return f;
}

}  // namespace kfuks
