#include "kfuks/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace kfuks {

using nlohmann::json;

// ================================================================= Weights

Weights::Weights(std::vector<Rational> m) : m_(std::move(m)) {
  for (std::size_t j = 0; j < m_.size(); ++j) {
    if (m_[j] < Rational(1)) fail(ErrorCode::Argument, "weights must be >= 1, got " + to_string(m_[j]));
    if (j > 0 && m_[j] < m_[j - 1]) fail(ErrorCode::Argument, "weights must be nondecreasing");
  }
}

Weights Weights::from_doubles(const std::vector<double>& m) {
  std::vector<Rational> r;
  r.reserve(m.size());
  for (double v : m) {
    if (!std::isfinite(v)) fail(ErrorCode::Argument, "weights must be finite");
    r.push_back(Rational::from_double(v));
  }
  return Weights(std::move(r));
}

Weights Weights::tail() const {
  if (m_.empty()) return Weights();
  return Weights(std::vector<Rational>(m_.begin() + 1, m_.end()));
}

double Weights::volume_exponent() const {
  double s = 0.0;
  for (const auto& w : m_) s += 2.0 / w.value();
  return s;
}

Point dilate(double t, const Point& z, const Weights& m) {
  if (!(t > 0.0)) fail(ErrorCode::Domain, "dilation parameter must be positive");
  if (z.size() != m.size()) fail(ErrorCode::Argument, "dilation: point and weights differ in dimension");
  Point out(z.size());
  for (int j = 0; j < z.size(); ++j) {
    const Rational& w = m[j];
    // t^{den/num}; integer exponents stay exact.
    out[j] = (w == Rational(1) ? t : std::pow(t, 1.0 / w.value())) * z[j];
  }
  return out;
}

// ====================================================== WeightedPolynomial

namespace {

cplx monomial(const Point& z, const MultiIndex& a, const MultiIndex& b) {
  cplx v = 1.0;
  for (int j = 0; j < z.size(); ++j) {
    for (int k = 0; k < a[j]; ++k) v *= z[j];
    for (int k = 0; k < b[j]; ++k) v *= std::conj(z[j]);
  }
  return v;
}

}  // namespace

WeightedPolynomial::WeightedPolynomial(std::vector<PolyTerm> terms, Weights weights)
    : terms_(std::move(terms)), weights_(std::move(weights)) {
  const int n = weights_.size();
  std::map<std::pair<MultiIndex, MultiIndex>, cplx> coef;
  for (const auto& t : terms_) {
    if (static_cast<int>(t.a.size()) != n || static_cast<int>(t.b.size()) != n)
      fail(ErrorCode::Argument, "polynomial term arity does not match the weights");
    for (int j = 0; j < n; ++j)
      if (t.a[j] < 0 || t.b[j] < 0) fail(ErrorCode::Argument, "negative exponent in polynomial term");
    coef[{t.a, t.b}] += t.c;
  }
  for (const auto& [key, c] : coef) {
    auto it = coef.find({key.second, key.first});
    const cplx partner = it == coef.end() ? cplx(0.0) : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-13 * (1.0 + std::abs(c)))
      fail(ErrorCode::Argument, "polynomial is not real-valued (c_ab != conj(c_ba))");
  }
}

WeightedPolynomial WeightedPolynomial::modulus_power(int nvars, int slot, int k, double kappa, Weights weights) {
  MultiIndex a(nvars, 0);
  a[slot] = k;
  return WeightedPolynomial({PolyTerm{a, a, cplx(kappa)}}, std::move(weights));
}

WeightedPolynomial WeightedPolynomial::squared_norm(int nvars, double kappa) {
  std::vector<PolyTerm> terms;
  for (int j = 0; j < nvars; ++j) {
    MultiIndex a = unit_index(nvars, j);
    terms.push_back({a, a, cplx(kappa)});
  }
  return WeightedPolynomial(std::move(terms), Weights(std::vector<Rational>(nvars, Rational(2))));
}

double WeightedPolynomial::operator()(const Point& zp) const {
  cplx s = 0.0;
  for (const auto& t : terms_) s += t.c * monomial(zp, t.a, t.b);
  return s.real();
}

Eigen::VectorXd WeightedPolynomial::real_gradient(const Point& zp) const {
  const int n = nvars();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
  for (int j = 0; j < n; ++j) {
    cplx dz = 0.0;
    for (const auto& t : terms_) {
      if (t.a[j] == 0) continue;
      MultiIndex a = t.a;
      a[j] -= 1;
      dz += t.c * static_cast<double>(t.a[j]) * monomial(zp, a, t.b);
    }
    g[2 * j] = 2.0 * dz.real();
    g[2 * j + 1] = -2.0 * dz.imag();
  }
  return g;
}

CMatrix WeightedPolynomial::complex_hessian(const Point& zp) const {
  const int n = nvars();
  CMatrix h = CMatrix::Zero(n, n);
  for (const auto& t : terms_) {
    for (int j = 0; j < n; ++j) {
      if (t.a[j] == 0) continue;
      for (int k = 0; k < n; ++k) {
        if (t.b[k] == 0) continue;
        MultiIndex a = t.a, b = t.b;
        a[j] -= 1;
        b[k] -= 1;
        h(j, k) += t.c * static_cast<double>(t.a[j] * t.b[k]) * monomial(zp, a, b);
      }
    }
  }
  return h;
}

std::vector<Rational> WeightedPolynomial::term_degrees() const {
  std::vector<Rational> out;
  for (const auto& t : terms_) {
    Rational d(0);
    for (int j = 0; j < nvars(); ++j) d = d + Rational(t.a[j] + t.b[j]) / weights_[j];
    out.push_back(d);
  }
  return out;
}

WeightedPolynomial WeightedPolynomial::minus(const WeightedPolynomial& a, double delta) const {
  if (!(weights_ == a.weights_)) fail(ErrorCode::Argument, "bumping function weights differ from P");
  std::vector<PolyTerm> terms = terms_;
  for (const auto& t : a.terms_) terms.push_back({t.a, t.b, -delta * t.c});
  return WeightedPolynomial(std::move(terms), weights_);
}

namespace {

// Collapses duplicate (a, b) entries and drops zero coefficients.
std::map<std::pair<MultiIndex, MultiIndex>, cplx> collapse(const std::vector<PolyTerm>& terms) {
  std::map<std::pair<MultiIndex, MultiIndex>, cplx> coef;
  for (const auto& t : terms) coef[{t.a, t.b}] += t.c;
  for (auto it = coef.begin(); it != coef.end();) {
    if (std::abs(it->second) == 0.0)
      it = coef.erase(it);
    else
      ++it;
  }
  return coef;
}

}  // namespace

std::optional<double> WeightedPolynomial::as_squared_norm() const {
  const auto coef = collapse(terms_);
  const int n = nvars();
  if (static_cast<int>(coef.size()) != n || n == 0) return std::nullopt;
  std::optional<double> kappa;
  for (int j = 0; j < n; ++j) {
    auto it = coef.find({unit_index(n, j), unit_index(n, j)});
    if (it == coef.end() || std::abs(it->second.imag()) > 0.0) return std::nullopt;
    if (kappa && *kappa != it->second.real()) return std::nullopt;
    kappa = it->second.real();
  }
  if (!kappa || !(*kappa > 0.0)) return std::nullopt;
  return kappa;
}

std::optional<std::pair<double, int>> WeightedPolynomial::as_modulus_power() const {
  if (nvars() != 1) return std::nullopt;
  const auto coef = collapse(terms_);
  if (coef.size() != 1) return std::nullopt;
  const auto& [key, c] = *coef.begin();
  if (key.first != key.second || key.first[0] < 1 || c.imag() != 0.0 || !(c.real() > 0.0)) return std::nullopt;
  return std::make_pair(c.real(), key.first[0]);
}

json WeightedPolynomial::to_json() const {
  json arr = json::array();
  for (const auto& t : terms_) {
    if (nvars() == 1)
      arr.push_back({t.a[0], t.b[0], t.c.real(), t.c.imag()});
    else
      arr.push_back({t.a, t.b, t.c.real(), t.c.imag()});
  }
  return arr;
}

// ------------------------------------------------------------ homogeneity

HomogeneityReport is_weighted_homogeneous(const WeightedPolynomial& p) {
  HomogeneityReport rep;
  rep.exact_degrees_ok = true;
  for (const auto& d : p.term_degrees())
    if (!(d == Rational(1))) rep.exact_degrees_ok = false;
  if (p.nvars() == 0) {
    rep.homogeneous = rep.exact_degrees_ok;
    return rep;
  }

  const auto grid = radial_grid(p.nvars(), 0.1, 2.0, 5, 6);
  const double ts[] = {0.05, 0.5, 2.0, 7.0};
  for (double t : ts) {
    for (const auto& z : grid) {
      const double lhs = p(dilate(t, z, p.weights()));
      const double rhs = t * p(z);
      rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
  }
  rep.homogeneous = rep.exact_degrees_ok && rep.max_residual < 1e-12;
  return rep;
}

// ----------------------------------------------------------------- grids

namespace {

std::vector<Point> unit_directions(int nvars, int count) {
  std::vector<Point> dirs;
  if (nvars == 1) {
    for (int k = 0; k < count; ++k) {
      Point d(1);
      d[0] = std::polar(1.0, 2.0 * kPi * k / count);
      dirs.push_back(d);
    }
    return dirs;
  }
  for (int j = 0; j < nvars && static_cast<int>(dirs.size()) < count; ++j) {
    Point d = Point::Zero(nvars);
    d[j] = 1.0;
    dirs.push_back(d);
  }
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  while (static_cast<int>(dirs.size()) < count) {
    Point d(nvars);
    for (int j = 0; j < nvars; ++j) d[j] = cplx(g(rng), g(rng));
    dirs.push_back(d / d.norm());
  }
  return dirs;
}

}  // namespace

std::vector<Point> radial_grid(int nvars, double r_min, double r_max, int shells, int angles) {
  if (!(r_min > 0.0) || r_max < r_min || shells < 1 || angles < 1)
    fail(ErrorCode::Argument, "radial grid: need 0 < r_min <= r_max and positive counts");
  std::vector<Point> grid;
  const auto dirs = unit_directions(nvars, angles);
  for (int s = 0; s < shells; ++s) {
    const double f = shells == 1 ? 0.0 : static_cast<double>(s) / (shells - 1);
    const double r = r_min * std::pow(r_max / r_min, f);
    for (const auto& d : dirs) grid.push_back(r * d);
  }
  return grid;
}

std::vector<Point> default_psh_grid(int nvars, int shells, int angles) {
  return radial_grid(nvars, 1e-2, 10.0, shells, angles);
}

LeviReport levi_psd_check(const WeightedPolynomial& p, const std::vector<Point>& grid, bool strict) {
  if (grid.empty()) fail(ErrorCode::Argument, "levi check needs a nonempty grid");
  LeviReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& z : grid) {
    if (strict && z.norm() == 0.0) fail(ErrorCode::Argument, "strict levi check grid must avoid the origin");
    const CMatrix h = p.complex_hessian(z);
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < rep.min_eigenvalue) {
      rep.min_eigenvalue = lmin;
      rep.argmin = z;
    }
    const double tol = 1e-13 * scale;
    if (strict ? !(lmin > tol) : lmin < -tol) ok = false;
    ++rep.points_checked;
  }
  rep.pass = ok;
  return rep;
}

BumpingReport validate_bumping(const WeightedPolynomial& p, const WeightedPolynomial& a,
                               const std::vector<double>& delta_grid, const std::vector<Point>& grid_in) {
  if (!(p.weights() == a.weights())) fail(ErrorCode::Argument, "P and the bumping function must share weights");
  if (delta_grid.empty()) fail(ErrorCode::Argument, "empty delta grid");
  const auto grid = grid_in.empty() ? default_psh_grid(p.nvars()) : grid_in;
  BumpingReport rep;
  rep.min_a = std::numeric_limits<double>::infinity();
  for (const auto& z : grid) {
    if (z.norm() == 0.0) continue;
    rep.min_a = std::min(rep.min_a, a(z));
  }
  rep.positive = rep.min_a > 0.0;
  rep.homogeneous = is_weighted_homogeneous(a).homogeneous;
  bool all_levi = true;
  for (double delta : delta_grid) {
    if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorCode::Argument, "bumping deltas must lie in (0, 1]");
    rep.deltas.push_back(delta);
    rep.levi.push_back(levi_psd_check(p.minus(a, delta), grid, true));
    all_levi = all_levi && rep.levi.back().pass;
  }
  rep.pass = rep.positive && rep.homogeneous && all_levi;
  return rep;
}

// ================================================================ DomainSpec

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

namespace {

void require_model_polynomial(const WeightedPolynomial& p, const char* what) {
  for (const auto& t : p.terms())
    if (degree(t.a) == 0 || degree(t.b) == 0)
      fail(ErrorCode::Argument, std::string(what) + " contains a pure term");
  for (const auto& d : p.term_degrees())
    if (!(d == Rational(1)))
      fail(ErrorCode::Argument, std::string(what) + " is not weighted homogeneous of degree 1 (term degree " +
                                    to_string(d) + ")");
}

void validate(const DomainSpec::Kind& kind) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) {
          if (d.n < 1) fail(ErrorCode::Argument, "ball dimension must be >= 1");
          if (!(d.radius > 0.0)) fail(ErrorCode::Argument, "ball radius must be positive");
          if (d.center.size() != d.n) fail(ErrorCode::Argument, "ball center has wrong dimension");
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          if (d.radii.empty()) fail(ErrorCode::Argument, "polydisc needs radii");
          for (double r : d.radii)
            if (!(r > 0.0)) fail(ErrorCode::Argument, "polydisc radii must be positive");
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          if (d.exponents.empty()) fail(ErrorCode::Argument, "ellipsoid needs exponents");
          for (int p : d.exponents)
            if (p < 1) fail(ErrorCode::Argument, "ellipsoid exponents must be >= 1");
        } else if constexpr (std::is_same_v<T, ModelDomain>) {
          if (!(d.lead > 0.0)) fail(ErrorCode::Argument, "model lead coefficient must be positive");
          require_model_polynomial(d.p, "model polynomial P");
        } else if constexpr (std::is_same_v<T, BumpedModelDomain>) {
          if (!(d.lead > 0.0)) fail(ErrorCode::Argument, "model lead coefficient must be positive");
          require_model_polynomial(d.p, "model polynomial P");
          require_model_polynomial(d.a, "bumping function a");
          if (!(d.p.weights() == d.a.weights())) fail(ErrorCode::Argument, "P and a must share weights");
          if (!(d.delta > 0.0 && d.delta <= 1.0)) fail(ErrorCode::Argument, "bumping delta must lie in (0, 1]");
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          if (!d.r) fail(ErrorCode::Argument, "defining domain needs a defining function");
          if (d.box.lo.size() != 2 * d.n || d.box.hi.size() != 2 * d.n)
            fail(ErrorCode::Argument, "defining domain needs a 2n-dimensional bounding box");
        } else if constexpr (std::is_same_v<T, IntersectionDomain>) {
          if (!d.base) fail(ErrorCode::Argument, "intersection needs a base domain");
          if (d.base->dim() != d.neighborhood.n) fail(ErrorCode::Argument, "intersection dimensions differ");
        }
      },
      kind);
}

double abs_pow2(cplx z, int p) { return std::pow(std::norm(z), p); }

}  // namespace

DomainSpec::DomainSpec(Kind kind) : kind_(std::move(kind)) { validate(kind_); }

DomainSpec DomainSpec::ball(int n, double radius, Point center) {
  if (center.size() == 0) center = Point::Zero(n);
  return DomainSpec(BallDomain{n, radius, std::move(center)});
}

DomainSpec DomainSpec::disc(double radius, cplx center) {
  Point c(1);
  c[0] = center;
  return ball(1, radius, c);
}

DomainSpec DomainSpec::polydisc(std::vector<double> radii) { return DomainSpec(PolydiscDomain{std::move(radii)}); }

DomainSpec DomainSpec::egg(int m) { return ellipsoid({1, m}); }

DomainSpec DomainSpec::ellipsoid(std::vector<int> exponents) { return DomainSpec(EllipsoidDomain{std::move(exponents)}); }

DomainSpec DomainSpec::model(double lead, WeightedPolynomial p) { return DomainSpec(ModelDomain{lead, std::move(p)}); }

DomainSpec DomainSpec::bumped_model(double lead, WeightedPolynomial p, WeightedPolynomial a, double delta) {
  return DomainSpec(BumpedModelDomain{lead, std::move(p), std::move(a), delta});
}

DomainSpec DomainSpec::siegel(int n, double lead) {
  if (n < 1) fail(ErrorCode::Argument, "Siegel model needs n >= 1");
  if (n == 1) return model(lead, WeightedPolynomial({}, Weights()));
  return model(lead, WeightedPolynomial::squared_norm(n - 1, 1.0));
}

DomainSpec DomainSpec::egg_model(int m, double lead, double kappa) {
  return model(lead, WeightedPolynomial::modulus_power(1, 0, m, kappa, Weights({Rational(2 * m)})));
}

DomainSpec DomainSpec::intersection(const DomainSpec& base, const BallDomain& neighborhood) {
  return DomainSpec(IntersectionDomain{std::make_shared<const DomainSpec>(base), neighborhood});
}

DomainSpec DomainSpec::defining(DefiningDomain d) { return DomainSpec(std::move(d)); }

int DomainSpec::dim() const {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) return d.n;
        else if constexpr (std::is_same_v<T, PolydiscDomain>) return static_cast<int>(d.radii.size());
        else if constexpr (std::is_same_v<T, EllipsoidDomain>) return static_cast<int>(d.exponents.size());
        else if constexpr (std::is_same_v<T, ModelDomain>) return d.p.nvars() + 1;
        else if constexpr (std::is_same_v<T, BumpedModelDomain>) return d.p.nvars() + 1;
        else if constexpr (std::is_same_v<T, DefiningDomain>) return d.n;
        else return d.base->dim();
      },
      kind_);
}

bool DomainSpec::bounded() const { return !is_model(); }

bool DomainSpec::is_model() const {
  return std::holds_alternative<ModelDomain>(kind_) || std::holds_alternative<BumpedModelDomain>(kind_);
}

std::string DomainSpec::name() const {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, BallDomain>) {
          os << (d.n == 1 ? "disc" : "ball") << "(n=" << d.n << ",r=" << d.radius << ")";
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          os << "polydisc(n=" << d.radii.size() << ")";
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          if (d.exponents.size() == 2 && d.exponents[0] == 1)
            os << "egg(m=" << d.exponents[1] << ")";
          else
            os << "ellipsoid";
        } else if constexpr (std::is_same_v<T, ModelDomain>) {
          os << "model(lead=" << d.lead << ")";
        } else if constexpr (std::is_same_v<T, BumpedModelDomain>) {
          os << "bumped_model(delta=" << d.delta << ")";
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          os << d.label;
        } else {
          os << "intersection(" << d.base->name() << ")";
        }
        return os.str();
      },
      kind_);
}

double DomainSpec::defining(const Point& z) const {
  if (z.size() != dim()) fail(ErrorCode::Argument, "point dimension does not match the domain");
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) {
          return (z - d.center).squaredNorm() / (d.radius * d.radius) - 1.0;
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          double r = -std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < d.radii.size(); ++j)
            r = std::max(r, std::norm(z[static_cast<int>(j)]) / (d.radii[j] * d.radii[j]) - 1.0);
          return r;
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          double s = -1.0;
          for (std::size_t j = 0; j < d.exponents.size(); ++j) s += abs_pow2(z[static_cast<int>(j)], d.exponents[j]);
          return s;
        } else if constexpr (std::is_same_v<T, ModelDomain>) {
          return d.lead * z[0].real() + d.p(z.tail(z.size() - 1));
        } else if constexpr (std::is_same_v<T, BumpedModelDomain>) {
          const Point zp = z.tail(z.size() - 1);
          return d.lead * z[0].real() + d.p(zp) - d.delta * d.a(zp);
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          return d.r(z);
        } else {
          const double rb = (z - d.neighborhood.center).squaredNorm() /
                                (d.neighborhood.radius * d.neighborhood.radius) - 1.0;
          return std::max(d.base->defining(z), rb);
        }
      },
      kind_);
}

Eigen::VectorXd DomainSpec::defining_gradient(const Point& z) const {
  const int n = dim();
  auto from_dz = [n](const Point& dz) {
    // Real gradient of a real function from its holomorphic derivative.
    Eigen::VectorXd g(2 * n);
    for (int j = 0; j < n; ++j) {
      g[2 * j] = 2.0 * dz[j].real();
      g[2 * j + 1] = -2.0 * dz[j].imag();
    }
    return g;
  };
  return std::visit(
      [&](const auto& d) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) {
          return from_dz((z - d.center).conjugate() / (d.radius * d.radius));
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          int active = 0;
          double best = -std::numeric_limits<double>::infinity();
          for (int j = 0; j < n; ++j) {
            const double v = std::norm(z[j]) / (d.radii[j] * d.radii[j]);
            if (v > best) {
              best = v;
              active = j;
            }
          }
          Point dz = Point::Zero(n);
          dz[active] = std::conj(z[active]) / (d.radii[active] * d.radii[active]);
          return from_dz(dz);
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          Point dz(n);
          for (int j = 0; j < n; ++j) {
            const int p = d.exponents[j];
            dz[j] = static_cast<double>(p) * std::pow(std::norm(z[j]), p - 1) * std::conj(z[j]);
          }
          return from_dz(dz);
        } else if constexpr (std::is_same_v<T, ModelDomain> || std::is_same_v<T, BumpedModelDomain>) {
          Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
          g[0] = d.lead;
          const Point zp = z.tail(n - 1);
          Eigen::VectorXd gp = d.p.real_gradient(zp);
          if constexpr (std::is_same_v<T, BumpedModelDomain>) gp -= d.delta * d.a.real_gradient(zp);
          g.tail(2 * n - 2) = gp;
          return g;
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          if (d.gradient) return d.gradient(z);
          Eigen::VectorXd g(2 * n);
          const double h = 1e-6 * std::max(1.0, z.cwiseAbs().maxCoeff());
          for (int i = 0; i < 2 * n; ++i) {
            Point zp = z, zm = z;
            const cplx step = (i % 2 == 0) ? cplx(h, 0.0) : cplx(0.0, h);
            zp[i / 2] += step;
            zm[i / 2] -= step;
            g[i] = (d.r(zp) - d.r(zm)) / (2.0 * h);
          }
          return g;
        } else {
          const double rb = (z - d.neighborhood.center).squaredNorm() /
                                (d.neighborhood.radius * d.neighborhood.radius) - 1.0;
          if (d.base->defining(z) >= rb) return d.base->defining_gradient(z);
          return from_dz((z - d.neighborhood.center).conjugate() / (d.neighborhood.radius * d.neighborhood.radius));
        }
      },
      kind_);
}

namespace {

Box ball_box(const BallDomain& b) {
  Box box{Eigen::VectorXd(2 * b.n), Eigen::VectorXd(2 * b.n)};
  for (int j = 0; j < b.n; ++j) {
    box.lo[2 * j] = b.center[j].real() - b.radius;
    box.hi[2 * j] = b.center[j].real() + b.radius;
    box.lo[2 * j + 1] = b.center[j].imag() - b.radius;
    box.hi[2 * j + 1] = b.center[j].imag() + b.radius;
  }
  return box;
}

}  // namespace

std::optional<Box> DomainSpec::bounding_box() const {
  return std::visit(
      [&](const auto& d) -> std::optional<Box> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) {
          return ball_box(d);
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          const int n = static_cast<int>(d.radii.size());
          Box box{Eigen::VectorXd(2 * n), Eigen::VectorXd(2 * n)};
          for (int j = 0; j < n; ++j) {
            box.lo.segment(2 * j, 2).setConstant(-d.radii[j]);
            box.hi.segment(2 * j, 2).setConstant(d.radii[j]);
          }
          return box;
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          const int n = static_cast<int>(d.exponents.size());
          return Box{Eigen::VectorXd::Constant(2 * n, -1.0), Eigen::VectorXd::Constant(2 * n, 1.0)};
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          return d.box;
        } else if constexpr (std::is_same_v<T, IntersectionDomain>) {
          auto base = d.base->bounding_box();
          Box nb = ball_box(d.neighborhood);
          if (!base) return nb;
          Box out{base->lo.cwiseMax(nb.lo), base->hi.cwiseMin(nb.hi)};
          for (int i = 0; i < out.lo.size(); ++i)
            if (out.lo[i] >= out.hi[i]) fail(ErrorCode::Domain, "intersection is empty");
          return out;
        } else {
          return std::nullopt;
        }
      },
      kind_);
}

Point DomainSpec::basis_center() const {
  if (const auto* b = std::get_if<BallDomain>(&kind_)) return b->center;
  if (is_model()) return Point::Zero(dim());
  if (std::holds_alternative<PolydiscDomain>(kind_) || std::holds_alternative<EllipsoidDomain>(kind_))
    return Point::Zero(dim());
  const Box box = *bounding_box();
  Point c(dim());
  for (int j = 0; j < dim(); ++j)
    c[j] = cplx(0.5 * (box.lo[2 * j] + box.hi[2 * j]), 0.5 * (box.lo[2 * j + 1] + box.hi[2 * j + 1]));
  return c;
}

double DomainSpec::basis_scale() const {
  if (const auto* b = std::get_if<BallDomain>(&kind_)) return b->radius;
  if (const auto* p = std::get_if<PolydiscDomain>(&kind_)) return *std::max_element(p->radii.begin(), p->radii.end());
  if (std::holds_alternative<EllipsoidDomain>(kind_) || is_model()) return 1.0;
  const Box box = *bounding_box();
  return 0.5 * (box.hi - box.lo).maxCoeff();
}

bool DomainSpec::reinhardt() const {
  return std::holds_alternative<BallDomain>(kind_) || std::holds_alternative<PolydiscDomain>(kind_) ||
         std::holds_alternative<EllipsoidDomain>(kind_);
}

// ------------------------------------------------------------------ json

Point point_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::Schema, "point must be an array of complex entries");
  Point z(static_cast<int>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& e = j[k];
    if (e.is_number()) {
      z[static_cast<int>(k)] = e.get<double>();
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      z[static_cast<int>(k)] = cplx(e[0].get<double>(), e[1].get<double>());
    } else {
      fail(ErrorCode::Schema, "complex entries must be numbers or [re, im] pairs");
    }
  }
  return z;
}

json point_to_json(const Point& z) {
  json arr = json::array();
  for (int j = 0; j < z.size(); ++j) arr.push_back({z[j].real(), z[j].imag()});
  return arr;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) fail(ErrorCode::Schema, "unknown key '" + it.key() + "' in domain config");
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::Schema, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Schema, std::string("bad value for '") + key + "': " + e.what());
  }
}

MultiIndex index_from_json(const json& j, int nvars) {
  if (j.is_number_integer()) {
    if (nvars != 1) fail(ErrorCode::Schema, "scalar exponent only allowed for one z' variable");
    return MultiIndex{j.get<int>()};
  }
  if (!j.is_array()) fail(ErrorCode::Schema, "exponent must be an integer or array");
  auto v = j.get<std::vector<int>>();
  if (static_cast<int>(v.size()) != nvars) fail(ErrorCode::Schema, "exponent arity does not match weights");
  return v;
}

WeightedPolynomial poly_from_json(const json& j, const Weights& tail) {
  if (!j.is_array()) fail(ErrorCode::Schema, "polynomial must be an array of [a, b, re, im] terms");
  std::vector<PolyTerm> terms;
  for (const auto& t : j) {
    if (!t.is_array() || (t.size() != 4 && t.size() != 3)) fail(ErrorCode::Schema, "polynomial term must be [a, b, re, im]");
    PolyTerm term;
    term.a = index_from_json(t[0], tail.size());
    term.b = index_from_json(t[1], tail.size());
    term.c = cplx(t[2].get<double>(), t.size() == 4 ? t[3].get<double>() : 0.0);
    terms.push_back(std::move(term));
  }
  return WeightedPolynomial(std::move(terms), tail);
}

Weights model_weights(const json& j) {
  auto w = Weights::from_doubles(require<std::vector<double>>(j, "weights"));
  if (w.size() < 1) fail(ErrorCode::Schema, "model weights must not be empty");
  if (!(w[0] == Rational(1))) fail(ErrorCode::Schema, "model weights must start with m_1 = 1");
  return w;
}

BallDomain ball_from_json(const json& j, int default_n) {
  const int n = j.value("n", default_n);
  const double radius = j.value("radius", 1.0);
  Point center = j.contains("center") ? point_from_json(j["center"]) : Point::Zero(n);
  if (center.size() != n) fail(ErrorCode::Schema, "ball center has wrong dimension");
  return BallDomain{n, radius, center};
}

}  // namespace

DomainSpec DomainSpec::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Schema, "domain config must be an object");
  const std::string kind = require<std::string>(j, "kind");
  try {
    if (kind == "ball") {
      reject_unknown(j, {"kind", "n", "radius", "center"});
      return DomainSpec(ball_from_json(j, 2));
    }
    if (kind == "disc") {
      reject_unknown(j, {"kind", "radius", "center"});
      json jj = j;
      if (jj.contains("center") && !jj["center"].is_array()) jj["center"] = json::array({jj["center"]});
      else if (jj.contains("center") && jj["center"].size() == 2 && jj["center"][0].is_number())
        jj["center"] = json::array({jj["center"]});
      return DomainSpec(ball_from_json(jj, 1));
    }
    if (kind == "polydisc") {
      reject_unknown(j, {"kind", "radii"});
      return polydisc(require<std::vector<double>>(j, "radii"));
    }
    if (kind == "egg") {
      reject_unknown(j, {"kind", "m"});
      return egg(require<int>(j, "m"));
    }
    if (kind == "ellipsoid") {
      reject_unknown(j, {"kind", "exponents"});
      return ellipsoid(require<std::vector<int>>(j, "exponents"));
    }
    if (kind == "model") {
      reject_unknown(j, {"kind", "lead", "P", "weights"});
      const Weights w = model_weights(j);
      return model(j.value("lead", 1.0), poly_from_json(require<json>(j, "P"), w.tail()));
    }
    if (kind == "bumped_model") {
      reject_unknown(j, {"kind", "lead", "P", "a", "delta", "weights"});
      const Weights w = model_weights(j);
      return bumped_model(j.value("lead", 1.0), poly_from_json(require<json>(j, "P"), w.tail()),
                          poly_from_json(require<json>(j, "a"), w.tail()), require<double>(j, "delta"));
    }
    if (kind == "intersection") {
      reject_unknown(j, {"kind", "base", "ball"});
      const DomainSpec base = from_json(require<json>(j, "base"));
      const json& b = require<json>(j, "ball");
      if (!b.is_object()) fail(ErrorCode::Schema, "intersection ball must be an object");
      reject_unknown(b, {"center", "radius"});
      json bj = b;
      if (base.dim() == 1 && bj.contains("center") && bj["center"].is_array() && bj["center"].size() == 2 &&
          bj["center"][0].is_number())
        bj["center"] = json::array({bj["center"]});
      return intersection(base, ball_from_json(bj, base.dim()));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Schema, std::string("malformed domain config: ") + e.what());
  }
  fail(ErrorCode::Schema, "unknown domain kind '" + kind + "'");
}

json DomainSpec::to_json() const {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BallDomain>) {
          return {{"kind", "ball"}, {"n", d.n}, {"radius", d.radius}, {"center", point_to_json(d.center)}};
        } else if constexpr (std::is_same_v<T, PolydiscDomain>) {
          return {{"kind", "polydisc"}, {"radii", d.radii}};
        } else if constexpr (std::is_same_v<T, EllipsoidDomain>) {
          if (d.exponents.size() == 2 && d.exponents[0] == 1) return {{"kind", "egg"}, {"m", d.exponents[1]}};
          return {{"kind", "ellipsoid"}, {"exponents", d.exponents}};
        } else if constexpr (std::is_same_v<T, ModelDomain> || std::is_same_v<T, BumpedModelDomain>) {
          std::vector<double> w{1.0};
          for (const auto& r : d.p.weights().values()) w.push_back(r.value());
          json out = {{"kind", "model"}, {"lead", d.lead}, {"P", d.p.to_json()}, {"weights", w}};
          if constexpr (std::is_same_v<T, BumpedModelDomain>) {
            out["kind"] = "bumped_model";
            out["a"] = d.a.to_json();
            out["delta"] = d.delta;
          }
          return out;
        } else if constexpr (std::is_same_v<T, DefiningDomain>) {
          return {{"kind", "defining"}, {"label", d.label}};
        } else {
          return {{"kind", "intersection"},
                  {"base", d.base->to_json()},
                  {"ball", {{"center", point_to_json(d.neighborhood.center)}, {"radius", d.neighborhood.radius}}}};
        }
      },
      kind_);
}

// ---------------------------------------------------------- boundary distance

namespace {

Eigen::VectorXd to_real(const Point& z) {
  Eigen::VectorXd x(2 * z.size());
  for (int j = 0; j < z.size(); ++j) {
    x[2 * j] = z[j].real();
    x[2 * j + 1] = z[j].imag();
  }
  return x;
}

Point to_complex(const Eigen::VectorXd& x) {
  Point z(x.size() / 2);
  for (int j = 0; j < z.size(); ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
  return z;
}

// Newton projection onto {r = 0} along the gradient.
bool project_to_surface(const DomainSpec& d, Eigen::VectorXd& x) {
  for (int it = 0; it < 60; ++it) {
    const Point z = to_complex(x);
    const double r = d.defining(z);
    const Eigen::VectorXd g = d.defining_gradient(z);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) return false;
    x -= (r / g2) * g;
    if (std::abs(r) < 1e-15) return true;
  }
  return std::abs(d.defining(to_complex(x))) < 1e-12;
}

std::optional<Eigen::VectorXd> ray_hit(const DomainSpec& d, const Eigen::VectorXd& x0, const Eigen::VectorXd& dir,
                                       double t_max) {
  double lo = 0.0, hi = 1e-3;
  while (d.defining(to_complex(x0 + hi * dir)) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > t_max) return std::nullopt;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (d.defining(to_complex(x0 + mid * dir)) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return Eigen::VectorXd(x0 + hi * dir);
}

// Projected-gradient descent of |w - z| on the boundary surface.
double refine_closest(const DomainSpec& d, const Eigen::VectorXd& x0, Eigen::VectorXd w) {
  double alpha = 1.0;
  double best = (w - x0).norm();
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd g = d.defining_gradient(to_complex(w));
    const double gn = g.norm();
    if (gn == 0.0) break;
    const Eigen::VectorXd nrm = g / gn;
    const Eigen::VectorXd v = w - x0;
    const Eigen::VectorXd tang = v - v.dot(nrm) * nrm;
    if (tang.norm() < 1e-13 * (1.0 + v.norm())) break;
    Eigen::VectorXd cand = w - alpha * tang;
    if (!project_to_surface(d, cand)) {
      alpha *= 0.5;
      if (alpha < 1e-12) break;
      continue;
    }
    const double dist = (cand - x0).norm();
    if (dist < best) {
      best = dist;
      w = cand;
      alpha = std::min(1.0, 2.0 * alpha);
    } else {
      alpha *= 0.5;
      if (alpha < 1e-12) break;
    }
  }
  return best;
}

}  // namespace

double boundary_distance(const DomainSpec& domain, const Point& z) {
  if (!domain.contains(z)) fail(ErrorCode::Domain, "boundary distance requested for a non-interior point");
  const auto& k = domain.kind();
  if (const auto* b = std::get_if<BallDomain>(&k)) return b->radius - (z - b->center).norm();
  if (const auto* p = std::get_if<PolydiscDomain>(&k)) {
    double dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < z.size(); ++j) dist = std::min(dist, p->radii[static_cast<std::size_t>(j)] - std::abs(z[j]));
    return dist;
  }
  if (const auto* in = std::get_if<IntersectionDomain>(&k)) {
    const double db = in->neighborhood.radius - (z - in->neighborhood.center).norm();
    return std::min(boundary_distance(*in->base, z), db);
  }

  // General smooth boundary: multistart projected gradient.
  const Eigen::VectorXd x0 = to_real(z);
  const int m = static_cast<int>(x0.size());
  const auto box = domain.bounding_box();
  const double t_max = box ? 4.0 * (box->hi - box->lo).norm() + 1.0 : 1e6;
  std::vector<Eigen::VectorXd> dirs;
  const Eigen::VectorXd g = domain.defining_gradient(z);
  if (g.norm() > 0.0) dirs.push_back(g / g.norm());
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& dir : dirs) {
    auto hit = ray_hit(domain, x0, dir, t_max);
    if (!hit) continue;
    Eigen::VectorXd w = *hit;
    if (!project_to_surface(domain, w)) continue;
    best = std::min(best, refine_closest(domain, x0, w));
  }
  if (!std::isfinite(best)) fail(ErrorCode::Numerical, "boundary distance minimization found no boundary point");
  return best;
}

std::vector<Point> sample_interior(const DomainSpec& domain, std::size_t count, std::uint64_t seed) {
  const auto box = domain.bounding_box();
  if (!box) fail(ErrorCode::Unsupported, "interior sampling needs a bounded domain");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  const int n = domain.dim();
  std::size_t tries = 0;
  while (out.size() < count) {
    if (++tries > 1000 * (count + 10)) fail(ErrorCode::Numerical, "interior sampling rejected too many points");
    Point z(n);
    for (int j = 0; j < n; ++j)
      z[j] = cplx(box->lo[2 * j] + (box->hi[2 * j] - box->lo[2 * j]) * u(rng),
                  box->lo[2 * j + 1] + (box->hi[2 * j + 1] - box->lo[2 * j + 1]) * u(rng));
    if (domain.contains(z)) out.push_back(z);
  }
  return out;
}

// ================================================================= cones

Cone make_cone(Point vertex, Point normal, double aperture) {
  if (vertex.size() != normal.size()) fail(ErrorCode::Argument, "cone vertex and normal differ in dimension");
  const double nn = normal.norm();
  if (!(nn > 0.0)) fail(ErrorCode::Argument, "cone normal must be nonzero");
  if (!(aperture >= 0.0 && aperture < kPi / 2)) fail(ErrorCode::Argument, "cone aperture must lie in [0, pi/2)");
  return Cone{std::move(vertex), normal / nn, aperture};
}

bool cone_contains(const Cone& cone, const Point& z) {
  const Point v = z - cone.vertex;
  const double len = v.norm();
  if (len == 0.0) return false;
  const double c = cone.normal.dot(v).real() / len;  // Eigen dot conjugates the first argument
  return c >= std::cos(cone.aperture) - 1e-12;
}

std::vector<Point> cone_samples(const Cone& cone, const DomainSpec& domain, std::vector<double> t) {
  if (t.empty()) fail(ErrorCode::Argument, "empty sample schedule");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0)) fail(ErrorCode::Argument, "sample schedule must be positive");
    if (k > 0 && !(t[k] < t[k - 1])) fail(ErrorCode::Argument, "sample schedule must be strictly decreasing");
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<Point> pts;
    bool ok = true;
    for (double tk : t) {
      Point z = cone.vertex + tk * cone.normal;
      if (!domain.contains(z) || !cone_contains(cone, z)) {
        ok = false;
        break;
      }
      pts.push_back(std::move(z));
    }
    if (ok) return pts;
    for (double& tk : t) tk *= 0.5;
  }
  fail(ErrorCode::Domain, "cone samples leave the domain even after shrinking the schedule");
}

std::vector<double> geometric_schedule(int k_min, int k_max, double ratio) {
  if (k_max < k_min) fail(ErrorCode::Argument, "empty geometric schedule");
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::Argument, "schedule ratio must lie in (0, 1)");
  std::vector<double> t;
  for (int k = k_min; k <= k_max; ++k) t.push_back(std::pow(ratio, k));
  return t;
}

}  // namespace kfuks
