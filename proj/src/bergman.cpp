#include "kfuks/bergman.hpp"

#include <cmath>
#include <sstream>

namespace kfuks {

using nlohmann::json;

// ------------------------------------------------------------------ jets

cplx KernelJet::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (degree(a) + degree(b) > order) fail(ErrorCode::Unsupported, "jet entry beyond the computed order");
  Eigen::Index ia = -1, ib = -1;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == a) ia = static_cast<Eigen::Index>(i);
    if (indices[i] == b) ib = static_cast<Eigen::Index>(i);
  }
  if (ia < 0 || ib < 0) fail(ErrorCode::Argument, "jet index has wrong dimension");
  return table(ia, ib);
}

std::string KernelJet::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "a,b,re,im\n";
  auto idx = [](const MultiIndex& m) {
    std::string s;
    for (std::size_t j = 0; j < m.size(); ++j) s += (j ? " " : "") + std::to_string(m[j]);
    return s;
  };
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (std::size_t j = 0; j < indices.size(); ++j) {
      if (degree(indices[i]) + degree(indices[j]) > order) continue;
      const cplx v = table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      os << idx(indices[i]) << ',' << idx(indices[j]) << ',' << v.real() << ',' << v.imag() << '\n';
    }
  return os.str();
}

namespace {

KernelJet empty_jet(const Point& z, int order, std::string provenance) {
  if (order < 0) fail(ErrorCode::Argument, "jet order must be nonnegative");
  if (order > 4) fail(ErrorCode::Unsupported, "jets are available up to order 4");
  KernelJet jet;
  jet.z = z;
  jet.order = order;
  jet.indices = indices_up_to(static_cast<int>(z.size()), order);
  jet.table = CMatrix::Zero(static_cast<Eigen::Index>(jet.indices.size()), static_cast<Eigen::Index>(jet.indices.size()));
  jet.provenance = std::move(provenance);
  return jet;
}

// Calls body(c) for every multi-index c <= bound componentwise.
template <class Body>
void for_each_below(const MultiIndex& bound, Body body) {
  MultiIndex c(bound.size(), 0);
  for (;;) {
    body(c);
    std::size_t j = 0;
    while (j < c.size() && c[j] == bound[j]) c[j++] = 0;
    if (j == c.size()) return;
    ++c[j];
  }
}

cplx ipow(cplx x, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

cplx power_kernel_derivative(const Point& z, const Point& w, const MultiIndex& a, const MultiIndex& b,
                             const std::vector<cplx>& F) {
  MultiIndex bound(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) bound[j] = std::min(a[j], b[j]);
  const int ab = degree(a) + degree(b);
  cplx sum = 0.0;
  for_each_below(bound, [&](const MultiIndex& c) {
    double coef = 1.0;
    cplx mono = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      coef *= binomial(a[j], c[j]) * binomial(b[j], c[j]) * std::tgamma(c[j] + 1.0);
      const auto jj = static_cast<Eigen::Index>(j);
      mono *= ipow(std::conj(w[jj]), a[j] - c[j]) * ipow(z[jj], b[j] - c[j]);
    }
    sum += coef * mono * F[static_cast<std::size_t>(ab - degree(c))];
  });
  return sum;
}

// ---------------------------------------------------------- base engine

std::pair<double, CMatrix> KernelEngine::metric(const Point& z) const {
  const KernelJet jet = this->jet(z, 2);
  const int n = dim();
  const cplx K = jet.table(0, 0);
  CMatrix G(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      G(a, b) = (K * jet.table(1 + a, 1 + b) - jet.table(1 + a, 0) * jet.table(0, 1 + b)) / (K * K);
  return {K.real(), G};
}

json KernelEngine::descriptor() const { return {{"engine", kind()}, {"domain", domain().to_json()}}; }

// ------------------------------------------------------------ closed form

ClosedFormEngine::ClosedFormEngine(DomainSpec domain) : domain_(std::move(domain)) {
  if (!std::holds_alternative<BallDomain>(domain_.kind()) && !std::holds_alternative<PolydiscDomain>(domain_.kind()))
    fail(ErrorCode::Unsupported, "closed-form kernels exist for balls and polydiscs only");
}

namespace {

// F(t) = C (1 - t)^{-s} and its derivatives up to order p.
std::vector<cplx> power_table(double C, double s, cplx t, int p) {
  std::vector<cplx> F(static_cast<std::size_t>(p + 1));
  const cplx base = 1.0 - t;
  for (int k = 0; k <= p; ++k) F[static_cast<std::size_t>(k)] = C * rising_factorial(s, k) * std::pow(base, -(s + k));
  return F;
}

}  // namespace

cplx ClosedFormEngine::kernel(const Point& z, const Point& w) const {
  if (const auto* b = std::get_if<BallDomain>(&domain_.kind())) {
    const Point yz = (z - b->center) / b->radius, yw = (w - b->center) / b->radius;
    const cplx t = yw.dot(yz);  // sum yz_j conj(yw_j)
    const int n = b->n;
    return std::tgamma(n + 1.0) / (std::pow(kPi, n) * std::pow(b->radius, 2 * n)) * std::pow(1.0 - t, -(n + 1.0));
  }
  const auto& p = std::get<PolydiscDomain>(domain_.kind());
  cplx K = 1.0;
  for (std::size_t j = 0; j < p.radii.size(); ++j) {
    const double r2 = p.radii[j] * p.radii[j];
    const auto jj = static_cast<Eigen::Index>(j);
    K *= 1.0 / (kPi * r2) * std::pow(1.0 - z[jj] * std::conj(w[jj]) / r2, -2.0);
  }
  return K;
}

KernelJet ClosedFormEngine::jet(const Point& z, int order) const {
  KernelJet jet = empty_jet(z, order, "analytic");
  const auto& I = jet.indices;
  const auto N = static_cast<Eigen::Index>(I.size());
  if (const auto* b = std::get_if<BallDomain>(&domain_.kind())) {
    const Point y = (z - b->center) / b->radius;
    const int n = b->n;
    const double C = std::tgamma(n + 1.0) / (std::pow(kPi, n) * std::pow(b->radius, 2 * n));
    const auto F = power_table(C, n + 1.0, y.squaredNorm(), order);
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j) {
        const int tot = degree(I[i]) + degree(I[j]);
        if (tot > order) continue;
        jet.table(i, j) = std::pow(b->radius, -tot) * power_kernel_derivative(y, y, I[i], I[j], F);
      }
    return jet;
  }
  const auto& p = std::get<PolydiscDomain>(domain_.kind());
  const int n = static_cast<int>(p.radii.size());
  std::vector<std::vector<cplx>> F(static_cast<std::size_t>(n));
  Point y(n);
  for (int j = 0; j < n; ++j) {
    const double r = p.radii[static_cast<std::size_t>(j)];
    y[j] = z[j] / r;
    F[static_cast<std::size_t>(j)] = power_table(1.0 / (kPi * r * r), 2.0, std::norm(y[j]), order);
  }
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < N; ++k) {
      const int tot = degree(I[i]) + degree(I[k]);
      if (tot > order) continue;
      cplx v = 1.0;
      for (int j = 0; j < n; ++j) {
        const double r = p.radii[static_cast<std::size_t>(j)];
        const Point yj = y.segment(j, 1);
        v *= std::pow(r, -(I[i][j] + I[k][j])) *
             power_kernel_derivative(yj, yj, {I[i][j]}, {I[k][j]}, F[static_cast<std::size_t>(j)]);
      }
      jet.table(i, k) = v;
    }
  return jet;
}

// ---------------------------------------------------------- Reinhardt series

ReinhardtSeriesEngine::ReinhardtSeriesEngine(DomainSpec domain, double tail_tolerance, std::size_t max_terms)
    : domain_(std::move(domain)), tol_(tail_tolerance), max_terms_(max_terms) {
  const auto* e = std::get_if<EllipsoidDomain>(&domain_.kind());
  if (!e) fail(ErrorCode::Unsupported, "series engine needs an ellipsoid domain");
  if (e->exponents[0] != 1) fail(ErrorCode::Unsupported, "series engine needs exponent 1 in the first coordinate");
  for (int p : e->exponents) p_.push_back(p);
  if (!(tol_ > 0.0)) fail(ErrorCode::Argument, "series tolerance must be positive");
}

namespace {

void exact_degree(int m, int d, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == m - 1) {
    cur[static_cast<std::size_t>(pos)] = d;
    out.push_back(cur);
    return;
  }
  for (int k = d; k >= 0; --k) {
    cur[static_cast<std::size_t>(pos)] = k;
    exact_degree(m, d - k, pos + 1, cur, out);
  }
}

std::vector<MultiIndex> shell(int m, int d) {
  std::vector<MultiIndex> out;
  if (m == 0) {
    if (d == 0) out.emplace_back();
    return out;
  }
  MultiIndex cur(static_cast<std::size_t>(m), 0);
  exact_degree(m, d, 0, cur, out);
  return out;
}

}  // namespace

CMatrix ReinhardtSeriesEngine::sum(const Point& z, const Point& w, int order, Stats* stats) const {
  const int n = static_cast<int>(p_.size());
  const int m = n - 1;
  if (!domain_.contains(z) || !domain_.contains(w)) fail(ErrorCode::Domain, "series engine evaluated outside the domain");
  const bool diag_jet = order >= 0;
  const auto I = diag_jet ? indices_up_to(n, order) : std::vector<MultiIndex>{MultiIndex(static_cast<std::size_t>(n), 0)};
  const auto N = static_cast<Eigen::Index>(I.size());
  const int ord = std::max(order, 0);
  const cplx x = z[0] * std::conj(w[0]);
  const cplx log1mx = std::log(1.0 - x);
  const double log_pi_n = n * std::log(kPi);

  CMatrix total = CMatrix::Zero(N, N);
  double scale = 0.0, prev = -1.0;
  std::size_t terms = 0;
  double tail = 0.0;
  int d = 0;
  for (;; ++d) {
    CMatrix part = CMatrix::Zero(N, N);
    for (const auto& al : shell(m, d)) {
      double Q = 0.0, lc = -log_pi_n;
      for (int j = 0; j < m; ++j) {
        const double q = (al[static_cast<std::size_t>(j)] + 1.0) / p_[static_cast<std::size_t>(j + 1)];
        Q += q;
        lc += std::log(p_[static_cast<std::size_t>(j + 1)]) - std::lgamma(q);
      }
      const double s = 2.0 + Q;
      lc += std::lgamma(s);
      // z1 factor: derivatives of coef * (1 - x)^{-s}.
      std::vector<cplx> F(static_cast<std::size_t>(2 * ord + 1));
      for (int k = 0; k <= 2 * ord; ++k)
        F[static_cast<std::size_t>(k)] = std::exp(lc + std::log(rising_factorial(s, k)) - (s + k) * log1mx);
      for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index k = 0; k < N; ++k) {
          const auto& a = I[static_cast<std::size_t>(i)];
          const auto& b = I[static_cast<std::size_t>(k)];
          if (degree(a) + degree(b) > ord) continue;
          cplx v = 1.0;
          for (int j = 0; j < m && v != cplx(0.0); ++j) {
            const int aj = al[static_cast<std::size_t>(j)];
            const int da = a[static_cast<std::size_t>(j + 1)], db = b[static_cast<std::size_t>(j + 1)];
            if (da > aj || db > aj) {
              v = 0.0;
              break;
            }
            v *= falling_factorial(aj, da) * falling_factorial(aj, db) * ipow(z[j + 1], aj - da) *
                 ipow(std::conj(w[j + 1]), aj - db);
          }
          if (v == cplx(0.0)) continue;
          const Point z1 = z.segment(0, 1), w1 = w.segment(0, 1);
          part(i, k) += v * power_kernel_derivative(z1, w1, {a[0]}, {b[0]}, F);
        }
      ++terms;
    }
    total += part;
    const double norm = part.cwiseAbs().sum();
    scale += norm;
    if (m == 0) break;
    if (d > ord + 1) {
      if (norm == 0.0 && prev == 0.0) break;
      if (norm <= tol_ * scale) {
        const double r = prev > 0.0 ? norm / prev : 0.0;
        if (r < 1.0) {
          tail = norm * r / (1.0 - r);
          if (tail <= tol_ * scale) break;
        }
      }
    }
    prev = norm;
    if (terms > max_terms_) {
      const double r = prev > 0.0 ? std::min(norm / prev, 0.999999) : 0.0;
      fail(ErrorCode::Truncation, "series tail bound " + std::to_string(norm * r / (1.0 - r) / scale) +
                                      " exceeds tolerance after " + std::to_string(d) + " shells");
    }
  }
  if (stats) {
    stats->shells = static_cast<std::size_t>(d + 1);
    stats->tail = scale > 0.0 ? tail / scale : 0.0;
  }
  return total;
}

cplx ReinhardtSeriesEngine::kernel(const Point& z, const Point& w) const { return sum(z, w, -1, nullptr)(0, 0); }

KernelJet ReinhardtSeriesEngine::jet(const Point& z, int order) const {
  KernelJet jet = empty_jet(z, order, "series");
  jet.table = sum(z, z, order, nullptr);
  return jet;
}

ReinhardtSeriesEngine::Stats ReinhardtSeriesEngine::last_stats(const Point& z, int order) const {
  Stats s;
  sum(z, z, order, &s);
  return s;
}

json ReinhardtSeriesEngine::descriptor() const {
  json j = KernelEngine::descriptor();
  j["tail_tolerance"] = tol_;
  return j;
}

// ------------------------------------------------------------ Gram basis

GramBasisEngine::GramBasisEngine(DomainSpec domain, int degree, QuadratureScheme scheme, const GramCache* cache)
    : domain_(std::move(domain)),
      degree_(degree),
      scheme_(scheme),
      basis_(MonomialBasis::up_to_degree(domain_, degree)) {
  gram_ = gram_matrix_cached(domain_, basis_, scheme_, cache);
  const auto B = gram_.S.rows();
  if (scheme_.kind == QuadratureScheme::Kind::Exact) {
    coef_ = CMatrix::Zero(B, B);
    for (Eigen::Index i = 0; i < B; ++i) coef_(i, i) = 1.0 / std::sqrt(gram_.S(i, i).real());
    return;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram_.S);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double floor = 1e-12 * lam.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = B - 1; i >= 0; --i)
    if (lam[i] > floor) keep.push_back(i);
  if (keep.size() < static_cast<std::size_t>(B))
    warn("Gram matrix: discarded " + std::to_string(B - static_cast<Eigen::Index>(keep.size())) +
         " near-null directions");
  coef_.resize(B, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    coef_.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) / std::sqrt(lam[keep[k]]);
}

Eigen::VectorXcd GramBasisEngine::ortho_derivative(const Point& z, const MultiIndex& a) const {
  return coef_.transpose() * basis_.derivative(z, a);
}

Eigen::VectorXcd GramBasisEngine::ortho_values(const Point& z) const { return coef_.transpose() * basis_.values(z); }

cplx GramBasisEngine::kernel(const Point& z, const Point& w) const {
  return ortho_values(z).transpose() * ortho_values(w).conjugate();
}

KernelJet GramBasisEngine::jet(const Point& z, int order) const {
  KernelJet jet = empty_jet(z, order, "basis");
  const auto N = static_cast<Eigen::Index>(jet.indices.size());
  CMatrix E(static_cast<Eigen::Index>(rank()), N);
  for (Eigen::Index i = 0; i < N; ++i) E.col(i) = ortho_derivative(z, jet.indices[static_cast<std::size_t>(i)]);
  jet.table = E.transpose() * E.conjugate();
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      if (kfuks::degree(jet.indices[static_cast<std::size_t>(i)]) + kfuks::degree(jet.indices[static_cast<std::size_t>(j)]) > order)
        jet.table(i, j) = 0.0;
  return jet;
}

json GramBasisEngine::descriptor() const {
  json j = KernelEngine::descriptor();
  j["degree"] = degree_;
  j["quadrature"] = scheme_.to_json();
  j["rank"] = rank();
  j["gram_error_estimate"] = gram_.error_estimate;
  return j;
}

// --------------------------------------------------------------- pullback

PullbackEngine::PullbackEngine(EnginePtr target, Biholomorphism map) : target_(std::move(target)), map_(std::move(map)) {
  if (!target_) fail(ErrorCode::Argument, "pullback needs a target engine");
  if (target_->dim() != map_.source().dim()) fail(ErrorCode::Argument, "pullback dimensions differ");
}

cplx PullbackEngine::kernel(const Point& z, const Point& w) const {
  return map_.det_jacobian(z) * target_->kernel(map_(z), map_(w)) * std::conj(map_.det_jacobian(w));
}

double PullbackEngine::kernel_diag(const Point& z) const {
  return std::norm(map_.det_jacobian(z)) * target_->kernel_diag(map_(z));
}

KernelJet PullbackEngine::jet(const Point& z, int order) const {
  if (order > 0) fail(ErrorCode::Unsupported, "pullback engines expose metrics, not raw jets");
  KernelJet jet = empty_jet(z, 0, "pullback");
  jet.table(0, 0) = kernel_diag(z);
  return jet;
}

std::pair<double, CMatrix> PullbackEngine::metric(const Point& z) const {
  const auto [K2, G2] = target_->metric(map_(z));
  const CMatrix J = map_.jacobian(z);
  return {K2 * std::norm(J.determinant()), J.transpose() * G2 * J.conjugate()};
}

json PullbackEngine::descriptor() const {
  json j = KernelEngine::descriptor();
  j["map"] = map_.name();
  j["target"] = target_->descriptor();
  return j;
}

// ---------------------------------------------------------------- factory

EngineOptions EngineOptions::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Schema, "engine config must be an object");
  EngineOptions o;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "kind") o.kind = it->get<std::string>();
      else if (k == "degree") o.degree = it->get<int>();
      else if (k == "quadrature") o.scheme = QuadratureScheme::from_json(*it);
      else if (k == "series_tolerance") o.series_tolerance = it->get<double>();
      else fail(ErrorCode::Schema, "unknown key '" + k + "' in engine config");
    } catch (const json::exception& e) {
      fail(ErrorCode::Schema, "bad value for '" + k + "': " + e.what());
    }
  }
  if (o.kind != "auto" && o.kind != "closed" && o.kind != "series" && o.kind != "gram")
    fail(ErrorCode::Schema, "unknown engine kind '" + o.kind + "'");
  if (o.degree < 0) fail(ErrorCode::Schema, "engine degree must be nonnegative");
  return o;
}

json EngineOptions::to_json() const {
  return {{"kind", kind}, {"degree", degree}, {"quadrature", scheme.to_json()}, {"series_tolerance", series_tolerance}};
}

EnginePtr make_engine(const DomainSpec& domain, const EngineOptions& o) {
  const auto& k = domain.kind();
  if (o.kind == "closed") return std::make_shared<ClosedFormEngine>(domain);
  if (o.kind == "series") return std::make_shared<ReinhardtSeriesEngine>(domain, o.series_tolerance);
  if (domain.is_model()) {
    Biholomorphism phi = model_to_bounded(domain);
    return std::make_shared<PullbackEngine>(make_engine(phi.target(), o), std::move(phi));
  }
  if (o.kind == "gram") {
    QuadratureScheme s = o.scheme;
    if (s.kind == QuadratureScheme::Kind::Exact && !domain.reinhardt()) s = QuadratureScheme::qmc(1u << 17);
    return std::make_shared<GramBasisEngine>(domain, o.degree, s, o.cache);
  }
  if (std::holds_alternative<BallDomain>(k) || std::holds_alternative<PolydiscDomain>(k))
    return std::make_shared<ClosedFormEngine>(domain);
  if (const auto* e = std::get_if<EllipsoidDomain>(&k)) {
    if (e->exponents[0] == 1) return std::make_shared<ReinhardtSeriesEngine>(domain, o.series_tolerance);
    return std::make_shared<GramBasisEngine>(domain, o.degree, QuadratureScheme::exact(), o.cache);
  }
  if (const auto* in = std::get_if<IntersectionDomain>(&k)) {
    const auto* b = std::get_if<BallDomain>(&in->base->kind());
    if (b && b->n == 1) {
      Biholomorphism f = lens_to_disc(domain);
      return std::make_shared<PullbackEngine>(make_engine(f.target(), o), std::move(f));
    }
  }
  QuadratureScheme s = o.scheme;
  if (s.kind == QuadratureScheme::Kind::Exact) s = QuadratureScheme::qmc(1u << 17);
  return std::make_shared<GramBasisEngine>(domain, o.degree, s, o.cache);
}

// ------------------------------------------------------- minimum integrals

double min_integral_I0(const GramBasisEngine& engine, const Point& zeta) {
  if (!engine.domain().contains(zeta)) fail(ErrorCode::Domain, "minimum integral at a non-interior point");
  const Eigen::VectorXcd e = engine.ortho_values(zeta);
  if (e.norm() == 0.0) fail(ErrorCode::Infeasible, "every basis function vanishes at the point");
  CMatrix A = e.transpose();
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(A);
  Eigen::VectorXcd rhs(1);
  rhs[0] = 1.0;
  const Eigen::VectorXcd y = cod.solve(rhs);
  const double I0 = y.squaredNorm();
  const double K = engine.kernel_diag(zeta);
  if (std::abs(I0 * K - 1.0) > 1e-8) fail(ErrorCode::Numerical, "I0 * K deviates from 1");
  return I0;
}

double min_integral_I1(const GramBasisEngine& engine, const Point& zeta, const Point& u) {
  if (!engine.domain().contains(zeta)) fail(ErrorCode::Domain, "minimum integral at a non-interior point");
  if (u.norm() == 0.0) fail(ErrorCode::Argument, "direction must be nonzero");
  const int n = engine.dim();
  Eigen::VectorXcd du = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(engine.rank()));
  for (int j = 0; j < n; ++j) du += u[j] * engine.ortho_derivative(zeta, unit_index(n, j));
  CMatrix A(2, static_cast<Eigen::Index>(engine.rank()));
  A.row(0) = engine.ortho_values(zeta).transpose();
  A.row(1) = du.transpose();
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(A);
  cod.setThreshold(1e-12);
  if (cod.rank() < 2) fail(ErrorCode::Infeasible, "constraints f(z) = 0, u.f'(z) = 1 are not satisfiable in the span");
  Eigen::VectorXcd rhs(2);
  rhs << 0.0, 1.0;
  const Eigen::VectorXcd y = cod.solve(rhs);
  if ((A * y - rhs).norm() > 1e-8) fail(ErrorCode::Infeasible, "constraint residual too large");
  return y.squaredNorm();
}

}  // namespace kfuks
