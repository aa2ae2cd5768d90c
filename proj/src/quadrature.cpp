#include "kfuks/quadrature.hpp"

#include <boost/random/sobol.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace kfuks {

using nlohmann::json;

// ------------------------------------------------------------ monomial basis

MonomialBasis MonomialBasis::up_to_degree(const DomainSpec& domain, int degree) {
  if (degree < 0) fail(ErrorCode::Argument, "basis degree must be nonnegative");
  return MonomialBasis{indices_up_to(domain.dim(), degree), domain.basis_center(), domain.basis_scale()};
}

Eigen::VectorXcd MonomialBasis::values(const Point& z) const {
  return derivative(z, MultiIndex(static_cast<std::size_t>(dim()), 0));
}

Eigen::VectorXcd MonomialBasis::derivative(const Point& z, const MultiIndex& a) const {
  const int n = dim();
  if (z.size() != n) fail(ErrorCode::Argument, "basis evaluation point has wrong dimension");
  const Point y = (z - center) / scale;
  int maxdeg = 0;
  for (const auto& al : indices) maxdeg = std::max(maxdeg, degree(al));
  // Power table y_j^k.
  std::vector<std::vector<cplx>> pw(static_cast<std::size_t>(n), std::vector<cplx>(static_cast<std::size_t>(maxdeg + 1)));
  for (int j = 0; j < n; ++j) {
    pw[j][0] = 1.0;
    for (int k = 1; k <= maxdeg; ++k) pw[j][k] = pw[j][k - 1] * y[j];
  }
  const double chain = std::pow(scale, -degree(a));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& al = indices[i];
    cplx v = chain;
    for (int j = 0; j < n && v != cplx(0.0); ++j) {
      if (a[j] > al[j]) {
        v = 0.0;
        break;
      }
      v *= falling_factorial(al[j], a[j]) * pw[j][al[j] - a[j]];
    }
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

json MonomialBasis::to_json() const {
  return {{"indices", indices}, {"center", point_to_json(center)}, {"scale", scale}};
}

// ------------------------------------------------------------------ moments

double MomentTable::at(const MultiIndex& alpha) const {
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] == alpha) return values[i];
  fail(ErrorCode::Argument, "moment not in table");
}

std::string MomentTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "alpha,moment\n";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (std::size_t j = 0; j < indices[i].size(); ++j) os << (j ? " " : "") << indices[i][j];
    os << ',' << values[i] << '\n';
  }
  return os.str();
}

double log_reinhardt_moment(const DomainSpec& domain, const MultiIndex& alpha, double rho) {
  const int n = domain.dim();
  if (static_cast<int>(alpha.size()) != n) fail(ErrorCode::Argument, "moment index has wrong dimension");
  const double lrho = std::log(rho);
  const int deg = degree(alpha);
  const auto& k = domain.kind();
  if (const auto* b = std::get_if<BallDomain>(&k)) {
    const double lr = std::log(b->radius);
    double s = 2.0 * n * lr + 2.0 * deg * (lr - lrho) + n * std::log(kPi) - std::lgamma(deg + n + 1.0);
    for (int a : alpha) s += std::lgamma(a + 1.0);
    return s;
  }
  if (const auto* p = std::get_if<PolydiscDomain>(&k)) {
    double s = -2.0 * deg * lrho;
    for (int j = 0; j < n; ++j)
      s += std::log(kPi) + (2.0 * alpha[j] + 2.0) * std::log(p->radii[j]) - std::log(alpha[j] + 1.0);
    return s;
  }
  if (const auto* e = std::get_if<EllipsoidDomain>(&k)) {
    double s = n * std::log(kPi) - 2.0 * deg * lrho;
    double q = 0.0;
    for (int j = 0; j < n; ++j) {
      const double pj = e->exponents[j];
      s += std::lgamma((alpha[j] + 1.0) / pj) - std::log(pj);
      q += (alpha[j] + 1.0) / pj;
    }
    return s - std::lgamma(1.0 + q);
  }
  fail(ErrorCode::Unsupported, "closed-form moments need a Reinhardt domain (ball, polydisc, ellipsoid)");
}

double reinhardt_moment(const DomainSpec& domain, const MultiIndex& alpha, double rho) {
  return std::exp(log_reinhardt_moment(domain, alpha, rho));
}

MomentTable reinhardt_moments(const DomainSpec& domain, const std::vector<MultiIndex>& alphas) {
  MomentTable t;
  for (const auto& a : alphas) {
    t.indices.push_back(a);
    t.values.push_back(reinhardt_moment(domain, a));
  }
  return t;
}

// ---------------------------------------------------------------- schemes

json QuadratureScheme::to_json() const {
  const char* names[] = {"exact", "gauss", "qmc"};
  return {{"kind", names[static_cast<int>(kind)]}, {"nodes", nodes}, {"seed", seed}};
}

QuadratureScheme QuadratureScheme::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Schema, "quadrature must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "nodes" && it.key() != "seed")
      fail(ErrorCode::Schema, "unknown key '" + it.key() + "' in quadrature config");
  QuadratureScheme s;
  const std::string kind = j.value("kind", std::string("exact"));
  if (kind == "exact") s.kind = Kind::Exact;
  else if (kind == "gauss") s.kind = Kind::Gauss;
  else if (kind == "qmc") s.kind = Kind::Qmc;
  else fail(ErrorCode::Schema, "unknown quadrature kind '" + kind + "'");
  s.nodes = j.value("nodes", std::size_t{0});
  s.seed = j.value("seed", std::uint64_t{0});
  if (s.kind != Kind::Exact && s.nodes == 0) fail(ErrorCode::Schema, "quadrature nodes must be positive");
  return s;
}

void gauss_legendre(std::size_t order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order == 0) fail(ErrorCode::Argument, "Gauss order must be positive");
  const std::size_t n = order;
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

constexpr std::size_t kChunk = 2048;

// Node set over the bounding box: real coordinates (2n) and weights.
struct NodeSet {
  std::size_t count = 0;
  std::function<void(std::size_t, Eigen::VectorXd&, double&)> node;
};

NodeSet gauss_nodes(const Box& box, std::size_t q) {
  auto x = std::make_shared<std::vector<double>>();
  auto w = std::make_shared<std::vector<double>>();
  gauss_legendre(q, *x, *w);
  const int m = static_cast<int>(box.lo.size());
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= q;
  NodeSet ns;
  ns.count = total;
  ns.node = [x, w, q, m, box](std::size_t idx, Eigen::VectorXd& p, double& wt) {
    p.resize(m);
    wt = 1.0;
    for (int i = 0; i < m; ++i) {
      const std::size_t k = idx % q;
      idx /= q;
      const double half = 0.5 * (box.hi[i] - box.lo[i]);
      p[i] = box.lo[i] + half * ((*x)[k] + 1.0);
      wt *= half * (*w)[k];
    }
  };
  return ns;
}

NodeSet qmc_nodes(const Box& box, std::size_t count, std::uint64_t seed) {
  const int m = static_cast<int>(box.lo.size());
  auto pts = std::make_shared<std::vector<double>>(count * static_cast<std::size_t>(m));
  boost::random::sobol gen(static_cast<std::size_t>(m));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(static_cast<std::size_t>(m));
  for (auto& s : shift) s = u(rng);
  const double scale = std::ldexp(1.0, -64);
  for (std::size_t i = 0; i < count; ++i)
    for (int d = 0; d < m; ++d) {
      double v = static_cast<double>(gen()) * scale + shift[static_cast<std::size_t>(d)];
      if (v >= 1.0) v -= 1.0;
      (*pts)[i * m + d] = box.lo[d] + (box.hi[d] - box.lo[d]) * v;
    }
  const double wt = box.volume() / static_cast<double>(count);
  NodeSet ns;
  ns.count = count;
  ns.node = [pts, m, wt](std::size_t idx, Eigen::VectorXd& p, double& w) {
    p = Eigen::Map<const Eigen::VectorXd>(pts->data() + idx * m, m);
    w = wt;
  };
  return ns;
}

Point complex_point(const Eigen::VectorXd& x) {
  Point z(x.size() / 2);
  for (int j = 0; j < z.size(); ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
  return z;
}

// Sum over nodes of w * F(z) with F matrix-valued (rows x cols), chunked and
// reduced in chunk order.
template <class Eval>
CMatrix accumulate(const DomainSpec& domain, const NodeSet& ns, Eigen::Index rows, Eigen::Index cols, Eval eval) {
  const std::size_t chunks = (ns.count + kChunk - 1) / kChunk;
  std::vector<CMatrix> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    CMatrix acc = CMatrix::Zero(rows, cols);
    Eigen::VectorXd x;
    double w = 0.0;
    const std::size_t end = std::min(ns.count, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      ns.node(i, x, w);
      const Point z = complex_point(x);
      if (!domain.contains(z)) continue;
      eval(z, w, acc);
    }
    partial[c] = std::move(acc);
  });
  CMatrix total = CMatrix::Zero(rows, cols);
  for (const auto& p : partial) total += p;
  return total;
}

std::pair<NodeSet, NodeSet> two_levels(const DomainSpec& domain, const QuadratureScheme& scheme) {
  const auto box = domain.bounding_box();
  if (!box) fail(ErrorCode::Unsupported, "quadrature needs a bounded domain");
  if (scheme.kind == QuadratureScheme::Kind::Gauss)
    return {gauss_nodes(*box, scheme.nodes), gauss_nodes(*box, std::max<std::size_t>(1, scheme.nodes / 2))};
  if (scheme.kind == QuadratureScheme::Kind::Qmc) {
    if (scheme.nodes < 2) fail(ErrorCode::Argument, "QMC needs at least two points");
    return {qmc_nodes(*box, scheme.nodes, scheme.seed), qmc_nodes(*box, scheme.nodes / 2, scheme.seed)};
  }
  fail(ErrorCode::Argument, "exact scheme has no quadrature nodes");
}

}  // namespace

std::pair<cplx, double> integrate(const DomainSpec& domain, const std::function<cplx(const Point&)>& f,
                                  const QuadratureScheme& scheme) {
  const auto [fine, coarse] = two_levels(domain, scheme);
  auto eval = [&](const Point& z, double w, CMatrix& acc) { acc(0, 0) += w * f(z); };
  const cplx a = accumulate(domain, fine, 1, 1, eval)(0, 0);
  const cplx b = accumulate(domain, coarse, 1, 1, eval)(0, 0);
  return {a, std::abs(a - b)};
}

GramResult gram_matrix(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme) {
  const auto B = static_cast<Eigen::Index>(basis.size());
  GramResult res;
  if (B == 0) {
    res.S = CMatrix(0, 0);
    return res;
  }
  if (basis.dim() != domain.dim()) fail(ErrorCode::Argument, "basis and domain differ in dimension");

  if (scheme.kind == QuadratureScheme::Kind::Exact) {
    if (!domain.reinhardt()) fail(ErrorCode::Unsupported, "exact Gram matrix needs a Reinhardt domain");
    Point c = Point::Zero(domain.dim());
    if (const auto* b = std::get_if<BallDomain>(&domain.kind())) c = b->center;
    if ((basis.center - c).norm() > 1e-14)
      fail(ErrorCode::Unsupported, "exact Gram matrix needs the basis centred at the Reinhardt centre");
    res.S = CMatrix::Zero(B, B);
    for (Eigen::Index i = 0; i < B; ++i)
      res.S(i, i) = reinhardt_moment(domain, basis.indices[static_cast<std::size_t>(i)], basis.scale);
    return res;
  }

  const auto [fine, coarse] = two_levels(domain, scheme);
  auto eval = [&](const Point& z, double w, CMatrix& acc) {
    const Eigen::VectorXcd v = basis.values(z);
    for (Eigen::Index j = 0; j < B; ++j) {
      const cplx wj = w * v[j];
      for (Eigen::Index i = 0; i <= j; ++i) acc(i, j) += std::conj(v[i]) * wj;
    }
  };
  CMatrix S = accumulate(domain, fine, B, B, eval);
  CMatrix S2 = accumulate(domain, coarse, B, B, eval);
  for (Eigen::Index j = 0; j < B; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      S(j, i) = std::conj(S(i, j));
      S2(j, i) = std::conj(S2(i, j));
    }
  for (Eigen::Index i = 0; i < B; ++i) {
    S(i, i) = S(i, i).real();
    S2(i, i) = S2(i, i).real();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    fail(ErrorCode::IllConditioned,
         "Gram matrix is not positive definite; increase the node count or lower the basis degree");
  res.S = std::move(S);
  res.error_estimate = (res.S - S2).norm() / res.S.norm();
  return res;
}

}  // namespace kfuks
