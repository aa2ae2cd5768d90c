#include "kfuks/metrics.hpp"

#include <cmath>
#include <map>

namespace kfuks {

using nlohmann::json;

namespace {

json matrix_json(const CMatrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real(), A(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

CMatrix hermitize(const CMatrix& A) { return 0.5 * (A + A.adjoint()); }

}  // namespace

double hermitian_form(const CMatrix& A, const Point& u) {
  // u^t A conj(u)
  return (u.transpose() * A * u.conjugate())(0, 0).real();
}

bool positive_definite(const CMatrix& A) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(A), Eigen::EigenvaluesOnly);
  const double tr = A.trace().real();
  return tr > 0.0 && es.eigenvalues().minCoeff() > 1e-8 * tr;
}

void require_positive_definite(const CMatrix& A, const char* what) {
  if (!A.allFinite()) fail(ErrorCode::Numerical, std::string(what) + " has non-finite entries");
  if (!positive_definite(A)) fail(ErrorCode::Numerical, std::string(what) + " is not positive definite");
}

double MetricReport::B(const Point& u) const { return std::sqrt(hermitian_form(G, u)); }
double MetricReport::Btilde(const Point& u) const { return std::sqrt(hermitian_form(Gtilde, u)); }
double MetricReport::ricci_curvature(const Point& u) const { return hermitian_form(Ric, u) / hermitian_form(G, u); }

json MetricReport::to_json() const {
  return {{"z", point_to_json(z)},       {"K", K},           {"G", matrix_json(G)},
          {"Ric", matrix_json(Ric)},     {"Gtilde", matrix_json(Gtilde)},
          {"J", J},                      {"gtilde", gtilde_det},
          {"T", T},                      {"diagnostics", diagnostics}};
}

CMatrix adjugate(const CMatrix& A) {
  const auto n = A.rows();
  if (A.cols() != n) fail(ErrorCode::Argument, "adjugate needs a square matrix");
  if (n == 1) return CMatrix::Ones(1, 1);
  CMatrix adj(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      CMatrix minor(n - 1, n - 1);
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor(rr, cc++) = A(r, c);
        }
        ++rr;
      }
      adj(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
    }
  return adj;
}

// ------------------------------------------------------------------ Ricci

CMatrix ricci_fd(const KernelEngine& engine, const Point& z, const RicciOptions& opt, json* diag) {
  const int n = engine.dim();
  const DomainSpec& dom = engine.domain();
  double h = opt.h;
  if (h <= 0.0) h = 1e-3 * boundary_distance(dom, z);
  auto logdet = [&](const Point& p) {
    if (!dom.contains(p)) fail(ErrorCode::StepTooLarge, "Ricci stencil leaves the domain; reduce the step");
    const CMatrix G = hermitize(engine.metric(p).second);
    const double d = G.determinant().real();
    if (!(d > 0.0)) fail(ErrorCode::Numerical, "det G is not positive on the Ricci stencil");
    return std::log(d);
  };
  auto shift = [&](int p, double s) {
    Point dz = Point::Zero(n);
    dz[p / 2] = (p % 2 == 0) ? cplx(s, 0.0) : cplx(0.0, s);
    return dz;
  };
  const int m = 2 * n;
  const double L0 = logdet(z);
  auto hessian = [&](double step) {
    Eigen::MatrixXd H(m, m);
    for (int p = 0; p < m; ++p) {
      H(p, p) = (logdet(z + shift(p, step)) - 2.0 * L0 + logdet(z - shift(p, step))) / (step * step);
      for (int q = p + 1; q < m; ++q) {
        const Point a = shift(p, step), b = shift(q, step);
        H(p, q) = H(q, p) =
            (logdet(z + a + b) - logdet(z + a - b) - logdet(z - a + b) + logdet(z - a - b)) / (4.0 * step * step);
      }
    }
    return H;
  };
  Eigen::MatrixXd H = hessian(h);
  if (opt.richardson) {
    const Eigen::MatrixXd H2 = hessian(0.5 * h);
    if (diag) (*diag)["ricci_richardson_delta"] = (H2 - H).norm() / std::max(1.0, H2.norm());
    H = (4.0 * H2 - H) / 3.0;
  }
  if (diag) {
    (*diag)["ricci_method"] = "finite-difference";
    (*diag)["ricci_step"] = h;
  }
  CMatrix Ric(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int xa = 2 * a, ya = 2 * a + 1, xb = 2 * b, yb = 2 * b + 1;
      Ric(a, b) = -0.25 * cplx(H(xa, xb) + H(ya, yb), H(xa, yb) - H(ya, xb));
    }
  return Ric;
}

namespace {

// Truncated power series in 2n formal variables (eps_1..eps_n, epsbar_1..epsbar_n).
class Series {
 public:
  static constexpr int kDeg = 4;

  explicit Series(int vars) : vars_(vars) {
    const auto idx = indices_up_to(vars, kDeg);
    table_ = std::make_shared<std::vector<MultiIndex>>(idx);
    auto lookup = std::make_shared<std::map<MultiIndex, std::size_t>>();
    for (std::size_t i = 0; i < idx.size(); ++i) (*lookup)[idx[i]] = i;
    lookup_ = lookup;
    c_.assign(idx.size(), 0.0);
  }

  Series zero() const {
    Series s = *this;
    std::fill(s.c_.begin(), s.c_.end(), cplx(0.0));
    return s;
  }
  cplx& at(const MultiIndex& e) { return c_[lookup_->at(e)]; }
  cplx at(const MultiIndex& e) const { return c_[lookup_->at(e)]; }
  cplx constant() const { return c_[0]; }

  Series operator*(const Series& o) const {
    Series r = zero();
    const auto& t = *table_;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (c_[i] == cplx(0.0)) continue;
      const int di = degree(t[i]);
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (o.c_[j] == cplx(0.0) || di + degree(t[j]) > kDeg) continue;
        MultiIndex e(t[i]);
        for (std::size_t k = 0; k < e.size(); ++k) e[k] += t[j][k];
        r.at(e) += c_[i] * o.c_[j];
      }
    }
    return r;
  }
  Series operator+(const Series& o) const {
    Series r = *this;
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
    return r;
  }
  Series operator*(cplx s) const {
    Series r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }

  Series derivative(int var) const {
    Series r = zero();
    const auto& t = *table_;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i][static_cast<std::size_t>(var)] == 0) continue;
      MultiIndex e(t[i]);
      e[static_cast<std::size_t>(var)] -= 1;
      r.at(e) += c_[i] * static_cast<double>(t[i][static_cast<std::size_t>(var)]);
    }
    return r;
  }

  Series log() const {
    const cplx c0 = constant();
    if (c0 == cplx(0.0)) fail(ErrorCode::Numerical, "log of a series with zero constant term");
    Series u = *this * (1.0 / c0);
    u.c_[0] -= 1.0;
    Series r = zero();
    r.c_[0] = std::log(c0);
    Series pw = u;
    for (int k = 1; k <= kDeg; ++k) {
      r = r + pw * cplx((k % 2 ? 1.0 : -1.0) / k);
      pw = pw * u;
    }
    return r;
  }

 private:
  int vars_;
  std::shared_ptr<std::vector<MultiIndex>> table_;
  std::shared_ptr<const std::map<MultiIndex, std::size_t>> lookup_;
  std::vector<cplx> c_;
};

Series series_det(const std::vector<std::vector<Series>>& A) {
  const std::size_t n = A.size();
  if (n == 1) return A[0][0];
  Series total = A[0][0].zero();
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Series>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Series> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(A[r][c]);
      minor.push_back(row);
    }
    total = total + A[0][j] * series_det(minor) * cplx(j % 2 ? -1.0 : 1.0);
  }
  return total;
}

}  // namespace

CMatrix ricci_analytic(const KernelEngine& engine, const Point& z) {
  const int n = engine.dim();
  const KernelJet jet = engine.jet(z, 4);
  Series K(2 * n);
  for (std::size_t i = 0; i < jet.indices.size(); ++i)
    for (std::size_t j = 0; j < jet.indices.size(); ++j) {
      const auto& a = jet.indices[i];
      const auto& b = jet.indices[j];
      if (degree(a) + degree(b) > 4) continue;
      MultiIndex e(a);
      e.insert(e.end(), b.begin(), b.end());
      K.at(e) = jet.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) /
                (factorial_product(a) * factorial_product(b));
    }
  const Series L = K.log();
  std::vector<std::vector<Series>> G(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) G[static_cast<std::size_t>(a)].push_back(L.derivative(a).derivative(n + b));
  const Series LD = series_det(G).log();
  CMatrix Ric(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      MultiIndex e(static_cast<std::size_t>(2 * n), 0);
      e[static_cast<std::size_t>(a)] += 1;
      e[static_cast<std::size_t>(n + b)] += 1;
      Ric(a, b) = -LD.at(e);
    }
  return Ric;
}

// ------------------------------------------------------- invariant stack

MetricReport kobayashi_fuks(const KernelEngine& engine, const Point& z, const RicciOptions& opt) {
  if (z.size() != engine.dim()) fail(ErrorCode::Argument, "point dimension does not match the engine");
  if (!engine.domain().contains(z)) fail(ErrorCode::Domain, "metric requested at a non-interior point");
  if (const auto* pb = dynamic_cast<const PullbackEngine*>(&engine)) {
    const Point w = pb->map()(z);
    MetricReport target = kobayashi_fuks(pb->target(), w, opt);
    MetricReport r = pullback_report(target, pb->map(), z);
    r.diagnostics["pullback"] = pb->map().name();
    return r;
  }
  const int n = engine.dim();
  MetricReport r;
  r.z = z;
  auto [K, G] = engine.metric(z);
  r.diagnostics["G_asymmetry"] = (G - G.adjoint()).norm();
  r.K = K;
  r.G = hermitize(G);
  if (!(K > 0.0)) fail(ErrorCode::Numerical, "kernel is not positive");
  require_positive_definite(r.G, "Bergman metric G");
  r.Ric = hermitize(ricci_fd(engine, z, opt, &r.diagnostics));
  r.Gtilde = static_cast<double>(n + 1) * r.G - r.Ric;
  require_positive_definite(r.Gtilde, "Kobayashi-Fuks matrix");
  const double detG = r.G.determinant().real();
  r.J = detG / K;
  r.gtilde_det = r.Gtilde.determinant().real();
  r.T = std::pow(K, 2 * n) * r.J * r.gtilde_det;
  r.diagnostics["engine"] = engine.kind();
  return r;
}

MetricReport pullback_report(const MetricReport& t, const Biholomorphism& F, const Point& z) {
  const CMatrix Jac = F.jacobian(z);
  const cplx det = Jac.determinant();
  if (!(std::abs(det) > 0.0)) fail(ErrorCode::Numerical, "singular Jacobian in pullback");
  const double d2 = std::norm(det);
  const int n = static_cast<int>(z.size());
  auto pull = [&](const CMatrix& A) -> CMatrix { return hermitize(Jac.transpose() * A * Jac.conjugate()); };
  MetricReport r;
  r.z = z;
  r.K = t.K * d2;
  r.G = pull(t.G);
  r.Ric = pull(t.Ric);
  r.Gtilde = pull(t.Gtilde);
  r.J = t.J;
  r.gtilde_det = t.gtilde_det * d2;
  r.T = t.T * std::pow(d2, 2 * n + 1);
  r.diagnostics = t.diagnostics;
  return r;
}

double pullback_M(double M_target, const Biholomorphism& F, const Point& z) {
  const int n = static_cast<int>(z.size());
  return M_target * std::pow(std::norm(F.det_jacobian(z)), n + 1);
}

// ------------------------------------------------------- extremal problems

namespace {

ExtremalResult extremal(const GramBasisEngine& engine, const Point& z, const Point& u, bool adjugate_form) {
  if (!engine.domain().contains(z)) fail(ErrorCode::Domain, "extremal problem at a non-interior point");
  const int n = engine.dim();
  if (u.size() != n) fail(ErrorCode::Argument, "direction has wrong dimension");
  const auto r = static_cast<Eigen::Index>(engine.rank());
  CMatrix C(n + 1, r);
  C.row(0) = engine.ortho_values(z).transpose();
  for (int j = 0; j < n; ++j) C.row(j + 1) = engine.ortho_derivative(z, unit_index(n, j)).transpose();
  Eigen::JacobiSVD<CMatrix> svd(C, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-12 * sv[0]) ++rank;
  if (r - rank <= 0) fail(ErrorCode::Infeasible, "no nonzero function with vanishing 1-jet in the span");
  const CMatrix Z = svd.matrixV().rightCols(r - rank);

  CMatrix H = CMatrix::Zero(n, r);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (u[i] == cplx(0.0)) continue;
      MultiIndex e = unit_index(n, k);
      e[static_cast<std::size_t>(i)] += 1;
      H.row(k) += u[i] * engine.ortho_derivative(z, e).transpose();
    }
  const auto [K, G] = engine.metric(z);
  const CMatrix Gh = hermitize(G);
  CMatrix W;
  if (adjugate_form)
    W = std::pow(K, n - 1) * adjugate(Gh);
  else
    W = Gh.inverse();
  const CMatrix A = hermitize(Z.adjoint() * H.adjoint() * W * H * Z);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
  const Eigen::Index top = A.rows() - 1;
  ExtremalResult res;
  res.value = std::max(0.0, A.trace().real());
  res.rayleigh_max = std::max(0.0, es.eigenvalues()[top]);
  const Eigen::VectorXcd y = Z * es.eigenvectors().col(top);
  res.coefficients = engine.orthonormal_coefficients() * y;
  res.constraint_residual = (C * y).norm();
  res.norm = y.norm();
  if (res.constraint_residual > 1e-8 * std::max(1.0, C.norm()))
    fail(ErrorCode::Numerical, "extremal maximizer violates the constraints");
  return res;
}

}  // namespace

ExtremalResult maximal_I(const GramBasisEngine& engine, const Point& z, const Point& u) {
  return extremal(engine, z, u, false);
}

ExtremalResult maximal_M(const GramBasisEngine& engine, const Point& z, const Point& u) {
  return extremal(engine, z, u, true);
}

double kf_via_extremal(const GramBasisEngine& engine, const Point& z, const Point& u) {
  return std::sqrt(maximal_I(engine, z, u).value / engine.kernel_diag(z));
}

}  // namespace kfuks
