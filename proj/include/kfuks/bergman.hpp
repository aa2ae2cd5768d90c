#pragma once

#include <memory>
#include <string>

#include "kfuks/biholomorphism.hpp"
#include "kfuks/quadrature.hpp"

namespace kfuks {

/// Mixed derivatives d^a_z dbar^b_z K(z, z) for |a| + |b| <= order.
struct KernelJet {
  Point z;
  int order = 0;
  std::vector<MultiIndex> indices;  // all |a| <= order
  CMatrix table;                    // table(i, j) = d^{a_i} dbar^{a_j} K; unused slots are zero
  std::string provenance;

  cplx operator()(const MultiIndex& a, const MultiIndex& b) const;
  double K() const { return table(0, 0).real(); }
  std::string to_csv() const;
};

class KernelEngine {
 public:
  virtual ~KernelEngine() = default;

  virtual std::string kind() const = 0;
  virtual const DomainSpec& domain() const = 0;
  int dim() const { return domain().dim(); }

  virtual cplx kernel(const Point& z, const Point& w) const = 0;
  virtual double kernel_diag(const Point& z) const { return kernel(z, z).real(); }
  virtual KernelJet jet(const Point& z, int order) const = 0;
  /// K(z) and the Bergman metric matrix G(z).
  virtual std::pair<double, CMatrix> metric(const Point& z) const;

  virtual nlohmann::json descriptor() const;
};

using EnginePtr = std::shared_ptr<const KernelEngine>;

/// Balls (any centre and radius) and polydiscs.
class ClosedFormEngine : public KernelEngine {
 public:
  explicit ClosedFormEngine(DomainSpec domain);
  std::string kind() const override { return "closed"; }
  const DomainSpec& domain() const override { return domain_; }
  cplx kernel(const Point& z, const Point& w) const override;
  KernelJet jet(const Point& z, int order) const override;

 private:
  DomainSpec domain_;
};

/// Ellipsoids sum |z_j|^{2p_j} < 1 with p_1 = 1: the z_1 direction is summed in
/// closed form, the remaining indices by degree shells.
class ReinhardtSeriesEngine : public KernelEngine {
 public:
  ReinhardtSeriesEngine(DomainSpec domain, double tail_tolerance = 1e-13, std::size_t max_terms = 4000000);
  std::string kind() const override { return "series"; }
  const DomainSpec& domain() const override { return domain_; }
  cplx kernel(const Point& z, const Point& w) const override;
  KernelJet jet(const Point& z, int order) const override;
  nlohmann::json descriptor() const override;

  /// Tail estimate of the last evaluation through jet() (relative).
  struct Stats {
    std::size_t shells = 0;
    double tail = 0.0;
  };
  Stats last_stats(const Point& z, int order) const;

 private:
  // Sums the jet table (or K(z, w) when order < 0) shell by shell.
  CMatrix sum(const Point& z, const Point& w, int order, Stats* stats) const;

  DomainSpec domain_;
  std::vector<double> p_;
  double tol_;
  std::size_t max_terms_;
};

/// Orthonormalized monomial basis from a Gram matrix.
class GramBasisEngine : public KernelEngine {
 public:
  GramBasisEngine(DomainSpec domain, int degree, QuadratureScheme scheme = QuadratureScheme::exact(),
                  const GramCache* cache = nullptr);
  std::string kind() const override { return "gram"; }
  const DomainSpec& domain() const override { return domain_; }
  cplx kernel(const Point& z, const Point& w) const override;
  KernelJet jet(const Point& z, int order) const override;
  nlohmann::json descriptor() const override;

  /// d^a e_k(z) for the orthonormal functions e_k.
  Eigen::VectorXcd ortho_derivative(const Point& z, const MultiIndex& a) const;
  Eigen::VectorXcd ortho_values(const Point& z) const;
  std::size_t rank() const { return static_cast<std::size_t>(coef_.cols()); }
  /// Columns: coefficients of e_k in the monomial basis.
  const CMatrix& orthonormal_coefficients() const { return coef_; }
  const MonomialBasis& basis() const { return basis_; }
  const GramResult& gram() const { return gram_; }
  int degree() const { return degree_; }

 private:
  DomainSpec domain_;
  int degree_;
  QuadratureScheme scheme_;
  MonomialBasis basis_;
  GramResult gram_;
  CMatrix coef_;  // columns: coefficients of e_k in the monomial basis
};

/// K_1(z, w) = det F'(z) K_2(F z, F w) conj(det F'(w)).
class PullbackEngine : public KernelEngine {
 public:
  PullbackEngine(EnginePtr target, Biholomorphism map);
  std::string kind() const override { return "pullback"; }
  const DomainSpec& domain() const override { return map_.source(); }
  cplx kernel(const Point& z, const Point& w) const override;
  double kernel_diag(const Point& z) const override;
  KernelJet jet(const Point& z, int order) const override;
  std::pair<double, CMatrix> metric(const Point& z) const override;
  nlohmann::json descriptor() const override;

  const KernelEngine& target() const { return *target_; }
  EnginePtr target_ptr() const { return target_; }
  const Biholomorphism& map() const { return map_; }

 private:
  EnginePtr target_;
  Biholomorphism map_;
};

struct EngineOptions {
  std::string kind = "auto";  // auto | closed | series | gram
  int degree = 12;
  QuadratureScheme scheme = QuadratureScheme::exact();
  double series_tolerance = 1e-13;
  const GramCache* cache = nullptr;

  static EngineOptions from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

EnginePtr make_engine(const DomainSpec& domain, const EngineOptions& options = {});

/// I^0(zeta) = min ||f||^2 subject to f(zeta) = 1 over the span.
double min_integral_I0(const GramBasisEngine& engine, const Point& zeta);
/// I^1(zeta, u) = min ||f||^2 subject to f(zeta) = 0, sum u_j df/dz_j(zeta) = 1.
double min_integral_I1(const GramBasisEngine& engine, const Point& zeta, const Point& u);

/// d^a_z dbar^b_w F(<z, w>) at w = z for F^{(p)} supplied as a table.
cplx power_kernel_derivative(const Point& z, const Point& w, const MultiIndex& a, const MultiIndex& b,
                             const std::vector<cplx>& F_derivs);

}  // namespace kfuks
