#pragma once

#include <optional>
#include <string>

#include "kfuks/domains.hpp"

namespace kfuks {

/// phi_alpha(z) = ((z - center) / scale)^alpha.
struct MonomialBasis {
  std::vector<MultiIndex> indices;
  Point center;
  double scale = 1.0;

  static MonomialBasis up_to_degree(const DomainSpec& domain, int degree);
  std::size_t size() const { return indices.size(); }
  int dim() const { return static_cast<int>(center.size()); }

  Eigen::VectorXcd values(const Point& z) const;
  /// d^a phi_alpha(z) for every alpha.
  Eigen::VectorXcd derivative(const Point& z, const MultiIndex& a) const;
  nlohmann::json to_json() const;
};

/// S_alpha = int |phi_alpha|^2 dV for a Reinhardt domain and a basis centred on it.
struct MomentTable {
  std::vector<MultiIndex> indices;
  std::vector<double> values;

  double at(const MultiIndex& alpha) const;
  std::string to_csv() const;
};

MomentTable reinhardt_moments(const DomainSpec& domain, const std::vector<MultiIndex>& alphas);
/// Moment of ((z - c)/rho)^alpha, with c the Reinhardt centre of the domain.
double reinhardt_moment(const DomainSpec& domain, const MultiIndex& alpha, double rho = 1.0);
/// log of reinhardt_moment, for large degrees.
double log_reinhardt_moment(const DomainSpec& domain, const MultiIndex& alpha, double rho = 1.0);

struct QuadratureScheme {
  enum class Kind { Exact, Gauss, Qmc };
  Kind kind = Kind::Exact;
  std::size_t nodes = 0;   // QMC: total points; Gauss: nodes per real axis
  std::uint64_t seed = 0;

  static QuadratureScheme exact() { return {}; }
  static QuadratureScheme gauss(std::size_t per_axis) { return {Kind::Gauss, per_axis, 0}; }
  static QuadratureScheme qmc(std::size_t points, std::uint64_t seed = 0) { return {Kind::Qmc, points, seed}; }

  nlohmann::json to_json() const;
  static QuadratureScheme from_json(const nlohmann::json& j);
};

struct GramResult {
  CMatrix S;
  double error_estimate = 0.0;  // relative, from the two-level refinement
  bool cache_hit = false;
};

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(std::size_t order, std::vector<double>& nodes, std::vector<double>& weights);

/// Integral of f over the domain (indicator on its bounding box). Returns the
/// estimate and the two-level error estimate.
std::pair<cplx, double> integrate(const DomainSpec& domain, const std::function<cplx(const Point&)>& f,
                                  const QuadratureScheme& scheme);

/// S_ij = <phi_j, phi_i> = int phi_j conj(phi_i) dV, symmetrized.
GramResult gram_matrix(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme);

// ------------------------------------------------------------------ cache

/// Content-addressed Gram cache. Directory from KFUKS_CACHE_DIR, default ./.kfuks_cache.
class GramCache {
 public:
  explicit GramCache(std::string dir = default_dir());
  static std::string default_dir();

  static std::string key(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme);
  std::optional<GramResult> get(const std::string& key) const;
  void put(const std::string& key, const GramResult& g) const;
  std::string path(const std::string& key) const;

 private:
  std::string dir_;
};

/// gram_matrix through the cache (domains without a JSON form bypass it).
GramResult gram_matrix_cached(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme,
                              const GramCache* cache);

}  // namespace kfuks
