#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kfuks/common.hpp"

namespace kfuks {

// ------------------------------------------------------------------ weights

/// Multitype weights (m_1, ..., m_n): coordinate z_j carries weight 1/m_j.
class Weights {
 public:
  Weights() = default;
  explicit Weights(std::vector<Rational> m);
  static Weights from_doubles(const std::vector<double>& m);

  int size() const { return static_cast<int>(m_.size()); }
  const Rational& operator[](int j) const { return m_[static_cast<std::size_t>(j)]; }
  const std::vector<Rational>& values() const { return m_; }

  /// Weights of z' = (z_2, ..., z_n).
  Weights tail() const;

  /// Sum_j 2/m_j, the exponent of d(z) in the volume-type limits.
  double volume_exponent() const;

  friend bool operator==(const Weights& a, const Weights& b) { return a.m_ == b.m_; }

 private:
  std::vector<Rational> m_;
};

/// pi_t(z) = (t^{1/m_1} z_1, ..., t^{1/m_n} z_n).
Point dilate(double t, const Point& z, const Weights& m);

// ------------------------------------------------------- weighted polynomial

struct PolyTerm {
  MultiIndex a;  // powers of z'
  MultiIndex b;  // powers of conj(z')
  cplx c;
};

/// Real-valued polynomial sum c_ab z'^a conj(z')^b in the variables z'.
class WeightedPolynomial {
 public:
  WeightedPolynomial() = default;
  /// Validates reality (c_ab = conj(c_ba)) and the absence of pure terms.
  WeightedPolynomial(std::vector<PolyTerm> terms, Weights weights);

  /// kappa * |z_j|^{2k} in the given slot of an (nvars)-variable polynomial.
  static WeightedPolynomial modulus_power(int nvars, int slot, int k, double kappa, Weights weights);
  /// kappa * |z'|^2 with the supplied weights (all 2 for the Siegel model).
  static WeightedPolynomial squared_norm(int nvars, double kappa);

  int nvars() const { return weights_.size(); }
  const std::vector<PolyTerm>& terms() const { return terms_; }
  const Weights& weights() const { return weights_; }

  double operator()(const Point& zp) const;
  /// d/dx_j, d/dy_j of the real polynomial, as a 2*nvars real gradient.
  Eigen::VectorXd real_gradient(const Point& zp) const;
  /// Levi matrix (d^2 P / dz_j d conj z_k).
  CMatrix complex_hessian(const Point& zp) const;

  /// Weighted degree sum_j (a_j + b_j)/m_j of each term, exactly.
  std::vector<Rational> term_degrees() const;

  /// P - delta * a, with weights checked equal.
  WeightedPolynomial minus(const WeightedPolynomial& a, double delta) const;

  /// If P = kappa * |z'|^2 returns kappa.
  std::optional<double> as_squared_norm() const;
  /// If nvars == 1 and P = kappa |z_2|^{2k} returns (kappa, k).
  std::optional<std::pair<double, int>> as_modulus_power() const;

  nlohmann::json to_json() const;

 private:
  std::vector<PolyTerm> terms_;
  Weights weights_;
};

struct HomogeneityReport {
  bool homogeneous = false;
  bool exact_degrees_ok = false;
  double max_residual = 0.0;
};

/// P(pi_t z') = t P(z'): exact rational degree check plus a sampled residual
/// over a fixed grid of (t, z').
HomogeneityReport is_weighted_homogeneous(const WeightedPolynomial& p);

struct LeviReport {
  bool pass = false;
  double min_eigenvalue = 0.0;
  Point argmin;
  std::size_t points_checked = 0;
};

/// Log-spaced radial shells 10^-2 .. 10 times angular samples, avoiding 0.
std::vector<Point> default_psh_grid(int nvars, int shells = 13, int angles = 8);
/// Shells with radii spread between r_min and r_max (inclusive).
std::vector<Point> radial_grid(int nvars, double r_min, double r_max, int shells, int angles);

LeviReport levi_psd_check(const WeightedPolynomial& p, const std::vector<Point>& grid, bool strict);

struct BumpingReport {
  bool pass = false;
  bool positive = false;          // condition (i) on the punctured grid
  bool homogeneous = false;       // condition (ii)
  std::vector<double> deltas;
  std::vector<LeviReport> levi;   // condition (iii) per delta
  double min_a = 0.0;
};

BumpingReport validate_bumping(const WeightedPolynomial& p, const WeightedPolynomial& a,
                               const std::vector<double>& delta_grid,
                               const std::vector<Point>& grid = {});

// ------------------------------------------------------------------ domains

struct Box {
  Eigen::VectorXd lo;  // 2n real coordinates: x_1, y_1, x_2, y_2, ...
  Eigen::VectorXd hi;
  double volume() const;
};

struct BallDomain {
  int n = 1;
  double radius = 1.0;
  Point center;
};

struct PolydiscDomain {
  std::vector<double> radii;
};

/// sum_j |z_j|^{2 p_j} < 1. The egg E_m is (p_1, p_2) = (1, m).
struct EllipsoidDomain {
  std::vector<int> exponents;
};

/// lead * Re z_1 + P(z') < 0.
struct ModelDomain {
  double lead = 1.0;
  WeightedPolynomial p;
};

/// lead * Re z_1 + P(z') - delta * a(z') < 0.
struct BumpedModelDomain {
  double lead = 1.0;
  WeightedPolynomial p;
  WeightedPolynomial a;
  double delta = 0.0;
};

struct DefiningDomain {
  int n = 1;
  std::function<double(const Point&)> r;
  std::function<Eigen::VectorXd(const Point&)> gradient;  // optional, real 2n-gradient
  Box box;
  std::string label = "defining";
};

class DomainSpec;

struct IntersectionDomain {
  std::shared_ptr<const DomainSpec> base;
  BallDomain neighborhood;
};

class DomainSpec {
 public:
  using Kind = std::variant<BallDomain, PolydiscDomain, EllipsoidDomain, ModelDomain, BumpedModelDomain,
                            DefiningDomain, IntersectionDomain>;

  explicit DomainSpec(Kind kind);

  static DomainSpec ball(int n, double radius = 1.0, Point center = {});
  static DomainSpec disc(double radius = 1.0, cplx center = 0.0);
  static DomainSpec polydisc(std::vector<double> radii);
  static DomainSpec egg(int m);
  static DomainSpec ellipsoid(std::vector<int> exponents);
  static DomainSpec model(double lead, WeightedPolynomial p);
  static DomainSpec bumped_model(double lead, WeightedPolynomial p, WeightedPolynomial a, double delta);
  static DomainSpec siegel(int n, double lead = 2.0);
  static DomainSpec egg_model(int m, double lead = 1.0, double kappa = 1.0);
  static DomainSpec intersection(const DomainSpec& base, const BallDomain& neighborhood);
  static DomainSpec defining(DefiningDomain d);

  static DomainSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const Kind& kind() const { return kind_; }
  int dim() const;
  bool bounded() const;
  bool is_model() const;
  std::string name() const;

  /// Real-valued defining function, negative inside.
  double defining(const Point& z) const;
  /// Real gradient (2n) of the defining function.
  Eigen::VectorXd defining_gradient(const Point& z) const;
  bool contains(const Point& z) const { return defining(z) < 0.0; }

  std::optional<Box> bounding_box() const;
  /// Characteristic center and scale used to normalize monomial bases.
  Point basis_center() const;
  double basis_scale() const;

  /// Nonzero for Reinhardt kinds (ball centered anywhere, polydisc, ellipsoid).
  bool reinhardt() const;

 private:
  Kind kind_;
};

/// Euclidean distance from an interior point to the boundary.
double boundary_distance(const DomainSpec& domain, const Point& z);

/// Samples interior points uniformly from the bounding box (deterministic).
std::vector<Point> sample_interior(const DomainSpec& domain, std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------- cones

/// Non-tangential approach region: vertex on the boundary, inner unit normal,
/// half-aperture angle.
struct Cone {
  Point vertex;
  Point normal;
  double aperture = kPi / 6.0;
};

Cone make_cone(Point vertex, Point normal, double aperture = kPi / 6.0);
bool cone_contains(const Cone& cone, const Point& z);
/// z_k = vertex + t_k * normal. Retries once with halved t if a sample is not
/// interior.
std::vector<Point> cone_samples(const Cone& cone, const DomainSpec& domain, std::vector<double> t);
std::vector<double> geometric_schedule(int k_min, int k_max, double ratio = 0.5);

// ---------------------------------------------------------------- json helpers

Point point_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const Point& z);

}  // namespace kfuks
