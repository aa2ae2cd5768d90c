#pragma once

#include <functional>
#include <string>

#include "kfuks/domains.hpp"

namespace kfuks {

struct BiholomorphismCheck {
  bool pass = false;
  std::size_t samples = 0;
  double max_roundtrip = 0.0;
  double max_chain = 0.0;       // |det (F^-1)'(F z) det F'(z) - 1|
  double max_target_violation = 0.0;
  double min_abs_det = 0.0;
};

/// F: source -> target with its complex Jacobian (rows: outputs, cols: inputs).
class Biholomorphism {
 public:
  using Map = std::function<Point(const Point&)>;
  using Jacobian = std::function<CMatrix(const Point&)>;

  Biholomorphism(std::string name, DomainSpec source, DomainSpec target, Map forward, Map inverse,
                 Jacobian jacobian, Jacobian inverse_jacobian);

  static Biholomorphism identity(const DomainSpec& domain);
  /// w = (z - shift) / scale, componentwise.
  static Biholomorphism affine(const DomainSpec& source, const DomainSpec& target, Point shift, Point scale);

  Point operator()(const Point& z) const { return forward_(z); }
  Point inverse(const Point& w) const { return inverse_(w); }
  CMatrix jacobian(const Point& z) const { return jacobian_(z); }
  CMatrix inverse_jacobian(const Point& w) const { return inverse_jacobian_(w); }
  cplx det_jacobian(const Point& z) const;

  const DomainSpec& source() const { return source_; }
  const DomainSpec& target() const { return target_; }
  const std::string& name() const { return name_; }

  /// Round trip, chain rule and target membership on `count` source samples.
  BiholomorphismCheck check(std::size_t count = 1000, std::uint64_t seed = 7) const;
  /// check() that throws a validation error on failure.
  void validate(std::size_t count = 1000, std::uint64_t seed = 7) const;

 private:
  std::string name_;
  DomainSpec source_;
  DomainSpec target_;
  Map forward_;
  Map inverse_;
  Jacobian jacobian_;
  Jacobian inverse_jacobian_;
};

/// G o F.
Biholomorphism compose(const Biholomorphism& f, const Biholomorphism& g);

/// Interior samples of bounded domains and of (bumped) models.
std::vector<Point> sample_source(const DomainSpec& domain, std::size_t count, std::uint64_t seed);

/// Cayley-type map of a model lead Re z1 + kappa |z'|^2 < 0 onto the unit ball,
/// or of lead Re z1 + kappa |z2|^{2m} < 0 onto the egg |w1|^2 + |w2|^{2m} < 1.
/// Bumped models whose P - delta a has one of these forms are accepted too.
Biholomorphism model_to_bounded(const DomainSpec& model);

/// Conformal map of disc-with-disc intersections onto the unit disc.
Biholomorphism lens_to_disc(const DomainSpec& intersection);

/// (z - 1)^q with arg(z - 1) taken in (0, 2 pi).
cplx cut_power(cplx z, double q);

}  // namespace kfuks
