#pragma once

#include <optional>

#include "kfuks/metrics.hpp"

namespace kfuks {

/// u* = restriction of u to the coordinates of smallest weight among its
/// nonzero entries, normalized.
Point limiting_direction(const Point& u, const Weights& m);

struct Extrapolation {
  double limit = 0.0;
  double error = 0.0;
  double theta = 0.0;  // fitted exponent of the leading correction
  int level = 0;       // Aitken level used
  bool warning = false;
  std::vector<double> running;  // running extrapolant per sample (NaN before enough samples)
};

/// Fits v_k = L + c d_k^theta + ... by iterated Aitken elimination on
/// geometric d_k.
Extrapolation richardson_extrapolate(const std::vector<double>& values, const std::vector<double>& d);

struct RaySequence {
  std::string quantity;
  Cone cone;
  std::vector<Point> z;
  std::vector<double> d;
  std::vector<double> values;
  Extrapolation fit;
  std::optional<double> reference;
  double tolerance = 0.0;

  double relative_error() const;
  bool pass() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Metric reports along z_k = vertex + t_k normal. Failed samples stay empty.
struct RaySamples {
  Cone cone;
  std::vector<Point> z;
  std::vector<double> d;
  std::vector<std::optional<MetricReport>> reports;
};

RaySamples sample_ray(const KernelEngine& engine, const Cone& cone, const std::vector<double>& t,
                      const RicciOptions& opt = {});

/// |pi_{1/d}(u)|^{-1} Btilde(z, u).
RaySequence scaled_kf_length(const RaySamples& s, const Point& u, const Weights& m);
/// d^{sum 2/m_j} gtilde(z).
RaySequence scaled_kf_det(const RaySamples& s, const Weights& m);
/// d^{sum 2/m_j} K(z) and J(z).
std::pair<RaySequence, RaySequence> scaled_kernel_and_J(const RaySamples& s, const Weights& m);

struct ModelReference {
  Point b_star;
  Point u_star;
  double Btilde = 0.0;
  double gtilde = 0.0;
  double K = 0.0;
  double J = 0.0;
  MetricReport report;
  nlohmann::json to_json() const;
};

ModelReference model_reference(const DomainSpec& model, const Point& u_star, const EngineOptions& opt = {});

struct SweepRow {
  double param = 0.0;
  double K = 0.0, J = 0.0, M = 0.0, gtilde = 0.0;
  double oracle_K = 0.0;  // coordinate-scaling law (stability) or exact scaling (inside convergence)
};

struct SweepTable {
  std::vector<SweepRow> rows;
  SweepRow limit;                 // delta = 0 or the limit domain
  double max_oracle_error = 0.0;  // relative
  double last_relative_change = 0.0;
  double rate = 0.0;  // fitted exponent of |v_delta - v_0| ~ delta^rate (worst of J, M, gtilde)
  bool monotone = true;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// D_delta = {lead Re z1 + (1 - delta) kappa |z2|^{2m} < 0}, delta in (0, 1/2].
SweepTable stability_sweep(int m, const Point& z, const Point& u, const std::vector<double>& deltas,
                           double lead = 1.0);

/// Omega_j increasing to Omega. Nestedness is checked by sampling.
SweepTable inside_convergence(const std::vector<DomainSpec>& inner, const DomainSpec& limit, const Point& z,
                              const Point& u, const EngineOptions& opt = {});

struct LocalizationTrace {
  RaySequence J, M, gtilde;  // ratios Omega / (Omega cap U)
};

LocalizationTrace localization_ratio(const DomainSpec& omega, const BallDomain& U, const Cone& cone,
                                     const std::vector<double>& t, const EngineOptions& opt = {});

}  // namespace kfuks
