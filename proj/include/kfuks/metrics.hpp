#pragma once

#include "kfuks/bergman.hpp"

namespace kfuks {

struct MetricReport {
  Point z;
  double K = 0.0;
  CMatrix G;       // Bergman metric g_{a bbar}
  CMatrix Ric;     // Ricci tensor of the Bergman metric
  CMatrix Gtilde;  // (n + 1) G - Ric
  double J = 0.0;  // det G / K
  double gtilde_det = 0.0;
  double T = 0.0;  // K^{2n} J gtilde
  nlohmann::json diagnostics = nlohmann::json::object();

  int dim() const { return static_cast<int>(z.size()); }
  double B(const Point& u) const;
  double Btilde(const Point& u) const;
  /// (u^t Ric ubar) / (u^t G ubar).
  double ricci_curvature(const Point& u) const;
  nlohmann::json to_json() const;
};

/// u^t A conj(u) for a Hermitian A.
double hermitian_form(const CMatrix& A, const Point& u);

/// Throws Numerical unless the smallest eigenvalue exceeds 1e-8 * trace.
void require_positive_definite(const CMatrix& A, const char* what);
bool positive_definite(const CMatrix& A);

struct RicciOptions {
  double h = 0.0;          // 0: 1e-3 * d(z)
  bool richardson = true;  // combine steps h and h/2
};

/// Ric = -d dbar log det G by central differences over the 2n real coordinates.
CMatrix ricci_fd(const KernelEngine& engine, const Point& z, const RicciOptions& opt = {},
                 nlohmann::json* diagnostics = nullptr);
/// Ric from the order-4 jet through truncated power series of log K.
CMatrix ricci_analytic(const KernelEngine& engine, const Point& z);

/// Full invariant stack at z. Pullback engines are evaluated on the target and
/// transported with pullback_report.
MetricReport kobayashi_fuks(const KernelEngine& engine, const Point& z, const RicciOptions& opt = {});

/// Transformation laws for F: Omega_1 -> Omega_2; `target` is the report at F(z).
MetricReport pullback_report(const MetricReport& target, const Biholomorphism& F, const Point& z);
/// M_1(z, u) = M_2(F z, F'(z) u) |det F'(z)|^{2(n+1)}.
double pullback_M(double M_target, const Biholomorphism& F, const Point& z);

struct ExtremalResult {
  double value = 0.0;             // trace of the form over the constrained subspace
  double rayleigh_max = 0.0;      // its largest single-function value
  Eigen::VectorXcd coefficients;  // top eigenvector in the monomial basis
  double constraint_residual = 0.0;
  double norm = 0.0;
};

ExtremalResult maximal_I(const GramBasisEngine& engine, const Point& z, const Point& u);
/// Uses the adjugate of G directly (not K^n J I).
ExtremalResult maximal_M(const GramBasisEngine& engine, const Point& z, const Point& u);
/// (I / K)^{1/2}.
double kf_via_extremal(const GramBasisEngine& engine, const Point& z, const Point& u);

/// Cofactor adjugate of a small square matrix.
CMatrix adjugate(const CMatrix& A);

}  // namespace kfuks
