#pragma once

// Test-only reference values, written independently of the library engines.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
constexpr double pi = 3.141592653589793238462643383279502884;

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Unit ball in C^n: n!/pi^n (1 - <z, w>)^{-(n+1)}.
inline cplx ball_kernel(const Vec& z, const Vec& w, double radius = 1.0) {
  const int n = static_cast<int>(z.size());
  const cplx s = w.adjoint() * z;  // sum z_j conj(w_j)
  const double r2 = radius * radius;
  return factorial(n) / std::pow(pi, n) / std::pow(r2, n) * std::pow(1.0 - s / r2, -(n + 1));
}

inline double disc_kernel(cplx z, double radius = 1.0) {
  const double r2 = radius * radius;
  return r2 / (pi * std::pow(r2 - std::norm(z), 2));
}

/// Bergman metric of the unit ball.
inline Mat ball_metric(const Vec& z) {
  const int n = static_cast<int>(z.size());
  const double s = 1.0 - z.squaredNorm();
  Mat G = Mat::Identity(n, n) / s + z.conjugate() * z.transpose() / (s * s);
  return (n + 1.0) * G;
}

/// Kobayashi-Fuks determinant on the unit ball.
inline double ball_gtilde(const Vec& z) {
  const int n = static_cast<int>(z.size());
  return std::pow(n + 1.0, n) * std::pow(n + 2.0, n) * std::pow(1.0 - z.squaredNorm(), -(n + 1));
}

/// Volume of sum |z_j|^{2 p_j} < 1.
inline double ellipsoid_volume(const std::vector<int>& p) {
  double num = 1.0, s = 0.0;
  for (int q : p) num *= std::tgamma(1.0 + 1.0 / q), s += 1.0 / q;
  return std::pow(pi, p.size()) * num / std::tgamma(1.0 + s);
}

/// int |z^alpha|^2 over sum |z_j|^{2 p_j} < 1, via the Dirichlet integral.
inline double ellipsoid_moment(const std::vector<int>& p, const std::vector<int>& a) {
  double num = 1.0, s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double q = (a[j] + 1.0) / p[j];
    num *= std::tgamma(q) / p[j];
    s += q;
  }
  return std::pow(pi, p.size()) * num / std::tgamma(1.0 + s);
}

/// Brute-force monomial sum for the Bergman kernel of a 2-variable ellipsoid,
/// summing |z1^a z2^b|^2 / moment until the terms fall below tol.
inline double ellipsoid_kernel_diag(const std::vector<int>& p, const Vec& z, int max_deg = 400) {
  double sum = 0.0;
  const double x = std::norm(z[0]), y = std::norm(z[1]);
  for (int a = 0; a <= max_deg; ++a) {
    double row = 0.0;
    for (int b = 0; b <= max_deg; ++b) {
      const double lm = std::lgamma((a + 1.0) / p[0]) + std::lgamma((b + 1.0) / p[1]) - std::log(p[0] * p[1]) -
                        std::lgamma(1.0 + (a + 1.0) / p[0] + (b + 1.0) / p[1]) + 2.0 * std::log(pi);
      const double t = std::exp(a * std::log(x + 1e-300) + b * std::log(y + 1e-300) - lm);
      row += t;
      if (b > 4 && t < 1e-18 * (sum + row)) break;
    }
    sum += row;
    if (a > 4 && row < 1e-18 * sum) break;
  }
  return sum;
}

/// Half-plane {Re z < 0}: 1/(pi |z + conj w|^2).
inline double halfplane_kernel(cplx z) { return 1.0 / (4.0 * pi * z.real() * z.real()); }

/// d/dz, d/dzbar mixed Hessian of a real function by central differences.
inline Mat complex_hessian(const std::function<double(const Vec&)>& f, const Vec& z, double h) {
  const int n = static_cast<int>(z.size());
  Mat H(n, n);
  auto shifted = [&](int j, cplx dj, int k, cplx dk) {
    Vec w = z;
    w[j] += dj;
    w[k] += dk;
    return f(w);
  };
  // d^2/dz_j dzbar_k = 1/4 (d_xj - i d_yj)(d_xk + i d_yk)
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      auto d2 = [&](cplx a, cplx b) {
        return (shifted(j, h * a, k, h * b) - shifted(j, h * a, k, -h * b) - shifted(j, -h * a, k, h * b) +
                shifted(j, -h * a, k, -h * b)) /
               (4.0 * h * h);
      };
      const cplx I(0.0, 1.0);
      const double xx = d2(1.0, 1.0), yy = d2(I, I), xy = d2(1.0, I), yx = d2(I, 1.0);
      H(j, k) = 0.25 * (xx + yy + I * (xy - yx));
    }
  return H;
}

}  // namespace oracle
