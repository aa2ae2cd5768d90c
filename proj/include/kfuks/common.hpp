#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kfuks {

using cplx = std::complex<double>;
using Point = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
  Argument = 1,
  Domain,
  Unsupported,
  Truncation,
  Infeasible,
  Numerical,
  Validation,
  IllConditioned,
  StepTooLarge,
  Schema,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

// Non-negative multi-index; small (n <= 4 in practice).
using MultiIndex = std::vector<int>;

int degree(const MultiIndex& a);
double factorial_product(const MultiIndex& a);
MultiIndex unit_index(int n, int j);

/// All multi-indices of length n with total degree <= max_degree, ordered by
/// degree and then lexicographically (descending in the first slot).
std::vector<MultiIndex> indices_up_to(int n, int max_degree);

/// Falling factorial a (a-1) ... (a-k+1); zero when k > a.
double falling_factorial(int a, int k);
double rising_factorial(double s, int k);
double binomial(int n, int k);

/// Exact rational number with 64-bit parts, always normalized (den > 0).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  /// Best approximation with denominator <= max_den (continued fractions).
  static Rational from_double(double x, std::int64_t max_den = 1000);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
};

std::string to_string(const Rational& r);

/// Thread count used by the parallel loops. Defaults to the number of logical cores.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once; the
/// caller writes results into per-index slots so output order never depends on
/// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Warning sink. Defaults to stderr; tests may redirect it.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

double norm2(const Point& z);

}  // namespace kfuks
