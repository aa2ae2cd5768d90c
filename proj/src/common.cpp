#include "kfuks/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

namespace kfuks {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Truncation: return "truncation";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::IllConditioned: return "ill-conditioned";
    case ErrorCode::StepTooLarge: return "step-too-large";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

int degree(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

double factorial_product(const MultiIndex& a) {
  double p = 1.0;
  for (int k : a) p *= std::tgamma(k + 1.0);
  return p;
}

MultiIndex unit_index(int n, int j) {
  MultiIndex e(n, 0);
  e[j] = 1;
  return e;
}

namespace {

void enumerate_exact(int n, int total, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == n - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int k = total; k >= 0; --k) {
    cur[pos] = k;
    enumerate_exact(n, total - k, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> indices_up_to(int n, int max_degree) {
  std::vector<MultiIndex> out;
  if (n <= 0) return out;
  MultiIndex cur(n, 0);
  for (int d = 0; d <= max_degree; ++d) enumerate_exact(n, d, 0, cur, out);
  return out;
}

double falling_factorial(int a, int k) {
  if (k > a) return 0.0;
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= static_cast<double>(a - i);
  return p;
}

double rising_factorial(double s, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= s + i;
  return p;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return falling_factorial(n, k) / std::tgamma(k + 1.0);
}

// ---------------------------------------------------------------- Rational

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) fail(ErrorCode::Argument, "rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

Rational Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) fail(ErrorCode::Argument, "non-finite value cannot be made rational");
  // Continued-fraction convergents.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    const double frac = r - a;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-15 * std::max(1.0, std::abs(x)) ||
        frac < 1e-15)
      break;
    r = 1.0 / frac;
  }
  return Rational(h1, k1);
}

Rational operator+(const Rational& a, const Rational& b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }
Rational operator-(const Rational& a, const Rational& b) { return Rational(a.num * b.den - b.num * a.den, a.den * b.den); }
Rational operator*(const Rational& a, const Rational& b) { return Rational(a.num * b.num, a.den * b.den); }
Rational operator/(const Rational& a, const Rational& b) { return Rational(a.num * b.den, a.den * b.num); }
bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }

std::string to_string(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

// ---------------------------------------------------------------- threads

namespace {

std::atomic<int>& thread_setting() {
  static std::atomic<int> value{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
  return value;
}

}  // namespace

void set_thread_count(int threads) {
  if (threads < 1) fail(ErrorCode::Argument, "thread count must be positive");
  thread_setting().store(threads);
}

int thread_count() { return thread_setting().load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------- warnings

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](const std::string& msg) { std::cerr << "kfuks warning: " << msg << '\n'; };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  sink() = std::move(s);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (sink()) sink()(message);
}

double norm2(const Point& z) { return z.squaredNorm(); }

}  // namespace kfuks
