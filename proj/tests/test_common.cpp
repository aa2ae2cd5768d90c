#include <doctest.h>

#include <atomic>
#include <set>

#include "kfuks/common.hpp"

using namespace kfuks;

TEST_CASE("multi-index helpers") {
  CHECK(degree({2, 0, 3}) == 5);
  CHECK(factorial_product({2, 3}) == doctest::Approx(12.0));
  CHECK(unit_index(3, 1) == MultiIndex{0, 1, 0});

  const auto idx = indices_up_to(2, 3);
  CHECK(idx.size() == 10);
  CHECK(idx[0] == MultiIndex{0, 0});
  CHECK(idx[1] == unit_index(2, 0));
  CHECK(idx[2] == unit_index(2, 1));
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(degree(idx[i - 1]) <= degree(idx[i]));
  CHECK(std::set<MultiIndex>(idx.begin(), idx.end()).size() == idx.size());
}

TEST_CASE("factorial-type helpers") {
  CHECK(falling_factorial(5, 2) == doctest::Approx(20.0));
  CHECK(falling_factorial(2, 3) == 0.0);
  CHECK(rising_factorial(0.5, 2) == doctest::Approx(0.75));
  CHECK(binomial(6, 2) == doctest::Approx(15.0));
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("rationals stay normalized") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 2) * Rational(2, 3) == Rational(1, 3));
  CHECK(Rational(1, 4) < Rational(1, 3));
  CHECK(Rational::from_double(0.25) == Rational(1, 4));
  CHECK(to_string(Rational(3, 4)) == "3/4");
  CHECK_THROWS_AS(Rational(1, 0), Error);
}

TEST_CASE("parallel_for visits each index once") {
  set_thread_count(4);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(set_thread_count(0), Error);
}

TEST_CASE("errors carry their code") {
  try {
    fail(ErrorCode::Truncation, "boom");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Truncation);
    CHECK(std::string(e.what()) == "boom");
  }
  CHECK(std::string(error_code_name(ErrorCode::Schema)) == "schema");
}

TEST_CASE("warning sink can be redirected") {
  std::vector<std::string> got;
  set_warning_sink([&](const std::string& m) { got.push_back(m); });
  warn("hello");
  set_warning_sink(nullptr);
  REQUIRE(got.size() == 1);
  CHECK(got[0] == "hello");
}
