#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "netslice/core.hpp"
#include "netslice/rng.hpp"

using namespace netslice;

TEST_CASE("satisfaction takes the binding ratio, capped at one") {
  const SliceSpec spec{1, 2.0, 10.0};
  CHECK(satisfaction({2.0, 5.0}, spec).value == doctest::Approx(1.0));
  CHECK(satisfaction({1.0, 5.0}, spec).value == doctest::Approx(0.5));
  CHECK(satisfaction({3.0, 20.0}, {2, 1.5, 10.0}).value == doctest::Approx(0.5));
  CHECK(satisfaction({0.0, 5.0}, spec).value == doctest::Approx(0.0));
}

TEST_CASE("satisfaction treats zero delay as instantly served") {
  CHECK(satisfaction({5.0, 0.0}, {1, 2.0, 10.0}).value == doctest::Approx(1.0));
}

TEST_CASE("satisfaction rejects non-positive requirements") {
  CHECK_THROWS_AS(satisfaction({1.0, 5.0}, {1, 0.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(satisfaction({1.0, 5.0}, {1, 2.0, -1.0}), std::invalid_argument);
}

TEST_CASE("satisfaction stays in [0,1] and is monotone in both directions") {
  Rng rng(41);
  for (int i = 0; i < 500; ++i) {
    const SliceSpec spec{1, rng.uniform(0.1, 5.0), rng.uniform(1.0, 100.0)};
    const double tput = rng.uniform(0.0, 10.0);
    const double delay = rng.uniform(0.5, 200.0);
    const double r = satisfaction({tput, delay}, spec).value;
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    // more throughput never hurts, more delay never helps
    CHECK(satisfaction({tput * 1.5, delay}, spec).value >= r - 1e-15);
    CHECK(satisfaction({tput, delay * 1.5}, spec).value <= r + 1e-15);
  }
}

TEST_CASE("log_utility basics") {
  const double levels_a[] = {1.0, 1.0, 1.0};
  CHECK(log_utility(levels_a) == doctest::Approx(3.0 * std::log(2.0)));
  const double levels_b[] = {0.0, 0.0};
  CHECK(log_utility(levels_b) == doctest::Approx(0.0));
  const double levels_c[] = {0.5};
  CHECK(log_utility(levels_c) == doctest::Approx(std::log(1.5)));
  const double bad[] = {1.2};
  CHECK_THROWS_AS(log_utility(std::span<const double>(bad)), std::invalid_argument);
}

TEST_CASE("log_utility is monotone entrywise") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(4), b(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = rng.uniform01();
      b[j] = std::min(1.0, a[j] + rng.uniform01() * (1.0 - a[j]));
    }
    CHECK(log_utility(std::span<const double>(b)) >=
          log_utility(std::span<const double>(a)) - 1e-15);
  }
}

TEST_CASE("validate_partition accepts the feasible set and names violations") {
  CHECK(!validate_partition({{0.3, 0.3, 0.4}}));
  auto sum_violation = validate_partition({{0.6, 0.6}});
  REQUIRE(sum_violation.has_value());
  CHECK(sum_violation->clause == PartitionViolation::Clause::sum_above_one);
  auto negative = validate_partition({{-0.1, 0.5}});
  REQUIRE(negative.has_value());
  CHECK(negative->clause == PartitionViolation::Clause::negative_share);
  CHECK(negative->index == 0);
  auto above = validate_partition({{1.2}});
  REQUIRE(above.has_value());
  CHECK(above->clause == PartitionViolation::Clause::share_above_one);
  // the tolerance absorbs float accumulation
  CHECK(!validate_partition({{0.5, 0.5 + 5e-10}}));
}

TEST_CASE("normalize_to_simplex repairs only what needs repairing") {
  const double a[] = {0.5, 0.3};
  auto p = normalize_to_simplex(a);
  CHECK(p.shares[0] == doctest::Approx(0.5));
  CHECK(p.shares[1] == doctest::Approx(0.3));

  const double b[] = {0.8, 0.8};
  p = normalize_to_simplex(b);
  CHECK(p.shares[0] == doctest::Approx(0.5));
  CHECK(p.shares[1] == doctest::Approx(0.5));

  const double c[] = {0.0, 0.0, 0.0};
  p = normalize_to_simplex(c);
  CHECK(p.shares[0] == doctest::Approx(1.0 / 3.0));
  CHECK(p.shares[2] == doctest::Approx(1.0 / 3.0));

  const double neg[] = {-0.1, 0.2};
  CHECK_THROWS_AS(normalize_to_simplex(neg), std::invalid_argument);
  CHECK_THROWS_AS(normalize_to_simplex(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("normalized vectors always validate") {
  Rng rng(43);
  for (int i = 0; i < 500; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    std::vector<double> raw(static_cast<std::size_t>(n));
    bool positive = false;
    for (double& v : raw) {
      v = rng.uniform(0.0, 3.0);
      positive = positive || v > 0.0;
    }
    if (!positive) raw[0] = 0.5;
    CHECK(!validate_partition(normalize_to_simplex(raw)));
  }
}
