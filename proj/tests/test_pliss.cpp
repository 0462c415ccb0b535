#include <cmath>
#include <random>

#include "doctest.h"
#include "surfdyn/pliss.hpp"

using namespace surfdyn;

TEST_CASE("constant contraction: every index") {
  const std::vector<double> a(11, 0.5);
  const auto r = pliss_times(a, 0.6, 0.8);
  CHECK(r.times.size() == 11);
  CHECK(r.hypothesis);
  CHECK(r.n == 10);
}

TEST_CASE("no contraction: only the last index") {
  // the last index has the single condition a_n <= gamma2^0
  const auto r = pliss_times(std::vector<double>(11, 1.0), 0.6, 0.8);
  CHECK(r.times == std::vector<long>{10});
  CHECK(pliss_times(std::vector<double>(11, 1.01), 0.6, 0.8).times.empty());
  CHECK_FALSE(r.hypothesis);
}

TEST_CASE("alternating sequence matches the exhaustive oracle") {
  std::vector<double> a;
  for (int i = 0; i < 40; ++i) a.push_back(i % 2 ? 0.125 : 2.0);
  const auto r = pliss_times(a, 0.6, 0.8);
  CHECK(r.times == pliss_times_bruteforce(a, 0.8));
  CHECK_FALSE(r.times.empty());
  // index 0 starts with a factor 2 > 0.8^0
  CHECK(r.times.front() != 0);
}

TEST_CASE("oracle agrees on random real sequences") {
  std::mt19937_64 rng(7);
  std::lognormal_distribution<double> dist(-0.3, 0.6);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> a(1 + t % 60);
    for (auto& v : a) v = dist(rng);
    CHECK(pliss_times(a, 0.5, 0.8).times == pliss_times_bruteforce(a, 0.8));
  }
}

TEST_CASE("constants") {
  const auto k = pliss_constants(0.5, 0.8, 2.0);
  CHECK(k.c == doctest::Approx((std::log(0.8) - std::log(0.5)) / (std::log(2.0) - std::log(0.5))));
  CHECK(k.c == doctest::Approx(0.339036).epsilon(1e-6));
  CHECK(k.N == 3);
  CHECK(pliss_constants(0.5, 0.5001, 2.0).c == doctest::Approx(1.44e-4).epsilon(1e-2));
  const auto clamp = pliss_constants(0.5, 0.8, 0.6);
  CHECK(clamp.c == 1.0);
  CHECK(clamp.N == 1);
  CHECK_THROWS_AS(pliss_constants(0.8, 0.5, 2.0), Error);
}

TEST_CASE("thresholds are validated") {
  CHECK_THROWS_AS(pliss_times({0.5}, 0.9, 0.8), Error);
  CHECK_THROWS_AS(pliss_times({0.5}, 0.5, 1.2), Error);
  CHECK_THROWS_AS(pliss_times({0.5, 3.0}, 0.5, 0.8, 2.0), Error);
  CHECK_THROWS_AS(pliss_times({0.5, -1.0}, 0.5, 0.8), Error);
}

TEST_CASE("density on long hypothesis sequences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 1.9);
  int tested = 0;
  while (tested < 200) {
    std::vector<double> a(50 + tested);
    for (auto& v : a) v = u(rng) * 0.55;
    const auto r = pliss_times(a, 0.5, 0.8, 2.0);
    if (!r.hypothesis) continue;
    ++tested;
    CHECK(r.density_holds);
    CHECK(static_cast<double>(r.times.size()) >= r.c * static_cast<double>(r.n));
  }
}
