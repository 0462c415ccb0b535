#pragma once

#include <optional>
#include <vector>

#include "surfdyn/error.hpp"

namespace surfdyn {

struct PlissConstants {
  long N = 1;
  double c = 1.0;
};

// c = (ln g2 - ln g1)/(ln A - ln g1) clamped to 1, N = ceil(1/c).
PlissConstants pliss_constants(double gamma1, double gamma2, double A);

struct PlissReport {
  double gamma1 = 0.0, gamma2 = 0.0;
  double A = 0.0;
  std::vector<long> times;
  double c = 1.0;
  long N = 1;
  long n = 0;  // last index of the input, a_0..a_n
  // prod_{i=0}^{n} a_i <= gamma1^n
  bool hypothesis = false;
  // times.size() >= c*n; only meaningful when hypothesis holds and n >= N
  bool density_holds = false;
};

// Indices r with prod_{i=r}^{j} a_i <= gamma2^(j-r) for every r <= j <= n.
// Exponents are j-r while the product has j-r+1 factors. A bounds every a_i
// and defaults to their maximum.
PlissReport pliss_times(const std::vector<double>& a, double gamma1, double gamma2,
                        std::optional<double> A = std::nullopt);

// O(n^2) check of the same condition, for tests.
std::vector<long> pliss_times_bruteforce(const std::vector<double>& a, double gamma2);

}  // namespace surfdyn
