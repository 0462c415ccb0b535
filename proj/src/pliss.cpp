#include "surfdyn/pliss.hpp"

#include <algorithm>
#include <cmath>

#include "surfdyn/error.hpp"

namespace surfdyn {

namespace {

void check_gammas(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0 && gamma1 < gamma2 && gamma2 < 1.0)) {
    throw Error(ErrorCode::InvalidThresholds, "need 0 < gamma1 < gamma2 < 1");
  }
}

}  // namespace

PlissConstants pliss_constants(double gamma1, double gamma2, double A) {
  check_gammas(gamma1, gamma2);
  if (!(A > 0.0) || !std::isfinite(A)) {
    throw Error(ErrorCode::InvalidThresholds, "norm bound A must be positive");
  }
  PlissConstants k;
  if (A <= gamma2) {
    // every step already contracts faster than gamma2
    k.c = 1.0;
  } else {
    k.c = std::min(1.0, (std::log(gamma2) - std::log(gamma1)) / (std::log(A) - std::log(gamma1)));
  }
  k.N = static_cast<long>(std::ceil(1.0 / k.c));
  return k;
}

PlissReport pliss_times(const std::vector<double>& a, double gamma1, double gamma2,
                        std::optional<double> A) {
  check_gammas(gamma1, gamma2);
  if (a.empty()) throw Error(ErrorCode::InvalidArgument, "empty norm sequence");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
      throw Error(ErrorCode::InvalidArgument, "norms must be positive and finite",
                  static_cast<long>(i));
    }
  }
  const double amax = *std::max_element(a.begin(), a.end());
  const double bound = A.value_or(amax);
  if (bound < amax) {
    throw Error(ErrorCode::InvalidThresholds, "A is below the largest per-step norm");
  }

  PlissReport rep;
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  rep.A = bound;
  rep.n = static_cast<long>(a.size()) - 1;
  const auto k = pliss_constants(gamma1, gamma2, bound);
  rep.c = k.c;
  rep.N = k.N;

  // With b_i = log a_i - log g2, r is a time iff max_j sum_{i=r}^{j} b_i <= -log g2.
  // The running maximum of suffix sums is M(r) = b_r + max(0, M(r+1)).
  const double lg2 = std::log(gamma2);
  const double slack = 1e-12;
  double best = 0.0;
  for (long r = rep.n; r >= 0; --r) {
    const double b = std::log(a[r]) - lg2;
    best = r == rep.n ? b : b + std::max(0.0, best);
    if (best <= -lg2 + slack) rep.times.push_back(r);
  }
  std::reverse(rep.times.begin(), rep.times.end());

  double total = 0.0;
  for (double v : a) total += std::log(v);
  rep.hypothesis = total <= rep.n * std::log(gamma1) + slack;
  rep.density_holds = static_cast<double>(rep.times.size()) >= rep.c * rep.n;
  return rep;
}

std::vector<long> pliss_times_bruteforce(const std::vector<double>& a, double gamma2) {
  std::vector<long> out;
  const long n = static_cast<long>(a.size()) - 1;
  for (long r = 0; r <= n; ++r) {
    double prod = 1.0;
    bool ok = true;
    for (long j = r; j <= n && ok; ++j) {
      prod *= a[j];
      ok = prod <= std::pow(gamma2, static_cast<double>(j - r)) * (1.0 + 1e-12);
    }
    if (ok) out.push_back(r);
  }
  return out;
}

}  // namespace surfdyn
