#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "icensus/curve.hpp"

namespace icensus::testing {

// Plain nested-loop membership oracle on machine integers; trial divisors are
// all d >= 2 (a composite witness implies a prime one).
inline bool power_divides(long d, unsigned k, long v) {
  long m = 1;
  for (unsigned i = 0; i < k; ++i) m *= d;
  return v % m == 0;
}

inline bool free_of(long v, unsigned k) {
  for (long d = 2; std::pow(static_cast<double>(d), k) <= std::abs(static_cast<double>(v)); ++d) {
    if (power_divides(d, k, v)) return false;
  }
  return true;
}

// fourth_divisors: all d in [2, 64] with d^4 | a (precomputed per row)
inline bool oracle_member(long a, long b, Family f, const std::vector<long>& fourth_divisors) {
  if (4 * a * a * a + 27 * b * b == 0) return false;
  switch (f) {
    case Family::Universal:
      return std::none_of(fourth_divisors.begin(), fourth_divisors.end(),
                          [b](long d) { return power_divides(d, 6, b); });
    case Family::Mordell: return a == 0 && free_of(b, 6);
    case Family::B0: return b == 0 && free_of(a, 4);
    case Family::Congruent: {
      if (b != 0 || a >= 0) return false;
      const long d = std::lround(std::sqrt(static_cast<double>(-a)));
      return d * d == -a && free_of(d, 2);
    }
  }
  return false;
}

inline std::uint64_t oracle_count(Family f, double T) {
  const double t6 = std::pow(T, 6) * (1 + 1e-12);
  const long amax = static_cast<long>(std::cbrt(t6 / 4)) + 1;
  const long bmax = static_cast<long>(std::sqrt(t6 / 27)) + 1;
  std::uint64_t n = 0;
  for (long a = -amax; a <= amax; ++a) {
    if (4.0 * std::abs(static_cast<double>(a)) * a * a > t6) continue;
    std::vector<long> divs;
    for (long d = 2; d <= 64; ++d) {
      if (power_divides(d, 4, a)) divs.push_back(d);
    }
    for (long b = -bmax; b <= bmax; ++b) {
      if (27.0 * b * b <= t6 && oracle_member(a, b, f, divs)) ++n;
    }
  }
  return n;
}

}  // namespace icensus::testing
