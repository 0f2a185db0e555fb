#pragma once

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

#include "icensus/numeric.hpp"

namespace icensus {

/// Prime factorization as (prime, exponent) pairs sorted by prime.
using Factorization = std::vector<std::pair<BigInt, unsigned>>;

struct FactorOptions {
  /// Trial division bound before switching to Pollard–Brent rho.
  unsigned long trial_bound = 1'000'000;
  /// Wall-clock budget for the rho stage; exceeded -> nullopt.
  std::chrono::milliseconds budget{2000};
};

/// Factorization of |n| (n != 0). Returns nullopt when a composite cofactor
/// resists splitting within the budget.
std::optional<Factorization> factorize(const BigInt& n, const FactorOptions& opts = {});

/// Product of p^{v_p(n)} over primes with p^2 | n. Throws ValidationError for 0.
/// Returns nullopt when factorization did not complete.
std::optional<BigInt> squarefull_part(const BigInt& n, const FactorOptions& opts = {});

bool is_squarefree(const BigInt& n);
/// True iff no prime power p^k divides n (n != 0).
bool is_kth_power_free(const BigInt& n, unsigned k);

}  // namespace icensus
