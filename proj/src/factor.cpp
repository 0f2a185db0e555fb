#include "icensus/factor.hpp"

#include <algorithm>
#include <map>

namespace icensus {
namespace {

bool is_probable_prime(const BigInt& n) { return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0; }

// Brent's variant of Pollard rho; returns a nontrivial factor or 0 on timeout.
BigInt rho_split(const BigInt& n, std::chrono::steady_clock::time_point deadline) {
  if (mpz_even_p(n.get_mpz_t())) return 2;
  for (unsigned long c = 1;; ++c) {
    BigInt y = 2, x, ys, q = 1, g = 1;
    unsigned long r = 1;
    const unsigned long m = 128;
    auto step = [&](const BigInt& v) {
      BigInt t = v * v + c;
      mpz_mod(t.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
      return t;
    };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) y = step(y);
      unsigned long k = 0;
      do {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          y = step(y);
          BigInt d = x - y;
          q = q * abs(d);
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += m;
      } while (k < r && g == 1);
      r *= 2;
      if (std::chrono::steady_clock::now() > deadline) return 0;
    } while (g == 1);
    if (g == n) {
      do {
        ys = step(ys);
        BigInt d = x - ys;
        d = abs(d);
        mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
      } while (g == 1);
    }
    if (g != n) return g;
    if (std::chrono::steady_clock::now() > deadline) return 0;
  }
}

bool split_fully(const BigInt& n, std::map<BigInt, unsigned>& out,
                 std::chrono::steady_clock::time_point deadline) {
  if (n == 1) return true;
  if (is_probable_prime(n)) {
    ++out[n];
    return true;
  }
  BigInt root;
  if (is_perfect_square(n, &root)) {
    std::map<BigInt, unsigned> sub;
    if (!split_fully(root, sub, deadline)) return false;
    for (auto& [p, e] : sub) out[p] += 2 * e;
    return true;
  }
  const BigInt d = rho_split(n, deadline);
  if (d == 0) return false;
  return split_fully(d, out, deadline) && split_fully(BigInt(n / d), out, deadline);
}

}  // namespace

std::optional<Factorization> factorize(const BigInt& n, const FactorOptions& opts) {
  if (n == 0) throw ValidationError("cannot factor zero");
  BigInt m = abs(n);
  std::map<BigInt, unsigned> found;

  auto strip = [&](unsigned long p) {
    unsigned e = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), p) != 0) {
      mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
      ++e;
    }
    if (e > 0) found[BigInt(p)] += e;
  };
  strip(2);
  strip(3);
  for (unsigned long p = 5; p <= opts.trial_bound; p += 6) {
    if (BigInt(p) * p > m) break;
    strip(p);
    strip(p + 2);
  }
  if (m > 1) {
    const auto deadline = std::chrono::steady_clock::now() + opts.budget;
    if (BigInt(opts.trial_bound) * opts.trial_bound >= m) {
      ++found[m];
    } else if (!split_fully(m, found, deadline)) {
      return std::nullopt;
    }
  }
  return Factorization(found.begin(), found.end());
}

std::optional<BigInt> squarefull_part(const BigInt& n, const FactorOptions& opts) {
  if (n == 0) throw ValidationError("squarefull_part of zero");
  const auto f = factorize(n, opts);
  if (!f) return std::nullopt;
  BigInt out = 1;
  for (const auto& [p, e] : *f) {
    if (e >= 2) {
      BigInt pe;
      mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
      out *= pe;
    }
  }
  return out;
}

bool is_kth_power_free(const BigInt& n, unsigned k) {
  if (n == 0) return false;
  BigInt m = abs(n);
  // any p^k | m has p <= m^{1/k}; for k >= 2 this bounds trial division.
  BigInt limit;
  mpz_root(limit.get_mpz_t(), m.get_mpz_t(), k);
  if (limit < 2) return true;
  if (fits_int64(limit) && limit <= 10'000'000) {
    const unsigned long lim = limit.get_ui();
    for (unsigned long p = 2; p <= lim; ++p) {
      if (mpz_divisible_ui_p(m.get_mpz_t(), p) == 0) continue;
      unsigned e = 0;
      while (mpz_divisible_ui_p(m.get_mpz_t(), p) != 0) {
        mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
        ++e;
      }
      if (e >= k) return false;
    }
    return true;
  }
  const auto f = factorize(m);
  if (!f) throw ComputationError("factorization budget exceeded for " + to_string(n));
  return std::all_of(f->begin(), f->end(), [k](const auto& pe) { return pe.second < k; });
}

bool is_squarefree(const BigInt& n) { return is_kth_power_free(n, 2); }

}  // namespace icensus
