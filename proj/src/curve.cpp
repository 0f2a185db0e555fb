#include "icensus/curve.hpp"

#include <algorithm>
#include <cstdlib>

#include <omp.h>

namespace icensus {
namespace {

struct Box {
  std::int64_t amax;  // 4|a|^3 <= N6
  std::int64_t bmax;  // 27 b^2 <= N6
};

Box coefficient_box(const BigInt& n6) {
  BigInt a3 = n6 / 4, amax, bmax;
  mpz_root(amax.get_mpz_t(), a3.get_mpz_t(), 3);
  bmax = isqrt(BigInt(n6 / 27));
  if (!fits_int64(amax) || !fits_int64(bmax) || bmax > (std::int64_t{1} << 40)) {
    throw ValidationError("height cutoff too large to enumerate");
  }
  return {amax.get_si(), bmax.get_si()};
}

std::int64_t ipow(std::int64_t p, unsigned k) {
  std::int64_t r = 1;
  while (k-- > 0) r *= p;
  return r;
}

// primes p with p^k | n, n != 0
std::vector<std::int64_t> primes_with_power_dividing(std::int64_t n, unsigned k) {
  std::vector<std::int64_t> out;
  std::uint64_t m = static_cast<std::uint64_t>(n < 0 ? -n : n);
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    unsigned e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (e >= k) out.push_back(static_cast<std::int64_t>(p));
  }
  if (m > 1 && k <= 1) out.push_back(static_cast<std::int64_t>(m));
  return out;
}

bool kth_power_free(std::int64_t n, unsigned k) {
  if (n == 0) return false;
  std::uint64_t m = static_cast<std::uint64_t>(n < 0 ? -n : n);
  for (std::uint64_t p = 2; ipow(static_cast<std::int64_t>(p), k) <= static_cast<std::int64_t>(m); ++p) {
    if (m % static_cast<std::uint64_t>(ipow(static_cast<std::int64_t>(p), k)) == 0) return false;
  }
  return true;
}

// #{1 <= d <= n : d is k-th power free}
std::uint64_t count_kfree(std::int64_t n, unsigned k) {
  if (n <= 0) return 0;
  std::int64_t root = 1;
  while (ipow(root + 1, k) <= n) ++root;
  std::vector<int> mu(static_cast<std::size_t>(root) + 1, 1);
  std::vector<bool> composite(static_cast<std::size_t>(root) + 1, false);
  for (std::int64_t p = 2; p <= root; ++p) {
    if (composite[p]) continue;
    for (std::int64_t q = p; q <= root; q += p) {
      if (q > p) composite[q] = true;
      mu[q] = -mu[q];
    }
    for (std::int64_t q = p * p; q <= root; q += p * p) mu[q] = 0;
  }
  std::int64_t total = 0;
  for (std::int64_t d = 1; d <= root; ++d) total += mu[d] * (n / ipow(d, k));
  return static_cast<std::uint64_t>(total);
}

bool singular(std::int64_t a, std::int64_t b) {
  const __int128 A = a, B = b;
  return 4 * A * A * A + 27 * B * B == 0;
}

bool universal_ok(std::int64_t b, const std::vector<std::int64_t>& sixth_mods) {
  return std::none_of(sixth_mods.begin(), sixth_mods.end(), [b](std::int64_t m) { return b % m == 0; });
}

std::vector<std::int64_t> sixth_moduli(std::int64_t a) {
  std::vector<std::int64_t> mods;
  for (std::int64_t p : primes_with_power_dividing(a, 4)) mods.push_back(ipow(p, 6));
  return mods;
}

void universal_row(std::int64_t a, std::int64_t bmax, std::vector<CurveModel>& out) {
  if (a == 0) {
    for (std::int64_t b = -bmax; b <= bmax; ++b) {
      if (b != 0 && kth_power_free(b, 6)) out.push_back({BigInt(0), BigInt(b)});
    }
    return;
  }
  const auto mods = sixth_moduli(a);
  for (std::int64_t b = -bmax; b <= bmax; ++b) {
    if (!singular(a, b) && universal_ok(b, mods)) out.push_back({BigInt(a), BigInt(b)});
  }
}

std::uint64_t universal_row_count(std::int64_t a, std::int64_t bmax) {
  if (a == 0) return 2 * count_kfree(bmax, 6);
  const auto mods = sixth_moduli(a);
  // inclusion-exclusion over subsets of the (at most a handful of) moduli
  const std::size_t k = mods.size();
  std::int64_t total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    __int128 m = 1;
    int sign = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1U) {
        m *= mods[i];
        sign = -sign;
      }
    }
    if (m > bmax) {
      total += sign;  // only b = 0
      continue;
    }
    total += sign * (2 * (bmax / static_cast<std::int64_t>(m)) + 1);
  }
  // remove singular (a, b) = (-3t^2, +-2t^3)
  if (a < 0 && (-a) % 3 == 0) {
    BigInt t;
    if (is_perfect_square(BigInt(-a / 3), &t)) {
      const std::int64_t t3 = 2 * ipow(t.get_si(), 3);
      for (std::int64_t b : {t3, -t3}) {
        if (b >= -bmax && b <= bmax && universal_ok(b, mods)) --total;
      }
    }
  }
  return static_cast<std::uint64_t>(total);
}

std::int64_t congruent_dmax(const BigInt& n6) {
  BigInt d6 = n6 / 4, d;
  mpz_root(d.get_mpz_t(), d6.get_mpz_t(), 6);
  return d.get_si();
}

}  // namespace

Family parse_family(const std::string& token) {
  if (token == "universal") return Family::Universal;
  if (token == "mordell") return Family::Mordell;
  if (token == "b0") return Family::B0;
  if (token == "congruent") return Family::Congruent;
  throw ValidationError("unknown family '" + token + "' (expected universal|mordell|b0|congruent)");
}

const char* family_token(Family f) {
  switch (f) {
    case Family::Universal: return "universal";
    case Family::Mordell: return "mordell";
    case Family::B0: return "b0";
    case Family::Congruent: return "congruent";
  }
  return "?";
}

BigInt discriminant(const BigInt& a, const BigInt& b) { return -16 * (4 * a * a * a + 27 * b * b); }

BigInt naive_height_sixth(const BigInt& a, const BigInt& b) {
  BigInt u = 4 * abs(a) * a * a;
  u = abs(u);
  BigInt v = 27 * b * b;
  return u > v ? u : v;
}

Real naive_height(const BigInt& a, const BigInt& b) {
  const BigInt h6 = naive_height_sixth(a, b);
  if (h6 == 0) return Real(0);
  return boost::multiprecision::pow(to_real(h6), Real(1) / 6);
}

BigInt height_cutoff_sixth(const Real& T) {
  if (!(T >= 1)) throw ValidationError("height cutoff T must be >= 1");
  Real t6 = boost::multiprecision::pow(T, 6);
  t6 += t6 * Real("1e-30");
  return floor_to_bigint(t6);
}

bool is_family_member(const CurveModel& c, Family f) {
  if (discriminant(c) == 0) return false;
  switch (f) {
    case Family::Universal: {
      if (c.a == 0) return is_kth_power_free(c.b, 6);
      BigInt g;
      mpz_gcd(g.get_mpz_t(), c.a.get_mpz_t(), c.b.get_mpz_t());
      const auto fac = factorize(g);
      if (!fac) throw ComputationError("cannot factor gcd(A, B) = " + to_string(g));
      for (const auto& [p, e] : *fac) {
        if (e < 4) continue;
        if (mpz_remove(g.get_mpz_t(), c.a.get_mpz_t(), p.get_mpz_t()) < 4) continue;
        if (c.b == 0) return false;
        BigInt rest;
        if (mpz_remove(rest.get_mpz_t(), c.b.get_mpz_t(), p.get_mpz_t()) >= 6) return false;
      }
      return true;
    }
    case Family::Mordell:
      return c.a == 0 && is_kth_power_free(c.b, 6);
    case Family::B0:
      return c.b == 0 && is_kth_power_free(c.a, 4);
    case Family::Congruent: {
      if (c.b != 0 || c.a >= 0) return false;
      BigInt d;
      return is_perfect_square(BigInt(-c.a), &d) && is_squarefree(d);
    }
  }
  return false;
}

BigInt smallest_member_height_sixth(Family f) {
  switch (f) {
    case Family::Universal: return 4;   // (+-1, 0)
    case Family::Mordell: return 27;    // (0, +-1)
    case Family::B0: return 4;
    case Family::Congruent: return 4;   // D = 1
  }
  return 0;
}

std::vector<CurveModel> enumerate_family(Family f, const Real& T) {
  const BigInt n6 = height_cutoff_sixth(T);
  const Box box = coefficient_box(n6);
  std::vector<CurveModel> out;
  switch (f) {
    case Family::Universal: {
      const std::int64_t rows = 2 * box.amax + 1;
      std::vector<std::vector<CurveModel>> parts(static_cast<std::size_t>(rows));
#pragma omp parallel for schedule(dynamic, 4)
      for (std::int64_t i = 0; i < rows; ++i) universal_row(i - box.amax, box.bmax, parts[i]);
      std::size_t total = 0;
      for (const auto& p : parts) total += p.size();
      out.reserve(total);
      for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
      break;
    }
    case Family::Mordell:
      for (std::int64_t b = -box.bmax; b <= box.bmax; ++b) {
        if (b != 0 && kth_power_free(b, 6)) out.push_back({BigInt(0), BigInt(b)});
      }
      break;
    case Family::B0:
      for (std::int64_t a = -box.amax; a <= box.amax; ++a) {
        if (a != 0 && kth_power_free(a, 4)) out.push_back({BigInt(a), BigInt(0)});
      }
      break;
    case Family::Congruent:
      for (std::int64_t d = congruent_dmax(n6); d >= 1; --d) {
        if (kth_power_free(d, 2)) out.push_back({BigInt(-d * d), BigInt(0)});
      }
      break;
  }
  return out;
}

std::uint64_t count_family(Family f, const Real& T) {
  const BigInt n6 = height_cutoff_sixth(T);
  const Box box = coefficient_box(n6);
  switch (f) {
    case Family::Universal: {
      std::uint64_t total = 0;
#pragma omp parallel for reduction(+ : total) schedule(dynamic, 16)
      for (std::int64_t a = -box.amax; a <= box.amax; ++a) total += universal_row_count(a, box.bmax);
      return total;
    }
    case Family::Mordell: return 2 * count_kfree(box.bmax, 6);
    case Family::B0: return 2 * count_kfree(box.amax, 4);
    case Family::Congruent: return count_kfree(congruent_dmax(n6), 2);
  }
  return 0;
}

namespace serial {

std::vector<CurveModel> enumerate_family(Family f, const Real& T) {
  const BigInt n6 = height_cutoff_sixth(T);
  const Box box = coefficient_box(n6);
  std::vector<CurveModel> out;
  for (std::int64_t a = -box.amax; a <= box.amax; ++a) {
    for (std::int64_t b = -box.bmax; b <= box.bmax; ++b) {
      CurveModel c{BigInt(a), BigInt(b)};
      if (naive_height_sixth(c.a, c.b) <= n6 && is_family_member(c, f)) out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace serial
}  // namespace icensus
