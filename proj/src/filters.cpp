#include "icensus/curve.hpp"
#include "icensus/point.hpp"

namespace icensus {
namespace {

bool ge_power(const BigInt& v, const Real& T, const Real& e) {
  return to_real(BigInt(abs(v))) >= boost::multiprecision::pow(T, e);
}

// x/d^2 in lowest terms with |x| <= xmax, 1 <= d <= dmax
bool has_small_rational_point(const CurveModel& c, const BigInt& xmax, const BigInt& dmax) {
  BigInt root;
  for (BigInt d = 1; d <= dmax; ++d) {
    const BigInt d2 = d * d;
    const BigInt ad4 = c.a * d2 * d2;
    const BigInt bd6 = c.b * d2 * d2 * d2;
    for (BigInt x = -xmax; x <= xmax; ++x) {
      if (d > 1) {
        BigInt g;
        mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), d.get_mpz_t());
        if (g != 1) continue;
      }
      const BigInt f = x * x * x + ad4 * x + bd6;
      if (f >= 0 && is_perfect_square(f, &root)) return true;
    }
  }
  return false;
}

}  // namespace

FilterDiagnostics filter_diagnostics(const CurveModel& c, const Real& T, const Real& delta,
                                     const FilterOptions& opts) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0, 1)");
  if (naive_height_sixth(c.a, c.b) > height_cutoff_sixth(T)) {
    throw ValidationError("curve height exceeds T");
  }
  if (!is_family_member(c, Family::Universal)) throw ValidationError("curve is not in the universal family");

  FilterDiagnostics d;
  d.delta = delta;
  d.T = T;
  d.a_large = ge_power(c.a, T, 2 - delta);
  d.b_large_nonsquare = ge_power(c.b, T, 3 - delta) && !is_perfect_square(c.b);
  BigInt g;
  mpz_gcd(g.get_mpz_t(), c.a.get_mpz_t(), c.b.get_mpz_t());
  d.gcd_small = to_real(g) <= boost::multiprecision::pow(T, delta);
  const BigInt disc = discriminant(c);
  d.disc_large = ge_power(disc, T, 6 - 2 * delta);
  if (const auto sq = squarefull_part(disc, opts.factor)) {
    d.squarefull_small = to_real(*sq) <= boost::multiprecision::pow(T, 4 * delta);
  }
  if (opts.search_integral) {
    const BigInt xb = floor_to_bigint(boost::multiprecision::pow(T, 5 - delta));
    d.no_small_integral = xb < 1 || integral_points(c, xb).empty();
  }
  if (opts.search_rational) {
    const BigInt xr = floor_to_bigint(boost::multiprecision::pow(T, Real(0.5) - delta));
    const BigInt dr = floor_to_bigint(boost::multiprecision::pow(T, Real(0.25) - delta / 2));
    d.no_small_rational = xr < 0 || dr < 1 || !has_small_rational_point(c, xr, dr);
  }
  return d;
}

bool passes_bullet_filter(const CurveModel& c, const Real& T, const Real& delta) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0, 1)");
  if (!ge_power(c.a, T, 2 - delta)) return false;
  if (!ge_power(c.b, T, 3 - delta) || is_perfect_square(c.b)) return false;
  BigInt g;
  mpz_gcd(g.get_mpz_t(), c.a.get_mpz_t(), c.b.get_mpz_t());
  if (to_real(g) > boost::multiprecision::pow(T, delta)) return false;
  const BigInt disc = discriminant(c);
  if (!ge_power(disc, T, 6 - 2 * delta)) return false;
  const auto sq = squarefull_part(disc);
  return sq && to_real(*sq) <= boost::multiprecision::pow(T, 4 * delta);
}

}  // namespace icensus
