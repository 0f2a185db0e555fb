#include "icensus/point.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <omp.h>

namespace icensus {

bool on_curve(const CurveModel& c, const CurvePoint& p) {
  if (p.identity) return true;
  return p.y * p.y == p.x * p.x * p.x + Rational(c.a) * p.x + Rational(c.b);
}

CurvePoint negate(const CurvePoint& p) {
  if (p.identity) return p;
  return CurvePoint::affine(p.x, Rational(-p.y));
}

CurvePoint add_unchecked(const CurveModel& c, const CurvePoint& p, const CurvePoint& q) {
  if (p.identity) return q;
  if (q.identity) return p;
  Rational lambda;
  if (p.x == q.x) {
    if (p.y == -q.y) return CurvePoint::at_infinity();
    lambda = (3 * p.x * p.x + Rational(c.a)) / (2 * p.y);
  } else {
    lambda = (q.y - p.y) / (q.x - p.x);
  }
  Rational x3 = lambda * lambda - p.x - q.x;
  Rational y3 = lambda * (p.x - x3) - p.y;
  return CurvePoint::affine(std::move(x3), std::move(y3));
}

CurvePoint add(const CurveModel& c, const CurvePoint& p, const CurvePoint& q) {
  if (!on_curve(c, p) || !on_curve(c, q)) throw ValidationError("point not on curve");
  return add_unchecked(c, p, q);
}

CurvePoint scalar_multiple(const CurveModel& c, const CurvePoint& p, long n) {
  CurvePoint base = n < 0 ? negate(p) : p;
  unsigned long k = n < 0 ? 0UL - static_cast<unsigned long>(n) : static_cast<unsigned long>(n);
  CurvePoint acc = CurvePoint::at_infinity();
  while (k > 0) {
    if (k & 1UL) acc = add_unchecked(c, acc, base);
    k >>= 1;
    if (k > 0) base = add_unchecked(c, base, base);
  }
  return acc;
}

bool mod3_obstruction(const CurveModel& c) {
  auto m3 = [](const BigInt& v) {
    BigInt r;
    mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), 3);
    return r.get_ui();
  };
  return m3(c.a) == 2 && m3(c.b) == 2;
}

namespace {

constexpr std::array<unsigned, 4> kModuli{64, 63, 65, 11};

// f(x) = x^3 + A x + B in 128-bit arithmetic; valid while |x| <= 2^40, |A|, |B| < 2^62.
class FastScan {
 public:
  FastScan(std::int64_t a, std::int64_t b) : a_(a), b_(b) {
    for (std::size_t k = 0; k < kModuli.size(); ++k) {
      const unsigned m = kModuli[k];
      std::vector<bool> square(m, false);
      for (unsigned r = 0; r < m; ++r) square[(r * r) % m] = true;
      const auto am = static_cast<std::int64_t>(((a % m) + m) % m);
      const auto bm = static_cast<std::int64_t>(((b % m) + m) % m);
      allowed_[k].assign(m, false);
      for (unsigned r = 0; r < m; ++r) {
        const std::int64_t v = ((static_cast<std::int64_t>(r) * r % m) * r + am * r + bm) % m;
        allowed_[k][r] = square[v];
      }
    }
  }

  void scan(std::int64_t lo, std::int64_t hi, std::vector<IntPoint>& out) const {
    std::array<unsigned, kModuli.size()> res{};
    for (std::size_t k = 0; k < kModuli.size(); ++k) {
      const auto m = static_cast<std::int64_t>(kModuli[k]);
      res[k] = static_cast<unsigned>(((lo % m) + m) % m);
    }
    for (std::int64_t x = lo; x <= hi; ++x) {
      bool pass = allowed_[0][res[0]] && allowed_[1][res[1]] && allowed_[2][res[2]] && allowed_[3][res[3]];
      for (std::size_t k = 0; k < kModuli.size(); ++k) {
        if (++res[k] == kModuli[k]) res[k] = 0;
      }
      if (!pass) continue;
      const __int128 X = x;
      const __int128 f = X * X * X + static_cast<__int128>(a_) * X + b_;
      if (f < 0) continue;
      std::int64_t y = 0;
      if (!square_root(f, y)) continue;
      if (y == 0) {
        out.emplace_back(BigInt(x), BigInt(0));
      } else {
        out.emplace_back(BigInt(x), BigInt(-y));
        out.emplace_back(BigInt(x), BigInt(y));
      }
    }
  }

 private:
  static bool square_root(__int128 f, std::int64_t& root) {
    auto r = static_cast<__int128>(std::sqrt(static_cast<long double>(f)));
    while (r > 0 && r * r > f) --r;
    while ((r + 1) * (r + 1) <= f) ++r;
    root = static_cast<std::int64_t>(r);
    return r * r == f;
  }

  std::int64_t a_;
  std::int64_t b_;
  std::array<std::vector<bool>, kModuli.size()> allowed_;
};

bool fast_eligible(const CurveModel& c, const BigInt& x_bound) {
  const BigInt lim = BigInt(1) << 62;
  return x_bound <= (BigInt(1) << 40) && abs(c.a) < lim && abs(c.b) < lim;
}

void scan_bigint(const CurveModel& c, const BigInt& lo, const BigInt& hi, std::vector<IntPoint>& out) {
  BigInt y;
  for (BigInt x = lo; x <= hi; ++x) {
    const BigInt f = x * x * x + c.a * x + c.b;
    if (f < 0 || !is_perfect_square(f, &y)) continue;
    if (y == 0) {
      out.emplace_back(x, BigInt(0));
    } else {
      out.emplace_back(x, BigInt(-y));
      out.emplace_back(x, y);
    }
  }
}

// Per-curve scan without inner parallelism (census parallelizes over curves).
std::vector<IntPoint> scan_curve(const CurveModel& c, const BigInt& x_bound) {
  std::vector<IntPoint> out;
  if (fast_eligible(c, x_bound)) {
    const std::int64_t xb = x_bound.get_si();
    FastScan(c.a.get_si(), c.b.get_si()).scan(-xb, xb, out);
  } else {
    scan_bigint(c, BigInt(-x_bound), x_bound, out);
  }
  return out;
}

void check_x_bound(const BigInt& x_bound) {
  if (x_bound < 1) throw ValidationError("x_bound must be >= 1");
}

CensusSummary summarize(const std::vector<CensusRow>& rows) {
  CensusSummary s;
  s.curve_count = rows.size();
  for (const auto& r : rows) s.total_points += r.points.size();
  if (s.curve_count == 0) throw ComputationError("empty family slice");
  s.average = Rational(BigInt(static_cast<unsigned long>(s.total_points)),
                       BigInt(static_cast<unsigned long>(s.curve_count)));
  s.average.canonicalize();
  return s;
}

}  // namespace

std::vector<IntPoint> integral_points(const CurveModel& c, const BigInt& x_bound) {
  check_x_bound(x_bound);
  if (!fast_eligible(c, x_bound)) {
    std::vector<IntPoint> out;
    scan_bigint(c, BigInt(-x_bound), x_bound, out);
    return out;
  }
  const std::int64_t xb = x_bound.get_si();
  const FastScan kernel(c.a.get_si(), c.b.get_si());
  constexpr std::int64_t kChunk = 1 << 16;
  const std::int64_t span = 2 * xb + 1;
  const std::int64_t chunks = (span + kChunk - 1) / kChunk;
  std::vector<std::vector<IntPoint>> parts(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < chunks; ++i) {
    const std::int64_t lo = -xb + i * kChunk;
    kernel.scan(lo, std::min(lo + kChunk - 1, xb), parts[i]);
  }
  std::vector<IntPoint> out;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

BigInt default_x_bound(const CurveModel& c) {
  const BigInt h6 = naive_height_sixth(c.a, c.b);
  BigInt h2;
  if (mpz_root(h2.get_mpz_t(), h6.get_mpz_t(), 3) == 0) ++h2;
  return std::max(BigInt(10000), h2);
}

CensusResult census_curves(const std::vector<CurveModel>& curves, const std::optional<BigInt>& x_bound) {
  if (x_bound) check_x_bound(*x_bound);
  std::vector<CensusRow> rows(curves.size());
  const auto n = static_cast<std::int64_t>(curves.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const CurveModel& c = curves[i];
    BigInt xb = x_bound ? *x_bound : default_x_bound(c);
    rows[i].points = scan_curve(c, xb);
    rows[i].curve = c;
    rows[i].x_bound_used = std::move(xb);
  }
  CensusResult out;
  out.summary = summarize(rows);
  out.rows = std::move(rows);
  return out;
}

CensusResult census(Family f, const Real& T, const std::optional<BigInt>& x_bound) {
  return census_curves(enumerate_family(f, T), x_bound);
}

SmallPointStats small_point_statistics(Family f, const Real& T, const Real& exponent) {
  if (!(exponent >= 0 && exponent <= 6)) throw ValidationError("exponent must lie in [0, 6]");
  SmallPointStats s;
  s.x_bound = std::max(BigInt(1), floor_to_bigint(boost::multiprecision::pow(T, exponent)));
  const auto curves = enumerate_family(f, T);
  if (curves.empty()) throw ComputationError("empty family slice");
  std::uint64_t triples = 0;
  const auto n = static_cast<std::int64_t>(curves.size());
#pragma omp parallel for reduction(+ : triples) schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) triples += scan_curve(curves[i], s.x_bound).size();
  s.triple_count = triples;
  s.family_size = curves.size();
  s.ratio = Real(s.triple_count) / Real(s.family_size);
  return s;
}

namespace serial {

std::vector<IntPoint> integral_points(const CurveModel& c, const BigInt& x_bound) {
  check_x_bound(x_bound);
  std::vector<IntPoint> out;
  scan_bigint(c, BigInt(-x_bound), x_bound, out);
  return out;
}

CensusResult census_curves(const std::vector<CurveModel>& curves, const std::optional<BigInt>& x_bound) {
  std::vector<CensusRow> rows;
  rows.reserve(curves.size());
  for (const auto& c : curves) {
    BigInt xb = x_bound ? *x_bound : default_x_bound(c);
    rows.push_back({c, serial::integral_points(c, xb), xb});
  }
  CensusResult out;
  out.summary = summarize(rows);
  out.rows = std::move(rows);
  return out;
}

}  // namespace serial
}  // namespace icensus
