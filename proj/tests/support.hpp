#pragma once

#include <random>
#include <vector>

#include "icensus/point.hpp"

namespace icensus::testing {

/// A curve with two known integral points (x0, y0), (x0 + 1, y1); the
/// coefficient A is integral because the x-gap is 1.
struct SeededCurve {
  CurveModel curve;
  CurvePoint p1;
  CurvePoint p2;
};

inline SeededCurve random_curve(std::mt19937_64& rng, long span = 6) {
  std::uniform_int_distribution<long> d(-span, span);
  for (;;) {
    const long x0 = d(rng), y0 = d(rng), y1 = d(rng);
    const long x1 = x0 + 1;
    const long a = (y1 * y1 - y0 * y0) - (x1 * x1 * x1 - x0 * x0 * x0);
    const long b = y0 * y0 - x0 * x0 * x0 - a * x0;
    CurveModel c{BigInt(a), BigInt(b)};
    if (discriminant(c) == 0) continue;
    CurvePoint p = CurvePoint::affine(Rational(x0), Rational(y0));
    CurvePoint q = CurvePoint::affine(Rational(x1), Rational(y1));
    return {c, p, q};
  }
}

/// Small combinations i P1 + j P2 with |i|, |j| <= 2, identity skipped.
inline std::vector<CurvePoint> small_combinations(const SeededCurve& s) {
  std::vector<CurvePoint> out;
  for (long i = -2; i <= 2; ++i) {
    for (long j = -2; j <= 2; ++j) {
      CurvePoint v = add_unchecked(s.curve, scalar_multiple(s.curve, s.p1, i), scalar_multiple(s.curve, s.p2, j));
      if (!v.identity) out.push_back(v);
    }
  }
  return out;
}

/// Random non-identity rational point on a random curve.
inline std::pair<CurveModel, CurvePoint> random_curve_point(std::mt19937_64& rng) {
  for (;;) {
    const SeededCurve s = random_curve(rng);
    const auto pts = small_combinations(s);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    const CurvePoint& p = pts[pick(rng)];
    if (mpz_sizeinbase(p.x.get_den().get_mpz_t(), 2) < 40) return {s.curve, p};
  }
}

}  // namespace icensus::testing
