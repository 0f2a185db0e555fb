#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "icensus/curve.hpp"

namespace icensus {

/// Identity, or an affine point with exact rational coordinates.
struct CurvePoint {
  bool identity = true;
  Rational x;
  Rational y;

  static CurvePoint at_infinity() { return {}; }
  static CurvePoint affine(Rational x, Rational y) { return {false, std::move(x), std::move(y)}; }

  friend bool operator==(const CurvePoint& l, const CurvePoint& r) {
    if (l.identity || r.identity) return l.identity == r.identity;
    return l.x == r.x && l.y == r.y;
  }
};

using IntPoint = std::pair<BigInt, BigInt>;

inline CurvePoint to_point(const IntPoint& p) { return CurvePoint::affine(Rational(p.first), Rational(p.second)); }

bool on_curve(const CurveModel& c, const CurvePoint& p);
CurvePoint negate(const CurvePoint& p);
/// Chord-tangent law. Throws ValidationError when an input is off the curve.
CurvePoint add(const CurveModel& c, const CurvePoint& p, const CurvePoint& q);
/// Same law without the on-curve check (hot loops that already validated).
CurvePoint add_unchecked(const CurveModel& c, const CurvePoint& p, const CurvePoint& q);
/// Double-and-add; n may be negative.
CurvePoint scalar_multiple(const CurveModel& c, const CurvePoint& p, long n);

/// True iff (A mod 3, B mod 3) = (2, 2).
bool mod3_obstruction(const CurveModel& c);

/// All integral (x, y) with |x| <= x_bound, sorted by (x, y). OpenMP over x chunks.
std::vector<IntPoint> integral_points(const CurveModel& c, const BigInt& x_bound);

struct CensusRow {
  CurveModel curve;
  std::vector<IntPoint> points;
  BigInt x_bound_used;
  std::size_t integral_count() const { return points.size(); }
};

struct CensusSummary {
  std::uint64_t total_points = 0;
  std::uint64_t curve_count = 0;
  Rational average;
};

struct CensusResult {
  std::vector<CensusRow> rows;
  CensusSummary summary;
};

/// max(10^4, ceil(H^2)) for the given curve.
BigInt default_x_bound(const CurveModel& c);

/// One row per enumerated curve; x_bound nullopt selects default_x_bound per curve.
/// Throws ComputationError("empty family slice") when no curve has height <= T.
CensusResult census(Family f, const Real& T, const std::optional<BigInt>& x_bound);
/// Census over an explicit curve list (used for filtered slices).
CensusResult census_curves(const std::vector<CurveModel>& curves, const std::optional<BigInt>& x_bound);

struct SmallPointStats {
  std::uint64_t triple_count = 0;
  std::uint64_t family_size = 0;
  Real ratio;
  BigInt x_bound;
};

/// Triples (x, y, E) with |x| <= floor(T^exponent), exponent in [0, 6].
SmallPointStats small_point_statistics(Family f, const Real& T, const Real& exponent);

namespace serial {
std::vector<IntPoint> integral_points(const CurveModel& c, const BigInt& x_bound);
CensusResult census_curves(const std::vector<CurveModel>& curves, const std::optional<BigInt>& x_bound);
}  // namespace serial

}  // namespace icensus
