#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "icensus/heights.hpp"

namespace icensus {

struct PairStat {
  CurveModel curve;
  IntPoint p;
  IntPoint r;
  Real h_p;       // Weil heights
  Real h_r;
  Real hhat_sum;  // hhat(P + R)
  Real excess;    // hhat(P + R) - 2 max(h_p, h_r) - min(h_p, h_r)
  std::optional<Real> cos_angle;  // undefined when either hhat < 10 * precision_goal
};

/// Rejects P = R and P = -R.
PairStat gap_excess(const CurveModel& c, const IntPoint& p, const IntPoint& r, const Real& precision_goal);

/// cos_angle - (1/2) max(sqrt(h_p / h_r), sqrt(h_r / h_p)); nullopt when
/// cos_angle is undefined or a Weil height vanishes.
std::optional<Real> cos_excess(const PairStat& s);

/// 20 equal bins on [lo, hi); values outside are clamped into the end bins.
/// Pairs without a defined cos excess go to `undefined`.
struct CosHistogram {
  static constexpr double lo = -2.0;
  static constexpr double hi = 0.5;
  std::array<std::uint64_t, 20> bins{};
  std::uint64_t undefined = 0;

  void add(const std::optional<Real>& v);
  void merge(const CosHistogram& o);
  std::uint64_t mass() const;
};

struct SurveyOptions {
  Real min_height = 0;  // both Weil heights must reach this
  Real precision_goal = Real("1e-8");
  bool bullet_only = false;  // keep only curves passing every F_bullet flag at delta
  Real delta = Real("0.1");
  std::size_t worst_count = 100;
};

struct SurveyResult {
  std::uint64_t curve_count = 0;  // curves surveyed (after filtering)
  std::uint64_t pair_count = 0;
  std::optional<Real> max_excess;
  std::optional<Real> max_cos_excess;
  CosHistogram cos_histogram;
  std::vector<PairStat> worst;  // by excess, descending
};

/// (5 - delta) log T
Real gap_min_height(const Real& T, const Real& delta);

SurveyResult survey_curves(const std::vector<CurveModel>& curves, const Real& T, const BigInt& x_bound,
                           const SurveyOptions& opts);
SurveyResult repulsion_survey(Family f, const Real& T, const BigInt& x_bound, const SurveyOptions& opts);

namespace serial {
SurveyResult survey_curves(const std::vector<CurveModel>& curves, const Real& T, const BigInt& x_bound,
                           const SurveyOptions& opts);
}  // namespace serial

}  // namespace icensus
