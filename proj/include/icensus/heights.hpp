#pragma once

#include <map>
#include <optional>
#include <string>

#include "icensus/point.hpp"

namespace icensus {

/// Heights in nats, normalized so that hhat(P) = lim h(2^n P) / 4^n with
/// h(P) = log max(|num x|, |den x|).
struct HeightProfile {
  Real weil;
  Real canonical;
  /// Local canonical heights keyed "infinity" or a decimal prime; they sum to
  /// `canonical`. Finite places carry +(1/6) v_p(Delta) log p and the
  /// archimedean place -(1/6) log|Delta| relative to the series normalization.
  std::map<std::string, Real> local;
  Real precision_goal;
  /// Certified bound on |canonical - true value| (truncated tails).
  Real error_bound;
};

Real weil_height(const CurvePoint& p);

/// precision_goal in [1e-14, 1e-2]. Archimedean series capped at 500 terms;
/// the cap raises ComputationError instead of truncating.
HeightProfile canonical_height(const CurveModel& c, const CurvePoint& p, const Real& precision_goal);

struct Pairing {
  Real pairing;
  std::optional<Real> cos_angle;  // undefined when either height is below 10 * precision_goal
  Real error_bound;
};

Pairing height_pairing(const CurveModel& c, const CurvePoint& p, const CurvePoint& q, const Real& precision_goal);

struct GapReport {
  Real lhs;       // hhat - h
  Real model;     // log+|Delta^{-1/6} x| + (1/6) log|Delta| - log+|x|
  Real residual;  // lhs - model
};

GapReport height_gap_report(const CurveModel& c, const CurvePoint& p, const Real& precision_goal);

/// (1/6) log|Delta| + (1/6) log+ max(4|A|^3, 27 B^2) + 4.
Real global_difference_bound(const CurveModel& c);

struct PeriodResult {
  Real agm;
  Real quadrature;
};

/// Both evaluations of 2 * int_rho^inf dx / sqrt(x^3 + A x + B).
PeriodResult real_period_both(const CurveModel& c, const Real& precision_goal);
/// The AGM value, after checking agreement with quadrature within precision_goal.
Real real_period(const CurveModel& c, const Real& precision_goal);

}  // namespace icensus
