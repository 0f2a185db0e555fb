#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icensus/factor.hpp"
#include "icensus/numeric.hpp"

namespace icensus {

/// y^2 = x^3 + a x + b
struct CurveModel {
  BigInt a;
  BigInt b;

  friend bool operator==(const CurveModel& l, const CurveModel& r) { return l.a == r.a && l.b == r.b; }
  friend bool operator<(const CurveModel& l, const CurveModel& r) {
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  }
};

enum class Family { Universal, Mordell, B0, Congruent };

Family parse_family(const std::string& token);
const char* family_token(Family f);

BigInt discriminant(const BigInt& a, const BigInt& b);
inline BigInt discriminant(const CurveModel& c) { return discriminant(c.a, c.b); }

/// max(4|a|^3, 27 b^2); the sixth power of the naive height.
BigInt naive_height_sixth(const BigInt& a, const BigInt& b);
Real naive_height(const BigInt& a, const BigInt& b);
inline Real naive_height(const CurveModel& c) { return naive_height(c.a, c.b); }

/// floor(T^6), nudged up by a relative 1e-30 so that T = k^{1/6} typed at
/// 50 digits still admits curves with H^6 = k.
BigInt height_cutoff_sixth(const Real& T);

bool is_family_member(const CurveModel& c, Family f);

/// Members with naive height <= T in lexicographic (a, b) order. OpenMP over a.
std::vector<CurveModel> enumerate_family(Family f, const Real& T);

/// Closed-form count (inclusion-exclusion per a); never materializes the family.
std::uint64_t count_family(Family f, const Real& T);

/// Smallest naive height^6 in the family (for "empty slice" messages).
BigInt smallest_member_height_sixth(Family f);

namespace serial {
/// Reference: nested loop over the coefficient box, filtered by is_family_member.
std::vector<CurveModel> enumerate_family(Family f, const Real& T);
}  // namespace serial

/// Conditions of the F_bullet and F_star subfamilies. Each flag is true when
/// the curve satisfies the condition.
struct FilterDiagnostics {
  bool a_large = false;            // |A| >= T^{2-delta}
  bool b_large_nonsquare = false;  // |B| >= T^{3-delta}, B not a square
  bool gcd_small = false;          // gcd(A, B) <= T^delta
  bool disc_large = false;         // |Delta| >= T^{6-2 delta}
  std::optional<bool> squarefull_small;  // sqfull(Delta) <= T^{4 delta}; nullopt: unfactored
  std::optional<bool> no_small_integral;  // nullopt when the search was skipped
  std::optional<bool> no_small_rational;
  std::optional<bool> torsion_trivial;  // never evaluated
  Real delta;
  Real T;

  bool passes_bullet() const {
    return a_large && b_large_nonsquare && gcd_small && disc_large && squarefull_small.value_or(false);
  }
};

struct FilterOptions {
  bool search_integral = true;
  bool search_rational = true;
  FactorOptions factor;
};

FilterDiagnostics filter_diagnostics(const CurveModel& c, const Real& T, const Real& delta,
                                     const FilterOptions& opts = {});

/// Same verdict as filter_diagnostics(...).passes_bullet(), evaluated lazily
/// (stops at the first failing flag; no membership check).
bool passes_bullet_filter(const CurveModel& c, const Real& T, const Real& delta);

}  // namespace icensus
