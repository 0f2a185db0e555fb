#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icensus/point.hpp"

namespace icensus {

/// One monomial c * x^fx * A^fA * B^fB of a division polynomial.
struct DivTerm {
  unsigned fx;
  unsigned fA;
  unsigned fB;
  BigInt coeff;
};

/// psi_n = y^{y_factor} * phi_n(x, A, B) with phi_n weighted homogeneous
/// (x:1, A:2, B:3) of weight `weight`. Terms are sorted by (fx desc, fA, fB)
/// and carry no zero coefficients.
struct DivPoly {
  unsigned n = 0;
  unsigned y_factor = 0;
  unsigned weight = 0;
  std::vector<DivTerm> terms;

  BigInt coeff(unsigned fx, unsigned fA, unsigned fB) const;
  unsigned x_degree() const;
  /// Coefficient of x^{x_degree}.
  BigInt leading_x_coeff() const;
  /// phi_n as a polynomial in x for a fixed curve, lowest degree first.
  std::vector<BigInt> x_coefficients(const CurveModel& c) const;
  /// phi_n(x) for a fixed curve (y factor not applied).
  Rational eval_stripped(const CurveModel& c, const Rational& x) const;
};

inline constexpr unsigned kDefaultNMax = 64;

/// Cached; reads and writes $INTEGRAL_CENSUS_CACHE/psi_<n>.json when set.
std::shared_ptr<const DivPoly> psi(unsigned n, unsigned n_max = kDefaultNMax);

namespace serial {
/// Uncached recursion (reference for the cache and the benchmark).
DivPoly psi(unsigned n);
}  // namespace serial

/// n*P through psi-values at P; Identity when psi_n(P) = 0.
CurvePoint multiply_point(const CurveModel& c, const CurvePoint& p, unsigned n, unsigned n_max = kDefaultNMax);

/// Denominator of x(nP) in lowest terms; nullopt when nP is the identity.
std::optional<BigInt> denominator_of_multiple(const CurveModel& c, const CurvePoint& p, unsigned n,
                                              unsigned n_max = kDefaultNMax);

struct CoeffGrowthReport {
  Real worst_ratio;
  unsigned witness_n = 0;
  DivTerm witness_term{};
  bool all_within = false;
};

/// Checks |C_f| <= K1 n^K2 K3^{(log n)^2 (2 floor((n^2-1)/4) - f_x)} for 2 <= n <= n_max.
CoeffGrowthReport verify_coeff_growth(unsigned n_max, const Real& K1, const Real& K2, const Real& K3);

/// psi_3^2 x - psi_2 psi_4 - psi_3^2 x_R in x for a fixed curve, lowest degree first.
std::vector<Rational> triple_root_polynomial(const CurveModel& c, const Rational& x_r);

/// Compares psi_3(x0)^2 (x(3Q)|_{x0} - x(R)) with triple_root_polynomial at
/// sample_count random rationals x0 (poles resampled); x(3Q) is computed from
/// the duplication and addition formulas, not from psi.
bool triple_root_identity_check(const CurveModel& c, const CurvePoint& r, unsigned sample_count,
                                std::uint64_t seed = 1);

}  // namespace icensus
