#pragma once

#include <string>

#include "icensus/numeric.hpp"

namespace icensus {

enum class CodeMethod { Cap, Rp1, Kl, Lp };

std::string method_token(CodeMethod m);
CodeMethod parse_method(const std::string& token);

/// Bounds on the size of a code in S^{r-1} (or of a set of lines in RP^{r-1})
/// with pairwise angle at least theta.
struct CodeBoundResult {
  int r = 0;
  Real theta;
  CodeMethod method = CodeMethod::Cap;
  Real bound;
  bool certified = false;
};

/// 2 sqrt(3r) sin(theta/2)^{1-r} / cos(theta/2); half of it when projective.
/// r >= 3, theta in (0, pi - 1e-6).
Real cap_bound(int r, const Real& theta, bool projective = false);

/// Gamma((r-1)/2) / Gamma(r/2) and its majorant 2 sqrt(3) / sqrt(pi r) used by the cap bound.
Real cap_gamma_ratio(int r);
Real cap_gamma_majorant(int r);

/// floor(pi / theta) for lines in RP^1, theta in (0, pi/2].
long rp1_bound(const Real& theta);

/// Main-term rate of the Kabatiansky-Levenshtein bound, per dimension;
/// kl_base = exp(rate). theta in (0, pi/2].
Real kl_rate(const Real& theta);
Real kl_base(const Real& theta);

struct KlInverse {
  Real theta;
  Real cos_theta;
};

/// Solves kl_base(theta) = base by bisection (|d theta| <= 1e-12); base in (1, 10].
KlInverse kl_invert(const Real& base);

/// Delsarte LP bound for lines in RP^{r-1} with |<v, w>| <= cos theta, using
/// even normalized Gegenbauer polynomials up to `degree`. The LP is solved on
/// grid_size points of [0, 1] that fall in [0, cos theta]; certification
/// bounds f on a 10x finer grid plus a second-derivative interpolation term
/// and, if f may be positive, shifts the constant term to restore f <= 0.
/// degree < 2 gives the trivial infinite bound.
CodeBoundResult lp_bound(int r, const Real& theta, int degree = 24, int grid_size = 400);

/// Minimum over rp1 (r = 2), projective cap and certified lp (3 <= r <= 16),
/// projective cap alone (r > 16).
CodeBoundResult best_code_bound(int r, const Real& theta);

}  // namespace icensus
