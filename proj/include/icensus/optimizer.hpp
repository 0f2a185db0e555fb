#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icensus/code_bounds.hpp"

namespace icensus {

/// O(delta) terms are dropped throughout (delta -> 0).
struct OptimizerParams {
  Real c;
  Real D;
  int s = 1;
  Real J_default = Real("1.2");
  std::map<int, Real> J_by_rank;  // overrides of J_default
  bool c_uses_dtilde_squared = true;  // C = 5 Dtilde^2; false gives C = 5 Dtilde

  Real J(int r) const;
};

OptimizerParams reference_params();  // c = 0.998114, D = 612.117, s = 3

/// (D + sqrt(D^2 + 4)) / 2
Real d_tilde(const Real& D);
Real c_constant(const OptimizerParams& p);
/// (9/2 - max(171/C, 171/D^2) - 504/C - 63/D^2) (1 + 1/D)^{-2}
Real kappa(const Real& C, const Real& D);

struct ConstraintCheck {
  bool iv_empty = false;
  bool roth_count = false;
  Real kappa;
  Real iv_lhs;    // must be < 1/2
  Real roth_lhs;  // must be > 2
  std::string reason;  // set when kappa <= 1

  bool ok() const { return iv_empty && roth_count; }
};

ConstraintCheck check_constraints(const OptimizerParams& p);

using CodeFn = std::function<CodeBoundResult(int, const Real&)>;

/// 0, 2, or 2r ceil(log Dtilde / log J_r) floor(code(r, arccos(J_r / 2))) + 9s(3^r - 1).
/// Exact integer. Throws ValidationError unless check_constraints passes.
BigInt per_rank_bound(int r, const OptimizerParams& p, const CodeFn& code = best_code_bound);

struct RankModel {
  enum class Kind { Explicit, Moment } kind = Kind::Explicit;
  std::vector<Rational> probabilities;  // Explicit: p_0, p_1, ...
  std::vector<std::pair<BigInt, Rational>> moment_caps;  // Moment: sum p_r base^r <= cap
  std::optional<Rational> floor_rank0;
  std::optional<Rational> floor_rank1;
  std::optional<Rational> floor_rank01;
  Rational density = 1;  // share of the family the distribution lives on

  void validate() const;
};

RankModel minimalist_model();  // density 8/9, p_0 = p_1 = 1/2
RankModel moment_model();      // caps (3, 4), (5, 6), floors 0.2275 / 0.22821 / 0.8422, density 8/9

struct BoundReport {
  std::map<int, BigInt> per_rank;
  Real aggregate;
  ConstraintCheck constraints;
  OptimizerParams params;
  Real tail_bound;  // contribution of ranks above r_max, already inside aggregate
  int r_max = 0;
  std::vector<Rational> distribution;  // maximizing (moment) or given (explicit) p_r
};

/// Explicit: density * sum p_r b_r. Moment: density * (max over feasible p of
/// sum_{r <= r_max} p_r b_r + sum_{r > r_max} b_r min_caps(cap / base^r)).
BoundReport aggregate_bound(const RankModel& model, const OptimizerParams& p, int r_max,
                            const CodeFn& code = best_code_bound);

struct SearchGrid {
  std::vector<Real> c;
  std::vector<Real> D;
  std::vector<int> s;
  std::vector<Real> J;  // candidates for per-rank J
  int j_min_rank = 2;
  int j_max_rank = 13;
  int r_max = 40;
  int refine_iterations = 40;
};

SearchGrid default_grid();

struct AuditEntry {
  Real c;
  Real D;
  int s;
  Real aggregate;
};

struct OptimizeResult {
  BoundReport best;
  std::vector<AuditEntry> audit;  // every feasible point evaluated, in order
};

/// Grid search over (c, D, s) with per-rank J chosen from grid.J, then
/// coordinate descent with step halving. Ties go to the lexicographically
/// smallest (c, D, s, J-vector).
OptimizeResult optimize(const RankModel& model, const SearchGrid& grid);

/// Per-rank J minimizing b_r over `candidates` at fixed (c, D, s); ties to the smallest J.
OptimizerParams choose_j(const OptimizerParams& p, const std::vector<Real>& candidates, int r_lo, int r_hi);

/// sum_{i,j} e_i e_j G_ij <= sum_i (k - i + 1) G_ii for admissible Gram
/// matrices (symmetric positive definite, nondecreasing diagonal,
/// |G_ij| <= G_mm / 2 with m = min(i, j)).
bool verify_basis_inequality(const std::vector<std::vector<Real>>& gram, const std::vector<int>& signs);

}  // namespace icensus
