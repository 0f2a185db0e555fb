#include "icensus/optimizer.hpp"

#include <algorithm>
#include <mutex>
#include <tuple>

#include <omp.h>

#include "icensus/simplex.hpp"

namespace icensus {
namespace {

using boost::multiprecision::acos;
using boost::multiprecision::log;
using boost::multiprecision::pow;
using boost::multiprecision::sqrt;

BigInt ceil_to_bigint(const Real& v) { return -floor_to_bigint(-v); }

BigInt pow_big(const BigInt& base, unsigned e) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
  return out;
}

// Lexicographic key (c, D, s, J_2, J_3, ...) for deterministic tie-breaks.
bool lex_less(const OptimizerParams& a, const OptimizerParams& b, int r_lo, int r_hi) {
  if (a.c != b.c) return a.c < b.c;
  if (a.D != b.D) return a.D < b.D;
  if (a.s != b.s) return a.s < b.s;
  for (int r = r_lo; r <= r_hi; ++r) {
    if (a.J(r) != b.J(r)) return a.J(r) < b.J(r);
  }
  return false;
}

// Memoizes best_code_bound per (r, theta); safe for concurrent use.
class CodeCache {
 public:
  CodeBoundResult operator()(int r, const Real& theta) {
    const auto key = std::make_pair(r, theta.str(0, std::ios::scientific));
    {
      std::lock_guard<std::mutex> g(lock_);
      if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const CodeBoundResult v = best_code_bound(r, theta);
    std::lock_guard<std::mutex> g(lock_);
    memo_.emplace(key, v);
    return v;
  }

 private:
  std::mutex lock_;
  std::map<std::pair<int, std::string>, CodeBoundResult> memo_;
};

Real tail_sum(const RankModel& m, const OptimizerParams& p, int r_max, const CodeFn& code) {
  if (m.moment_caps.empty()) throw ValidationError("moment model needs at least one cap");
  Real sum = 0;
  Real prev = -1;
  for (int r = r_max + 1; r <= r_max + 5000; ++r) {
    Real w = -1;
    for (const auto& [base, cap] : m.moment_caps) {
      const Real v = to_real(cap) / pow(to_real(base), r);
      if (w < 0 || v < w) w = v;
    }
    const Real term = to_real(per_rank_bound(r, p, code)) * w;
    sum += term;
    if (r > r_max + 10 && term < Real("1e-40") * (1 + sum) && (prev < 0 || term <= prev)) return sum;
    prev = term;
  }
  throw ComputationError("rank tail does not converge: per-rank bounds outgrow the moment caps");
}

}  // namespace

Real OptimizerParams::J(int r) const {
  const auto it = J_by_rank.find(r);
  return it == J_by_rank.end() ? J_default : it->second;
}

OptimizerParams reference_params() {
  OptimizerParams p;
  p.c = Real("0.998114");
  p.D = Real("612.117");
  p.s = 3;
  return p;
}

Real d_tilde(const Real& D) { return (D + sqrt(D * D + 4)) / 2; }

Real c_constant(const OptimizerParams& p) {
  const Real dt = d_tilde(p.D);
  return p.c_uses_dtilde_squared ? Real(5 * dt * dt) : Real(5 * dt);
}

Real kappa(const Real& C, const Real& D) {
  if (!(C > 0 && D > 0)) throw ValidationError("kappa needs C, D > 0");
  const Real d2 = D * D;
  const Real core = Real(9) / 2 - std::max(Real(171 / C), Real(171 / d2)) - 504 / C - 63 / d2;
  const Real shrink = 1 + 1 / D;
  return core / (shrink * shrink);
}

ConstraintCheck check_constraints(const OptimizerParams& p) {
  if (!(p.c > 0 && p.c < 1)) throw ValidationError("c must lie in (0, 1)");
  if (!(p.D > 1)) throw ValidationError("D must exceed 1");
  if (p.s < 1) throw ValidationError("s must be a positive integer");
  ConstraintCheck out;
  const Real C = c_constant(p);
  const Real d2 = p.D * p.D;
  out.iv_lhs = 576 / C + 72 / d2 + std::max(Real(19 / C), Real(19 / d2));
  out.iv_empty = out.iv_lhs < Real(1) / 2;
  out.kappa = kappa(C, p.D);
  if (!(out.kappa > 1)) {
    out.roth_lhs = 0;
    out.roth_count = false;
    out.reason = "kappa <= 1: (kappa - 1)^s undefined for the Roth count";
    return out;
  }
  const Real k = out.kappa;
  const Real inv = 1 / pow(k - 1, p.s);
  const Real dm1 = p.D - 1;
  out.roth_lhs =
      (sqrt(Real(2)) * p.c / 3 - inv) * k - (1 + inv) / (dm1 * dm1) * (9 + (k + 1) / (1 / (p.c * p.c) - 1));
  out.roth_count = out.roth_lhs > 2;
  return out;
}

BigInt per_rank_bound(int r, const OptimizerParams& p, const CodeFn& code) {
  if (r < 0) throw ValidationError("rank must be nonnegative");
  if (!check_constraints(p).ok()) throw ValidationError("parameters fail the constraint system");
  if (r == 0) return 0;
  if (r == 1) return 2;
  const Real J = p.J(r);
  if (!(J > 1 && J < 2)) throw ValidationError("J must lie in (1, 2)");
  const BigInt layers = ceil_to_bigint(log(d_tilde(p.D)) / log(J));
  const CodeBoundResult cb = code(r, acos(J / 2));
  if (!boost::multiprecision::isfinite(cb.bound)) throw ComputationError("code bound is infinite");
  const BigInt points = floor_to_bigint(cb.bound);
  return 2 * BigInt(r) * layers * points + 9 * BigInt(p.s) * (pow_big(3, static_cast<unsigned>(r)) - 1);
}

void RankModel::validate() const {
  if (!(density > 0 && density <= 1)) throw ValidationError("density must lie in (0, 1]");
  if (kind == Kind::Explicit) {
    if (probabilities.empty()) throw ValidationError("explicit model needs probabilities");
    Rational sum = 0;
    for (const auto& q : probabilities) {
      if (q < 0) throw ValidationError("probabilities must be nonnegative");
      sum += q;
    }
    if (abs(sum - 1) > Rational(BigInt(1), BigInt("1000000000000"))) throw ValidationError("probabilities must sum to 1");
    return;
  }
  if (moment_caps.empty()) throw ValidationError("moment model needs at least one cap");
  for (const auto& [base, cap] : moment_caps) {
    if (base < 2) throw ValidationError("moment base must be >= 2");
    if (cap < 1) throw ValidationError("moment caps must be >= 1");
  }
  for (const auto* f : {&floor_rank0, &floor_rank1, &floor_rank01}) {
    if (*f && (**f < 0 || **f > 1)) throw ValidationError("proportion floors must lie in [0, 1]");
  }
}

RankModel minimalist_model() {
  RankModel m;
  m.kind = RankModel::Kind::Explicit;
  m.probabilities = {Rational(1, 2), Rational(1, 2)};
  m.density = Rational(8, 9);
  return m;
}

RankModel moment_model() {
  RankModel m;
  m.kind = RankModel::Kind::Moment;
  m.moment_caps = {{BigInt(3), Rational(4)}, {BigInt(5), Rational(6)}};
  m.floor_rank0 = parse_rational("0.2275");
  m.floor_rank1 = parse_rational("0.22821");
  m.floor_rank01 = parse_rational("0.8422");
  m.density = Rational(8, 9);
  return m;
}

BoundReport aggregate_bound(const RankModel& model, const OptimizerParams& p, int r_max, const CodeFn& code) {
  model.validate();
  BoundReport out;
  out.params = p;
  out.constraints = check_constraints(p);
  if (!out.constraints.ok()) throw ValidationError("parameters fail the constraint system");

  if (model.kind == RankModel::Kind::Explicit) {
    out.r_max = static_cast<int>(model.probabilities.size()) - 1;
    Rational total = 0;
    for (int r = 0; r <= out.r_max; ++r) {
      const Rational& q = model.probabilities[r];
      if (q == 0) continue;  // skip code bounds for empty ranks
      out.per_rank[r] = per_rank_bound(r, p, code);
      total += q * Rational(out.per_rank[r]);
    }
    out.distribution = model.probabilities;
    out.tail_bound = 0;
    out.aggregate = to_real(model.density * total);
    return out;
  }

  if (r_max < 1) throw ValidationError("r_max must be >= 1");
  out.r_max = r_max;
  for (int r = 0; r <= r_max; ++r) out.per_rank[r] = per_rank_bound(r, p, code);

  const auto n = static_cast<std::size_t>(r_max + 1);
  lp::Problem<Rational> prob;
  prob.objective.resize(n);
  for (std::size_t r = 0; r < n; ++r) prob.objective[r] = Rational(out.per_rank[static_cast<int>(r)]);
  prob.add(std::vector<Rational>(n, Rational(1)), lp::Sense::Le, Rational(1));
  for (const auto& [base, cap] : model.moment_caps) {
    std::vector<Rational> row(n);
    for (std::size_t r = 0; r < n; ++r) row[r] = Rational(pow_big(base, static_cast<unsigned>(r)));
    prob.add(std::move(row), lp::Sense::Le, cap);
  }
  auto unit = [n](std::initializer_list<std::size_t> idx) {
    std::vector<Rational> row(n, Rational(0));
    for (auto i : idx) row[i] = 1;
    return row;
  };
  if (model.floor_rank0) prob.add(unit({0}), lp::Sense::Ge, *model.floor_rank0);
  if (model.floor_rank1) prob.add(unit({1}), lp::Sense::Ge, *model.floor_rank1);
  if (model.floor_rank01) prob.add(unit({0, 1}), lp::Sense::Ge, *model.floor_rank01);
  const auto sol = lp::solve(prob, Rational(0));
  if (sol.status != lp::Status::Optimal) throw ValidationError("rank model floors and caps are infeasible");
  out.distribution = sol.x;
  const Real tail = tail_sum(model, p, r_max, code);
  out.tail_bound = to_real(model.density) * tail;
  out.aggregate = to_real(model.density * sol.value) + out.tail_bound;
  return out;
}

SearchGrid default_grid() {
  SearchGrid g;
  for (const char* v : {"0.99", "0.995", "0.998114", "0.999"}) g.c.emplace_back(v);
  for (const char* v : {"150", "200", "300", "400", "500", "612.117", "800", "1000"}) g.D.emplace_back(v);
  g.s = {2, 3, 4, 5};
  for (int i = 1; i <= 19; ++i) g.J.push_back(1 + Real(i) / 20);
  return g;
}

namespace {

OptimizerParams choose_j_with(const OptimizerParams& p, const std::vector<Real>& candidates, int r_lo, int r_hi,
                              const CodeFn& code) {
  OptimizerParams out = p;
  for (int r = std::max(2, r_lo); r <= r_hi; ++r) {
    std::optional<BigInt> best;
    Real best_j;
    for (const Real& j : candidates) {
      OptimizerParams trial = out;
      trial.J_by_rank[r] = j;
      const BigInt b = per_rank_bound(r, trial, code);
      if (!best || b < *best || (b == *best && j < best_j)) {
        best = b;
        best_j = j;
      }
    }
    if (best) out.J_by_rank[r] = best_j;
  }
  return out;
}

}  // namespace

OptimizerParams choose_j(const OptimizerParams& p, const std::vector<Real>& candidates, int r_lo, int r_hi) {
  return choose_j_with(p, candidates, r_lo, r_hi, best_code_bound);
}

OptimizeResult optimize(const RankModel& model, const SearchGrid& grid) {
  if (grid.c.empty() || grid.D.empty() || grid.s.empty() || grid.J.empty()) {
    throw ValidationError("search grid must be nonempty in every coordinate");
  }
  if (grid.refine_iterations < 0) throw ValidationError("refine_iterations must be >= 0");
  model.validate();
  // an explicit model never reads ranks past its last probability
  const int j_hi = model.kind == RankModel::Kind::Explicit
                       ? std::min(grid.j_max_rank, static_cast<int>(model.probabilities.size()) - 1)
                       : grid.j_max_rank;
  std::vector<OptimizerParams> feasible;
  for (const Real& c : grid.c) {
    for (const Real& D : grid.D) {
      for (int s : grid.s) {
        OptimizerParams p;
        p.c = c;
        p.D = D;
        p.s = s;
        if (c > 0 && c < 1 && D > 1 && s >= 1 && check_constraints(p).ok()) feasible.push_back(p);
      }
    }
  }
  if (feasible.empty()) throw ComputationError("no feasible point in the search grid");

  CodeCache cache;
  const CodeFn code = [&cache](int r, const Real& theta) { return cache(r, theta); };

  // code bounds are independent of (c, D, s): warm the cache in parallel
  std::vector<std::pair<int, Real>> warm;
  for (int r = std::max(2, grid.j_min_rank); r <= j_hi; ++r) {
    for (const Real& j : grid.J) warm.emplace_back(r, j);
  }
  const auto nwarm = static_cast<std::int64_t>(warm.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < nwarm; ++i) {
    try {
      cache(warm[i].first, acos(warm[i].second / 2));
    } catch (...) {
      // surfaced again when the point is evaluated
    }
  }

  OptimizeResult out;
  std::optional<BoundReport> best;
  auto consider = [&](const OptimizerParams& p) -> bool {
    if (!(p.c > 0 && p.c < 1 && p.D > 1 && p.s >= 1)) return false;
    if (!check_constraints(p).ok()) return false;
    BoundReport rep = aggregate_bound(model, p, grid.r_max, code);
    out.audit.push_back({p.c, p.D, p.s, rep.aggregate});
    if (!best || rep.aggregate < best->aggregate ||
        (rep.aggregate == best->aggregate && lex_less(p, best->params, grid.j_min_rank, j_hi))) {
      best = std::move(rep);
      return true;
    }
    return false;
  };

  for (const auto& p : feasible) consider(choose_j_with(p, grid.J, grid.j_min_rank, j_hi, code));

  Real c_step("0.0005"), d_step = best->params.D / 8, j_step("0.025");
  for (int it = 0; it < grid.refine_iterations; ++it) {
    for (int sign : {-1, 1}) {
      OptimizerParams p = best->params;
      p.c += sign * c_step;
      consider(p);
    }
    for (int sign : {-1, 1}) {
      OptimizerParams p = best->params;
      p.D += sign * d_step;
      consider(p);
    }
    for (int sign : {-1, 1}) {
      OptimizerParams p = best->params;
      p.s += sign;
      consider(p);
    }
    for (int r = std::max(2, grid.j_min_rank); r <= j_hi; ++r) {
      for (int sign : {-1, 1}) {
        OptimizerParams p = best->params;
        const Real j = p.J(r) + sign * j_step;
        if (!(j > 1 && j < 2)) continue;
        p.J_by_rank[r] = j;
        consider(p);
      }
    }
    c_step /= 2;
    d_step /= 2;
    j_step /= 2;
  }
  out.best = *best;
  return out;
}

bool verify_basis_inequality(const std::vector<std::vector<Real>>& gram, const std::vector<int>& signs) {
  const std::size_t k = gram.size();
  if (k == 0) throw ValidationError("Gram matrix must be nonempty");
  if (signs.size() != k) throw ValidationError("one sign per basis vector required");
  for (int e : signs) {
    if (e != 1 && e != -1) throw ValidationError("signs must be +1 or -1");
  }
  for (const auto& row : gram) {
    if (row.size() != k) throw ValidationError("Gram matrix must be square");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0 && gram[i][i] < gram[i - 1][i - 1]) throw ValidationError("Gram diagonal must be nondecreasing");
    for (std::size_t j = 0; j < k; ++j) {
      if (gram[i][j] != gram[j][i]) throw ValidationError("Gram matrix must be symmetric");
      if (i != j && abs(gram[i][j]) > gram[std::min(i, j)][std::min(i, j)] / 2) {
        throw ValidationError("off-diagonal entry exceeds half the smaller diagonal entry");
      }
    }
  }
  // Cholesky for positive definiteness
  std::vector<std::vector<Real>> l(k, std::vector<Real>(k, Real(0)));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Real v = gram[i][j];
      for (std::size_t t = 0; t < j; ++t) v -= l[i][t] * l[j][t];
      if (i == j) {
        if (!(v > 0)) throw ValidationError("Gram matrix must be positive definite");
        l[i][i] = sqrt(v);
      } else {
        l[i][j] = v / l[j][j];
      }
    }
  }
  Real lhs = 0, rhs = 0, scale = 0;
  for (std::size_t i = 0; i < k; ++i) {
    rhs += Real(static_cast<long>(k - i)) * gram[i][i];
    for (std::size_t j = 0; j < k; ++j) {
      lhs += signs[i] * signs[j] * gram[i][j];
      scale += abs(gram[i][j]);
    }
  }
  return lhs <= rhs + Real("1e-40") * scale;
}

}  // namespace icensus
