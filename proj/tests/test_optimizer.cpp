#include <doctest.h>

#include <random>

#include "icensus/optimizer.hpp"

using namespace icensus;
using boost::multiprecision::acos;
using boost::multiprecision::ceil;
using boost::multiprecision::log;
using boost::multiprecision::pow;
using boost::multiprecision::sqrt;

namespace {

// rp1 in rank 2, projective cap above: no LP solves, so the tests stay fast
CodeBoundResult fast_code(int r, const Real& theta) {
  CodeBoundResult out;
  out.r = r;
  out.theta = theta;
  out.certified = true;
  if (r == 2) {
    out.method = CodeMethod::Rp1;
    out.bound = Real(rp1_bound(theta));
  } else {
    out.bound = cap_bound(r, theta, true);
  }
  return out;
}

// largest root of x^2 - D x - 1 by Newton from above
Real d_tilde_oracle(const Real& D) {
  Real x = D + 1;
  for (int i = 0; i < 200; ++i) x -= (x * x - D * x - 1) / (2 * x - D);
  return x;
}

Real kappa_oracle(const Real& C, const Real& D) {
  const Real a = 171 / C, b = 171 / (D * D);
  return (Real(9) / 2 - (a > b ? a : b) - 504 / C - 63 / (D * D)) / ((1 + 1 / D) * (1 + 1 / D));
}

// exact max of obj . x over {A x <= b, x >= 0} by enumerating vertices
std::optional<Rational> lp_by_vertices(const std::vector<Rational>& obj, std::vector<std::vector<Rational>> A,
                                       std::vector<Rational> b) {
  const std::size_t n = obj.size();
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> row(n, Rational(0));
    row[j] = -1;
    A.push_back(row);
    b.push_back(0);
  }
  const std::size_t m = A.size();
  std::optional<Rational> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
    if (depth == n) {
      std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n + 1));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) M[i][j] = A[pick[i]][j];
        M[i][n] = b[pick[i]];
      }
      for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && M[piv][col] == 0) ++piv;
        if (piv == n) return;
        std::swap(M[piv], M[col]);
        for (std::size_t i = 0; i < n; ++i) {
          if (i == col || M[i][col] == 0) continue;
          const Rational f = M[i][col] / M[col][col];
          for (std::size_t j = col; j <= n; ++j) M[i][j] -= f * M[col][j];
        }
      }
      std::vector<Rational> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
      for (std::size_t i = 0; i < m; ++i) {
        Rational lhs = 0;
        for (std::size_t j = 0; j < n; ++j) lhs += A[i][j] * x[j];
        if (lhs > b[i]) return;
      }
      Rational v = 0;
      for (std::size_t j = 0; j < n; ++j) v += obj[j] * x[j];
      if (!best || v > *best) best = v;
      return;
    }
    for (std::size_t i = from; i < m; ++i) {
      pick[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

bool positive_definite(const std::vector<std::vector<double>>& g) {
  const std::size_t k = g.size();
  std::vector<std::vector<double>> l(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = g[i][j];
      for (std::size_t t = 0; t < j; ++t) s -= l[i][t] * l[j][t];
      if (i == j) {
        if (s <= 1e-9) return false;
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("d tilde") {
  CHECK(abs(d_tilde(Real(1)) - (1 + sqrt(Real(5))) / 2) < Real("1e-45"));
  for (const char* d : {"1.5", "10", "612.117"}) {
    const Real D(d);
    const Real t = d_tilde(D);
    CHECK(abs(t * t / ((t * t - 1) * (t * t - 1)) - 1 / (D * D)) < Real("1e-30"));
    CHECK(abs(t - d_tilde_oracle(D)) < Real("1e-40"));
  }
  // frozen from d_tilde_oracle
  CHECK(abs(d_tilde(Real("612.117")) - Real("612.11863367024787993")) < Real("1e-17"));
}

TEST_CASE("kappa") {
  const Real D("612.117");
  const Real C = 5 * pow(d_tilde(D), 2);
  const Real k = kappa(C, D);
  CHECK(abs(k - kappa_oracle(C, D)) < Real("1e-45"));
  CHECK(k > 4);
  CHECK(k < Real("4.5"));
  // frozen from kappa_oracle
  CHECK(abs(k - Real("4.48444224879105022982")) < Real("1e-18"));
  CHECK(abs(kappa(Real("1e40"), Real("1e40")) - Real("4.5")) < Real("1e-30"));
  // frozen from kappa_oracle; the Roth constraint cannot hold this far down
  const Real k10 = kappa(5 * pow(d_tilde(Real(10)), 2), Real(10));
  CHECK(abs(k10 - Real("0.96832206737777575904950569831755")) < Real("1e-30"));
  CHECK(k10 < 2);
  CHECK_THROWS_AS(kappa(Real(0), Real(3)), ValidationError);
}

TEST_CASE("kappa increases in C and D") {
  std::vector<Real> pts;
  for (int i = 0; i <= 30; ++i) pts.push_back(5 * pow(Real(2 * 1000 * 1000), Real(i) / 30));
  auto bracket = [](const Real& C, const Real& D) { return kappa(C, D) * (1 + 1 / D) * (1 + 1 / D); };
  int d_checked = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 1; j < pts.size(); ++j) {
      CHECK(kappa(pts[j], pts[i]) > kappa(pts[j - 1], pts[i]));
      // in D only while the bracket is positive: below that the shrinking (1 + 1/D)^-2 wins
      if (bracket(pts[i], pts[j - 1]) > 0) {
        CHECK(kappa(pts[i], pts[j]) > kappa(pts[i], pts[j - 1]));
        ++d_checked;
      }
    }
  }
  CHECK(d_checked > 600);
}

TEST_CASE("constraint system") {
  const auto ok = check_constraints(reference_params());
  CHECK(ok.iv_empty);
  CHECK(ok.roth_count);
  CHECK(ok.iv_lhs < Real("0.5"));
  CHECK(ok.roth_lhs > 2);

  OptimizerParams p = reference_params();
  p.D = 2;
  CHECK_FALSE(check_constraints(p).iv_empty);

  p = reference_params();
  p.c = Real("0.1");
  CHECK_FALSE(check_constraints(p).roth_count);

  p = reference_params();
  p.c_uses_dtilde_squared = false;
  CHECK_FALSE(check_constraints(p).ok());

  p = reference_params();
  p.D = Real("1.5");
  const auto low = check_constraints(p);
  CHECK_FALSE(low.roth_count);
  CHECK_FALSE(low.reason.empty());

  p = reference_params();
  p.c = 1;
  CHECK_THROWS_AS(check_constraints(p), ValidationError);
}

TEST_CASE("per-rank bound") {
  OptimizerParams p = reference_params();
  CHECK(per_rank_bound(0, p) == 0);
  CHECK(per_rank_bound(1, p) == 2);

  p.J_default = 1;
  CHECK_THROWS_AS(per_rank_bound(2, p), ValidationError);

  p = reference_params();
  p.J_default = Real("1.2");
  const long code = rp1_bound(acos(Real("0.6")));
  CHECK(code == 3);
  const Real layers = ceil(log(d_tilde(p.D)) / log(Real("1.2")));
  const BigInt expect = BigInt(4) * floor_to_bigint(layers) * code + 9 * 3 * 8;
  CHECK(per_rank_bound(2, p) == expect);

  p.J_by_rank[2] = Real("1.5");
  CHECK(per_rank_bound(2, p) != expect);

  p = reference_params();
  p.D = 2;
  CHECK_THROWS_AS(per_rank_bound(2, p), ValidationError);
}

TEST_CASE("explicit aggregation") {
  const auto m = aggregate_bound(minimalist_model(), reference_params(), 40);
  CHECK(abs(m.aggregate - Real(8) / 9) < Real("1e-12"));

  RankModel point;
  point.probabilities = {Rational(1)};
  CHECK(aggregate_bound(point, reference_params(), 40).aggregate == 0);

  RankModel a, b, mix;
  a.probabilities = {Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  b.probabilities = {Rational(1, 10), Rational(3, 10), Rational(1, 5), Rational(2, 5)};
  const Rational w(1, 3);
  for (std::size_t r = 0; r < 4; ++r) {
    const Rational pa = r < a.probabilities.size() ? a.probabilities[r] : Rational(0);
    mix.probabilities.push_back(w * pa + (1 - w) * b.probabilities[r]);
  }
  const auto ra = aggregate_bound(a, reference_params(), 40, fast_code);
  const auto rb = aggregate_bound(b, reference_params(), 40, fast_code);
  const auto rm = aggregate_bound(mix, reference_params(), 40, fast_code);
  CHECK(abs(rm.aggregate - (to_real(w) * ra.aggregate + to_real(1 - w) * rb.aggregate)) < Real("1e-35"));

  Rational direct = 0;
  for (const auto& [r, v] : rb.per_rank) direct += b.probabilities[r] * Rational(v);
  CHECK(abs(rb.aggregate - to_real(direct)) < Real("1e-35"));

  RankModel bad;
  bad.probabilities = {Rational(1, 2), Rational(1, 3)};
  CHECK_THROWS_AS(aggregate_bound(bad, reference_params(), 40), ValidationError);
}

TEST_CASE("moment LP agrees with vertex enumeration") {
  const RankModel m = moment_model();
  const int r_max = 3;
  const auto rep = aggregate_bound(m, reference_params(), r_max, fast_code);

  std::vector<Rational> obj;
  for (int r = 0; r <= r_max; ++r) obj.push_back(Rational(rep.per_rank.at(r)));
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  A.push_back(std::vector<Rational>(r_max + 1, Rational(1)));
  b.push_back(1);
  for (const auto& [base, cap] : m.moment_caps) {
    std::vector<Rational> row;
    Rational pw = 1;
    for (int r = 0; r <= r_max; ++r, pw *= Rational(base)) row.push_back(pw);
    A.push_back(row);
    b.push_back(cap);
  }
  auto floor_row = [&](std::vector<int> idx, const Rational& f) {
    std::vector<Rational> row(r_max + 1, Rational(0));
    for (int i : idx) row[i] = -1;
    A.push_back(row);
    b.push_back(-f);
  };
  floor_row({0}, *m.floor_rank0);
  floor_row({1}, *m.floor_rank1);
  floor_row({0, 1}, *m.floor_rank01);
  const auto best = lp_by_vertices(obj, A, b);
  REQUIRE(best);
  const Real lp_part = (rep.aggregate - rep.tail_bound) / to_real(m.density);
  CHECK(abs(lp_part - to_real(*best)) < Real("1e-35"));
}

TEST_CASE("moment model at the reference parameters") {
  const auto rep = aggregate_bound(moment_model(), reference_params(), 40);
  CHECK(boost::multiprecision::isfinite(rep.aggregate));
  CHECK(rep.aggregate > 0);
  CHECK(rep.aggregate < 100);
  CHECK(rep.tail_bound >= 0);
  Rational mass = 0;
  for (const auto& q : rep.distribution) mass += q;
  CHECK(mass <= 1);
}

TEST_CASE("tightening a moment cap never raises the aggregate") {
  std::mt19937_64 rng(20261016);
  std::uniform_int_distribution<int> num(0, 40);
  for (int trial = 0; trial < 20; ++trial) {
    RankModel m;
    m.kind = RankModel::Kind::Moment;
    m.moment_caps = {{BigInt(3), Rational(10 + num(rng), 10)}, {BigInt(5), Rational(20 + num(rng), 10)}};
    m.density = Rational(8, 9);
    if (trial % 2 == 0) m.floor_rank0 = Rational(num(rng), 200);
    const auto loose = aggregate_bound(m, reference_params(), 12, fast_code);
    RankModel tight = m;
    const std::size_t which = trial % 2;
    tight.moment_caps[which].second = 1 + (m.moment_caps[which].second - 1) * Rational(num(rng), 40);
    const auto t = aggregate_bound(tight, reference_params(), 12, fast_code);
    CHECK(t.aggregate <= loose.aggregate + Real("1e-30"));
  }
}

TEST_CASE("rank model validation") {
  RankModel m = moment_model();
  m.moment_caps[0].second = Rational(1, 2);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = moment_model();
  m.density = 0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = moment_model();
  m.floor_rank0 = Rational(3, 2);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = moment_model();
  m.floor_rank0 = Rational(9, 10);
  m.floor_rank1 = Rational(9, 10);
  CHECK_THROWS_AS(aggregate_bound(m, reference_params(), 10, fast_code), ValidationError);
}

TEST_CASE("optimize on a singleton grid returns the point") {
  SearchGrid g;
  g.c = {Real("0.998114")};
  g.D = {Real("612.117")};
  g.s = {3};
  g.J = {Real("1.2")};
  g.refine_iterations = 0;
  const auto res = optimize(moment_model(), g);
  CHECK(res.best.params.c == Real("0.998114"));
  CHECK(res.best.params.D == Real("612.117"));
  CHECK(res.best.params.s == 3);
  const auto direct = aggregate_bound(moment_model(), reference_params(), g.r_max);
  CHECK(abs(res.best.aggregate - direct.aggregate) < Real("1e-35"));
  REQUIRE(res.audit.size() == 1);
}

TEST_CASE("optimize dominates its audit log") {
  SearchGrid g;
  g.c = {Real("0.995"), Real("0.998114")};
  g.D = {Real(400), Real("612.117")};
  g.s = {2, 3};
  g.J = {Real("1.3"), Real("1.5"), Real("1.7")};
  g.j_max_rank = 6;
  g.r_max = 20;
  g.refine_iterations = 3;
  const auto res = optimize(moment_model(), g);
  REQUIRE(!res.audit.empty());
  for (const auto& a : res.audit) CHECK(res.best.aggregate <= a.aggregate);
  CHECK(res.best.constraints.ok());

  g.D = {Real(2)};
  CHECK_THROWS_AS(optimize(moment_model(), g), ComputationError);
  g.D.clear();
  CHECK_THROWS_AS(optimize(moment_model(), g), ValidationError);
}

TEST_CASE("choose_j picks the per-rank minimizer") {
  const std::vector<Real> cands = {Real("1.3"), Real("1.5"), Real("1.7")};
  const auto p = choose_j(reference_params(), cands, 2, 4);
  for (int r = 2; r <= 4; ++r) {
    const BigInt chosen = per_rank_bound(r, p);
    for (const auto& j : cands) {
      OptimizerParams q = p;
      q.J_by_rank[r] = j;
      CHECK(chosen <= per_rank_bound(r, q));
    }
  }
}

TEST_CASE("basis inequality") {
  CHECK(verify_basis_inequality({{Real(3)}}, {1}));
  CHECK(verify_basis_inequality({{Real(1), 0, 0}, {0, Real(2), 0}, {0, 0, Real(5)}}, {1, -1, 1}));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 10000) {
    const std::size_t k = 1 + rng() % 6;
    std::vector<double> diag(k);
    for (auto& d : diag) d = 1 + 9 * u(rng);
    std::sort(diag.begin(), diag.end());
    std::vector<std::vector<double>> g(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      g[i][i] = diag[i];
      for (std::size_t j = 0; j < i; ++j) g[i][j] = g[j][i] = (u(rng) - 0.5) * diag[j];
    }
    if (!positive_definite(g)) continue;
    std::vector<std::vector<Real>> G(k, std::vector<Real>(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) G[i][j] = Real(g[i][j]);
    }
    std::vector<int> signs(k);
    for (auto& e : signs) e = (rng() & 1) ? 1 : -1;
    CHECK(verify_basis_inequality(G, signs));
    ++checked;
  }

  CHECK_THROWS_AS(verify_basis_inequality({{Real(2), 0}, {0, Real(1)}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(verify_basis_inequality({{Real(1), Real(1)}, {Real(1), Real(2)}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(verify_basis_inequality({{Real(1)}}, {2}), ValidationError);
  CHECK_THROWS_AS(verify_basis_inequality({{Real(1)}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(verify_basis_inequality({}, {}), ValidationError);
}
