#include <doctest.h>

#include <random>

#include "icensus/divpoly.hpp"
#include "icensus/heights.hpp"
#include "support.hpp"

using namespace icensus;
using icensus::testing::random_curve;
using icensus::testing::random_curve_point;
using icensus::testing::small_combinations;

namespace {

const Real kGoal("1e-10");

CurvePoint pt(const Rational& x, const Rational& y) { return CurvePoint::affine(x, y); }

Real hhat(const CurveModel& c, const CurvePoint& p) {
  if (p.identity) return Real(0);
  return canonical_height(c, p, kGoal).canonical;
}

unsigned vp(BigInt v, const BigInt& p) {
  unsigned e = 0;
  while (v != 0 && mpz_divisible_p(v.get_mpz_t(), p.get_mpz_t()) != 0) {
    v /= p;
    ++e;
  }
  return e;
}

bool divides(const BigInt& p, const Rational& r) {
  // r is p-integral and p | r
  return r == 0 || (vp(r.get_num(), p) > 0 && vp(r.get_den(), p) == 0);
}

}  // namespace

TEST_CASE("weil height examples") {
  CHECK(abs(weil_height(pt(3, 5)) - log(Real(3))) < Real("1e-45"));
  CHECK(abs(weil_height(pt(Rational(1, 4), Rational(1, 8))) - log(Real(4))) < Real("1e-45"));
  CHECK(weil_height(pt(-1, 0)) == 0);
  CHECK(weil_height(CurvePoint::at_infinity()) == 0);
}

TEST_CASE("canonical height input validation") {
  const CurveModel c{0, 1};
  CHECK_THROWS_AS(canonical_height(c, pt(2, 3), Real("1e-15")), ValidationError);
  CHECK_THROWS_AS(canonical_height(c, pt(2, 3), Real("0.1")), ValidationError);
  CHECK_THROWS_AS(canonical_height(c, pt(2, 4), kGoal), ValidationError);
  CHECK_THROWS_AS(canonical_height(c, CurvePoint::at_infinity(), kGoal), ValidationError);
}

TEST_CASE("torsion points have height zero") {
  const struct {
    CurveModel c;
    CurvePoint p;
  } cases[] = {{{0, 1}, pt(2, 3)}, {{0, 1}, pt(0, 1)}, {{-432, 8208}, pt(-12, -108)}, {{-3483, 121014}, pt(-45, -432)}};
  for (const auto& k : cases) {
    const auto h = canonical_height(k.c, k.p, kGoal);
    CHECK(abs(h.canonical) <= h.error_bound + Real("1e-30"));
    CHECK(h.error_bound <= kGoal);
  }
}

TEST_CASE("locals sum to the canonical height") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const auto [c, p] = random_curve_point(rng);
    const auto h = canonical_height(c, p, kGoal);
    Real s = 0;
    for (const auto& [k, v] : h.local) s += v;
    CHECK(abs(s - h.canonical) < Real("1e-35"));
    CHECK(h.local.count("infinity") == 1);
  }
}

TEST_CASE("duplication, symmetry and quadraticity") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const auto [c, p] = random_curve_point(rng);
    const Real h = hhat(c, p);
    CHECK(h >= -kGoal);
    CHECK(abs(hhat(c, negate(p)) - h) <= 2 * kGoal);
    CHECK(abs(hhat(c, add(c, p, p)) - 4 * h) <= 5 * kGoal);
    if (i < 10) {
      for (long n = 3; n <= 5; ++n) {
        CAPTURE(n);
        const CurvePoint q = multiply_point(c, p, static_cast<unsigned>(n));
        CHECK(abs(hhat(c, q) - Real(n * n) * h) <= Real(n * n + 1) * kGoal);
      }
    }
  }
}

TEST_CASE("parallelogram law") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 30; ++i) {
    const auto s = random_curve(rng);
    const auto pts = small_combinations(s);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    const CurvePoint& P = pts[pick(rng)];
    const CurvePoint& Q = pts[pick(rng)];
    const Real lhs = hhat(s.curve, add(s.curve, P, Q)) + hhat(s.curve, add(s.curve, P, negate(Q)));
    const Real rhs = 2 * hhat(s.curve, P) + 2 * hhat(s.curve, Q);
    CHECK(abs(lhs - rhs) <= 6 * kGoal);
  }
}

TEST_CASE("doubling oracle: h(2^k P) / 4^k approaches hhat within B_E / 4^k") {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 20; ++i) {
    const auto [c, p] = random_curve_point(rng);
    const Real h = hhat(c, p);
    const Real be = global_difference_bound(c);
    CHECK(abs(weil_height(p) - h) <= be);
    CurvePoint q = p;
    Real scale = 1;
    for (int k = 1; k <= 4; ++k) {
      q = add(c, q, q);
      scale *= 4;
      if (q.identity) break;
      CAPTURE(k);
      CHECK(abs(weil_height(q) / scale - h) <= be / scale + kGoal);
    }
  }
}

TEST_CASE("local heights at primes against closed forms") {
  // good reduction: series local height is log+|x|_p; multiplicative
  // reduction with singular image: M (M - N) / N log p, N = v_p(Delta),
  // M = min(v_p(2y), N / 2).
  std::mt19937_64 rng(61);
  int singular_cases = 0, checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = random_curve(rng);
    const CurveModel& c = s.curve;
    const BigInt disc = discriminant(c);
    const auto fac = factorize(disc);
    REQUIRE(fac);
    for (const CurvePoint& p : small_combinations(s)) {
      if (mpz_sizeinbase(p.x.get_den().get_mpz_t(), 2) > 60) continue;
      const auto h = canonical_height(c, p, kGoal);
      for (const auto& [q, e] : *fac) {
        if (q < 5 || mpz_divisible_p(c.a.get_mpz_t(), q.get_mpz_t()) != 0) continue;
        const Real logq = log(to_real(q));
        const Real N(e);
        Real expect;
        if (vp(p.x.get_den(), q) > 0) {
          expect = Real(vp(p.x.get_den(), q)) * logq;
        } else if (divides(q, 3 * p.x * p.x + Rational(c.a)) && divides(q, 2 * p.y)) {
          const Real v2y = p.y == 0 ? N : Real(vp(Rational(2 * p.y).get_num(), q));
          const Real M = std::min(v2y, Real(N / 2));
          expect = M * (M - N) / N * logq;
          ++singular_cases;
        } else {
          expect = 0;
        }
        CAPTURE(to_string(q));
        CHECK(abs(h.local.at(to_string(q)) - N * logq / 6 - expect) <= kGoal);
        ++checked;
      }
      // primes of good reduction in the denominator
      for (const auto& [k, v] : h.local) {
        if (k == "infinity" || k == "denominator_rest") continue;
        const BigInt q(k);
        if (mpz_divisible_p(disc.get_mpz_t(), q.get_mpz_t()) != 0) continue;
        CHECK(v == Real(vp(p.x.get_den(), q)) * log(to_real(q)));
      }
    }
  }
  CHECK(checked > 100);
  CHECK(singular_cases > 0);
}

TEST_CASE("height pairing") {
  const CurveModel c{0, 1};
  const auto t = height_pairing(c, pt(2, 3), pt(0, 1), kGoal);
  CHECK(abs(t.pairing) <= t.error_bound + Real("1e-30"));
  CHECK_FALSE(t.cos_angle.has_value());

  std::mt19937_64 rng(71);
  for (int i = 0; i < 10; ++i) {
    const auto s = random_curve(rng);
    const CurveModel& e = s.curve;
    const Real h1 = hhat(e, s.p1);
    const auto self = height_pairing(e, s.p1, s.p1, kGoal);
    CHECK(abs(self.pairing - h1) <= 3 * kGoal);
    const auto pq = height_pairing(e, s.p1, s.p2, kGoal);
    const auto qp = height_pairing(e, s.p2, s.p1, kGoal);
    CHECK(abs(pq.pairing - qp.pairing) <= 3 * kGoal);
    if (pq.cos_angle) CHECK(abs(*pq.cos_angle) <= 1 + Real("1e-8"));
    // linear in the first slot
    const CurvePoint two = add(e, s.p1, s.p1);
    if (!two.identity && !add(e, two, s.p2).identity) {
      const auto dbl = height_pairing(e, two, s.p2, kGoal);
      CHECK(abs(dbl.pairing - 2 * pq.pairing) <= 6 * kGoal);
    }
  }
}

TEST_CASE("gap report") {
  const CurveModel c{0, 1};
  const auto g = height_gap_report(c, pt(2, 3), kGoal);
  // hhat = 0, h = log 2; |Delta|^{1/6} = 432^{1/6} > 2
  CHECK(abs(g.lhs + log(Real(2))) < Real("1e-9"));
  CHECK(abs(g.model - (log(Real(432)) / 6 - log(Real(2)))) < Real("1e-40"));
  CHECK(abs(g.residual - (g.lhs - g.model)) < Real("1e-40"));
  CHECK_THROWS_AS(height_gap_report(c, CurvePoint::at_infinity(), kGoal), ValidationError);
}

TEST_CASE("real period: known value") {
  const Real w = real_period({-1, 0}, Real("1e-20"));
  CHECK(abs(w - Real("5.244115108584239620929679")) < Real("1e-22"));
  CHECK_THROWS_AS(real_period({0, 0}, Real("1e-20")), ValidationError);
}

TEST_CASE("real period: AGM and quadrature agree; scaling by lambda") {
  std::mt19937_64 rng(81);
  std::uniform_int_distribution<long> d(-50, 50);
  int done = 0;
  while (done < 20) {
    const CurveModel c{d(rng), d(rng)};
    if (discriminant(c) == 0) continue;
    ++done;
    const auto both = real_period_both(c, Real("1e-20"));
    CAPTURE(to_string(c.a));
    CAPTURE(to_string(c.b));
    CHECK(abs(both.agm - both.quadrature) < Real("1e-20"));
    if (done <= 5) {
      for (long lambda : {2L, 3L, 5L}) {
        const BigInt l2 = BigInt(lambda) * lambda;
        const CurveModel scaled{c.a * l2 * l2, c.b * l2 * l2 * l2};
        const Real w = real_period(scaled, Real("1e-20"));
        CHECK(abs(w * lambda - both.agm) < Real("1e-20"));
      }
    }
  }
}
