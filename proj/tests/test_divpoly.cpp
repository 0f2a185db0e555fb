#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "icensus/divpoly.hpp"
#include "support.hpp"

using namespace icensus;
using icensus::testing::random_curve_point;

namespace {

CurvePoint pt(const Rational& x, const Rational& y) { return CurvePoint::affine(x, y); }

CurvePoint repeated_add(const CurveModel& c, const CurvePoint& p, unsigned n) {
  CurvePoint acc = CurvePoint::at_infinity();
  for (unsigned i = 0; i < n; ++i) acc = add(c, acc, p);
  return acc;
}

// x(nP) straight from the psi polynomials: x - psi_{n-1} psi_{n+1} / psi_n^2 with y^2 = F
Rational x_from_polys(const CurveModel& c, const Rational& x, unsigned n) {
  const Rational f = x * x * x + Rational(c.a) * x + Rational(c.b);
  const Rational lo = psi(n - 1)->eval_stripped(c, x);
  const Rational mid = psi(n)->eval_stripped(c, x);
  const Rational hi = psi(n + 1)->eval_stripped(c, x);
  if (n % 2 == 0) return x - lo * hi / (f * mid * mid);
  return x - f * lo * hi / (mid * mid);
}

}  // namespace

TEST_CASE("base cases") {
  const auto p1 = psi(1);
  REQUIRE(p1->terms.size() == 1);
  CHECK(p1->coeff(0, 0, 0) == 1);
  const auto p2 = psi(2);
  CHECK(p2->y_factor == 1);
  CHECK(p2->coeff(0, 0, 0) == 2);
  const auto p3 = psi(3);
  CHECK(p3->y_factor == 0);
  CHECK(p3->terms.size() == 4);
  CHECK(p3->coeff(4, 0, 0) == 3);
  CHECK(p3->coeff(2, 1, 0) == 6);
  CHECK(p3->coeff(1, 0, 1) == 12);
  CHECK(p3->coeff(0, 2, 0) == -1);
  CHECK_THROWS_AS(psi(0), ValidationError);
  CHECK_THROWS_AS(psi(65), ValidationError);
}

TEST_CASE("psi_5, psi_7, psi_8 against an independent symbolic expansion") {
  const auto p5 = psi(5);
  struct T {
    unsigned fx, fa, fb;
    long c;
  };
  const T expect[] = {{12, 0, 0, 5},      {10, 1, 0, 62},    {9, 0, 1, 380},     {8, 2, 0, -105},
                      {7, 1, 1, 240},     {6, 3, 0, -300},   {6, 0, 2, -240},    {5, 2, 1, -696},
                      {4, 4, 0, -125},    {4, 1, 2, -1920},  {3, 3, 1, -80},     {3, 0, 3, -1600},
                      {2, 5, 0, -50},     {2, 2, 2, -240},   {1, 4, 1, -100},    {1, 1, 3, -640},
                      {0, 6, 0, 1},       {0, 3, 2, -32},    {0, 0, 4, -256}};
  CHECK(p5->terms.size() == std::size(expect));
  for (const auto& t : expect) CHECK(p5->coeff(t.fx, t.fa, t.fb) == t.c);
  const auto p7 = psi(7);
  CHECK(p7->terms.size() == 61);
  CHECK(p7->coeff(0, 12, 0) == -1);
  const auto p8 = psi(8);
  CHECK(p8->terms.size() == 91);
  CHECK(p8->coeff(0, 0, 10) == 2097152);
  CHECK(p8->coeff(30, 0, 0) == 8);
}

TEST_CASE("psi_3 against x(3P) from the group law on 20 random pairs") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto [c, p] = random_curve_point(rng);
    const CurvePoint p3 = repeated_add(c, p, 3);
    if (p3.identity) continue;
    CHECK(x_from_polys(c, p.x, 3) == p3.x);
  }
}

TEST_CASE("weighted homogeneity and leading coefficients, n <= 32") {
  for (unsigned n = 1; n <= 32; ++n) {
    CAPTURE(n);
    const auto p = psi(n);
    const unsigned total2 = n * n - 1;  // twice the weight of psi_n
    for (const auto& t : p->terms) CHECK(2 * (t.fx + 2 * t.fA + 3 * t.fB) + 3 * p->y_factor == total2);
    CHECK(p->leading_x_coeff() == n);
    if (p->x_degree() > 0) {
      for (const auto& t : p->terms) CHECK(t.fx != p->x_degree() - 1);
    }
  }
}

TEST_CASE("cached and uncached recursions agree") {
  for (unsigned n : {5U, 9U, 12U, 17U}) CHECK(psi(n)->terms.size() == serial::psi(n).terms.size());
  const auto a = psi(13);
  const auto b = serial::psi(13);
  for (std::size_t i = 0; i < b.terms.size(); ++i) CHECK(a->terms[i].coeff == b.terms[i].coeff);
}

TEST_CASE("disk cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "icensus_psi_cache_test";
  std::filesystem::remove_all(dir);
  setenv("INTEGRAL_CENSUS_CACHE", dir.c_str(), 1);
  const DivPoly fresh = serial::psi(33);
  const auto first = psi(33);  // computed, then written
  CHECK(std::filesystem::exists(dir / "psi_33.json"));
  unsetenv("INTEGRAL_CENSUS_CACHE");
  REQUIRE(first->terms.size() == fresh.terms.size());
  for (std::size_t i = 0; i < fresh.terms.size(); ++i) CHECK(first->terms[i].coeff == fresh.terms[i].coeff);
  std::filesystem::remove_all(dir);
}

TEST_CASE("multiply_point examples") {
  const CurveModel c{0, 1};
  const CurvePoint p = pt(2, 3);
  CHECK(multiply_point(c, p, 2) == pt(0, 1));
  CHECK(multiply_point(c, p, 1) == p);
  CHECK(multiply_point(c, p, 6).identity);
  CHECK(multiply_point(c, pt(-1, 0), 2).identity);
  CHECK(multiply_point(c, pt(-1, 0), 3) == pt(-1, 0));
  CHECK_THROWS_AS(multiply_point(c, pt(2, 4), 2), ValidationError);
  CHECK_THROWS_AS(multiply_point(c, p, 0), ValidationError);
}

TEST_CASE("multiply_point equals repeated addition, n <= 8, 100 random pairs") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto [c, p] = random_curve_point(rng);
    for (unsigned n = 1; n <= 8; ++n) {
      CAPTURE(n);
      CHECK(multiply_point(c, p, n) == repeated_add(c, p, n));
    }
  }
}

TEST_CASE("psi polynomials reproduce x(nP), n <= 12") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto [c, p] = random_curve_point(rng);
    for (unsigned n = 2; n <= 12; ++n) {
      const CurvePoint q = scalar_multiple(c, p, n);
      if (q.identity) continue;
      CHECK(x_from_polys(c, p.x, n) == q.x);
    }
  }
}

TEST_CASE("psi_n(P) = 0 iff nP = O on curves with torsion") {
  struct Case {
    CurveModel c;
    CurvePoint p;
  };
  const Case cases[] = {
      {{0, 1}, pt(2, 3)},                // order 6
      {{0, 1}, pt(0, 1)},                // order 3
      {{4, 0}, pt(2, 4)},                // order 4
      {{-432, 8208}, pt(-12, -108)},     // order 5
      {{-3483, 121014}, pt(-45, -432)},  // order 7
      {{0, 16}, pt(0, 4)},               // y^2 = x^3 + t^2: (0, t) has order 3
      {{1, -2}, pt(1, 0)},               // order 2 via B = -x^3 - A x
  };
  for (const auto& k : cases) {
    REQUIRE(on_curve(k.c, k.p));
    for (unsigned n = 1; n <= 16; ++n) {
      const bool torsion = repeated_add(k.c, k.p, n).identity;
      const auto poly = psi(n);
      const Rational stripped = poly->eval_stripped(k.c, k.p.x);
      const Rational value = poly->y_factor == 1 ? Rational(stripped * k.p.y) : stripped;
      CAPTURE(n);
      CHECK((value == 0) == torsion);
      CHECK(multiply_point(k.c, k.p, n).identity == torsion);
    }
  }
}

TEST_CASE("coefficient growth") {
  // leading term ratio n / (K1 n^K2)
  const auto ok = verify_coeff_growth(16, Real("1e10"), Real(1), Real("1e6"));
  CHECK(ok.all_within);
  CHECK(ok.worst_ratio <= 1);
  const auto bad = verify_coeff_growth(8, Real("1.000000001"), Real(0), Real("1.000000001"));
  CHECK_FALSE(bad.all_within);
  CHECK(bad.worst_ratio > 1);
  const auto lead = verify_coeff_growth(6, Real(2), Real(1), Real(1000));
  CHECK(lead.worst_ratio >= Real(1) / 2 - Real("1e-40"));  // n / (2 n) at the leading term
  CHECK_THROWS_AS(verify_coeff_growth(8, Real(1), Real(0), Real(2)), ValidationError);
}

TEST_CASE("triple-root product identity") {
  const CurveModel c{1, 6};
  const CurvePoint r = pt(3, 6);
  const auto poly = triple_root_polynomial(c, r.x);
  CHECK(poly.size() == 10);      // degree 9
  CHECK(poly.back() == 1);       // psi_3^2 x gives 9 x^9, psi_2 psi_4 gives 8 x^9
  CHECK(triple_root_identity_check(c, r, 100));
  CHECK_THROWS_AS(triple_root_identity_check(c, CurvePoint::at_infinity(), 5), ValidationError);

  // x0 = x(Q) for R = 3Q is a shared root of both sides
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto [e, q] = random_curve_point(rng);
    const CurvePoint r3 = scalar_multiple(e, q, 3);
    if (r3.identity) continue;
    const auto p = triple_root_polynomial(e, r3.x);
    Rational acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * q.x + *it;
    CHECK(acc == 0);
    CHECK(triple_root_identity_check(e, r3, 20, static_cast<std::uint64_t>(i)));
  }
}

TEST_CASE("denominators of multiples") {
  const CurveModel c{0, 1};
  CHECK(*denominator_of_multiple(c, pt(2, 3), 1) == 1);
  CHECK(*denominator_of_multiple(c, pt(2, 3), 2) == 1);
  CHECK_FALSE(denominator_of_multiple(c, pt(2, 3), 6).has_value());
  const CurveModel e{4, -1};
  const CurvePoint q = pt(Rational(1, 4), Rational(1, 8));
  REQUIRE(on_curve(e, q));
  for (unsigned n = 1; n <= 10; ++n) {
    const auto d = denominator_of_multiple(e, q, n);
    REQUIRE(d.has_value());
    CHECK(is_perfect_square(*d));
    CHECK(mpz_divisible_ui_p(d->get_mpz_t(), 4) != 0);
  }
}
