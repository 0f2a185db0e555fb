#include <doctest.h>

#include <omp.h>

#include "icensus/repulsion.hpp"

using namespace icensus;

namespace {

const Real kGoal("1e-10");

IntPoint ip(long x, long y) { return {BigInt(x), BigInt(y)}; }

void same(const SurveyResult& a, const SurveyResult& b) {
  CHECK(a.curve_count == b.curve_count);
  CHECK(a.pair_count == b.pair_count);
  REQUIRE(a.max_excess.has_value() == b.max_excess.has_value());
  if (a.max_excess) CHECK(abs(*a.max_excess - *b.max_excess) < Real("1e-20"));
  CHECK(a.cos_histogram.bins == b.cos_histogram.bins);
  CHECK(a.cos_histogram.undefined == b.cos_histogram.undefined);
  REQUIRE(a.worst.size() == b.worst.size());
  for (std::size_t i = 0; i < a.worst.size(); ++i) {
    CHECK(a.worst[i].curve == b.worst[i].curve);
    CHECK(a.worst[i].p == b.worst[i].p);
    CHECK(a.worst[i].r == b.worst[i].r);
  }
}

}  // namespace

TEST_CASE("gap excess on y^2 = x^3 + 1") {
  const CurveModel c{BigInt(0), BigInt(1)};
  const auto s = gap_excess(c, ip(2, 3), ip(0, 1), kGoal);
  // everything here is torsion, so the canonical height of the sum is 0
  CHECK(abs(s.hhat_sum) < Real("1e-9"));
  CHECK(abs(s.excess + 2 * log(Real(2))) < Real("1e-9"));
  CHECK_FALSE(s.cos_angle.has_value());
  CHECK_FALSE(cos_excess(s).has_value());
}

TEST_CASE("gap excess matches its definition") {
  // y^2 = x^3 - x + 1 has (0, 1), (1, 1), (3, 5), (5, 11), (56, 419), ...
  const CurveModel e{BigInt(-1), BigInt(1)};
  const auto pts = integral_points(e, BigInt(1000));
  REQUIRE(pts.size() >= 8);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 3) {
    const auto& P = pts[i];
    const auto& R = pts[pts.size() - 1 - i];
    if (P.first == R.first) continue;
    const auto s = gap_excess(e, P, R, kGoal);
    const Real hs = canonical_height(e, add(e, to_point(P), to_point(R)), kGoal).canonical;
    const Real hp = weil_height(to_point(P)), hr = weil_height(to_point(R));
    CHECK(abs(s.excess - (hs - 2 * std::max(hp, hr) - std::min(hp, hr))) < Real("1e-20"));
  }
}

TEST_CASE("gap excess rejects degenerate pairs") {
  const CurveModel c{BigInt(0), BigInt(1)};
  CHECK_THROWS_AS(gap_excess(c, ip(2, 3), ip(2, 3), kGoal), ValidationError);
  CHECK_THROWS_AS(gap_excess(c, ip(2, 3), ip(2, -3), kGoal), ValidationError);
  CHECK_THROWS_AS(gap_excess(c, ip(2, 3), ip(1, 1), kGoal), ValidationError);
}

TEST_CASE("cosine histogram") {
  CosHistogram h;
  h.add(Real(-5));
  h.add(Real("-1.99"));
  h.add(Real("0.49"));
  h.add(Real(3));
  h.add(std::nullopt);
  CHECK(h.bins.front() == 2);
  CHECK(h.bins.back() == 2);
  CHECK(h.undefined == 1);
  CHECK(h.mass() == 5);
  CosHistogram g;
  g.merge(h);
  g.merge(h);
  CHECK(g.mass() == 10);
}

TEST_CASE("parallel survey equals the serial reference") {
  const auto curves = enumerate_family(Family::Universal, Real(3));
  SurveyOptions o;
  o.precision_goal = Real("1e-8");
  const auto par = survey_curves(curves, Real(3), BigInt(1000), o);
  const auto ser = serial::survey_curves(curves, Real(3), BigInt(1000), o);
  same(par, ser);
  CHECK(par.pair_count > 0);
  CHECK(par.cos_histogram.mass() == par.pair_count);
}

TEST_CASE("survey properties") {
  const auto curves = enumerate_family(Family::Universal, Real(4));
  SurveyOptions o;
  const auto s = survey_curves(curves, Real(4), BigInt(1000), o);
  CHECK(s.cos_histogram.mass() == s.pair_count);
  REQUIRE(!s.worst.empty());
  for (std::size_t i = 1; i < s.worst.size(); ++i) CHECK(s.worst[i - 1].excess >= s.worst[i].excess);
  CHECK(s.worst.front().excess == *s.max_excess);
  for (const auto& w : s.worst) {
    if (w.cos_angle) {
      CHECK(*w.cos_angle >= Real("-1.000001"));
      CHECK(*w.cos_angle <= Real("1.000001"));
    }
  }

  SurveyOptions high = o;
  high.min_height = Real(4);
  const auto t = survey_curves(curves, Real(4), BigInt(1000), high);
  CHECK(t.pair_count <= s.pair_count);
  for (const auto& w : t.worst) {
    CHECK(w.h_p >= Real(4));
    CHECK(w.h_r >= Real(4));
  }
}

TEST_CASE("empty slices") {
  SurveyOptions o;
  const auto s = survey_curves({}, Real(3), BigInt(100), o);
  CHECK(s.curve_count == 0);
  CHECK(s.pair_count == 0);
  CHECK_FALSE(s.max_excess.has_value());

  o.bullet_only = true;
  o.min_height = gap_min_height(Real(10), o.delta);
  const auto b = repulsion_survey(Family::Universal, Real(10), BigInt(1000), o);
  CHECK(b.pair_count == b.cos_histogram.mass());
  if (b.max_excess) CHECK(*b.max_excess <= Real(15));
}

TEST_CASE("survey is independent of the thread count") {
  const auto curves = enumerate_family(Family::Universal, Real(3));
  SurveyOptions o;
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = survey_curves(curves, Real(3), BigInt(1000), o);
  omp_set_num_threads(4);
  const auto four = survey_curves(curves, Real(3), BigInt(1000), o);
  omp_set_num_threads(before);
  same(one, four);
  REQUIRE(one.max_excess);
  CHECK(*one.max_excess == *four.max_excess);
}

TEST_CASE("survey validation") {
  SurveyOptions o;
  o.precision_goal = Real("0.5");
  CHECK_THROWS_AS(survey_curves({}, Real(3), BigInt(10), o), ValidationError);
  o = SurveyOptions{};
  o.bullet_only = true;
  o.delta = Real(1);
  CHECK_THROWS_AS(survey_curves({}, Real(3), BigInt(10), o), ValidationError);
  CHECK(abs(gap_min_height(Real(20), Real("0.1")) - Real("4.9") * log(Real(20))) < Real("1e-40"));
}
