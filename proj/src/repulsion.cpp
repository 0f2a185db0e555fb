#include "icensus/repulsion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include <omp.h>

namespace icensus {
namespace {

using boost::multiprecision::sqrt;

PairStat make_stat(const CurveModel& c, const IntPoint& p, const IntPoint& r, const Real& hhat_p, const Real& hhat_r,
                   const Real& hhat_sum, const Real& goal) {
  PairStat s;
  s.curve = c;
  s.p = p;
  s.r = r;
  s.h_p = weil_height(to_point(p));
  s.h_r = weil_height(to_point(r));
  s.hhat_sum = hhat_sum;
  s.excess = hhat_sum - 2 * std::max(s.h_p, s.h_r) - std::min(s.h_p, s.h_r);
  const Real floor = 10 * goal;
  if (hhat_p >= floor && hhat_r >= floor) {
    s.cos_angle = (hhat_sum - hhat_p - hhat_r) / (2 * sqrt(hhat_p * hhat_r));
  }
  return s;
}

Real hhat_or_zero(const CurveModel& c, const CurvePoint& p, const Real& goal) {
  return p.identity ? Real(0) : canonical_height(c, p, goal).canonical;
}

bool worse(const PairStat& a, const PairStat& b) {
  if (a.excess != b.excess) return a.excess > b.excess;
  if (!(a.curve == b.curve)) return a.curve < b.curve;
  if (a.p != b.p) return a.p < b.p;
  return a.r < b.r;
}

// per-curve partial result; merged in curve order
struct Partial {
  std::uint64_t pairs = 0;
  std::optional<Real> max_excess;
  std::optional<Real> max_cos_excess;
  CosHistogram hist;
  std::vector<PairStat> worst;
};

void absorb(Partial& acc, const PairStat& s, std::size_t keep) {
  ++acc.pairs;
  if (!acc.max_excess || s.excess > *acc.max_excess) acc.max_excess = s.excess;
  const auto ce = cos_excess(s);
  if (ce && (!acc.max_cos_excess || *ce > *acc.max_cos_excess)) acc.max_cos_excess = *ce;
  acc.hist.add(ce);
  acc.worst.push_back(s);
  if (acc.worst.size() > 2 * keep + 16) {
    std::sort(acc.worst.begin(), acc.worst.end(), worse);
    acc.worst.resize(keep);
  }
}

void finish(SurveyResult& out, std::vector<Partial>& parts, std::size_t keep) {
  for (auto& p : parts) {
    out.pair_count += p.pairs;
    if (p.max_excess && (!out.max_excess || *p.max_excess > *out.max_excess)) out.max_excess = p.max_excess;
    if (p.max_cos_excess && (!out.max_cos_excess || *p.max_cos_excess > *out.max_cos_excess)) {
      out.max_cos_excess = p.max_cos_excess;
    }
    out.cos_histogram.merge(p.hist);
    out.worst.insert(out.worst.end(), p.worst.begin(), p.worst.end());
  }
  std::sort(out.worst.begin(), out.worst.end(), worse);
  if (out.worst.size() > keep) out.worst.resize(keep);
}

std::vector<IntPoint> eligible_points(const CurveModel& c, const BigInt& x_bound, const Real& min_height) {
  std::vector<IntPoint> pts = integral_points(c, x_bound);
  std::erase_if(pts, [&](const IntPoint& p) { return weil_height(to_point(p)) < min_height; });
  return pts;
}

Partial survey_one(const CurveModel& c, const BigInt& x_bound, const SurveyOptions& opts) {
  Partial part;
  const auto pts = eligible_points(c, x_bound, opts.min_height);
  std::vector<Real> hh(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) hh[i] = hhat_or_zero(c, to_point(pts[i]), opts.precision_goal);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].first == pts[j].first) continue;  // P = -R
      const CurvePoint sum = add(c, to_point(pts[i]), to_point(pts[j]));
      const Real hs = hhat_or_zero(c, sum, opts.precision_goal);
      absorb(part, make_stat(c, pts[i], pts[j], hh[i], hh[j], hs, opts.precision_goal), opts.worst_count);
    }
  }
  return part;
}

void validate(const SurveyOptions& opts) {
  if (!(opts.precision_goal >= Real("1e-14") && opts.precision_goal <= Real("1e-2"))) {
    throw ValidationError("precision goal must lie in [1e-14, 1e-2]");
  }
  if (opts.bullet_only && !(opts.delta > 0 && opts.delta < 1)) throw ValidationError("delta must lie in (0, 1)");
}

std::vector<CurveModel> select(const std::vector<CurveModel>& curves, const Real& T, const SurveyOptions& opts) {
  if (!opts.bullet_only) return curves;
  std::vector<char> keep(curves.size(), 0);
  const auto n = static_cast<std::int64_t>(curves.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) keep[i] = passes_bullet_filter(curves[i], T, opts.delta) ? 1 : 0;
  std::vector<CurveModel> out;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (keep[i]) out.push_back(curves[i]);
  }
  return out;
}

}  // namespace

PairStat gap_excess(const CurveModel& c, const IntPoint& p, const IntPoint& r, const Real& precision_goal) {
  const CurvePoint P = to_point(p), R = to_point(r);
  if (!on_curve(c, P) || !on_curve(c, R)) throw ValidationError("points must lie on the curve");
  if (p.first == r.first) throw ValidationError("P = +-R is degenerate for the gap bound");
  const Real hp = canonical_height(c, P, precision_goal).canonical;
  const Real hr = canonical_height(c, R, precision_goal).canonical;
  const Real hs = hhat_or_zero(c, add(c, P, R), precision_goal);
  return make_stat(c, p, r, hp, hr, hs, precision_goal);
}

std::optional<Real> cos_excess(const PairStat& s) {
  if (!s.cos_angle || s.h_p == 0 || s.h_r == 0) return std::nullopt;
  const Real main = std::max(sqrt(s.h_p / s.h_r), sqrt(s.h_r / s.h_p)) / 2;
  return *s.cos_angle - main;
}

void CosHistogram::add(const std::optional<Real>& v) {
  if (!v) {
    ++undefined;
    return;
  }
  const double x = v->convert_to<double>();
  const double width = (hi - lo) / static_cast<double>(bins.size());
  const auto k = static_cast<long>(std::floor((x - lo) / width));
  ++bins[static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(bins.size()) - 1))];
}

void CosHistogram::merge(const CosHistogram& o) {
  for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += o.bins[i];
  undefined += o.undefined;
}

std::uint64_t CosHistogram::mass() const {
  std::uint64_t m = undefined;
  for (auto b : bins) m += b;
  return m;
}

Real gap_min_height(const Real& T, const Real& delta) { return (5 - delta) * boost::multiprecision::log(T); }

SurveyResult survey_curves(const std::vector<CurveModel>& curves, const Real& T, const BigInt& x_bound,
                           const SurveyOptions& opts) {
  validate(opts);
  const auto chosen = select(curves, T, opts);
  std::vector<Partial> parts(chosen.size());
  std::exception_ptr failure;
  std::mutex failure_lock;
  const auto n = static_cast<std::int64_t>(chosen.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      parts[i] = survey_one(chosen[i], x_bound, opts);
    } catch (...) {
      std::lock_guard<std::mutex> g(failure_lock);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  SurveyResult out;
  out.curve_count = chosen.size();
  finish(out, parts, opts.worst_count);
  return out;
}

SurveyResult repulsion_survey(Family f, const Real& T, const BigInt& x_bound, const SurveyOptions& opts) {
  validate(opts);
  return survey_curves(enumerate_family(f, T), T, x_bound, opts);
}

namespace serial {

SurveyResult survey_curves(const std::vector<CurveModel>& curves, const Real& T, const BigInt& x_bound,
                           const SurveyOptions& opts) {
  validate(opts);
  SurveyResult out;
  std::vector<Partial> parts;
  for (const auto& c : curves) {
    if (opts.bullet_only && !passes_bullet_filter(c, T, opts.delta)) continue;
    ++out.curve_count;
    Partial part;
    const auto pts = serial::integral_points(c, x_bound);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (pts[i].first == pts[j].first) continue;
        if (weil_height(to_point(pts[i])) < opts.min_height || weil_height(to_point(pts[j])) < opts.min_height) continue;
        absorb(part, gap_excess(c, pts[i], pts[j], opts.precision_goal), opts.worst_count);
      }
    }
    parts.push_back(std::move(part));
  }
  finish(out, parts, opts.worst_count);
  return out;
}

}  // namespace serial

}  // namespace icensus
