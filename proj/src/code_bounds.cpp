#include "icensus/code_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "icensus/simplex.hpp"

namespace icensus {
namespace {

using boost::multiprecision::cos;
using boost::multiprecision::exp;
using boost::multiprecision::log;
using boost::multiprecision::sin;
using boost::multiprecision::sqrt;

constexpr int kMaxLpDimension = 16;

// normalized Gegenbauer values P_0..P_n at t for S^{r-1} (P_k(1) = 1)
template <class T>
std::vector<T> gegenbauer(int r, int n, const T& t) {
  std::vector<T> p(n + 1);
  p[0] = 1;
  if (n == 0) return p;
  p[1] = t;
  const T alpha = T(r - 2) / 2;
  for (int k = 1; k < n; ++k) {
    // normalized three-term recurrence
    const T kk(k);
    p[k + 1] = ((2 * kk + 2 * alpha) * t * p[k] - kk * p[k - 1]) / (kk + 2 * alpha);
  }
  return p;
}

// max |P_k''| on [-1, 1], attained at t = 1
Real second_derivative_at_one(int r, int k) {
  const Real a = Real(r - 2) / 2;
  const Real kk(k);
  return kk * (kk + 2 * a) / (2 * a + 1) * (kk - 1) * (kk + 2 * a + 1) / (2 * a + 3);
}

void check_theta(const Real& theta, const Real& hi, const char* what) {
  if (!(theta > 0 && theta <= hi)) throw ValidationError(std::string("theta out of range for ") + what);
}

}  // namespace

std::string method_token(CodeMethod m) {
  switch (m) {
    case CodeMethod::Cap: return "cap";
    case CodeMethod::Rp1: return "rp1";
    case CodeMethod::Kl: return "kl";
    case CodeMethod::Lp: return "lp";
  }
  return "cap";
}

CodeMethod parse_method(const std::string& token) {
  if (token == "cap") return CodeMethod::Cap;
  if (token == "rp1") return CodeMethod::Rp1;
  if (token == "kl") return CodeMethod::Kl;
  if (token == "lp") return CodeMethod::Lp;
  throw ValidationError("unknown code-bound method '" + token + "' (expected cap|rp1|kl|lp)");
}

Real cap_bound(int r, const Real& theta, bool projective) {
  if (r < 3) throw ValidationError("cap bound needs r >= 3 (use rp1 or lp)");
  if (!(theta > 0 && theta < pi_real() - Real("1e-6"))) throw ValidationError("theta out of range for cap bound");
  const Real half = theta / 2;
  const Real v = 2 * sqrt(Real(3 * r)) * boost::multiprecision::pow(sin(half), 1 - r) / cos(half);
  return projective ? Real(v / 2) : v;
}

Real cap_gamma_ratio(int r) {
  if (r < 2) throw ValidationError("r >= 2 required");
  return boost::math::tgamma(Real(r - 1) / 2) / boost::math::tgamma(Real(r) / 2);
}

Real cap_gamma_majorant(int r) {
  if (r < 1) throw ValidationError("r >= 1 required");
  return 2 * sqrt(Real(3)) / sqrt(pi_real() * r);
}

long rp1_bound(const Real& theta) {
  check_theta(theta, pi_real() / 2 + Real("1e-40"), "rp1 bound");
  // rounding can only push the value up, which keeps it an upper bound
  const Real q = pi_real() / theta * (1 + Real("1e-30"));
  return floor_to_bigint(q).get_si();
}

Real kl_rate(const Real& theta) {
  check_theta(theta, pi_real() / 2 + Real("1e-40"), "KL rate");
  const Real s = std::min(Real(1), Real(sin(theta)));
  const Real a = (1 + s) / (2 * s);
  const Real b = (1 - s) / (2 * s);
  const Real tb = b > 0 ? Real(b * log(b)) : Real(0);
  return a * log(a) - tb;
}

Real kl_base(const Real& theta) { return exp(kl_rate(theta)); }

KlInverse kl_invert(const Real& base) {
  if (!(base > 1 && base <= 10)) throw ValidationError("KL base must lie in (1, 10]");
  Real lo("1e-9"), hi = pi_real() / 2;
  if (kl_base(lo) < base) throw ComputationError("no KL root in (0, pi/2]");
  const Real tol("1e-12");
  while (hi - lo > tol) {
    const Real mid = (lo + hi) / 2;
    if (kl_base(mid) >= base) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Real theta = (lo + hi) / 2;
  return {theta, cos(theta)};
}

CodeBoundResult lp_bound(int r, const Real& theta, int degree, int grid_size) {
  if (r < 2 || r > kMaxLpDimension) throw ValidationError("lp bound needs 2 <= r <= 16");
  if (degree < 0 || degree > 40) throw ValidationError("lp degree must lie in [0, 40]");
  if (grid_size < 200) throw ValidationError("lp grid_size must be >= 200");
  check_theta(theta, pi_real() / 2 + Real("1e-40"), "lp bound");

  CodeBoundResult out;
  out.r = r;
  out.theta = theta;
  out.method = CodeMethod::Lp;
  std::vector<int> ks;
  for (int k = 2; k <= degree; k += 2) ks.push_back(k);
  if (ks.empty()) {
    // f = 1 cannot be nonpositive anywhere: no information
    out.bound = std::numeric_limits<Real>::infinity();
    out.certified = true;
    return out;
  }

  const Real t0 = std::max(Real(0), Real(cos(theta)));
  const double t0d = t0.convert_to<double>();
  std::vector<double> pts;
  for (int i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / (grid_size - 1);
    if (t <= t0d) pts.push_back(t);
  }
  if (pts.empty() || pts.back() < t0d) pts.push_back(t0d);

  // Dual of min sum f_k s.t. sum_k f_k P_k(t_i) <= -1, f >= 0: origin-feasible,
  // so no phase 1; the f_k are the row multipliers.
  lp::Problem<double> prob;
  prob.objective.assign(pts.size(), 1.0);
  std::vector<std::vector<double>> g;
  g.reserve(pts.size());
  for (double t : pts) g.push_back(gegenbauer<double>(r, degree, t));
  for (int k : ks) {
    std::vector<double> row(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) row[i] = -g[i][k];
    prob.add(std::move(row), lp::Sense::Le, 1.0);
  }
  const auto sol = lp::solve(prob, 1e-11);
  if (sol.status != lp::Status::Optimal) throw ComputationError("lp bound: linear program infeasible");

  std::vector<Real> f(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) f[i] = Real(std::max(0.0, sol.dual[i]));
  auto eval = [&](const Real& t) {
    const auto g = gegenbauer<Real>(r, degree, t);
    Real v = 1;
    for (std::size_t i = 0; i < ks.size(); ++i) v += f[i] * g[ks[i]];
    return v;
  };
  Real f1 = 1;
  for (const auto& v : f) f1 += v;

  const std::size_t fine = 10 * pts.size() + 1;
  Real worst = eval(Real(0));
  for (std::size_t j = 1; j < fine; ++j) worst = std::max(worst, eval(t0 * j / (fine - 1)));
  Real m2 = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) m2 += f[i] * second_derivative_at_one(r, ks[i]);
  const Real h = t0 / (fine - 1);
  const Real m = worst + m2 * h * h / 8;
  if (m <= 0) {
    out.bound = f1;
    out.certified = true;
  } else if (m < 1) {
    out.bound = (f1 - m) / (1 - m);
    out.certified = true;
  } else {
    out.bound = f1;
    out.certified = false;
  }
  return out;
}

CodeBoundResult best_code_bound(int r, const Real& theta) {
  if (r < 2) throw ValidationError("code bound needs r >= 2");
  CodeBoundResult out;
  out.r = r;
  out.theta = theta;
  out.certified = true;
  if (r == 2) {
    out.method = CodeMethod::Rp1;
    out.bound = Real(rp1_bound(theta));
    return out;
  }
  out.method = CodeMethod::Cap;
  out.bound = cap_bound(r, theta, true);
  if (r <= kMaxLpDimension && theta <= pi_real() / 2) {
    try {
      const auto lp = lp_bound(r, theta);
      if (lp.certified && lp.bound < out.bound) out = lp;
    } catch (const ComputationError&) {
      // no feasible polynomial at this degree: the cap value stands
    }
  }
  return out;
}

}  // namespace icensus
