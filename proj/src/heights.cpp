#include "icensus/heights.hpp"

#include <algorithm>
#include <array>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace icensus {
namespace {

using boost::multiprecision::abs;
using boost::multiprecision::log;
using boost::multiprecision::sqrt;

constexpr unsigned kMaxTerms = 500;

// Solves g_a F1 + g_b F2 = (target monomial) with g_a, g_b cubic forms;
// returns sum of |coefficients| of g_a and g_b.
Rational cofactor_norm(const Rational& A, const Rational& B, bool target_x7) {
  // F1, F2 coefficients on X^{4-j} Z^j
  const std::array<Rational, 5> f1{Rational(1), Rational(0), -2 * A, -8 * B, A * A};
  const std::array<Rational, 5> f2{Rational(0), Rational(4), Rational(0), 4 * A, 4 * B};
  std::array<std::array<Rational, 9>, 8> m{};  // 8 equations (X^{7-k} Z^k), 8 unknowns + rhs
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      m[i + j][i] = f1[j];
      m[i + j][4 + i] = f2[j];
    }
  }
  m[target_x7 ? 0 : 7][8] = 1;
  for (int col = 0; col < 8; ++col) {
    int piv = col;
    while (piv < 8 && m[piv][col] == 0) ++piv;
    if (piv == 8) throw ComputationError("singular curve in height computation");
    std::swap(m[piv], m[col]);
    for (int r = 0; r < 8; ++r) {
      if (r == col || m[r][col] == 0) continue;
      const Rational factor = m[r][col] / m[col][col];
      for (int k = col; k < 9; ++k) m[r][k] -= factor * m[col][k];
    }
  }
  Rational s = 0;
  for (int r = 0; r < 8; ++r) s += abs(m[r][8] / m[r][r]);
  return s;
}

// |log Phi_inf| <= M on normalized projective pairs
Real archimedean_envelope(const CurveModel& c) {
  const Rational A(c.a), B(c.b);
  const Rational s = std::max(cofactor_norm(A, B, false), cofactor_norm(A, B, true));
  const BigInt u1 = 1 + 2 * abs(c.a) + 8 * abs(c.b) + c.a * c.a;
  const BigInt u2 = 4 + 4 * abs(c.a) + 4 * abs(c.b);
  const Real upper = log(to_real(std::max(u1, u2)));
  const Real lower = log(to_real(s));
  return std::max(upper, lower);
}

struct LocalValue {
  Real value;
  Real error;
};

LocalValue archimedean_series(const CurveModel& c, const Rational& x, const Real& budget) {
  const Real A = to_real(c.a), B = to_real(c.b);
  const Real M = archimedean_envelope(c);
  Real X = to_real(x), Z = 1;
  Real value = log_plus(X);
  if (abs(X) > 1) {
    Z = 1 / X;
    X = 1;
  }
  Real weight = Real(1) / 4;
  for (unsigned n = 0; n < kMaxTerms; ++n) {
    const Real X2 = X * X, Z2 = Z * Z;
    const Real f1 = X2 * X2 - 2 * A * X2 * Z2 - 8 * B * X * Z2 * Z + A * A * Z2 * Z2;
    const Real f2 = 4 * Z * (X2 * X + A * X * Z2 + B * Z2 * Z);
    const Real m = std::max(abs(f1), abs(f2));
    value += weight * log(m);
    X = f1 / m;
    Z = f2 / m;
    const Real tail = M * weight / 3;
    if (tail <= budget) return {value, tail};
    weight /= 4;
  }
  throw ComputationError("archimedean height series did not reach the precision goal within 500 terms");
}

unsigned valuation(const BigInt& v, const BigInt& p, unsigned cap) {
  if (v == 0) return cap;
  unsigned e = 0;
  BigInt t = v;
  while (e < cap && mpz_divisible_p(t.get_mpz_t(), p.get_mpz_t()) != 0) {
    mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), p.get_mpz_t());
    ++e;
  }
  return e;
}

// log+|x|_p - log p * sum_n 4^{-n-1} e_n, with e_n = min v_p(F1, F2) along 2^n P
LocalValue prime_series(const CurveModel& c, const Rational& x, const BigInt& p, unsigned v_delta,
                        const Real& budget) {
  const unsigned v_res = 2 * v_delta;
  const Real logp = log(to_real(p));
  unsigned n_terms = 1;
  Real tail = Real(v_res) * logp / 12;
  while (tail > budget) {
    tail /= 4;
    ++n_terms;
  }
  const unsigned K = n_terms * v_res + 2;
  BigInt mod;
  mpz_pow_ui(mod.get_mpz_t(), p.get_mpz_t(), K);
  auto reduce = [&mod](BigInt v) {
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t());
    return v;
  };
  BigInt X = reduce(x.get_num()), Z = reduce(x.get_den());
  const BigInt A = reduce(c.a), B = reduce(c.b);
  Rational sum = 0;
  Rational w(1, 4);
  unsigned known = K;  // digits of X, Z that are exact
  for (unsigned n = 0; n < n_terms; ++n) {
    const BigInt X2 = X * X, Z2 = Z * Z;
    BigInt f1 = reduce(X2 * X2 - 2 * A * X2 * Z2 - 8 * B * X * Z2 * Z + A * A * Z2 * Z2);
    BigInt f2 = reduce(4 * Z * (X2 * X + A * X * Z2 + B * Z2 * Z));
    const unsigned e = std::min(valuation(f1, p, known), valuation(f2, p, known));
    if (e >= known) throw ComputationError("p-adic precision exhausted in local height");
    BigInt pe;
    mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
    mpz_divexact(X.get_mpz_t(), f1.get_mpz_t(), pe.get_mpz_t());
    mpz_divexact(Z.get_mpz_t(), f2.get_mpz_t(), pe.get_mpz_t());
    known -= e;
    sum += w * e;
    w /= 4;
  }
  const unsigned vden = valuation(x.get_den(), p, ~0U);
  return {Real(vden) * logp - logp * to_real(sum), tail};
}

void check_goal(const Real& goal) {
  if (!(goal >= Real("1e-14") && goal <= Real("1e-2"))) {
    throw ValidationError("precision goal must lie in [1e-14, 1e-2]");
  }
}

}  // namespace

Real weil_height(const CurvePoint& p) {
  if (p.identity) return Real(0);
  return log_height(p.x);
}

Real global_difference_bound(const CurveModel& c) {
  const BigInt d = discriminant(c);
  if (d == 0) throw ValidationError("singular curve");
  return log_abs(d) / 6 + log_plus(to_real(naive_height_sixth(c.a, c.b))) / 6 + 4;
}

HeightProfile canonical_height(const CurveModel& c, const CurvePoint& p, const Real& precision_goal) {
  check_goal(precision_goal);
  if (p.identity) throw ValidationError("affine point required");
  if (!on_curve(c, p)) throw ValidationError("point not on curve");
  const BigInt disc = discriminant(c);
  if (disc == 0) throw ValidationError("singular curve");
  const auto fac = factorize(disc);
  if (!fac) throw ComputationError("discriminant could not be factored within the time budget");

  HeightProfile out;
  out.precision_goal = precision_goal;
  out.weil = weil_height(p);
  const Real budget = precision_goal / (2 * (fac->size() + 1));
  const Real log_disc = log_abs(disc);

  const LocalValue inf = archimedean_series(c, p.x, budget);
  out.local["infinity"] = inf.value - log_disc / 6;
  Real total = inf.value;
  Real err = inf.error;

  BigInt den_rest = p.x.get_den();
  for (const auto& [q, e] : *fac) {
    const LocalValue v = prime_series(c, p.x, q, e, budget);
    out.local[to_string(q)] = v.value + Real(e) * log(to_real(q)) / 6;
    total += v.value;
    err += v.error;
    mpz_remove(den_rest.get_mpz_t(), den_rest.get_mpz_t(), q.get_mpz_t());
  }
  // remaining denominator primes have good reduction: lambda_p = log+|x|_p
  if (den_rest > 1) {
    FactorOptions quick;
    quick.budget = std::chrono::milliseconds(200);
    if (const auto dfac = factorize(den_rest, quick)) {
      for (const auto& [q, e] : *dfac) out.local[to_string(q)] = Real(e) * log(to_real(q));
    } else {
      out.local["denominator_rest"] = log_abs(den_rest);
    }
    total += log_abs(den_rest);
  }
  out.canonical = total;
  out.error_bound = err;
  return out;
}

Pairing height_pairing(const CurveModel& c, const CurvePoint& p, const CurvePoint& q, const Real& precision_goal) {
  const HeightProfile hp = canonical_height(c, p, precision_goal);
  const HeightProfile hq = canonical_height(c, q, precision_goal);
  const CurvePoint s = add(c, p, q);
  Real hs = 0, es = 0;
  if (!s.identity) {
    const HeightProfile h = canonical_height(c, s, precision_goal);
    hs = h.canonical;
    es = h.error_bound;
  }
  Pairing out;
  out.pairing = (hs - hp.canonical - hq.canonical) / 2;
  out.error_bound = (es + hp.error_bound + hq.error_bound) / 2;
  const Real floor = 10 * precision_goal;
  if (hp.canonical >= floor && hq.canonical >= floor) out.cos_angle = out.pairing / sqrt(hp.canonical * hq.canonical);
  return out;
}

GapReport height_gap_report(const CurveModel& c, const CurvePoint& p, const Real& precision_goal) {
  if (p.identity) throw ValidationError("affine point required");
  const HeightProfile h = canonical_height(c, p, precision_goal);
  const Real log_disc = log_abs(discriminant(c));
  const Real x = to_real(p.x);
  GapReport r;
  r.lhs = h.canonical - h.weil;
  r.model = log_plus(x * boost::multiprecision::exp(-log_disc / 6)) + log_disc / 6 - log_plus(x);
  r.residual = r.lhs - r.model;
  return r;
}

namespace {

Real agm(Real a, Real b) {
  const Real eps = Real("1e-48");
  for (int i = 0; i < 200; ++i) {
    const Real an = (a + b) / 2;
    b = sqrt(a * b);
    a = an;
    if (abs(a - b) <= eps * a) return a;
  }
  throw ComputationError("AGM iteration did not converge");
}

Real polish_root(const Real& A, const Real& B, Real r) {
  for (int i = 0; i < 60; ++i) {
    const Real f = (r * r + A) * r + B;
    const Real fp = 3 * r * r + A;
    if (fp == 0) break;
    const Real step = f / fp;
    r -= step;
    if (abs(step) <= Real("1e-48") * (1 + abs(r))) break;
  }
  return r;
}

}  // namespace

PeriodResult real_period_both(const CurveModel& c, const Real& precision_goal) {
  if (!(precision_goal > 0)) throw ValidationError("precision goal must be positive");
  const BigInt disc = discriminant(c);
  if (disc == 0) throw ValidationError("singular curve");
  const Real A = to_real(c.a), B = to_real(c.b);
  const Real pi = pi_real();
  PeriodResult out;
  Real rho;
  if (disc > 0) {
    const Real r = 2 * sqrt(-A / 3);
    Real arg = (3 * B / (2 * A)) * sqrt(-3 / A);
    arg = std::max(Real(-1), std::min(Real(1), arg));
    const Real phi = boost::multiprecision::acos(arg);
    std::array<Real, 3> e;
    for (int k = 0; k < 3; ++k) e[k] = polish_root(A, B, r * boost::multiprecision::cos((phi - 2 * pi * k) / 3));
    std::sort(e.begin(), e.end());
    rho = e[2];
    out.agm = pi / agm(sqrt(e[2] - e[0]), sqrt(e[2] - e[1])) * 2;
  } else {
    const Real D = B * B / 4 + A * A * A / 27;
    const Real s = sqrt(D);
    auto cbrt = [](const Real& v) {
      return v < 0 ? Real(-boost::multiprecision::cbrt(-v)) : Real(boost::multiprecision::cbrt(v));
    };
    rho = polish_root(A, B, cbrt(-B / 2 + s) + cbrt(-B / 2 - s));
    const Real beta = sqrt(3 * rho * rho + A);
    out.agm = 4 * pi / agm(2 * sqrt(beta), sqrt(2 * beta + 3 * rho));
  }
  // x = rho + t^2 removes the endpoint singularity: f(x) = t^2 q(x)
  const Real q0 = rho * rho + A;
  auto integrand = [&](const Real& t) -> Real {
    const Real x = rho + t * t;
    return 1 / sqrt(x * x + rho * x + q0);
  };
  boost::math::quadrature::exp_sinh<Real> integrator(12);
  Real err = 0;
  out.quadrature = 4 * integrator.integrate(integrand, Real("1e-25"), &err);
  return out;
}

Real real_period(const CurveModel& c, const Real& precision_goal) {
  const PeriodResult r = real_period_both(c, precision_goal);
  if (abs(r.agm - r.quadrature) > precision_goal) {
    throw ComputationError("AGM and quadrature periods disagree beyond the precision goal");
  }
  return r.agm;
}

}  // namespace icensus
