#include "icensus/divpoly.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include <json.hpp>

namespace icensus {
namespace {

// Weighted-homogeneous polynomial in (x, A, B), dense in (fA, fB); fx is implied.
class WPoly {
 public:
  explicit WPoly(unsigned w = 0) : w_(w), na_(w / 2 + 1), nb_(w / 3 + 1), c_(na_ * nb_) {}

  unsigned weight() const { return w_; }
  bool valid(unsigned fa, unsigned fb) const { return 2 * fa + 3 * fb <= w_; }
  BigInt& at(unsigned fa, unsigned fb) { return c_[fa * nb_ + fb]; }
  const BigInt& at(unsigned fa, unsigned fb) const { return c_[fa * nb_ + fb]; }

  friend WPoly operator*(const WPoly& p, const WPoly& q) {
    WPoly r(p.w_ + q.w_);
    const auto lp = p.support();
    const auto lq = q.support();
    for (const auto& [a1, b1] : lp) {
      const BigInt& u = p.at(a1, b1);
      for (const auto& [a2, b2] : lq) {
        mpz_addmul(r.at(a1 + a2, b1 + b2).get_mpz_t(), u.get_mpz_t(), q.at(a2, b2).get_mpz_t());
      }
    }
    return r;
  }

  WPoly& operator-=(const WPoly& o) {
    if (o.w_ != w_) throw std::logic_error("weight mismatch in division polynomial recursion");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }

  void divide_exact(unsigned long d) {
    for (auto& v : c_) mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), d);
  }

  std::vector<std::pair<unsigned, unsigned>> support() const {
    std::vector<std::pair<unsigned, unsigned>> s;
    for (unsigned fa = 0; fa < na_; ++fa) {
      for (unsigned fb = 0; fb < nb_; ++fb) {
        if (valid(fa, fb) && at(fa, fb) != 0) s.emplace_back(fa, fb);
      }
    }
    return s;
  }

 private:
  unsigned w_;
  unsigned na_;
  unsigned nb_;
  std::vector<BigInt> c_;
};

WPoly cubic() {
  WPoly f(3);
  f.at(0, 0) = 1;
  f.at(1, 0) = 1;
  f.at(0, 1) = 1;
  return f;
}

WPoly base_phi(unsigned n) {
  switch (n) {
    case 1: {
      WPoly p(0);
      p.at(0, 0) = 1;
      return p;
    }
    case 2: {
      WPoly p(0);
      p.at(0, 0) = 2;
      return p;
    }
    case 3: {
      WPoly p(4);
      p.at(0, 0) = 3;
      p.at(1, 0) = 6;
      p.at(0, 1) = 12;
      p.at(2, 0) = -1;
      return p;
    }
    case 4: {
      WPoly p(6);
      p.at(0, 0) = 4;
      p.at(1, 0) = 20;
      p.at(0, 1) = 80;
      p.at(2, 0) = -20;
      p.at(1, 1) = -16;
      p.at(0, 2) = -32;
      p.at(3, 0) = -4;
      return p;
    }
    default:
      throw std::logic_error("no base case");
  }
}

// Stripped recursion: psi_n = y^{[n even]} phi_n with y^2 = F.
class PhiRecursion {
 public:
  const WPoly& get(unsigned n) {
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    WPoly v = n <= 4 ? base_phi(n) : compute(n);
    return memo_.emplace(n, std::move(v)).first->second;
  }

 private:
  WPoly compute(unsigned n) {
    const unsigned m = n / 2;
    if (n % 2 == 1) {
      const WPoly f2 = f_ * f_;
      const WPoly c3 = get(m) * get(m) * get(m);
      const WPoly d3 = get(m + 1) * get(m + 1) * get(m + 1);
      if (m % 2 == 0) {
        WPoly r = f2 * get(m + 2) * c3;
        r -= get(m - 1) * d3;
        return r;
      }
      WPoly r = get(m + 2) * c3;
      r -= f2 * get(m - 1) * d3;
      return r;
    }
    WPoly inner = get(m + 2) * get(m - 1) * get(m - 1);
    inner -= get(m - 2) * get(m + 1) * get(m + 1);
    WPoly r = get(m) * inner;
    r.divide_exact(2);
    return r;
  }

  WPoly f_ = cubic();
  std::map<unsigned, WPoly> memo_;
};

DivPoly to_divpoly(unsigned n, const WPoly& w) {
  DivPoly d;
  d.n = n;
  d.y_factor = n % 2 == 0 ? 1 : 0;
  d.weight = w.weight();
  for (const auto& [fa, fb] : w.support()) d.terms.push_back({w.weight() - 2 * fa - 3 * fb, fa, fb, w.at(fa, fb)});
  std::sort(d.terms.begin(), d.terms.end(), [](const DivTerm& l, const DivTerm& r) {
    if (l.fx != r.fx) return l.fx > r.fx;
    if (l.fA != r.fA) return l.fA < r.fA;
    return l.fB < r.fB;
  });
  return d;
}

std::optional<std::filesystem::path> cache_path(unsigned n) {
  const char* dir = std::getenv("INTEGRAL_CENSUS_CACHE");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir) / ("psi_" + std::to_string(n) + ".json");
}

std::optional<DivPoly> load_cached(unsigned n) {
  const auto path = cache_path(n);
  if (!path || !std::filesystem::exists(*path)) return std::nullopt;
  try {
    std::ifstream in(*path);
    const auto j = nlohmann::json::parse(in);
    if (j.at("n").get<unsigned>() != n) return std::nullopt;
    DivPoly d;
    d.n = n;
    d.y_factor = j.at("y_factor").get<unsigned>();
    d.weight = j.at("weight").get<unsigned>();
    for (const auto& t : j.at("terms")) {
      d.terms.push_back({t.at("f_x").get<unsigned>(), t.at("f_A").get<unsigned>(), t.at("f_B").get<unsigned>(),
                         parse_bigint(t.at("coeff").get<std::string>())});
    }
    return d;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable cache entries are recomputed
  }
}

void store_cached(const DivPoly& d) {
  const auto path = cache_path(d.n);
  if (!path) return;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : d.terms) {
    terms.push_back({{"f_x", t.fx}, {"f_A", t.fA}, {"f_B", t.fB}, {"coeff", to_string(t.coeff)}});
  }
  const nlohmann::json j = {{"n", d.n}, {"y_factor", d.y_factor}, {"weight", d.weight}, {"terms", terms}};
  std::error_code ec;
  std::filesystem::create_directories(path->parent_path(), ec);
  const auto tmp = path->string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return;
    out << j.dump();
  }
  std::filesystem::rename(tmp, *path, ec);
}

void check_n(unsigned n, unsigned n_max) {
  if (n == 0) throw ValidationError("division polynomial index must be positive");
  if (n > n_max) throw ValidationError("division polynomial index " + std::to_string(n) + " exceeds n_max");
}

// phi_k(P) values with F = y^2 at the point.
class PhiValues {
 public:
  PhiValues(const CurveModel& c, const Rational& x) : a_(c.a), b_(c.b), x_(x) {
    f_ = x * x * x + a_ * x + b_;
  }

  const Rational& fval() const { return f_; }

  const Rational& get(unsigned n) {
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    return memo_.emplace(n, compute(n)).first->second;
  }

 private:
  Rational compute(unsigned n) {
    const Rational& x = x_;
    switch (n) {
      case 0: return Rational(0);
      case 1: return Rational(1);
      case 2: return Rational(2);
      case 3: {
        const Rational x2 = x * x;
        return 3 * x2 * x2 + 6 * a_ * x2 + 12 * b_ * x - a_ * a_;
      }
      case 4: {
        const Rational x2 = x * x;
        const Rational x3 = x2 * x;
        return 4 * (x3 * x3 + 5 * a_ * x2 * x2 + 20 * b_ * x3 - 5 * a_ * a_ * x2 - 4 * a_ * b_ * x - 8 * b_ * b_ -
                    a_ * a_ * a_);
      }
      default: break;
    }
    const unsigned m = n / 2;
    if (n % 2 == 1) {
      Rational c3 = get(m);
      c3 = c3 * c3 * c3;
      Rational d3 = get(m + 1);
      d3 = d3 * d3 * d3;
      const Rational f2 = f_ * f_;
      if (m % 2 == 0) return f2 * get(m + 2) * c3 - get(m - 1) * d3;
      return get(m + 2) * c3 - f2 * get(m - 1) * d3;
    }
    const Rational& pm1 = get(m - 1);
    const Rational& pp1 = get(m + 1);
    return get(m) * (get(m + 2) * pm1 * pm1 - get(m - 2) * pp1 * pp1) / 2;
  }

  Rational a_;
  Rational b_;
  Rational x_;
  Rational f_;
  std::map<unsigned, Rational> memo_;
};

std::vector<Rational> poly_mul(const std::vector<Rational>& p, const std::vector<Rational>& q) {
  std::vector<Rational> r(p.size() + q.size() - 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  }
  return r;
}

std::vector<Rational> to_rational(const std::vector<BigInt>& v) { return {v.begin(), v.end()}; }

Rational horner(const std::vector<Rational>& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

BigInt DivPoly::coeff(unsigned fx, unsigned fA, unsigned fB) const {
  for (const auto& t : terms) {
    if (t.fx == fx && t.fA == fA && t.fB == fB) return t.coeff;
  }
  return 0;
}

unsigned DivPoly::x_degree() const {
  unsigned d = 0;
  for (const auto& t : terms) d = std::max(d, t.fx);
  return d;
}

BigInt DivPoly::leading_x_coeff() const {
  const unsigned d = x_degree();
  BigInt s = 0;
  for (const auto& t : terms) {
    if (t.fx == d && t.fA == 0 && t.fB == 0) s += t.coeff;
  }
  return s;
}

std::vector<BigInt> DivPoly::x_coefficients(const CurveModel& c) const {
  std::vector<BigInt> out(x_degree() + 1);
  for (const auto& t : terms) {
    BigInt v = t.coeff, pa, pb;
    mpz_pow_ui(pa.get_mpz_t(), c.a.get_mpz_t(), t.fA);
    mpz_pow_ui(pb.get_mpz_t(), c.b.get_mpz_t(), t.fB);
    out[t.fx] += v * pa * pb;
  }
  return out;
}

Rational DivPoly::eval_stripped(const CurveModel& c, const Rational& x) const {
  return horner(to_rational(x_coefficients(c)), x);
}

std::shared_ptr<const DivPoly> psi(unsigned n, unsigned n_max) {
  check_n(n, n_max);
  static std::mutex mu;
  static std::map<unsigned, std::shared_ptr<const DivPoly>> cache;
  static PhiRecursion rec;
  const std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::shared_ptr<const DivPoly> out;
  if (auto loaded = load_cached(n)) {
    out = std::make_shared<const DivPoly>(std::move(*loaded));
  } else {
    out = std::make_shared<const DivPoly>(to_divpoly(n, rec.get(n)));
    store_cached(*out);
  }
  cache.emplace(n, out);
  return out;
}

namespace serial {
DivPoly psi(unsigned n) {
  check_n(n, ~0U);
  PhiRecursion rec;
  return to_divpoly(n, rec.get(n));
}
}  // namespace serial

CurvePoint multiply_point(const CurveModel& c, const CurvePoint& p, unsigned n, unsigned n_max) {
  check_n(n, n_max);
  if (!on_curve(c, p)) throw ValidationError("point not on curve");
  if (p.identity) return p;
  if (n == 1) return p;
  PhiValues phi(c, p.x);
  const Rational& f = phi.fval();  // = y^2
  const bool even = n % 2 == 0;
  const Rational& pn = phi.get(n);
  if (pn == 0 || (even && f == 0)) return CurvePoint::at_infinity();
  const Rational pn2 = pn * pn;
  Rational x = even ? Rational(p.x - phi.get(n - 1) * phi.get(n + 1) / (f * pn2))
                    : Rational(p.x - f * phi.get(n - 1) * phi.get(n + 1) / pn2);
  Rational denom = 2 * pn2 * pn2;
  if (even) denom *= f * f;
  Rational y = p.y * phi.get(2 * n) / denom;
  return CurvePoint::affine(std::move(x), std::move(y));
}

std::optional<BigInt> denominator_of_multiple(const CurveModel& c, const CurvePoint& p, unsigned n, unsigned n_max) {
  if (p.identity) throw ValidationError("affine point required");
  const CurvePoint q = multiply_point(c, p, n, n_max);
  if (q.identity) return std::nullopt;
  return q.x.get_den();
}

CoeffGrowthReport verify_coeff_growth(unsigned n_max, const Real& K1, const Real& K2, const Real& K3) {
  if (!(K1 > 1) || !(K3 > 1) || !(K2 >= 0)) throw ValidationError("need K1, K3 > 1 and K2 >= 0");
  if (n_max < 2) throw ValidationError("n_max must be >= 2");
  using boost::multiprecision::log;
  CoeffGrowthReport rep;
  Real worst_log = -std::numeric_limits<double>::infinity();
  const Real lk1 = log(K1);
  const Real lk3 = log(K3);
  for (unsigned n = 2; n <= n_max; ++n) {
    const auto poly = psi(n, std::max(n_max, kDefaultNMax));
    const Real ln = log(Real(n));
    const unsigned top = 2 * ((n * n - 1) / 4);
    for (const auto& t : poly->terms) {
      const Real bound = lk1 + K2 * ln + ln * ln * Real(static_cast<long>(top) - static_cast<long>(t.fx)) * lk3;
      const Real r = log_abs(t.coeff) - bound;
      if (r > worst_log) {
        worst_log = r;
        rep.witness_n = n;
        rep.witness_term = t;
      }
    }
  }
  rep.worst_ratio = boost::multiprecision::exp(worst_log);
  rep.all_within = worst_log <= 0;
  return rep;
}

std::vector<Rational> triple_root_polynomial(const CurveModel& c, const Rational& x_r) {
  const auto p3 = to_rational(psi(3)->x_coefficients(c));
  const auto p4 = to_rational(psi(4)->x_coefficients(c));
  const std::vector<Rational> f{Rational(c.b), Rational(c.a), Rational(0), Rational(1)};
  const auto p3sq = poly_mul(p3, p3);
  auto out = poly_mul(p3sq, {-x_r, Rational(1)});
  // psi_2 psi_4 = (2y)(y phi_4) = 2 F phi_4
  const auto p24 = poly_mul(f, p4);
  for (std::size_t i = 0; i < p24.size(); ++i) out[i] -= 2 * p24[i];
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

bool triple_root_identity_check(const CurveModel& c, const CurvePoint& r, unsigned sample_count,
                                std::uint64_t seed) {
  if (r.identity) throw ValidationError("triple-root check needs an affine point R");
  if (!on_curve(c, r)) throw ValidationError("point not on curve");
  const auto poly = triple_root_polynomial(c, r.x);
  const auto p3 = to_rational(psi(3)->x_coefficients(c));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> num(-60, 60);
  std::uniform_int_distribution<long> den(1, 25);
  const Rational A(c.a), B(c.b);
  unsigned done = 0;
  unsigned attempts = 0;
  while (done < sample_count) {
    if (++attempts > 100 * sample_count + 100) throw ComputationError("too many poles while sampling");
    Rational x0(num(rng), den(rng));
    x0.canonicalize();
    const Rational f0 = x0 * x0 * x0 + A * x0 + B;
    if (f0 == 0) continue;
    const Rational x2 = (x0 * x0 * x0 * x0 - 2 * A * x0 * x0 - 8 * B * x0 + A * A) / (4 * f0);
    if (x2 == x0) continue;
    const Rational dx = x0 - x2;
    const Rational x3 = (2 * (x0 + x2) * (x0 * x2 + A) + 4 * B) / (dx * dx) - x0;
    const Rational s = horner(p3, x0);
    if (s * s * (x3 - r.x) != horner(poly, x0)) return false;
    ++done;
  }
  return true;
}

}  // namespace icensus
