#include "icensus/numeric.hpp"

namespace icensus {

BigInt parse_bigint(std::string_view text) {
  std::string s(text);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  BigInt v;
  if (s.empty() || v.set_str(s, 10) != 0) {
    throw ValidationError("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  const auto dot = text.find('.');
  if (slash == std::string_view::npos && dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string_view::npos) {
      throw ValidationError("malformed decimal '" + std::string(text) + "'");
    }
    std::string digits(text.substr(0, dot));
    if (digits.empty() || digits == "-" || digits == "+") digits += "0";
    digits += frac;
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational q(parse_bigint(digits), den);
    q.canonicalize();
    return q;
  }
  if (slash == std::string_view::npos) return Rational(parse_bigint(text));
  BigInt num = parse_bigint(text.substr(0, slash));
  BigInt den = parse_bigint(text.substr(slash + 1));
  if (den == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_string(const BigInt& v) { return v.get_str(10); }

std::string to_string(const Rational& v) {
  if (v.get_den() == 1) return v.get_num().get_str(10);
  return v.get_num().get_str(10) + "/" + v.get_den().get_str(10);
}

BigInt isqrt(const BigInt& n) {
  if (n < 0) throw ValidationError("isqrt of a negative number");
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_perfect_square(const BigInt& n, BigInt* root) {
  if (n < 0) return false;
  if (mpz_perfect_square_p(n.get_mpz_t()) == 0) return false;
  if (root != nullptr) mpz_sqrt(root->get_mpz_t(), n.get_mpz_t());
  return true;
}

bool fits_int64(const BigInt& v) { return mpz_fits_slong_p(v.get_mpz_t()) != 0; }

std::int64_t to_int64(const BigInt& v) {
  static_assert(sizeof(long) == sizeof(std::int64_t));
  if (!fits_int64(v)) throw ValidationError("integer exceeds 64 bits: " + to_string(v));
  return v.get_si();
}

BigInt from_int128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  BigInt hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
  BigInt lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
  BigInt r = (hi << 64) + lo;
  return neg ? BigInt(-r) : r;
}

Real log_abs(const BigInt& v) {
  if (v == 0) throw ValidationError("log of zero");
  BigInt top = abs(v);
  const std::size_t bits = mpz_sizeinbase(top.get_mpz_t(), 2);
  if (bits <= 200) return boost::multiprecision::log(to_real(top));
  // keep 200 leading bits; the truncation error is below 2^-199 relative
  const std::size_t shift = bits - 200;
  top >>= shift;
  return boost::multiprecision::log(to_real(top)) + Real(shift) * boost::multiprecision::log(Real(2));
}

Real to_real(const BigInt& v) { return Real(v.get_mpz_t()); }

Real to_real(const Rational& v) { return Real(v.get_mpq_t()); }

Real log_height(const Rational& v) {
  const BigInt& num = v.get_num();
  const BigInt& den = v.get_den();
  const BigInt m = abs(num) > den ? BigInt(abs(num)) : den;
  if (m == 0) return Real(0);
  return log_abs(m);
}

BigInt floor_to_bigint(const Real& v) {
  if (!boost::multiprecision::isfinite(v)) throw ValidationError("floor of a non-finite value");
  BigInt out;
  mpfr_get_z(out.get_mpz_t(), v.backend().data(), MPFR_RNDD);
  return out;
}

Real log_plus(const Real& v) {
  const Real a = boost::multiprecision::abs(v);
  return a > 1 ? Real(boost::multiprecision::log(a)) : Real(0);
}

}  // namespace icensus
