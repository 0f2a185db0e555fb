#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>
#include <boost/multiprecision/mpfr.hpp>

namespace icensus {

using BigInt = mpz_class;
using Rational = mpq_class;

/// 50 significant decimal digits; every "high precision" quantity in the
/// library (naive heights, optimizer constants, local heights) uses this.
using Real = boost::multiprecision::mpfr_float_50;

/// Invalid input or configuration. The CLI maps this to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-posed computation that could not be completed (precision caps,
/// infeasible programs, empty slices). The CLI maps this to exit status 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

BigInt parse_bigint(std::string_view text);
/// Accepts "p/q", an integer literal, or a plain decimal such as "-0.125".
Rational parse_rational(std::string_view text);

std::string to_string(const BigInt& v);
std::string to_string(const Rational& v);

/// Exact floor square root of n >= 0.
BigInt isqrt(const BigInt& n);
/// True iff n >= 0 is a perfect square; on success writes the root.
bool is_perfect_square(const BigInt& n, BigInt* root = nullptr);

bool fits_int64(const BigInt& v);
std::int64_t to_int64(const BigInt& v);
BigInt from_int128(__int128 v);

/// Natural log of |v| for v != 0, accurate far beyond double range.
Real log_abs(const BigInt& v);
Real to_real(const BigInt& v);
Real to_real(const Rational& v);

/// log max(|num|, |den|) of a rational in lowest terms (0 for zero).
Real log_height(const Rational& v);

/// Exact floor of a finite real.
BigInt floor_to_bigint(const Real& v);

/// log max(1, |v|)
Real log_plus(const Real& v);

inline Real pi_real() { return boost::multiprecision::atan(Real(1)) * 4; }

}  // namespace icensus
