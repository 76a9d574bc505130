#pragma once

// Exact integers and rationals (GMP) plus the handful of helpers the rest of
// the library leans on: parsing, printing, valuations and modular reduction.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fibdescent {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::domain_error("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Integer parse_integer(std::string_view text) {
  std::string s(text);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  Integer z;
  if (s.empty() || z.set_str(s, 10) != 0) {
    throw std::invalid_argument("not a decimal integer: '" + std::string(text) + "'");
  }
  return z;
}

/// Accepts "n" or "n/m" in decimal.
inline Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text));
  return make_rational(parse_integer(text.substr(0, slash)),
                       parse_integer(text.substr(slash + 1)));
}

inline std::string to_string(const Integer& z) { return z.get_str(10); }

inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str(10);
  return q.get_num().get_str(10) + "/" + q.get_den().get_str(10);
}

inline int sign(const Integer& z) { return sgn(z); }
inline int sign(const Rational& q) { return sgn(q); }

/// Exponent of the prime p in the nonzero integer n.
inline int integer_valuation(const Integer& n, const Integer& p) {
  if (n == 0) throw std::domain_error("valuation of zero");
  Integer m = abs(n);
  int v = 0;
  if (p == 2) {
    return static_cast<int>(mpz_scan1(m.get_mpz_t(), 0));
  }
  while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t()) != 0) {
    mpz_divexact(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
    ++v;
  }
  return v;
}

/// Strips every factor p from n in place and returns how many were removed.
inline int remove_factor(Integer& n, const Integer& p) {
  if (n == 0) return 0;
  mp_bitcnt_t k = mpz_remove(n.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
  return static_cast<int>(k);
}

/// Least nonnegative residue.
inline Integer mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Integer pow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Integer powmod(const Integer& base, const Integer& e, const Integer& m) {
  Integer r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

/// Inverse of a modulo m; throws if gcd(a, m) != 1.
inline Integer inverse_mod(const Integer& a, const Integer& m) {
  Integer r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw std::domain_error("element not invertible modulo " + to_string(m));
  }
  return r;
}

/// Residue of a rational whose denominator is prime to m.
inline Integer residue(const Rational& q, const Integer& m) {
  return mod(q.get_num() * inverse_mod(q.get_den(), m), m);
}

inline bool is_perfect_square(const Integer& n) {
  return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline Integer isqrt(const Integer& n) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline Integer gcd(const Integer& a, const Integer& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

/// Nearest integer, ties rounded toward +infinity.
inline Integer round_nearest(const Rational& q) {
  Rational shifted = q + Rational(1, 2);
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  return r;
}

inline bool fits_int64(const Integer& z) { return mpz_fits_slong_p(z.get_mpz_t()) != 0; }

}  // namespace fibdescent
