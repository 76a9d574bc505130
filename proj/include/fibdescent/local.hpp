#pragma once

// Local square classes and Hilbert symbols. Everything here is F2-valued:
// the Hilbert symbol is 0 when z^2 = a x^2 + b y^2 has a nontrivial solution
// over Q_v and 1 otherwise.

#include <fibdescent/integer.hpp>
#include <fibdescent/place.hpp>
#include <fibdescent/square_class.hpp>

#include <cstdint>
#include <stdexcept>

namespace fibdescent {

/// Jacobi symbol (a|n) for odd n > 0, by the reciprocity recursion.
inline int jacobi(const Integer& a_in, const Integer& n_in) {
  if (n_in <= 0 || mpz_even_p(n_in.get_mpz_t())) {
    throw std::invalid_argument("jacobi: modulus must be odd and positive");
  }
  Integer a = mod(a_in, n_in), n = n_in;
  int result = 1;
  while (a != 0) {
    int twos = remove_factor(a, Integer(2));
    if (twos % 2 != 0) {
      unsigned long r = mpz_fdiv_ui(n.get_mpz_t(), 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (mpz_fdiv_ui(a.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(n.get_mpz_t(), 4) == 3) result = -result;
    a = mod(a, n);
  }
  return n == 1 ? result : 0;
}

/// Legendre symbol by Euler's criterion a^((p-1)/2) mod p.
inline int euler_criterion(const Integer& a, const Integer& p) {
  Integer r = powmod(mod(a, p), (p - 1) / 2, p);
  if (r == 0) return 0;
  return r == 1 ? 1 : -1;
}

/// Legendre symbol (a|p) for an odd prime p.
inline int legendre(const Integer& a, const Integer& p) { return jacobi(a, p); }

/// Legendre symbol of a rational whose denominator is prime to p.
inline int legendre(const Rational& a, const Integer& p) {
  return jacobi(a.get_num() * a.get_den(), p);
}

/// Coordinates of x in Q_v^*/(Q_v^*)^2 over F2.
///   real:  bit0 = [x < 0]
///   odd p: bit0 = v_p(x) mod 2, bit1 = [unit part is a non-residue]
///   p = 2: bit0 = v_2(x) mod 2, bit1 = [u = 3 mod 4], bit2 = [u = 3,5 mod 8]
struct LocalSquareClass {
  Place place;
  std::uint8_t bits = 0;

  int dimension() const { return place.is_real() ? 1 : (place.prime() == 2 ? 3 : 2); }
  bool is_identity() const { return bits == 0; }
  bool valuation_odd() const { return place.is_finite() && (bits & 1U) != 0; }

  friend LocalSquareClass operator*(const LocalSquareClass& a, const LocalSquareClass& b) {
    if (!(a.place == b.place)) throw std::invalid_argument("local classes at different places");
    return {a.place, static_cast<std::uint8_t>(a.bits ^ b.bits)};
  }
  friend bool operator==(const LocalSquareClass& a, const LocalSquareClass& b) {
    return a.place == b.place && a.bits == b.bits;
  }
};

inline int local_dimension(const Place& v) {
  return v.is_real() ? 1 : (v.prime() == 2 ? 3 : 2);
}

inline LocalSquareClass local_square_class(const Rational& x, const Place& v) {
  if (x == 0) throw std::domain_error("local square class of zero");
  if (v.is_real()) return {v, static_cast<std::uint8_t>(sgn(x) < 0 ? 1 : 0)};
  const Integer& p = v.prime();
  Integer num = x.get_num(), den = x.get_den();
  int val = remove_factor(num, p) - remove_factor(den, p);
  std::uint8_t bits = (val % 2 != 0) ? 1 : 0;
  Integer unit = num * den;  // same class as num/den
  if (p == 2) {
    unsigned long r = mpz_fdiv_ui(unit.get_mpz_t(), 8);
    if (r % 4 == 3) bits |= 2;
    if (r == 3 || r == 5) bits |= 4;
  } else if (jacobi(unit, p) < 0) {
    bits |= 2;
  }
  return {v, bits};
}

inline LocalSquareClass local_square_class(const SquareClass& c, const Place& v) {
  return local_square_class(Rational(c.value()), v);
}

/// The additive Hilbert pairing written on coordinates.
inline int local_pairing(const LocalSquareClass& a, const LocalSquareClass& b) {
  if (!(a.place == b.place)) throw std::invalid_argument("pairing at different places");
  const Place& v = a.place;
  const unsigned x = a.bits, y = b.bits;
  if (v.is_real()) return static_cast<int>(x & y & 1U);
  const unsigned alpha = x & 1U, beta = y & 1U;
  if (v.prime() == 2) {
    const unsigned eps_a = (x >> 1) & 1U, eps_b = (y >> 1) & 1U;
    const unsigned om_a = (x >> 2) & 1U, om_b = (y >> 2) & 1U;
    return static_cast<int>(((eps_a & eps_b) ^ (alpha & om_b) ^ (beta & om_a)) & 1U);
  }
  const unsigned eps_p = mpz_fdiv_ui(v.prime().get_mpz_t(), 4) == 3 ? 1U : 0U;
  const unsigned n_a = (x >> 1) & 1U, n_b = (y >> 1) & 1U;
  return static_cast<int>(((alpha & beta & eps_p) ^ (alpha & n_b) ^ (beta & n_a)) & 1U);
}

/// Hilbert symbol <a, b>_v in F2 (0 = the conic z^2 = a x^2 + b y^2 has a Q_v-point).
inline int hilbert_symbol(const Rational& a, const Rational& b, const Place& v) {
  return local_pairing(local_square_class(a, v), local_square_class(b, v));
}

inline int hilbert_symbol(const SquareClass& a, const SquareClass& b, const Place& v) {
  return hilbert_symbol(Rational(a.value()), Rational(b.value()), v);
}

inline bool is_local_square(const Rational& x, const Place& v) {
  return local_square_class(x, v).is_identity();
}

/// Smallest positive quadratic non-residue modulo the odd prime p.
inline Integer least_nonresidue(const Integer& p) {
  for (Integer n = 2;; ++n) {
    if (jacobi(n, p) < 0) return n;
  }
}

/// A rational representing the local class with the given coordinates.
inline Rational local_representative(const Place& v, std::uint8_t bits) {
  if (v.is_real()) return (bits & 1U) ? Rational(-1) : Rational(1);
  const Integer& p = v.prime();
  Integer r = (bits & 1U) ? p : Integer(1);
  if (p == 2) {
    if (bits & 2U) r *= -1;
    if (bits & 4U) r *= 5;
  } else if (bits & 2U) {
    r *= least_nonresidue(p);
  }
  return Rational(r);
}

/// Generators (as coordinate vectors) of the image of local units in
/// Q_v^*/(Q_v^*)^2. Not meaningful at the real place.
inline std::vector<std::uint8_t> unit_class_generators(const Place& v) {
  if (v.is_real()) throw std::invalid_argument("unit classes at the real place");
  if (v.prime() == 2) return {2, 4};
  return {2};
}

}  // namespace fibdescent
