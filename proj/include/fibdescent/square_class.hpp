#pragma once

// Global square classes Q*/(Q*)^2 and p-adic valuations of rationals.

#include <fibdescent/integer.hpp>
#include <fibdescent/place.hpp>
#include <fibdescent/primes.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

/// v_p(x) for nonzero rational x and finite place p.
inline int valuation(const Rational& x, const Place& p) {
  if (x == 0) throw std::domain_error("valuation of zero");
  if (p.is_real()) throw std::invalid_argument("valuation at the real place");
  return integer_valuation(x.get_num(), p.prime()) - integer_valuation(x.get_den(), p.prime());
}

/// Element of Q*/(Q*)^2: sign times a square-free product of distinct primes.
class SquareClass {
 public:
  SquareClass() = default;

  /// Builds from a sign and a set of primes (any order, duplicates cancel).
  SquareClass(int sign, std::vector<Integer> primes) : negative_(sign < 0) {
    std::sort(primes.begin(), primes.end());
    for (auto& p : primes) {
      if (!support_.empty() && support_.back() == p) {
        support_.pop_back();
      } else {
        support_.push_back(std::move(p));
      }
    }
  }

  static SquareClass identity() { return {}; }

  int sign() const { return negative_ ? -1 : 1; }
  const std::vector<Integer>& support() const { return support_; }
  bool is_identity() const { return !negative_ && support_.empty(); }

  /// The square-free integer representing the class.
  Integer value() const {
    Integer v = negative_ ? -1 : 1;
    for (const auto& p : support_) v *= p;
    return v;
  }

  bool has_prime(const Integer& p) const {
    return std::binary_search(support_.begin(), support_.end(), p);
  }

  friend SquareClass operator*(const SquareClass& a, const SquareClass& b) {
    SquareClass out;
    out.negative_ = a.negative_ != b.negative_;
    std::set_symmetric_difference(a.support_.begin(), a.support_.end(), b.support_.begin(),
                                  b.support_.end(), std::back_inserter(out.support_));
    return out;
  }

  SquareClass& operator*=(const SquareClass& b) { return *this = *this * b; }

  friend bool operator==(const SquareClass& a, const SquareClass& b) {
    return a.negative_ == b.negative_ && a.support_ == b.support_;
  }

  /// Canonical order: |value|, then positive before negative.
  friend bool operator<(const SquareClass& a, const SquareClass& b) {
    int c = cmp(abs(a.value()), abs(b.value()));
    if (c != 0) return c < 0;
    return !a.negative_ && b.negative_;
  }

  std::string to_string() const { return fibdescent::to_string(value()); }

 private:
  bool negative_ = false;
  std::vector<Integer> support_;
};

namespace detail {

inline void accumulate_odd_primes(const Integer& n, std::vector<Integer>& out) {
  if (abs(n) == 1) return;
  for (auto& [p, e] : factor(n)) {
    if (e % 2 != 0) out.push_back(p);
  }
}

}  // namespace detail

/// Square class of a nonzero rational; factors numerator and denominator.
inline SquareClass square_class(const Rational& x) {
  if (x == 0) throw std::domain_error("square class of zero");
  std::vector<Integer> primes;
  detail::accumulate_odd_primes(x.get_num(), primes);
  detail::accumulate_odd_primes(x.get_den(), primes);
  return SquareClass(sgn(x), std::move(primes));
}

/// Square class when the caller knows every prime of x except possibly one
/// extra prime cofactor (or a square of one); avoids general factorization
/// of large values such as p_i(t0).
inline SquareClass square_class_given(const Rational& x, const std::vector<Integer>& known) {
  if (x == 0) throw std::domain_error("square class of zero");
  Integer num = abs(x.get_num()), den = x.get_den();
  std::vector<Integer> primes;
  for (const auto& p : known) {
    int e = remove_factor(num, p) - remove_factor(den, p);
    if (e % 2 != 0) primes.push_back(p);
  }
  Integer rest = num * den;
  if (rest != 1) {
    if (is_perfect_square(rest)) {
      // even exponent, contributes nothing
    } else if (rest < miller_rabin_bound() && is_prime(rest)) {
      primes.push_back(rest);
    } else {
      detail::accumulate_odd_primes(rest, primes);
    }
  }
  return SquareClass(sgn(x), std::move(primes));
}

inline SquareClass square_class(const Integer& x) { return square_class(Rational(x)); }

}  // namespace fibdescent
