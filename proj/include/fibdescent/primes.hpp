#pragma once

// Deterministic primality, desk-scale factorization and ordered prime streams.

#include <fibdescent/integer.hpp>

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fibdescent {

/// Miller-Rabin with the first thirteen prime bases is a proof of primality
/// below this bound (Sorenson & Webster).
inline const Integer& miller_rabin_bound() {
  static const Integer bound("3317044064679887385961981");
  return bound;
}

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr std::array<unsigned, 13> kMillerRabinBases = {2,  3,  5,  7,  11, 13, 17,
                                                               19, 23, 29, 31, 37, 41};

inline const std::vector<unsigned>& small_primes() {
  static const std::vector<unsigned> primes = [] {
    constexpr unsigned limit = 10000;
    std::vector<bool> composite(limit + 1, false);
    std::vector<unsigned> out;
    for (unsigned i = 2; i <= limit; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (unsigned j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

inline bool miller_rabin_round(const Integer& n, const Integer& odd_part, unsigned twos,
                               unsigned base) {
  Integer a(base);
  Integer x = powmod(a, odd_part, n);
  const Integer n_minus_one = n - 1;
  if (x == 1 || x == n_minus_one) return true;
  for (unsigned r = 1; r < twos; ++r) {
    x = x * x % n;
    if (x == n_minus_one) return true;
    if (x == 1) return false;
  }
  return false;
}

}  // namespace detail

/// Deterministic primality for |n| below miller_rabin_bound(); larger inputs
/// are rejected with std::domain_error.
inline bool is_prime(const Integer& n) {
  if (n < 2) return false;
  if (n >= miller_rabin_bound()) {
    throw std::domain_error("primality test beyond deterministic Miller-Rabin range: " +
                            to_string(n));
  }
  for (unsigned p : detail::small_primes()) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p) != 0) return false;
    if (p > 50) break;
  }
  Integer odd_part = n - 1;
  unsigned twos = static_cast<unsigned>(remove_factor(odd_part, Integer(2)));
  for (unsigned base : detail::kMillerRabinBases) {
    if (!detail::miller_rabin_round(n, odd_part, twos, base)) return false;
  }
  return true;
}

namespace detail {

// Brent's variant of Pollard rho. Returns a nontrivial factor or 0 on failure.
inline Integer pollard_brent(const Integer& n, unsigned long seed, unsigned long max_iter) {
  Integer y(seed % 97 + 2), c(seed % 89 + 1), g(1), q(1), x, ys;
  const unsigned long m = 128;
  unsigned long r = 1, iterations = 0;
  auto step = [&](Integer& v) { v = (v * v + c) % n; };
  while (g == 1) {
    x = y;
    for (unsigned long i = 0; i < r; ++i) step(y);
    unsigned long k = 0;
    while (k < r && g == 1) {
      ys = y;
      const unsigned long lim = std::min(m, r - k);
      for (unsigned long i = 0; i < lim; ++i) {
        step(y);
        q = q * abs(x - y) % n;
      }
      g = gcd(q, n);
      k += m;
      iterations += lim;
    }
    r *= 2;
    if (iterations > max_iter) return 0;
  }
  if (g == n) {
    do {
      step(ys);
      g = gcd(abs(x - ys), n);
    } while (g == 1);
  }
  return g == n ? Integer(0) : g;
}

inline void factor_into(Integer n, std::vector<std::pair<Integer, int>>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.emplace_back(n, 1);
    return;
  }
  if (is_perfect_square(n)) {
    Integer r = isqrt(n);
    std::vector<std::pair<Integer, int>> half;
    factor_into(r, half);
    for (auto& [p, e] : half) out.emplace_back(p, 2 * e);
    return;
  }
  for (unsigned long seed = 1; seed < 40; ++seed) {
    Integer f = pollard_brent(n, seed, 4000000);
    if (f != 0 && f != 1 && f != n) {
      factor_into(f, out);
      factor_into(n / f, out);
      return;
    }
  }
  throw FactorizationError("could not factor " + to_string(n));
}

}  // namespace detail

/// Prime factorization of |n| (n != 0) as sorted (prime, exponent) pairs.
/// Trial division to 10^4, then Pollard-Brent; failure throws FactorizationError.
inline std::vector<std::pair<Integer, int>> factor(const Integer& n) {
  if (n == 0) throw std::domain_error("factor(0)");
  Integer m = abs(n);
  std::vector<std::pair<Integer, int>> raw;
  for (unsigned p : detail::small_primes()) {
    if (m == 1) break;
    if (mpz_divisible_ui_p(m.get_mpz_t(), p) == 0) continue;
    int e = remove_factor(m, Integer(p));
    raw.emplace_back(Integer(p), e);
  }
  const unsigned last = detail::small_primes().back();
  if (m > 1) {
    if (m < Integer(last) * last) {
      raw.emplace_back(m, 1);
    } else {
      detail::factor_into(m, raw);
    }
  }
  std::sort(raw.begin(), raw.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<std::pair<Integer, int>> merged;
  for (auto& [p, e] : raw) {
    if (!merged.empty() && merged.back().first == p) {
      merged.back().second += e;
    } else {
      merged.emplace_back(p, e);
    }
  }
  return merged;
}

/// Ascending primes strictly greater than `start`, skipping `avoid`.
class PrimeStream {
 public:
  explicit PrimeStream(Integer start, std::vector<Integer> avoid = {})
      : current_(std::move(start)), avoid_(avoid.begin(), avoid.end()) {}

  Integer next() {
    do {
      if (current_ < 2) {
        current_ = 2;
      } else {
        mpz_nextprime(current_.get_mpz_t(), current_.get_mpz_t());
        // mpz_nextprime is probabilistic; confirm deterministically.
        while (!is_prime(current_)) mpz_nextprime(current_.get_mpz_t(), current_.get_mpz_t());
      }
    } while (avoid_.contains(current_));
    return current_;
  }

 private:
  struct Less {
    bool operator()(const Integer& a, const Integer& b) const { return a < b; }
  };
  Integer current_;
  std::set<Integer, Less> avoid_;
};

}  // namespace fibdescent
