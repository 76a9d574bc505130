#pragma once

// Hensel search for Z_p-points on one polynomial equation in at most two
// variables. A witness is certified by the strong form of Hensel's lemma:
// if v(f(w)) > 2 v(df/dz(w)) for one of the variables z, then w lifts to a root.

#include <fibdescent/integer.hpp>
#include <fibdescent/place.hpp>

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fibdescent {

/// Polynomial in x, y with integer coefficients, keyed by (deg_x, deg_y).
class Polynomial2 {
 public:
  Polynomial2() = default;

  Polynomial2& add_term(const Integer& coeff, unsigned deg_x, unsigned deg_y = 0) {
    auto& c = terms_[{deg_x, deg_y}];
    c += coeff;
    if (c == 0) terms_.erase({deg_x, deg_y});
    return *this;
  }

  Integer operator()(const Integer& x, const Integer& y = 0) const {
    Integer acc = 0;
    for (const auto& [deg, c] : terms_) acc += c * pow(x, deg.first) * pow(y, deg.second);
    return acc;
  }

  Polynomial2 derivative_x() const {
    Polynomial2 out;
    for (const auto& [deg, c] : terms_) {
      if (deg.first > 0) out.add_term(c * deg.first, deg.first - 1, deg.second);
    }
    return out;
  }

  Polynomial2 derivative_y() const {
    Polynomial2 out;
    for (const auto& [deg, c] : terms_) {
      if (deg.second > 0) out.add_term(c * deg.second, deg.first, deg.second - 1);
    }
    return out;
  }

  bool depends_on_y() const {
    for (const auto& [deg, c] : terms_) {
      if (deg.second > 0) return true;
    }
    return false;
  }

  /// a x^2 + b y^2 - 1 for integral coefficients a, b.
  static Polynomial2 diagonal_conic(const Integer& a, const Integer& b) {
    Polynomial2 f;
    f.add_term(a, 2, 0).add_term(b, 0, 2).add_term(Integer(-1), 0, 0);
    return f;
  }

 private:
  std::map<std::pair<unsigned, unsigned>, Integer> terms_;
};

enum class HenselStatus { witness, certified_none, inconclusive };

inline std::string to_string(HenselStatus s) {
  switch (s) {
    case HenselStatus::witness: return "witness";
    case HenselStatus::certified_none: return "certified_none";
    case HenselStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct HenselResult {
  HenselStatus status = HenselStatus::inconclusive;
  Integer x, y;                 // witness residues modulo p^precision
  unsigned precision = 0;       // f(x, y) = 0 mod p^precision
  int derivative_valuation = -1;  // v_p of the certifying partial derivative
  char variable = 'x';          // which partial derivative certifies

  bool found() const { return status == HenselStatus::witness; }
};

namespace detail {

inline int valuation_capped(const Integer& n, const Integer& p, int cap) {
  if (n == 0) return cap;
  int v = integer_valuation(n, p);
  return v < cap ? v : cap;
}

// Newton refinement along one variable until f = 0 mod p^target.
inline void newton_refine(const Polynomial2& f, const Polynomial2& df, const Integer& p, int m,
                          unsigned target, Integer& x, Integer& y, char variable) {
  const Integer modulus = pow(p, target + m + 1);
  for (int guard = 0; guard < 128; ++guard) {
    Integer fv = f(x, y);
    if (fv == 0 || valuation_capped(fv, p, static_cast<int>(target)) >= static_cast<int>(target)) {
      return;
    }
    Integer dv = df(x, y);
    Integer pm = pow(p, static_cast<unsigned long>(m));
    Integer num = fv / pm;  // exact: v(f) >= 2m+1
    Integer den = dv / pm;  // unit
    Integer step = mod(num * inverse_mod(den, modulus), modulus);
    if (variable == 'x') {
      x = mod(x - step, modulus);
    } else {
      y = mod(y - step, modulus);
    }
  }
  throw std::logic_error("Newton refinement did not converge");
}

}  // namespace detail

/// Searches Z_p-points of f = 0 through residues modulo p, p^2, ..., p^precision.
/// Returns a certified witness, a certificate of no solution (some residue
/// level has no survivors), or inconclusive.
inline HenselResult hensel_solve(const Polynomial2& f, const Integer& p, unsigned precision,
                                 std::size_t node_limit = 2000000) {
  if (precision == 0) throw std::invalid_argument("hensel_solve: precision must be positive");
  if (p < 2) throw std::invalid_argument("hensel_solve: bad prime");
  const bool bivariate = f.depends_on_y();
  const Polynomial2 fx = f.derivative_x(), fy = f.derivative_y();
  std::vector<std::pair<Integer, Integer>> level;
  {
    const unsigned long limit = mpz_get_ui(p.get_mpz_t());
    if (!fits_int64(p) || limit * (bivariate ? limit : 1) > node_limit) {
      throw std::invalid_argument("hensel_solve: prime too large for residue enumeration");
    }
    for (unsigned long x = 0; x < limit; ++x) {
      for (unsigned long y = 0; y < (bivariate ? limit : 1); ++y) {
        if (mod(f(Integer(x), Integer(y)), p) == 0) level.emplace_back(Integer(x), Integer(y));
      }
    }
  }
  Integer pk = p;
  std::size_t visited = level.size();
  for (unsigned k = 1;; ++k) {
    HenselResult r;
    if (level.empty()) {
      r.status = HenselStatus::certified_none;
      r.precision = k;
      return r;
    }
    const int cap = static_cast<int>(k);
    for (const auto& [x, y] : level) {
      int mx = detail::valuation_capped(fx(x, y), p, cap);
      int my = bivariate ? detail::valuation_capped(fy(x, y), p, cap) : cap;
      char var = mx <= my ? 'x' : 'y';
      int m = std::min(mx, my);
      if (m < cap && 2 * m + 1 <= cap) {
        r.status = HenselStatus::witness;
        r.x = x;
        r.y = y;
        r.variable = var;
        r.derivative_valuation = m;
        detail::newton_refine(f, var == 'x' ? fx : fy, p, m, precision, r.x, r.y, var);
        Integer target = pow(p, precision);
        r.x = mod(r.x, target);
        r.y = mod(r.y, target);
        r.precision = precision;
        return r;
      }
    }
    if (k >= precision) {
      r.status = HenselStatus::inconclusive;
      r.precision = precision;
      return r;
    }
    // lift every survivor by one p-adic digit
    std::vector<std::pair<Integer, Integer>> next;
    const Integer pk1 = pk * p;
    const unsigned long digits = mpz_get_ui(p.get_mpz_t());
    for (const auto& [x, y] : level) {
      for (unsigned long s = 0; s < digits; ++s) {
        for (unsigned long t = 0; t < (bivariate ? digits : 1); ++t) {
          Integer nx = x + pk * s, ny = y + pk * t;
          if (mod(f(nx, ny), pk1) == 0) next.emplace_back(nx, ny);
        }
      }
      visited += digits * (bivariate ? digits : 1);
      if (visited > node_limit) {
        HenselResult out;
        out.status = HenselStatus::inconclusive;
        out.precision = k;
        return out;
      }
    }
    level = std::move(next);
    pk = pk1;
  }
}

}  // namespace fibdescent
