#pragma once

// Local solubility of the fibres a' x^2 + b' y^2 = 1 over Z_v and Q_v, explicit
// local points, and the global S0-integral point search.

#include <fibdescent/brauer.hpp>
#include <fibdescent/hensel.hpp>
#include <fibdescent/local.hpp>
#include <fibdescent/surface.hpp>

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fibdescent {

/// integral: x, y in Z_v.  rational: x, y in Q_v.
enum class Model { integral, rational };

enum class Solubility { soluble, insoluble, inconclusive };

inline std::string to_string(Solubility s) {
  switch (s) {
    case Solubility::soluble: return "soluble";
    case Solubility::insoluble: return "insoluble";
    case Solubility::inconclusive: return "inconclusive";
  }
  return "?";
}

/// x, y approximating a local point; `precision` is a lower bound for the
/// valuation of the residual (0 at the real place, where only signs matter).
struct LocalWitness {
  Rational x, y;
  unsigned precision = 0;
};

struct LocalSolubility {
  Solubility status = Solubility::inconclusive;
  std::optional<LocalWitness> witness;
  std::string certificate;
};

/// Square root of a modulo p^k. Requires a to be a unit; for odd p a must be a
/// quadratic residue, for p = 2 it must be 1 mod 8 (or k small enough).
inline Integer sqrt_mod_prime_power(const Integer& a_in, const Integer& p, unsigned k) {
  const Integer pk = pow(p, k);
  const Integer a = mod(a_in, pk);
  if (p == 2) {
    if (k <= 3) {
      for (unsigned long x = 1; x < 8; x += 2) {
        if (mod(Integer(x * x) - a, pk) == 0) return mod(Integer(x), pk);
      }
      throw std::domain_error("not a square modulo a power of 2");
    }
    if (mod(a, Integer(8)) != 1) throw std::domain_error("not a 2-adic square");
    Integer x = 1;
    for (unsigned j = 3; j < k; ++j) {
      if (mod(x * x - a, pow(Integer(2), j + 1)) != 0) x += pow(Integer(2), j - 1);
    }
    return mod(x, pk);
  }
  if (jacobi(a, p) != 1) throw std::domain_error("not a quadratic residue");
  // Tonelli-Shanks modulo p
  Integer q = p - 1;
  unsigned s = static_cast<unsigned>(remove_factor(q, Integer(2)));
  Integer z = least_nonresidue(p);
  Integer c = powmod(z, q, p);
  Integer t = powmod(a, q, p);
  Integer r = powmod(a, (q + 1) / 2, p);
  unsigned m = s;
  while (t != 1) {
    unsigned i = 0;
    Integer tt = t;
    while (tt != 1) {
      tt = mod(tt * tt, p);
      ++i;
    }
    Integer b = powmod(c, pow(Integer(2), m - i - 1), p);
    r = mod(r * b, p);
    c = mod(b * b, p);
    t = mod(t * c, p);
    m = i;
  }
  // Newton lifting doubles the precision each step.
  unsigned prec = 1;
  while (prec < k) {
    prec = std::min(2 * prec, k);
    const Integer mod_prec = pow(p, prec);
    Integer f = r * r - a;
    r = mod(r - f * inverse_mod(2 * r, mod_prec), mod_prec);
  }
  return mod(r, pk);
}

namespace detail {

struct IntSolution {
  Integer x, y;
};

inline int val_or(const Integer& n, const Integer& p, int fallback) {
  return n == 0 ? fallback : integer_valuation(n, p);
}

// A X^2 + B Y^2 = C over Z_p for odd p and nonzero A, B, C. Exact decision;
// the solution satisfies the equation modulo p^prec (after the common
// p-power of A, B, C is removed).
inline std::optional<IntSolution> solve_odd_integral(Integer A, Integer B, Integer C,
                                                     const Integer& p, unsigned prec) {
  int e = std::min({integer_valuation(A, p), integer_valuation(B, p), integer_valuation(C, p)});
  if (e > 0) {
    Integer pe = pow(p, static_cast<unsigned long>(e));
    A /= pe;
    B /= pe;
    C /= pe;
  }
  const int vA = integer_valuation(A, p), vB = integer_valuation(B, p),
            vC = integer_valuation(C, p);
  const Integer pk = pow(p, prec);
  auto sqrt_ratio = [&](const Integer& num, const Integer& den) -> std::optional<Integer> {
    Integer r = mod(num * inverse_mod(den, pk), pk);
    if (mod(r, p) == 0 || jacobi(r, p) != 1) return std::nullopt;
    return sqrt_mod_prime_power(r, p, prec);
  };
  if (vC == 0) {
    if (vA == 0 && vB == 0) {
      // The affine conic over F_p has p - (-AB|p) >= 2 points, none at the origin.
      for (Integer y = 0; y < p; ++y) {
        Integer num = C - B * y * y;
        if (mod(num, p) != 0) {
          if (auto x = sqrt_ratio(num, A)) return IntSolution{*x, y};
        } else if (auto yy = sqrt_ratio(C, B)) {
          return IntSolution{Integer(0), *yy};
        }
      }
      throw std::logic_error("smooth conic over F_p without points");
    }
    if (vA == 0) {
      if (auto x = sqrt_ratio(C, A)) return IntSolution{*x, Integer(0)};
      return std::nullopt;
    }
    if (vB == 0) {
      if (auto y = sqrt_ratio(C, B)) return IntSolution{Integer(0), *y};
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (vA == 0 && vB == 0) {
    if (jacobi(-A * B, p) == 1) {
      auto x = sqrt_ratio(C - B, A);
      if (!x) throw std::logic_error("expected a residue");
      return IntSolution{*x, Integer(1)};
    }
    // A X^2 + B Y^2 = 0 mod p forces X = Y = 0 mod p
    if (vC == 1) return std::nullopt;
    auto r = solve_odd_integral(A, B, C / (p * p), p, prec);
    if (!r) return std::nullopt;
    return IntSolution{p * r->x, p * r->y};
  }
  if (vA == 0) {
    auto r = solve_odd_integral(A * p * p, B, C, p, prec);
    if (!r) return std::nullopt;
    return IntSolution{p * r->x, r->y};
  }
  auto r = solve_odd_integral(A, B * p * p, C, p, prec);
  if (!r) return std::nullopt;
  return IntSolution{r->x, p * r->y};
}

// Integer coefficients (A, B, C) with A x^2 + B y^2 = C equivalent to aA x^2 + bB y^2 = 1.
inline std::array<Integer, 3> clear_denominators(const Rational& aA, const Rational& bB) {
  Integer L;
  mpz_lcm(L.get_mpz_t(), aA.get_den_mpz_t(), bB.get_den_mpz_t());
  Rational A = aA * Rational(L), B = bB * Rational(L);
  return {A.get_num(), B.get_num(), L};
}

inline unsigned residual_valuation(const Rational& aA, const Rational& bB, const LocalWitness& w,
                                   const Integer& p, unsigned cap) {
  Rational r = aA * w.x * w.x + bB * w.y * w.y - 1;
  if (r == 0) return cap;
  int v = valuation(r, Place::finite(p));
  return v <= 0 ? 0U : std::min(static_cast<unsigned>(v), cap);
}

inline LocalSolubility real_solubility(const Rational& aA, const Rational& bB) {
  LocalSolubility out;
  if (sgn(aA) <= 0 && sgn(bB) <= 0) {
    out.status = Solubility::insoluble;
    out.certificate = "negative definite over R";
    return out;
  }
  // 40-bit rational approximation of 1/sqrt(coefficient); only signs matter.
  const bool use_x = sgn(aA) > 0;
  Rational coeff = use_x ? aA : bB;
  Rational scaled = Rational(pow(Integer(2), 80)) / coeff;
  Integer root = isqrt(round_nearest(scaled));
  Rational approx = make_rational(root, pow(Integer(2), 40));
  out.status = Solubility::soluble;
  out.witness = use_x ? LocalWitness{approx, 0, 0} : LocalWitness{0, approx, 0};
  out.certificate = use_x ? "first coefficient positive" : "second coefficient positive";
  return out;
}

inline unsigned default_precision(const Integer& A, const Integer& B, const Integer& C,
                                  const Integer& p) {
  int s = integer_valuation(A, p) + integer_valuation(B, p) + integer_valuation(C, p);
  return static_cast<unsigned>(2 * s + (p == 2 ? 12 : 6));
}

}  // namespace detail

/// Residue-tree decision via hensel_solve, usable at small primes only. The
/// rational model looks for points with denominators up to p^max_shift.
inline LocalSolubility local_solubility_by_residues(const Rational& aA, const Rational& bB,
                                                    const Integer& p, Model model,
                                                    unsigned max_shift = 4) {
  auto [A, B, C] = detail::clear_denominators(aA, bB);
  LocalSolubility out;
  if (model == Model::rational && hilbert_symbol(aA, bB, Place::finite(p)) == 1) {
    out.status = Solubility::insoluble;
    out.certificate = "Hilbert symbol is nontrivial";
    return out;
  }
  const unsigned shifts = model == Model::integral ? 0 : max_shift;
  bool any_inconclusive = false;
  for (unsigned k = 0; k <= shifts; ++k) {
    Integer Ck = C * pow(p, 2 * k);
    unsigned prec = detail::default_precision(A, B, Ck, p);
    Polynomial2 f;
    f.add_term(A, 2, 0).add_term(B, 0, 2).add_term(-Ck, 0, 0);
    HenselResult r = hensel_solve(f, p, prec);
    if (r.found()) {
      Integer pk = pow(p, k);
      LocalWitness w{make_rational(r.x, pk), make_rational(r.y, pk), 0};
      w.precision = detail::residual_valuation(aA, bB, w, p, prec);
      out.status = Solubility::soluble;
      out.witness = w;
      out.certificate = "Hensel witness, derivative valuation " +
                        std::to_string(r.derivative_valuation) + " in " + r.variable;
      return out;
    }
    if (r.status == HenselStatus::inconclusive) any_inconclusive = true;
  }
  if (model == Model::rational) {
    out.status = Solubility::inconclusive;
    out.certificate = "no witness within the denominator bound";
    return out;
  }
  out.status = any_inconclusive ? Solubility::inconclusive : Solubility::insoluble;
  out.certificate = any_inconclusive ? "residue search exhausted" : "no residue class lifts";
  return out;
}

/// Decides whether aA x^2 + bB y^2 = 1 has a point over Z_v (integral model)
/// or Q_v (rational model), with a witness when soluble.
inline LocalSolubility local_solubility(const Rational& aA, const Rational& bB, const Place& v,
                                       Model model) {
  if (aA == 0 || bB == 0) throw std::domain_error("local_solubility: zero coefficient");
  if (v.is_real()) return detail::real_solubility(aA, bB);
  const Integer& p = v.prime();
  if (p == 2) return local_solubility_by_residues(aA, bB, p, model, 6);

  auto [A, B, C] = detail::clear_denominators(aA, bB);
  LocalSolubility out;
  if (model == Model::rational) {
    if (hilbert_symbol(aA, bB, v) == 1) {
      out.status = Solubility::insoluble;
      out.certificate = "Hilbert symbol is nontrivial";
      return out;
    }
    // A point of the projective conic with z != 0 exists; find its z-valuation.
    const int span = integer_valuation(A, p) + integer_valuation(B, p) + integer_valuation(C, p);
    for (int k = 0; k <= span + 2; ++k) {
      unsigned prec = detail::default_precision(A, B, C, p) + 2 * static_cast<unsigned>(k);
      auto s = detail::solve_odd_integral(A, B, C * pow(p, 2 * static_cast<unsigned>(k)), p, prec);
      if (!s) continue;
      Integer pk = pow(p, static_cast<unsigned long>(k));
      LocalWitness w{make_rational(s->x, pk), make_rational(s->y, pk), 0};
      w.precision = detail::residual_valuation(aA, bB, w, p, prec);
      out.status = Solubility::soluble;
      out.witness = w;
      out.certificate = "Hilbert symbol is trivial";
      return out;
    }
    throw std::logic_error("trivial Hilbert symbol but no point found");
  }
  unsigned prec = detail::default_precision(A, B, C, p);
  auto s = detail::solve_odd_integral(A, B, C, p, prec);
  if (!s) {
    out.status = Solubility::insoluble;
    out.certificate = "residue analysis modulo p excludes integral points";
    return out;
  }
  LocalWitness w{Rational(s->x), Rational(s->y), 0};
  w.precision = detail::residual_valuation(aA, bB, w, p, prec);
  out.status = Solubility::soluble;
  out.witness = w;
  out.certificate = "unit square root lifted by Hensel";
  return out;
}

/// Shortcut at a good place: if v is outside S0 u S_bad, t_v is
/// v-integral and some p_i(t_v) is divisible by v, the fibre has a Z_v-point
/// iff the generator constant left_i is a square at v. Empty when not applicable.
inline std::optional<bool> good_place_criterion(const SurfaceSpec& spec, const PlaceSet& s_bad,
                                                const Rational& t_v, const Place& v) {
  if (v.is_real() || contains(spec.s0, v) || contains(s_bad, v)) return std::nullopt;
  if (valuation(t_v == 0 ? Rational(1) : t_v, v) < 0) return std::nullopt;
  auto hit = vanishing_factors(spec, t_v, v);
  if (hit.empty()) return std::nullopt;
  return is_local_square(brauer_generator(spec, hit.front()).left, v);
}

/// A local point of the surface above t at v: Z_v-integral outside S0.
inline std::optional<LocalPoint> find_local_point(const SurfaceSpec& spec, const Rational& t,
                                                  const Place& v) {
  FiberSpec f = fiber(spec, t);
  const bool in_s0 = contains(spec.s0, v);
  if (!in_s0 && v.is_finite() && valuation(t == 0 ? Rational(1) : t, v) < 0) return std::nullopt;
  LocalSolubility s = local_solubility(f.aA, f.bB, v, in_s0 ? Model::rational : Model::integral);
  if (s.status != Solubility::soluble || !s.witness) return std::nullopt;
  return LocalPoint{s.witness->x, s.witness->y, t, s.witness->precision};
}

namespace detail {

// Hensel certificate for g(X) = q X^2 + k with X near x0 over Q_p: after
// rescaling X to be integral and g to have integral coefficients, require
// v(g(x0)) > 2 v(g'(x0)). With `integral`, the root must be p-integral.
inline bool hensel_certifies(const Rational& q, const Rational& k, const Rational& x0,
                             const Place& v, bool integral) {
  if (q == 0) return false;
  Rational g = q * x0 * x0 + k;
  if (g == 0) return true;
  if (x0 == 0) return false;
  int s = valuation(x0, v);
  if (integral && s < 0) return false;
  s = std::min(s, 0);  // X = p^s Z, Z integral at the starting value
  Rational ps = (s < 0) ? make_rational(1, pow(v.prime(), static_cast<unsigned long>(-s)))
                        : Rational(1);
  Rational qz = q * ps * ps;
  Rational z0 = x0 / ps;
  int m = valuation(qz, v);
  if (k != 0) m = std::min(m, valuation(k, v));
  Rational scale = m < 0 ? Rational(pow(v.prime(), static_cast<unsigned long>(-m))) : Rational(1);
  Rational G = (qz * z0 * z0 + k) * scale;
  Rational dG = 2 * qz * z0 * scale;
  if (dG == 0) return false;
  return valuation(G, v) > 2 * valuation(dG, v);
}

}  // namespace detail

/// Checks that pt is a local point of the surface at v: real places by sign,
/// finite places by a Hensel certificate in x or y, with integrality outside S0.
inline bool verify_local_point(const SurfaceSpec& spec, const Place& v, const LocalPoint& pt) {
  if (spec.p_set(spec.all(), pt.t) == 0) return false;
  FiberSpec f = fiber(spec, pt.t);
  if (v.is_real()) return sgn(f.aA) > 0 || sgn(f.bB) > 0;
  const bool integral = !contains(spec.s0, v);
  auto integral_at = [&](const Rational& z) { return z == 0 || valuation(z, v) >= 0; };
  if (integral && !(integral_at(pt.x) && integral_at(pt.y) && integral_at(pt.t))) return false;
  Rational residual = f.aA * pt.x * pt.x + f.bB * pt.y * pt.y - 1;
  if (residual == 0) return true;
  if (valuation(residual, v) < static_cast<int>(pt.precision)) return false;
  return detail::hensel_certifies(f.aA, f.bB * pt.y * pt.y - 1, pt.x, v, integral) ||
         detail::hensel_certifies(f.bB, f.aA * pt.x * pt.x - 1, pt.y, v, integral);
}

/// Finite places where the fibre over t can fail to have local points:
/// the real place, S0 and the primes dividing 2 aA bB.
inline PlaceSet fiber_bad_places(const SurfaceSpec& spec, const Rational& t) {
  FiberSpec f = fiber(spec, t);
  PlaceSet out = spec.s0;
  out.push_back(Place::real());
  out.push_back(Place::finite(2));
  for (const Integer& n : {f.aA.get_num(), f.aA.get_den(), f.bB.get_num(), f.bB.get_den()}) {
    if (abs(n) <= 1) continue;
    for (auto& [p, e] : factor(n)) out.push_back(Place::finite(p));
  }
  return normalize(std::move(out));
}

/// Whether the fibre over t has a point over Z_v for v outside S0 and over Q_v
/// for v in S0, at every place.
inline bool fiber_everywhere_locally_soluble(const SurfaceSpec& spec, const Rational& t) {
  if (!spec.is_s0_integer(t)) return false;
  FiberSpec f = fiber(spec, t);
  for (const auto& v : fiber_bad_places(spec, t)) {
    Model m = contains(spec.s0, v) ? Model::rational : Model::integral;
    if (local_solubility(f.aA, f.bB, v, m).status != Solubility::soluble) return false;
  }
  return true;
}

struct GlobalSolution {
  Rational x, y;
  std::string method;  // "search" or "continued-fraction"
};

namespace detail {

struct Mat2 {
  Integer a, b, c, d;
};

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

// prod [[a_j, 1], [1, 0]] over j in [lo, hi), by binary splitting
inline Mat2 quotient_product(const std::vector<Integer>& quotients, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return {quotients[lo], 1, 1, 0};
  const std::size_t mid = lo + (hi - lo) / 2;
  return quotient_product(quotients, lo, mid) * quotient_product(quotients, mid, hi);
}

// Smallest primitive solution of X^2 - D Y^2 = N (|N| < sqrt D, D not a
// square) among convergents p_k/q_k of sqrt(D) with `divisor` | X. The scan
// tracks only p_k^2 - D q_k^2 = (-1)^(k+1) d_(k+1) and p_k mod divisor; the
// convergent is assembled once from the partial quotients.
inline std::optional<std::pair<Integer, Integer>> pell_convergent(const Integer& D, const Integer& N,
                                                                  const Integer& divisor,
                                                                  unsigned long max_steps) {
  const Integer a0 = isqrt(D);
  if (a0 * a0 == D) return std::nullopt;
  Integer m = 0, d = 1, a = a0;
  Integer r_prev = mod(Integer(1), divisor), r = mod(a0, divisor);
  std::vector<Integer> quotients{a0};
  unsigned long period = 0;
  for (unsigned long k = 0; k < max_steps; ++k) {
    m = d * a - m;
    d = (D - m * m) / d;
    a = (a0 + m) / d;
    const bool hit = (k % 2 == 0) ? (d == -N) : (d == N);
    if (hit && r == 0) {
      Mat2 pq = quotient_product(quotients, 0, quotients.size());
      if (pq.a * pq.a - D * pq.c * pq.c != N) {
        throw std::logic_error("continued fraction identity failed");
      }
      return std::make_pair(pq.a, pq.c);
    }
    quotients.push_back(a);
    Integer r_next = mod(a * r + r_prev, divisor);
    r_prev = std::move(r);
    r = std::move(r_next);
    if (a == 2 * a0 && ++period == 2) return std::nullopt;  // two full periods seen
  }
  return std::nullopt;
}

}  // namespace detail

/// Solves aA x^2 + bB y^2 = 1 in integers via continued fractions when one
/// coefficient is positive and the other negative.
inline std::optional<GlobalSolution> solve_pell(const Rational& aA, const Rational& bB,
                                                unsigned long max_steps = 1000000) {
  if (aA.get_den() != 1 || bB.get_den() != 1) return std::nullopt;
  if (sgn(aA) * sgn(bB) >= 0) return std::nullopt;
  const bool swap = sgn(aA) < 0;
  const Integer alpha = swap ? bB.get_num() : aA.get_num();  // positive coefficient
  const Integer beta = swap ? -aA.get_num() : -bB.get_num();  // alpha X^2 - beta Y^2 = 1
  if (alpha == beta) return std::nullopt;
  const Integer D = alpha * beta;
  Integer X, Y;
  if (alpha < beta) {
    auto r = detail::pell_convergent(D, alpha, alpha, max_steps);
    if (!r) return std::nullopt;
    X = r->first / alpha;
    Y = r->second;
  } else {
    auto r = detail::pell_convergent(D, -beta, beta, max_steps);
    if (!r) return std::nullopt;
    Y = r->first / beta;
    X = r->second;
  }
  if (alpha * X * X - beta * Y * Y != 1) throw std::logic_error("Pell solution failed to verify");
  GlobalSolution s{Rational(abs(X)), Rational(abs(Y)), "continued-fraction"};
  if (swap) std::swap(s.x, s.y);
  return s;
}

/// First solution (in the order u, |m|) of aA x^2 + bB y^2 = 1 with x = m/u,
/// y = n/u, u a product of finite S0-primes and |m|, n, u <= height.
inline std::optional<GlobalSolution> search_global(const Rational& aA, const Rational& bB,
                                                   const PlaceSet& s0, const Integer& height) {
  auto [A, B, L] = detail::clear_denominators(aA, bB);
  // S0-smooth denominators up to the height, ascending
  std::vector<Integer> dens{Integer(1)};
  for (const auto& p : finite_primes(s0)) {
    std::size_t n = dens.size();
    for (std::size_t k = 0; k < n; ++k) {
      for (Integer u = dens[k] * p; u <= height; u *= p) dens.push_back(u);
    }
  }
  std::sort(dens.begin(), dens.end());
  for (const auto& u : dens) {
    const Integer target = L * u * u;
    for (Integer m = 0; m <= height; ++m) {
      Integer rest = target - A * m * m;
      if (rest == 0) {
        if (gcd(m, u) == 1 || u == 1) return GlobalSolution{make_rational(m, u), 0, "search"};
        continue;
      }
      if (mpz_divisible_p(rest.get_mpz_t(), B.get_mpz_t()) == 0) continue;
      Integer n2 = rest / B;
      if (!is_perfect_square(n2)) continue;
      Integer n = isqrt(n2);
      if (n > height) continue;
      // skip non-reduced representations already covered by a smaller u
      if (u != 1 && gcd(gcd(m, n), u) != 1) continue;
      return GlobalSolution{make_rational(m, u), make_rational(n, u), "search"};
    }
  }
  return std::nullopt;
}

/// Global S0-integral point on aA x^2 + bB y^2 = 1: bounded search, then the
/// continued-fraction path when S0 has no finite places and it applies.
inline std::optional<GlobalSolution> solve_global(const Rational& aA, const Rational& bB,
                                                  const PlaceSet& s0, const Integer& height,
                                                  bool allow_pell = true) {
  if (aA == 0 || bB == 0) throw std::domain_error("solve_global: zero coefficient");
  if (auto s = search_global(aA, bB, s0, height)) return s;
  if (allow_pell && finite_primes(s0).empty()) return solve_pell(aA, bB);
  return std::nullopt;
}

/// The triple lies on the surface and has S0-integral coordinates.
inline bool verify_integral_point(const SurfaceSpec& spec, const Rational& x, const Rational& y,
                                  const Rational& t) {
  return evaluate_point(spec, x, y, t) == 0 && spec.is_s0_integer(x) && spec.is_s0_integer(y) &&
         spec.is_s0_integer(t);
}

}  // namespace fibdescent
