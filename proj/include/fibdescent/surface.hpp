#pragma once

// The surface U : a p_A(t) x^2 + b p_B(t) y^2 = 1 over Z_{S0} with linear
// factors p_i(t) = c_i t + d_i, its fibers, and the place sets built from it.

#include <fibdescent/integer.hpp>
#include <fibdescent/local.hpp>
#include <fibdescent/place.hpp>
#include <fibdescent/primes.hpp>
#include <fibdescent/square_class.hpp>

#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

/// Subset of the factor index set J = {0, ..., n-1}, as a bit mask.
using IndexSet = std::uint32_t;

/// Subset enumeration is exponential; |J| is capped.
inline constexpr std::size_t kMaxFactors = 16;

inline bool has_index(IndexSet s, std::size_t i) { return ((s >> i) & 1U) != 0; }
inline IndexSet full_set(std::size_t n) {
  return n == 32 ? ~IndexSet{0} : ((IndexSet{1} << n) - 1);
}
inline std::size_t set_size(IndexSet s) { return static_cast<std::size_t>(std::popcount(s)); }

/// "{1,3}" with 1-based labels, matching the spec-file convention.
inline std::string index_set_to_string(IndexSet s, std::size_t n) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_index(s, i)) continue;
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

struct LinearFactor {
  Integer c, d;

  Rational operator()(const Rational& t) const { return Rational(c) * t + Rational(d); }
  Rational root() const { return make_rational(-d, c); }
  friend bool operator==(const LinearFactor&, const LinearFactor&) = default;
};

/// Unvalidated surface data as read from a file.
struct RawSpec {
  std::vector<Place> s0;
  Integer a, b;
  std::vector<LinearFactor> factors;
  std::vector<std::size_t> part_a;  // 0-based indices
};

class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid surface specification:";
    for (const auto& m : v) s += " [" + m + "]";
    return s;
  }
  std::vector<std::string> violations_;
};

class DegenerateFiber : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A validated surface. Factor indices are 0-based internally.
struct SurfaceSpec {
  PlaceSet s0;
  Integer a, b;
  std::vector<LinearFactor> factors;
  IndexSet part_a = 0;

  std::size_t size() const { return factors.size(); }
  IndexSet all() const { return full_set(size()); }
  IndexSet part_b() const { return all() & ~part_a; }
  bool in_a(std::size_t i) const { return has_index(part_a, i); }
  Integer d() const { return a * b; }

  Rational p(std::size_t i, const Rational& t) const { return factors[i](t); }

  /// p_{J'}(t) = prod_{i in J'} p_i(t); the empty product is 1.
  Rational p_set(IndexSet subset, const Rational& t) const {
    Rational acc = 1;
    for (std::size_t i = 0; i < size(); ++i) {
      if (has_index(subset, i)) acc *= factors[i](t);
    }
    return acc;
  }

  /// Integral cross-resultant c_i d_j - c_j d_i.
  Integer cross_resultant(std::size_t i, std::size_t j) const {
    return factors[i].c * factors[j].d - factors[j].c * factors[i].d;
  }

  bool is_s0_integer(const Rational& x) const {
    Integer den = x.get_den();
    for (const auto& v : s0) {
      if (v.is_finite()) remove_factor(den, v.prime());
    }
    return den == 1;
  }

  friend bool operator==(const SurfaceSpec&, const SurfaceSpec&) = default;
};

namespace detail {

inline bool primes_within(const Integer& n, const PlaceSet& s0) {
  if (n == 0) return false;
  Integer m = abs(n);
  for (const auto& v : s0) {
    if (v.is_finite()) remove_factor(m, v.prime());
  }
  return m == 1;
}

}  // namespace detail

/// Checks every structural hypothesis on the data and returns the surface,
/// or throws SpecError listing each violation.
inline SurfaceSpec validate_spec(const RawSpec& raw) {
  std::vector<std::string> errors;
  PlaceSet s0 = normalize(raw.s0);
  if (!contains(s0, Place::real())) errors.push_back("S0 must contain the real place");
  if (raw.a == 0) errors.push_back("a must be nonzero");
  if (raw.b == 0) errors.push_back("b must be nonzero");
  if (raw.factors.empty()) errors.push_back("J must be non-empty");
  if (raw.factors.size() > kMaxFactors) {
    errors.push_back("at most " + std::to_string(kMaxFactors) + " factors are supported");
  }
  for (std::size_t i = 0; i < raw.factors.size(); ++i) {
    const auto& f = raw.factors[i];
    const std::string label = "factor " + std::to_string(i + 1);
    if (f.c == 0) errors.push_back(label + ": c must be nonzero");
    if (f.c == 0 && f.d == 0) continue;
    Integer g = gcd(f.c, f.d);
    if (!detail::primes_within(g, s0)) {
      errors.push_back(label + ": c and d are not coprime outside S0 (gcd " + to_string(g) + ")");
    }
  }
  for (std::size_t i = 0; i < raw.factors.size(); ++i) {
    for (std::size_t j = i + 1; j < raw.factors.size(); ++j) {
      const auto& fi = raw.factors[i];
      const auto& fj = raw.factors[j];
      if (fi.c * fj.d - fj.c * fi.d == 0) {
        errors.push_back("factors " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                         " are proportional");
      }
    }
  }
  IndexSet part_a = 0;
  for (std::size_t i : raw.part_a) {
    if (i >= raw.factors.size()) {
      errors.push_back("partA index " + std::to_string(i + 1) + " out of range");
      continue;
    }
    part_a |= IndexSet{1} << i;
  }
  if (!errors.empty()) throw SpecError(std::move(errors));
  return SurfaceSpec{std::move(s0), raw.a, raw.b, raw.factors, part_a};
}

/// Finite places outside S0 where the model has bad reduction: divisors of a
/// cross-resultant or (for |J| >= 2) of a leading coefficient c_i, divisors of
/// d = ab, the prime 2, and primes at which p_J takes no unit value.
inline PlaceSet compute_S_bad(const SurfaceSpec& spec) {
  std::vector<Integer> candidates;
  auto add_prime_divisors = [&](const Integer& n) {
    if (abs(n) <= 1) return;
    for (auto& [p, e] : factor(n)) candidates.push_back(p);
  };
  const std::size_t n = spec.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) add_prime_divisors(spec.cross_resultant(i, j));
    add_prime_divisors(spec.factors[i].c);
  }
  add_prime_divisors(spec.d());
  candidates.push_back(Integer(2));
  // A linear factor kills at most one residue class, so only p <= |J| can
  // have p_J vanishing on all of Z_p.
  for (unsigned long p = 2; p <= n; ++p) {
    if (!is_prime(Integer(p))) continue;
    bool every_residue_hit = true;
    for (unsigned long t = 0; t < p && every_residue_hit; ++t) {
      bool hit = false;
      for (const auto& f : spec.factors) {
        if (mod(f.c * t + f.d, Integer(p)) == 0) hit = true;
      }
      every_residue_hit = hit;
    }
    if (every_residue_hit) candidates.push_back(Integer(p));
  }
  PlaceSet out;
  for (const auto& p : candidates) {
    Place v = Place::finite(p);
    if (!contains(spec.s0, v)) out.push_back(v);
  }
  return normalize(std::move(out));
}

/// S = S0 u S_bad u S_D.
inline PlaceSet compute_S(const SurfaceSpec& spec, const PlaceSet& s_d) {
  PlaceSet base = set_union(spec.s0, compute_S_bad(spec));
  PlaceSet sd = normalize(s_d);
  for (const auto& v : sd) {
    if (contains(base, v)) {
      throw std::invalid_argument("S_D place " + v.to_string() + " lies in S0 or S_bad");
    }
  }
  return set_union(base, sd);
}

/// The fiber over t: aA x^2 + bB y^2 = 1, a torsor under x0^2 - torus_d x1^2 = 1.
struct FiberSpec {
  Rational t;
  Rational aA;       // a p_A(t)
  Rational bB;       // b p_B(t)
  Rational torus_d;  // -d p_J(t)
};

inline FiberSpec fiber(const SurfaceSpec& spec, const Rational& t) {
  Rational pj = spec.p_set(spec.all(), t);
  if (pj == 0) throw DegenerateFiber("degenerate fiber: p_J(" + to_string(t) + ") = 0");
  FiberSpec f;
  f.t = t;
  f.aA = Rational(spec.a) * spec.p_set(spec.part_a, t);
  f.bB = Rational(spec.b) * spec.p_set(spec.part_b(), t);
  f.torus_d = -Rational(spec.d()) * pj;
  return f;
}

/// a p_A(t) x^2 + b p_B(t) y^2 - 1.
inline Rational evaluate_point(const SurfaceSpec& spec, const Rational& x, const Rational& y,
                               const Rational& t) {
  return Rational(spec.a) * spec.p_set(spec.part_a, t) * x * x +
         Rational(spec.b) * spec.p_set(spec.part_b(), t) * y * y - 1;
}

/// One local entry (x_v, y_v, t_v) of a partial adelic point. At finite places
/// `precision` is the exponent k with v(residual) >= k; it is unused at the
/// real place, where only the sign data of t_v matters.
struct LocalPoint {
  Rational x, y, t;
  unsigned precision = 0;
  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

/// (P_v)_{v in T}.
struct PartialAdelicPoint {
  std::map<Place, LocalPoint> entries;

  PlaceSet places() const {
    PlaceSet out;
    for (const auto& [v, pt] : entries) out.push_back(v);
    return out;
  }
  bool covers(const Place& v) const { return entries.contains(v); }
  const LocalPoint& at(const Place& v) const {
    auto it = entries.find(v);
    if (it == entries.end()) throw std::out_of_range("no local point at " + v.to_string());
    return it->second;
  }
  PartialAdelicPoint restricted_to(const PlaceSet& places) const {
    PartialAdelicPoint out;
    for (const auto& v : places) out.entries.emplace(v, at(v));
    return out;
  }
  friend bool operator==(const PartialAdelicPoint&, const PartialAdelicPoint&) = default;
};

/// A T-admissible base point t0 with its witness primes u_i (one per factor).
struct AdmissiblePoint {
  Rational t0;
  std::vector<Integer> witnesses;  // u_i, indexed like the factors
  PlaceSet T;
  std::vector<int> reciprocity;    // sum over T of <a D_i^A, p_i(t0)>_v, per i
  friend bool operator==(const AdmissiblePoint&, const AdmissiblePoint&) = default;
};

/// Indices i with v(p_i(t)) > 0 at the finite place v.
inline std::vector<std::size_t> vanishing_factors(const SurfaceSpec& spec, const Rational& t,
                                                  const Place& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    Rational value = spec.p(i, t);
    if (value == 0 || valuation(value, v) > 0) out.push_back(i);
  }
  return out;
}

}  // namespace fibdescent
