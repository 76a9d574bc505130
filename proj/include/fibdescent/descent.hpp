#pragma once

// The descent loop: hypotheses on the adelic input, the suitable partial
// adelic point over S, admissible base points, reduction of the relative dual
// Selmer group by new places, and the final point search on a fibre.

#include <fibdescent/brauer.hpp>
#include <fibdescent/certificate.hpp>
#include <fibdescent/conditiond.hpp>
#include <fibdescent/io.hpp>
#include <fibdescent/points.hpp>
#include <fibdescent/selmer.hpp>
#include <fibdescent/surface.hpp>

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fibdescent {

struct Bounds {
  unsigned long admissible = 100000;  // base points examined per admissible search
  unsigned long prime_scan = 100000;  // primes examined per w or witness-place search
  unsigned long max_steps = 64;       // reduction steps
  unsigned long witness_places = 16;  // on-demand S_D places per reduction step
  unsigned long fiber_attempts = 8;   // admissible fibres tried by the final search
  Integer height = 1000;              // 0 disables the final point search
  bool allow_pell = true;
};

class SearchExhausted : public std::runtime_error {
 public:
  SearchExhausted(std::string stage, std::string bound, const std::string& detail)
      : std::runtime_error(detail), stage_(std::move(stage)), bound_(std::move(bound)) {}
  const std::string& stage() const { return stage_; }
  const std::string& bound() const { return bound_; }

 private:
  std::string stage_, bound_;
};

/// A step of the argument that should be a theorem failed on concrete data.
class DescentInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Hypotheses

enum class Verdict { pass, fail, indeterminate };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

struct HypothesisCheck {
  std::string name;  // "D", "points", "1" .. "4"
  Verdict verdict = Verdict::pass;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const auto& c) { return c.verdict == Verdict::pass; });
  }
  /// First failing check, else the first indeterminate one.
  const HypothesisCheck* first_problem() const {
    for (const auto& c : checks) {
      if (c.verdict == Verdict::fail) return &c;
    }
    for (const auto& c : checks) {
      if (c.verdict == Verdict::indeterminate) return &c;
    }
    return nullptr;
  }
  const HypothesisCheck& at(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("no hypothesis " + name);
  }
};

namespace detail {

inline Rational d_pJ(const SurfaceSpec& spec, const Rational& t) {
  return Rational(spec.d()) * spec.p_set(spec.all(), t);
}

inline std::string join_places(const std::vector<Place>& places) {
  std::string out;
  for (const auto& v : places) out += (out.empty() ? "" : ",") + v.to_string();
  return out;
}

}  // namespace detail

/// Condition (D), validity of the local points, and hypotheses 1-4 on the
/// places of P, which must cover S0 and S_bad.
inline HypothesisReport check_hypotheses(const SurfaceSpec& spec, const PartialAdelicPoint& P) {
  HypothesisReport r;
  const std::size_t n = spec.size();

  auto cd = check_condition_D(spec);
  std::string extra;
  for (const auto& x : cd.witnesses) extra += " " + to_string(x, n);
  for (const auto& x : cd.hat_witnesses) extra += " dual:" + to_string(x, n);
  r.checks.push_back({"D", cd.holds ? Verdict::pass : Verdict::fail,
                      cd.holds ? "G_D = <[a][p_A],[d][p_J]>, G^D = <[-d][p_J]>"
                               : "extra elements" + extra});

  PlaceSet missing;
  for (const auto& v : set_union(spec.s0, compute_S_bad(spec))) {
    if (!P.covers(v)) missing.push_back(v);
  }

  PlaceSet zero;
  for (const auto& [v, pt] : P.entries) {
    if (spec.p_set(spec.all(), pt.t) == 0) zero.push_back(v);
  }

  if (!missing.empty()) {
    r.checks.push_back({"points", Verdict::indeterminate,
                        "missing places " + detail::join_places(missing)});
  } else {
    PlaceSet bad;
    for (const auto& [v, pt] : P.entries) {
      if (!contains(zero, v) && !verify_local_point(spec, v, pt)) bad.push_back(v);
    }
    r.checks.push_back({"points", bad.empty() ? Verdict::pass : Verdict::fail,
                        bad.empty() ? "every entry is a local point"
                                    : "not a local point at " + detail::join_places(bad)});
  }

  r.checks.push_back({"1", zero.empty() ? Verdict::pass : Verdict::fail,
                      zero.empty() ? "d p_J(t_v) != 0"
                                   : "d p_J(t_v) = 0 at " + detail::join_places(zero)});

  std::string val_detail;
  for (const auto& [v, pt] : P.entries) {
    if (v.is_real() || contains(spec.s0, v) || contains(zero, v)) continue;
    int val = valuation(detail::d_pJ(spec, pt.t), v);
    bool ok = val <= 1 && (v.prime() != 2 || val == 1);
    if (!ok) val_detail += " v_" + v.to_string() + "=" + std::to_string(val);
  }
  r.checks.push_back({"2", val_detail.empty() ? Verdict::pass : Verdict::fail,
                      val_detail.empty() ? "valuations of d p_J(t_v) within bounds"
                                         : "valuation of d p_J(t_v) too large:" + val_detail});

  PlaceSet split;
  bool s0_covered = true;
  for (const auto& v : spec.s0) {
    if (!P.covers(v)) {
      s0_covered = false;
      continue;
    }
    if (contains(zero, v)) continue;
    if (is_local_square(-detail::d_pJ(spec, P.at(v).t), v)) split.push_back(v);
  }
  if (!split.empty()) {
    r.checks.push_back({"3", Verdict::pass, "-d p_J(t_v) is a square at " + detail::join_places(split)});
  } else {
    r.checks.push_back({"3", s0_covered ? Verdict::fail : Verdict::indeterminate,
                        "no place of S0 where -d p_J(t_v) is a square"});
  }

  if (!zero.empty() || !missing.empty()) {
    r.checks.push_back({"4", Verdict::indeterminate, "Brauer sums need a complete nondegenerate point"});
  } else {
    std::string nonzero;
    for (std::size_t i = 0; i < n; ++i) {
      if (brauer_obstruction_sum(spec, P, i).value != 0) nonzero += " A_" + std::to_string(i + 1);
    }
    r.checks.push_back({"4", nonzero.empty() ? Verdict::pass : Verdict::fail,
                        nonzero.empty() ? "sum of invariants is 0 for every A_i"
                                        : "nonzero sum of invariants for" + nonzero});
  }
  return r;
}

/// Conditions (1)-(6) of a suitable partial adelic point over the places of
/// P, where `s_d` maps each witness place to the factor whose root it sits on.
inline std::vector<std::string> suitability_violations(const SurfaceSpec& spec,
                                                       const PartialAdelicPoint& P,
                                                       const std::map<Place, std::size_t>& s_d) {
  std::vector<std::string> out;
  PlaceSet S = set_union(spec.s0, compute_S_bad(spec));
  for (const auto& [v, j] : s_d) S.push_back(v);
  for (const auto& v : normalize(S)) {
    if (!P.covers(v)) out.push_back("T does not contain " + v.to_string());
  }
  bool degenerate = false;
  for (const auto& [v, pt] : P.entries) {
    Rational dp = detail::d_pJ(spec, pt.t);
    if (dp == 0) {
      out.push_back("(1) fails at " + v.to_string());
      degenerate = true;
      continue;
    }
    if (!verify_local_point(spec, v, pt)) out.push_back("no local point at " + v.to_string());
    if (v.is_finite() && !contains(spec.s0, v)) {
      int val = valuation(dp, v);
      if (val > 1) out.push_back("(2) fails at " + v.to_string());
      if (v.prime() == 2 && val != 1) out.push_back("(3) fails at 2");
    }
  }
  bool split = false;
  for (const auto& v : spec.s0) {
    if (P.covers(v) && !degenerate && is_local_square(-detail::d_pJ(spec, P.at(v).t), v)) split = true;
  }
  if (!split) out.push_back("(4) no split place in S0");
  if (!degenerate) {
    for (std::size_t i = 0; i < spec.size(); ++i) {
      int sum = 0;
      for (const auto& [v, pt] : P.entries) sum ^= invariant(spec, i, pt.t, v);
      if (sum) out.push_back("(5) fails for A_" + std::to_string(i + 1));
    }
  }
  for (const auto& [v, j] : s_d) {
    if (P.covers(v) && valuation(spec.p(j, P.at(v).t), v) != 1) {
      out.push_back("(6) fails at " + v.to_string());
    }
  }
  return out;
}

struct SuitablePoint {
  PlaceSet T;
  PartialAdelicPoint P;
};

/// T = S0 u S_bad (S_D starts empty and grows on demand) and P restricted to T.
inline SuitablePoint build_suitable(const SurfaceSpec& spec, const PartialAdelicPoint& P) {
  PlaceSet T = set_union(spec.s0, compute_S_bad(spec));
  PlaceSet missing;
  for (const auto& v : T) {
    if (!P.covers(v)) missing.push_back(v);
  }
  if (!missing.empty()) {
    throw std::invalid_argument("partial adelic point lacks places " + detail::join_places(missing));
  }
  SuitablePoint out{T, P.restricted_to(T)};
  auto problems = suitability_violations(spec, out.P, {});
  if (!problems.empty()) throw std::invalid_argument("not suitable: " + problems.front());
  return out;
}

// ---------------------------------------------------------------------------
// Admissible points

namespace detail {

inline Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

/// x = r1 mod m1, x = r2 mod m2 with coprime moduli.
inline std::pair<Integer, Integer> crt(const Integer& r1, const Integer& m1, const Integer& r2,
                                       const Integer& m2) {
  Integer m = m1 * m2;
  Integer k = mod((r2 - r1) * inverse_mod(m1, m2), m2);
  return {mod(r1 + m1 * k, m), m};
}

/// t in [0, q^2) with c_j t + d_j = q mod q^2, so that p_j(t) is a uniformizer at q.
inline Integer above_root(const SurfaceSpec& spec, std::size_t j, const Integer& q) {
  const Integer q2 = q * q;
  return mod((q - spec.factors[j].d) * inverse_mod(spec.factors[j].c, q2), q2);
}

}  // namespace detail

/// Everything that makes t0 T-admissible for P, checked directly. Empty when
/// the point is admissible.
inline std::vector<std::string> admissibility_violations(const SurfaceSpec& spec,
                                                         const PartialAdelicPoint& P,
                                                         const AdmissiblePoint& adm) {
  std::vector<std::string> out;
  const Rational& t0 = adm.t0;
  const PlaceSet T = P.places();
  const std::size_t n = spec.size();
  if (!spec.is_s0_integer(t0)) out.push_back("t0 is not an S0-integer");
  if (adm.witnesses.size() != n) return {"one witness prime per factor expected"};
  for (std::size_t i = 0; i < n; ++i) {
    const Rational value = spec.p(i, t0);
    if (value == 0) return {"p_" + std::to_string(i + 1) + "(t0) = 0"};
    const Integer& u = adm.witnesses[i];
    if (contains(T, Place::finite(u))) out.push_back("u_" + std::to_string(i + 1) + " lies in T");
    for (std::size_t j = 0; j < i; ++j) {
      if (adm.witnesses[j] == u) out.push_back("witness primes collide");
    }
    Integer num = value.get_num(), den = value.get_den();
    for (const auto& q : finite_primes(T)) {
      remove_factor(num, q);
      remove_factor(den, q);
    }
    if (abs(num) != u || den != 1) {
      out.push_back("p_" + std::to_string(i + 1) + "(t0) is not a T-unit times u_" +
                    std::to_string(i + 1));
    }
    for (const auto& v : T) {
      if (!(local_square_class(value, v) == local_square_class(spec.p(i, P.at(v).t), v))) {
        out.push_back("[p_" + std::to_string(i + 1) + "(t0)] differs at " + v.to_string());
      }
    }
  }
  if (!out.empty()) return out;
  const FiberSpec f = fiber(spec, t0);
  for (const auto& v : T) {
    Model m = contains(spec.s0, v) ? Model::rational : Model::integral;
    if (local_solubility(f.aA, f.bB, v, m).status != Solubility::soluble) {
      out.push_back("fibre has no local point at " + v.to_string());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Place u = Place::finite(adm.witnesses[i]);
    const Rational left(aDA_class(spec, i).value());
    int over_T = 0;
    for (const auto& v : T) over_T ^= hilbert_symbol(left, spec.p(i, t0), v);
    if (over_T != hilbert_symbol(left, spec.p(i, t0), u)) out.push_back("reciprocity mismatch");
    if (over_T != 0) out.push_back("reciprocity sum at u_" + std::to_string(i + 1) + " is 1");
    if (i < adm.reciprocity.size() && adm.reciprocity[i] != over_T) out.push_back("stale certificate");
    if (local_solubility(f.aA, f.bB, u, Model::integral).status != Solubility::soluble) {
      out.push_back("fibre has no local point at u_" + std::to_string(i + 1));
    }
  }
  return out;
}

/// Scans t0 = N/D over N = N* + M n, n = n0, n0+1, n0-1, ... inside the real
/// sign interval of t_inf, where N* solves the approximation congruences at
/// the finite places of T and D clears the S0-denominators of the t_v.
class AdmissibleScanner {
 public:
  AdmissibleScanner(SurfaceSpec spec, PartialAdelicPoint P, unsigned long bound)
      : spec_(std::move(spec)), P_(std::move(P)), T_(P_.places()), bound_(bound) {
    tprimes_ = finite_primes(T_);
    for (const auto& v : spec_.s0) {
      if (v.is_real() || !P_.covers(v) || P_.at(v).t == 0) continue;
      int e = -valuation(P_.at(v).t, v);
      if (e > 0) D_ *= pow(v.prime(), static_cast<unsigned long>(e));
    }
    for (const auto& v : T_) {
      if (v.is_real()) continue;
      const Integer& p = v.prime();
      const LocalPoint& pt = P_.at(v);
      int K = INT_MIN;
      for (std::size_t i = 0; i < spec_.size(); ++i) {
        K = std::max(K, valuation(spec_.p(i, pt.t), v) - integer_valuation(spec_.factors[i].c, p));
      }
      K += (p == 2) ? 3 : 1;
      int e = std::max(1, K + integer_valuation(D_, p));
      Integer m = pow(p, static_cast<unsigned long>(e));
      Integer r = residue(Rational(D_) * pt.t, m);
      std::tie(base_, M_) = detail::crt(base_, M_, r, m);
      exponents_.emplace_back(v, e);
    }
    const Rational t_inf = P_.at(Place::real()).t;
    for (const auto& f : spec_.factors) {
      Rational root = f.root();
      if (root < t_inf && (!lo_ || root > *lo_)) lo_ = root;
      if (root > t_inf && (!hi_ || root < *hi_)) hi_ = root;
    }
    n0_ = detail::floor_of((Rational(D_) * t_inf - Rational(base_)) / Rational(M_));
  }

  std::optional<AdmissiblePoint> next() {
    while (examined_ < bound_ && !(up_blocked_ && down_blocked_)) {
      const unsigned long k = step_++;
      const long long offset = (k == 0) ? 0 : ((k % 2 == 1) ? static_cast<long long>((k + 1) / 2)
                                                            : -static_cast<long long>(k / 2));
      if ((offset > 0 && up_blocked_) || (offset < 0 && down_blocked_)) continue;
      const Integer N = base_ + M_ * (n0_ + Integer(std::to_string(offset)));
      const Rational t0 = make_rational(N, D_);
      if (hi_ && t0 >= *hi_) {
        if (offset >= 0) up_blocked_ = true;
        continue;
      }
      if (lo_ && t0 <= *lo_) {
        if (offset <= 0) down_blocked_ = true;
        continue;
      }
      ++examined_;
      if (auto a = test(N)) return a;
    }
    return std::nullopt;
  }

  unsigned long examined() const { return examined_; }
  const Integer& modulus() const { return M_; }
  const Integer& denominator() const { return D_; }
  const std::vector<std::pair<Place, int>>& exponents() const { return exponents_; }

 private:
  std::optional<AdmissiblePoint> test(const Integer& N) const {
    std::vector<Integer> witnesses;
    for (const auto& f : spec_.factors) {
      Integer r = abs(f.c * N + f.d * D_);
      if (r == 0) return std::nullopt;
      for (const auto& q : tprimes_) remove_factor(r, q);
      if (r == 1 || !is_prime(r)) return std::nullopt;
      if (std::find(witnesses.begin(), witnesses.end(), r) != witnesses.end()) return std::nullopt;
      witnesses.push_back(r);
    }
    AdmissiblePoint adm{make_rational(N, D_), witnesses, T_, {}};
    for (std::size_t i = 0; i < spec_.size(); ++i) {
      const Rational left(aDA_class(spec_, i).value());
      int sum = 0;
      for (const auto& v : T_) sum ^= hilbert_symbol(left, spec_.p(i, adm.t0), v);
      adm.reciprocity.push_back(sum);
    }
    auto problems = admissibility_violations(spec_, P_, adm);
    if (!problems.empty()) {
      throw DescentInvariantError("constructed base point " + to_string(adm.t0) +
                                  " is not admissible: " + problems.front());
    }
    return adm;
  }

  SurfaceSpec spec_;
  PartialAdelicPoint P_;
  PlaceSet T_;
  std::vector<Integer> tprimes_;
  std::vector<std::pair<Place, int>> exponents_;
  Integer D_ = 1, M_ = 1, base_ = 0, n0_ = 0;
  std::optional<Rational> lo_, hi_;
  unsigned long bound_, examined_ = 0, step_ = 0;
  bool up_blocked_ = false, down_blocked_ = false;
};

/// First T-admissible point in scan order.
inline AdmissiblePoint find_admissible(const SurfaceSpec& spec, const PartialAdelicPoint& P,
                                       unsigned long bound) {
  AdmissibleScanner scan(spec, P, bound);
  if (auto a = scan.next()) return *a;
  throw SearchExhausted("admissible", std::to_string(bound),
                        "no admissible base point among " + std::to_string(scan.examined()) +
                            " candidates for T = {" + detail::join_places(P.places()) + "}");
}

// ---------------------------------------------------------------------------
// The reduction loop

struct DescentState {
  SurfaceSpec spec;
  PartialAdelicPoint P;              // over T
  std::map<Place, std::size_t> s_d;  // on-demand witness place -> factor index
  AdmissiblePoint adm;
  RelativeSubspace Rhat, R;
  std::vector<TraceStep> trace;

  PlaceSet T() const { return P.places(); }
};

namespace detail {

inline Json places_json(const PlaceSet& places) {
  Json a = Json::array();
  for (const auto& v : places) a.push_back(v.to_string());
  return a;
}

inline Json elements_json(const std::vector<GElement>& xs, std::size_t n) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_string(x, n));
  return a;
}

inline Json point_json(const LocalPoint& pt) {
  Json j = Json::object();
  j["x"] = to_string(pt.x);
  j["y"] = to_string(pt.y);
  j["t"] = to_string(pt.t);
  j["precision"] = pt.precision;
  return j;
}

inline Json integers_json(const std::vector<Integer>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_string(x));
  return a;
}

inline Rational ev_value(const SurfaceSpec& spec, const Rational& t, const GElement& x) {
  return Rational(x.c.value()) * spec.p_set(x.poly, t);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DescentInvariantError(what);
}

/// The local point above p_j(t) = uniformizer at the new place q.
inline LocalPoint point_above_root(const SurfaceSpec& spec, std::size_t j, const Integer& q) {
  const Place v = Place::finite(q);
  const Rational t(above_root(spec, j, q));
  auto pt = find_local_point(spec, t, v);
  require(pt.has_value(), "no local point above the root of p_" + std::to_string(j + 1) + " at " +
                              v.to_string());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    require(invariant(spec, i, t, v) == 0, "A_" + std::to_string(i + 1) +
                                                " pairs nontrivially with the point at " +
                                                v.to_string());
  }
  return *pt;
}

/// Minimal prime outside T with the given Legendre symbols.
inline Integer scan_prime(const PlaceSet& T, const std::vector<std::pair<Integer, int>>& wanted,
                          unsigned long bound, const std::string& stage) {
  PrimeStream primes(Integer(2), finite_primes(T));
  for (unsigned long k = 0; k < bound; ++k) {
    Integer q = primes.next();
    bool ok = true;
    for (const auto& [a, s] : wanted) {
      if (jacobi(a, q) != s) {
        ok = false;
        break;
      }
    }
    if (ok) return q;
  }
  throw SearchExhausted(stage, std::to_string(bound),
                        "no prime with the required Legendre symbols among the first " +
                            std::to_string(bound));
}

}  // namespace detail

/// Finds an admissible point for the current P and recomputes R and R^.
inline void refresh(DescentState& st, const Bounds& bounds) {
  const SurfaceSpec& spec = st.spec;
  const std::size_t n = spec.size();
  AdmissibleScanner scan(spec, st.P, bounds.admissible);
  auto adm = scan.next();
  if (!adm) {
    throw SearchExhausted("admissible", std::to_string(bounds.admissible),
                          "no admissible base point among " + std::to_string(scan.examined()) +
                              " candidates for T = {" + detail::join_places(st.T()) + "}");
  }
  st.adm = *adm;
  const FiberContext ctx = make_context(spec, st.P, st.adm);
  st.Rhat = relative_dual_selmer(spec, ctx);
  st.R = relative_selmer(spec, ctx);
  const std::size_t split = split_count(spec, st.P);

  detail::require(st.Rhat.contains(element_minus_d(spec)), "[-d][p_J] missing from R^");
  detail::require(st.R.contains(element_a(spec)) && st.R.contains(element_d(spec)),
                  "[a][p_A] or [d][p_J] missing from R");
  for (const auto& x : st.Rhat.basis()) {
    detail::require(witness_conditions_hold(spec, ctx, x),
                    "Hilbert conditions at the witness primes disagree with R^");
  }
  detail::require(st.R.dimension() == st.Rhat.dimension() + split,
                  "dim R - dim R^ differs from the number of split places");

  TraceStep step{"admissible", Json::object()};
  step.data["T"] = detail::places_json(st.T());
  step.data["T0"] = detail::places_json(ctx.T0);
  step.data["t0"] = to_string(st.adm.t0);
  step.data["witnesses"] = detail::integers_json(st.adm.witnesses);
  step.data["reciprocity"] = st.adm.reciprocity;
  step.data["candidates_examined"] = scan.examined();
  step.data["dim_R"] = st.R.dimension();
  step.data["dim_Rhat"] = st.Rhat.dimension();
  step.data["split_places"] = split;
  step.data["Rhat_basis"] = detail::elements_json(st.Rhat.basis(), n);
  st.trace.push_back(std::move(step));
}

namespace detail {

/// Adds an S_D place that kills x1 in R: a prime where a D_j^A is a square
/// but c1 D_j^{J1} is not, for some j with x1 outside G_j.
inline void add_witness_place(DescentState& st, const GElement& x1, const Bounds& bounds) {
  const SurfaceSpec& spec = st.spec;
  const std::size_t n = spec.size();
  std::optional<std::size_t> j;
  for (std::size_t i = 0; i < n && !j; ++i) {
    if (!in_G_i(spec, x1, i)) j = i;
  }
  require(j.has_value(), "Selmer element outside <[a][p_A],[d][p_J]> lies in G_D");
  const GElement y = has_index(x1.poly, *j) ? x1 * element_d(spec) : x1;
  const SquareClass target = y.c * square_class(D_value(spec, *j, y.poly));
  const SquareClass square = aDA_class(spec, *j);
  const Integer q = scan_prime(st.T(), {{square.value(), 1}, {target.value(), -1}},
                               bounds.prime_scan, "witness_prime");
  const Place v = Place::finite(q);
  LocalPoint pt = point_above_root(spec, *j, q);
  st.P.entries.emplace(v, pt);
  st.s_d[v] = *j;
  auto problems = suitability_violations(spec, st.P, st.s_d);
  require(problems.empty(), "extended point is not suitable: " +
                                (problems.empty() ? std::string() : problems.front()));

  TraceStep step{"witness_place", Json::object()};
  step.data["x1"] = to_string(x1, n);
  step.data["index"] = *j + 1;
  step.data["v_x"] = v.to_string();
  step.data["aD^A"] = to_string(square.value());
  step.data["c1 D^J1"] = to_string(target.value());
  step.data["point"] = point_json(pt);
  st.trace.push_back(std::move(step));
}

}  // namespace detail

/// One reduction: choose x0 in R^ and x1 in R, an index i_x, a prime w with
/// the three Legendre conditions and a point above a root of p_{i_x} at w,
/// then a new admissible point. Each intermediate claim is checked on
/// the computed groups.
inline DescentState reduce_dual_selmer(DescentState st, const Bounds& bounds) {
  const SurfaceSpec& spec = st.spec;
  const std::size_t n = spec.size();
  const GElement hat_gen = element_minus_d(spec);
  const GElement d_gen = element_d(spec);
  if (st.Rhat.dimension() < 2) throw std::invalid_argument("reduce_dual_selmer: R^ is already minimal");
  const std::size_t dim_start = st.Rhat.dimension();
  const auto small = span_elements({element_a(spec), d_gen});

  GElement x0, x1;
  std::size_t ix = 0;
  unsigned long witnesses_added = 0;
  for (;;) {
    detail::require(st.Rhat.dimension() >= 2, "R^ collapsed while adding witness places");
    bool have0 = false, have1 = false;
    for (const auto& e : st.Rhat.elements()) {
      if (!e.is_identity() && !(e == hat_gen)) {
        x0 = e;
        have0 = true;
        break;
      }
    }
    for (const auto& e : st.R.elements()) {
      if (!std::binary_search(small.begin(), small.end(), e)) {
        x1 = e;
        have1 = true;
        break;
      }
    }
    detail::require(have0 && have1, "no element of R outside <[a][p_A],[d][p_J]>");
    std::optional<std::size_t> pick;
    bool pick_free = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_Ghat_i(spec, x0, i) || in_G_i(spec, x1, i)) continue;
      const bool free = !has_index(x0.poly, i) && !has_index(x1.poly, i);
      if (!pick || (free && !pick_free)) {
        pick = i;
        pick_free = free;
      }
    }
    if (pick) {
      ix = *pick;
      break;
    }
    if (witnesses_added >= bounds.witness_places) {
      throw SearchExhausted("witness_places", std::to_string(bounds.witness_places),
                            "too many on-demand witness places in one step");
    }
    detail::add_witness_place(st, x1, bounds);
    ++witnesses_added;
    refresh(st, bounds);
    detail::require(!st.R.contains(x1), "witness place did not remove x1 from R");
  }

  const bool sub0 = has_index(x0.poly, ix), sub1 = has_index(x1.poly, ix);
  if (sub0) x0 = x0 * hat_gen;
  if (sub1) x1 = x1 * d_gen;
  const SquareClass g_a = aDA_class(spec, ix);
  const SquareClass g0 = x0.c * square_class(D_value(spec, ix, x0.poly));
  const SquareClass g1 = x1.c * square_class(D_value(spec, ix, x1.poly));
  detail::require(!g0.is_identity() && !(g0 == g_a) && !g1.is_identity() && !(g1 == g_a),
                  "Legendre conditions for w are inconsistent");

  const Integer wq = detail::scan_prime(st.T(), {{g_a.value(), 1}, {g0.value(), -1}, {g1.value(), -1}},
                                        bounds.prime_scan, "chebotarev");
  const Place w = Place::finite(wq);
  const LocalPoint pw = detail::point_above_root(spec, ix, wq);

  const DescentState before = st;
  st.P.entries.emplace(w, pw);
  {
    auto problems = suitability_violations(spec, st.P, st.s_d);
    detail::require(problems.empty(), "extended point is not suitable: " +
                                          (problems.empty() ? std::string() : problems.front()));
  }
  refresh(st, bounds);

  const Rational& t0 = before.adm.t0;
  const Rational& t1 = st.adm.t0;
  Json checks = Json::object();
  auto check = [&](const char* name, bool ok) {
    checks[name] = ok;
    return ok;
  };

  bool ok = true;
  ok &= check("[-d][p_J] persists", st.Rhat.contains(hat_gen));
  ok &= check("R^ strictly smaller", st.Rhat.is_subspace_of(before.Rhat) &&
                                         st.Rhat.dimension() < before.Rhat.dimension());
  ok &= check("x0 removed", !st.Rhat.contains(x0));
  ok &= check("loc^w(x0) nonzero", !is_local_square(detail::ev_value(spec, t1, x0), w));
  ok &= check("loc_w(x1) nonzero", !is_local_square(detail::ev_value(spec, t1, x1), w));

  bool comparison = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == ix) continue;
    const Place u0 = Place::finite(before.adm.witnesses[i]);
    const Place u1 = Place::finite(st.adm.witnesses[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      comparison &= hilbert_symbol(spec.p(i, t0), spec.p(j, t0), u0) ==
                    hilbert_symbol(spec.p(i, t1), spec.p(j, t1), u1);
    }
  }
  ok &= check("comparison at u_i", comparison);

  auto restrict_ix = [&](const RelativeSubspace& V) {
    std::vector<GElement> out;
    for (const auto& e : V.elements()) {
      if (!has_index(e.poly, ix)) out.push_back(e);
    }
    return greedy_basis(out);
  };
  const auto R0_before = restrict_ix(before.R);
  const auto Rhat0_after = restrict_ix(st.Rhat);
  bool orthogonal = true;
  for (const auto& a : R0_before) {
    for (const auto& b : Rhat0_after) {
      orthogonal &= hilbert_symbol(detail::ev_value(spec, t1, a), detail::ev_value(spec, t1, b), w) == 0;
    }
  }
  ok &= check("P_0 orthogonal to P^1", orthogonal);
  bool p1_zero = true, persistence = true;
  for (const auto& b : Rhat0_after) {
    if (!is_local_square(detail::ev_value(spec, t1, b), w)) p1_zero = false;
  }
  for (const auto& e : st.Rhat.elements()) {
    if (has_index(e.poly, ix)) continue;
    if (is_local_square(detail::ev_value(spec, t1, e), w) && !before.Rhat.contains(e)) persistence = false;
  }
  ok &= check("P^1 = 0", p1_zero);
  ok &= check("persistence", persistence);

  TraceStep step{"reduction", Json::object()};
  step.data["dim_Rhat_start"] = dim_start;
  step.data["dim_Rhat_before_w"] = before.Rhat.dimension();
  step.data["dim_Rhat_after"] = st.Rhat.dimension();
  step.data["dim_R_after"] = st.R.dimension();
  step.data["witness_places_added"] = witnesses_added;
  step.data["x0"] = to_string(x0, n);
  step.data["x1"] = to_string(x1, n);
  step.data["i_x"] = ix + 1;
  step.data["substituted_x0"] = sub0;
  step.data["substituted_x1"] = sub1;
  Json legendre_values = Json::object();
  legendre_values["aD^A"] = {to_string(g_a.value()), 1};
  legendre_values["c0 D^J0"] = {to_string(g0.value()), -1};
  legendre_values["c1 D^J1"] = {to_string(g1.value()), -1};
  step.data["legendre"] = std::move(legendre_values);
  step.data["w"] = w.to_string();
  step.data["point_w"] = detail::point_json(pw);
  step.data["t1"] = to_string(t1);
  step.data["checks"] = checks;
  st.trace.push_back(std::move(step));

  if (!ok) {
    std::string failed;
    for (const auto& [k, v] : checks.items()) {
      if (!v.get<bool>()) failed += " [" + k + "]";
    }
    throw DescentInvariantError("reduction step at w = " + w.to_string() + " failed:" + failed);
  }
  return st;
}

namespace detail {

inline Json hypotheses_json(const HypothesisReport& r) {
  Json j = Json::object();
  for (const auto& c : r.checks) {
    Json e = Json::object();
    e["verdict"] = to_string(c.verdict);
    e["detail"] = c.detail;
    j[c.name] = std::move(e);
  }
  return j;
}

}  // namespace detail

/// The whole pipeline. Throws std::invalid_argument when P does not cover
/// the places the hypotheses need and DescentInvariantError on internal
/// contradictions; search exhaustion and failed hypotheses are outcomes.
inline Certificate descend(const SurfaceSpec& spec, const PartialAdelicPoint& P,
                           const Bounds& bounds = {}) {
  Certificate cert;
  cert.spec_hash = spec_hash(spec);
  cert.readings = default_readings();

  const HypothesisReport report = check_hypotheses(spec, P);
  cert.trace.push_back({"hypotheses", detail::hypotheses_json(report)});
  if (const HypothesisCheck* bad = report.first_problem()) {
    if (bad->verdict == Verdict::indeterminate) {
      throw std::invalid_argument("hypothesis " + bad->name + " is indeterminate: " + bad->detail);
    }
    cert.outcome.kind = OutcomeKind::hypothesis_failed;
    cert.outcome.which = bad->name;
    cert.outcome.detail = bad->detail;
    return cert;
  }

  DescentState st{spec, build_suitable(spec, P).P, {}, {}, {}, {}, std::move(cert.trace)};
  {
    TraceStep s{"suitable", Json::object()};
    s.data["S_bad"] = detail::places_json(compute_S_bad(spec));
    s.data["T"] = detail::places_json(st.T());
    st.trace.push_back(std::move(s));
  }
  try {
    refresh(st, bounds);
    const std::size_t initial = st.Rhat.dimension();
    unsigned long steps = 0;
    while (st.Rhat.dimension() > 1) {
      if (steps >= bounds.max_steps) {
        throw SearchExhausted("reduction", std::to_string(bounds.max_steps), "step limit reached");
      }
      st = reduce_dual_selmer(std::move(st), bounds);
      ++steps;
    }
    detail::require(st.Rhat.dimension() == 1 && st.Rhat.contains(element_minus_d(spec)),
                    "terminal R^ is not generated by [-d][p_J]");
    detail::require(steps <= initial, "more reduction steps than the initial dimension of R^");

    TraceStep done{"minimized", Json::object()};
    done.data["steps"] = steps;
    done.data["initial_dim_Rhat"] = initial;
    done.data["T"] = detail::places_json(st.T());
    done.data["S_D"] = Json::array();
    for (const auto& [v, j] : st.s_d) done.data["S_D"].push_back(v.to_string());
    st.trace.push_back(std::move(done));

    if (bounds.height == 0) {
      const FiberSpec f = fiber(spec, st.adm.t0);
      cert.outcome.kind = OutcomeKind::dual_selmer_minimized;
      cert.outcome.t = st.adm.t0;
      cert.outcome.fiber["aA"] = to_string(f.aA);
      cert.outcome.fiber["bB"] = to_string(f.bB);
      cert.outcome.fiber["torus_d"] = to_string(f.torus_d);
      cert.outcome.fiber["witnesses"] = detail::integers_json(st.adm.witnesses);
      cert.trace = std::move(st.trace);
      return cert;
    }

    AdmissibleScanner scan(spec, st.P, bounds.admissible);
    for (unsigned long attempt = 0; attempt < bounds.fiber_attempts; ++attempt) {
      auto adm = scan.next();
      if (!adm) break;
      const FiberContext ctx = make_context(spec, st.P, *adm);
      detail::require(relative_dual_selmer(spec, ctx) == st.Rhat,
                      "R^ depends on the choice of admissible point");
      const FiberSpec f = fiber(spec, adm->t0);
      auto sol = solve_global(f.aA, f.bB, spec.s0, bounds.height, bounds.allow_pell);
      TraceStep s{"fiber", Json::object()};
      s.data["t"] = to_string(adm->t0);
      s.data["aA"] = to_string(f.aA);
      s.data["bB"] = to_string(f.bB);
      s.data["found"] = sol.has_value();
      if (sol) s.data["method"] = sol->method;
      st.trace.push_back(std::move(s));
      if (!sol) continue;
      const bool verified = verify_integral_point(spec, sol->x, sol->y, adm->t0);
      detail::require(verified, "fibre solution does not verify");
      cert.outcome.kind = OutcomeKind::point_found;
      cert.outcome.x = sol->x;
      cert.outcome.y = sol->y;
      cert.outcome.t = adm->t0;
      cert.outcome.verified = verified;
      cert.trace = std::move(st.trace);
      return cert;
    }
    throw SearchExhausted("fiber_point", to_string(bounds.height),
                          "no S0-integral point on the minimized fibres within the height bound");
  } catch (const SearchExhausted& e) {
    cert.outcome.kind = OutcomeKind::search_exhausted;
    cert.outcome.stage = e.stage();
    cert.outcome.bound = e.bound();
    cert.outcome.detail = e.what();
    cert.trace = std::move(st.trace);
    return cert;
  }
}

/// Offline re-verification of a point_found certificate.
inline bool reverify(const SurfaceSpec& spec, const Certificate& c) {
  if (c.outcome.kind != OutcomeKind::point_found) return false;
  if (c.spec_hash != spec_hash(spec)) return false;
  return verify_integral_point(spec, *c.outcome.x, *c.outcome.y, *c.outcome.t);
}

}  // namespace fibdescent
