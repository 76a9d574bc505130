#pragma once

// Selmer and dual Selmer groups of norm-one tori x0^2 - d x1^2 = 1 over Z_S,
// realized inside Z_S^*/Z_S^*2, and the relative groups of admissible fibres
// realized inside J^T = Z_T^*/Z_T^*2 (+) F2<[p_i]>.

#include <fibdescent/conditiond.hpp>
#include <fibdescent/gf2.hpp>
#include <fibdescent/local.hpp>
#include <fibdescent/surface.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fibdescent {

/// Basis [-1], [q_1], ..., [q_r] of the square classes of T-units.
struct SquareClassBasis {
  std::vector<Integer> primes;  // ascending

  using Element = SquareClass;

  std::size_t size() const { return primes.size() + 1; }
  SquareClass element(std::size_t k) const {
    return k == 0 ? SquareClass(-1, {}) : SquareClass(1, {primes[k - 1]});
  }
  std::optional<gf2::BitVector> coordinates(const SquareClass& c) const {
    gf2::BitVector out(size());
    if (c.sign() < 0) out.set(0);
    for (const auto& q : c.support()) {
      auto it = std::lower_bound(primes.begin(), primes.end(), q);
      if (it == primes.end() || *it != q) return std::nullopt;
      out.set(1 + static_cast<std::size_t>(it - primes.begin()));
    }
    return out;
  }
  SquareClass from(const gf2::BitVector& x) const {
    SquareClass acc;
    for (std::size_t k = 0; k < size(); ++k) {
      if (x.get(k)) acc *= element(k);
    }
    return acc;
  }
  friend bool operator==(const SquareClassBasis&, const SquareClassBasis&) = default;
};

/// Basis of J^T: the T-unit classes followed by [p_1], ..., [p_n].
struct GBasis {
  SquareClassBasis classes;
  std::size_t factors = 0;

  using Element = GElement;

  std::size_t size() const { return classes.size() + factors; }
  GElement element(std::size_t k) const {
    if (k < classes.size()) return {classes.element(k), 0};
    return {SquareClass::identity(), IndexSet{1} << (k - classes.size())};
  }
  std::optional<gf2::BitVector> coordinates(const GElement& x) const {
    auto c = classes.coordinates(x.c);
    if (!c) return std::nullopt;
    if (x.poly >> factors) return std::nullopt;
    gf2::BitVector out(size());
    for (std::size_t k = 0; k < classes.size(); ++k) out.set(k, c->get(k));
    for (std::size_t i = 0; i < factors; ++i) out.set(classes.size() + i, has_index(x.poly, i));
    return out;
  }
  GElement from(const gf2::BitVector& x) const {
    GElement acc;
    for (std::size_t k = 0; k < size(); ++k) {
      if (x.get(k)) acc = acc * element(k);
    }
    return acc;
  }
  friend bool operator==(const GBasis&, const GBasis&) = default;
};

/// An F2-subspace of a square-class lattice, stored as reduced echelon rows.
template <typename Basis>
struct Subspace {
  using Element = typename Basis::Element;

  Basis ambient;
  std::vector<gf2::BitVector> rows;

  std::size_t dimension() const { return rows.size(); }

  bool contains(const Element& x) const {
    auto c = ambient.coordinates(x);
    return c && gf2::in_span(rows, *c);
  }

  std::vector<Element> basis() const {
    std::vector<Element> out;
    for (const auto& r : rows) out.push_back(ambient.from(r));
    return out;
  }

  /// All 2^dim elements in canonical element order.
  std::vector<Element> elements() const {
    std::vector<Element> out{Element{}};
    for (const auto& b : basis()) {
      std::size_t n = out.size();
      for (std::size_t k = 0; k < n; ++k) out.push_back(out[k] * b);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Every element of this subspace lies in `other` (ambients may differ).
  bool is_subspace_of(const Subspace& other) const {
    for (const auto& b : basis()) {
      if (!other.contains(b)) return false;
    }
    return true;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.is_subspace_of(b) && b.is_subspace_of(a);
  }
};

using SelmerSubspace = Subspace<SquareClassBasis>;
using RelativeSubspace = Subspace<GBasis>;

/// d (reduced to a square-free integer) and a place set S containing the
/// real place, 2 and the primes of d.
struct TorusData {
  SquareClass d;
  PlaceSet S;
};

inline TorusData make_torus(const Rational& d, const PlaceSet& s) {
  TorusData t{square_class(d), normalize(s)};
  std::vector<std::string> missing;
  if (!contains(t.S, Place::real())) missing.push_back("inf");
  if (!contains(t.S, Place::finite(2))) missing.push_back("2");
  for (const auto& q : t.d.support()) {
    if (!contains(t.S, Place::finite(q))) missing.push_back(to_string(q));
  }
  if (!missing.empty()) {
    std::string msg = "torus place set lacks:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }
  return t;
}

/// A subspace of the local group V_v, by generator coordinates.
struct LocalSubspace {
  Place place;
  std::vector<std::uint8_t> generators;

  /// Coordinate masks of all elements (V_v has at most 8 elements).
  std::vector<std::uint8_t> elements() const {
    std::vector<std::uint8_t> out{0};
    for (auto g : generators) {
      std::size_t n = out.size();
      for (std::size_t k = 0; k < n; ++k) {
        std::uint8_t e = out[k] ^ g;
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool contains(std::uint8_t x) const {
    auto e = elements();
    return std::binary_search(e.begin(), e.end(), x);
  }

  /// Orthogonal complement under the Hilbert pairing.
  LocalSubspace orthogonal() const {
    const int dim = local_dimension(place);
    LocalSubspace out{place, {}};
    for (unsigned x = 1; x < (1U << dim); ++x) {
      LocalSquareClass lx{place, static_cast<std::uint8_t>(x)};
      bool ok = true;
      for (auto g : generators) {
        if (local_pairing(lx, LocalSquareClass{place, g})) ok = false;
      }
      if (ok) out.generators.push_back(static_cast<std::uint8_t>(x));
    }
    return out;
  }

  /// Masks f with x in W iff popcount(f & x) is even for every f.
  std::vector<std::uint8_t> membership_functionals() const {
    const int dim = local_dimension(place);
    std::vector<std::uint8_t> out;
    for (unsigned f = 1; f < (1U << dim); ++f) {
      bool kills = true;
      for (auto g : generators) {
        if (std::popcount(static_cast<unsigned>(f & g)) % 2 != 0) kills = false;
      }
      if (kills) out.push_back(static_cast<std::uint8_t>(f));
    }
    return out;
  }
};

/// <[x]_v>
inline LocalSubspace local_span(const Rational& x, const Place& v) {
  return {v, {local_square_class(x, v).bits}};
}

/// The image of local units.
inline LocalSubspace local_units(const Place& v) { return {v, unit_class_generators(v)}; }

namespace detail {

/// Kernel of the localization conditions: ambient element e_k lies in the
/// subspace iff its local classes satisfy every condition. `local(k, v)` gives
/// the coordinates of e_k at v.
template <typename Basis, typename LocalOf>
Subspace<Basis> solve_local_conditions(const Basis& ambient,
                                       const std::vector<LocalSubspace>& conditions,
                                       LocalOf&& local) {
  std::vector<gf2::BitVector> equations;
  for (const auto& W : conditions) {
    std::vector<std::uint8_t> images(ambient.size());
    for (std::size_t k = 0; k < ambient.size(); ++k) images[k] = local(k, W.place);
    for (auto f : W.membership_functionals()) {
      gf2::BitVector row(ambient.size());
      for (std::size_t k = 0; k < ambient.size(); ++k) row.set(k, std::popcount(static_cast<unsigned>(f & images[k])) % 2);
      if (row.any()) equations.push_back(std::move(row));
    }
  }
  return Subspace<Basis>{ambient, gf2::kernel(equations, ambient.size())};
}

inline SquareClassBasis unit_basis(const PlaceSet& s) {
  return SquareClassBasis{finite_primes(normalize(s))};
}

}  // namespace detail

/// W^v = <[d]_v> at every v in S.
inline std::vector<LocalSubspace> dual_conditions(const TorusData& torus) {
  std::vector<LocalSubspace> out;
  for (const auto& v : torus.S) out.push_back(local_span(Rational(torus.d.value()), v));
  return out;
}

/// {x in Z_S^*/2 : <x, d>_v = 0 for all v in S}
inline SelmerSubspace selmer_group(const TorusData& torus) {
  auto ambient = detail::unit_basis(torus.S);
  std::vector<LocalSubspace> conditions;
  for (const auto& W : dual_conditions(torus)) conditions.push_back(W.orthogonal());
  return detail::solve_local_conditions(ambient, conditions, [&](std::size_t k, const Place& v) {
    return local_square_class(ambient.element(k), v).bits;
  });
}

/// {x in Z_S^*/2 : [x]_v in <[d]_v> for all v in S}
inline SelmerSubspace dual_selmer_group(const TorusData& torus) {
  auto ambient = detail::unit_basis(torus.S);
  return detail::solve_local_conditions(ambient, dual_conditions(torus),
                                        [&](std::size_t k, const Place& v) {
                                          return local_square_class(ambient.element(k), v).bits;
                                        });
}

struct DimensionIdentity {
  std::size_t dim_selmer = 0, dim_dual = 0, split = 0;
  bool holds() const { return dim_selmer == dim_dual + split; }
};

/// dim Sel - dim dual Sel = #{v in S0 : d is a square at v}. Requires every
/// place of S \ S0 to be non-split (otherwise it would also count).
inline DimensionIdentity dimension_identity(const TorusData& torus, const PlaceSet& s0) {
  DimensionIdentity out;
  for (const auto& v : torus.S) {
    if (!is_local_square(Rational(torus.d.value()), v)) continue;
    if (contains(s0, v)) {
      ++out.split;
    } else {
      throw std::invalid_argument("place " + v.to_string() + " outside S0 splits the torus");
    }
  }
  out.dim_selmer = selmer_group(torus).dimension();
  out.dim_dual = dual_selmer_group(torus).dimension();
  if (!out.holds()) throw std::logic_error("dimension identity violated");
  return out;
}

/// Square class of c p_{J'}(t0). The optional prime list names every prime
/// that can divide the value, sparing a full factorization.
inline SquareClass ev(const SurfaceSpec& spec, const Rational& t0, const GElement& x,
                      const std::vector<Integer>& known_primes = {}) {
  Rational value = spec.p_set(x.poly, t0);
  if (value == 0) throw std::domain_error("ev: p_J'(t0) = 0");
  SquareClass poly_class = known_primes.empty() ? square_class(value)
                                                : square_class_given(value, known_primes);
  return x.c * poly_class;
}

/// Places of T lying in S0 or where d p_J(t_v) has valuation exactly 1.
inline PlaceSet compute_T0(const SurfaceSpec& spec, const PartialAdelicPoint& P) {
  PlaceSet out;
  for (const auto& [v, pt] : P.entries) {
    if (contains(spec.s0, v)) {
      out.push_back(v);
    } else if (v.is_finite()) {
      Rational dp = Rational(spec.d()) * spec.p_set(spec.all(), pt.t);
      if (valuation(dp, v) == 1) out.push_back(v);
    }
  }
  return normalize(std::move(out));
}

/// The data a relative Selmer computation needs: the place sets T, T0 and
/// the admissible point with its witness primes.
struct FiberContext {
  PlaceSet T, T0;
  AdmissiblePoint adm;

  PlaceSet T_of_t() const {
    PlaceSet out = T;
    for (const auto& u : adm.witnesses) out.push_back(Place::finite(u));
    return normalize(std::move(out));
  }
  PlaceSet T0_of_t() const {
    PlaceSet out = T0;
    for (const auto& u : adm.witnesses) out.push_back(Place::finite(u));
    return normalize(std::move(out));
  }
  std::vector<Integer> known_primes() const { return finite_primes(T_of_t()); }
};

inline FiberContext make_context(const SurfaceSpec& spec, const PartialAdelicPoint& P,
                                 const AdmissiblePoint& adm) {
  return {P.places(), compute_T0(spec, P), adm};
}

/// W^v(t0): <[-d p_J(t0)]_v> on T0(t0), unit classes elsewhere on T(t0).
inline std::vector<LocalSubspace> relative_dual_conditions(const SurfaceSpec& spec,
                                                           const FiberContext& ctx) {
  const Rational torus_d = fiber(spec, ctx.adm.t0).torus_d;
  const PlaceSet t0_places = ctx.T0_of_t();
  std::vector<LocalSubspace> out;
  for (const auto& v : ctx.T_of_t()) {
    out.push_back(contains(t0_places, v) ? local_span(torus_d, v) : local_units(v));
  }
  return out;
}

namespace detail {

inline GBasis relative_ambient(const SurfaceSpec& spec, const FiberContext& ctx) {
  return GBasis{unit_basis(ctx.T), spec.size()};
}

template <typename Conditions>
RelativeSubspace relative_solve(const SurfaceSpec& spec, const FiberContext& ctx,
                                const Conditions& conditions) {
  const GBasis ambient = relative_ambient(spec, ctx);
  const Rational& t0 = ctx.adm.t0;
  std::vector<Rational> values(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) values[i] = spec.p(i, t0);
  return solve_local_conditions(ambient, conditions, [&](std::size_t k, const Place& v) {
    if (k < ambient.classes.size()) {
      return local_square_class(ambient.classes.element(k), v).bits;
    }
    return local_square_class(values[k - ambient.classes.size()], v).bits;
  });
}

}  // namespace detail

/// R^ = ev^{-1}(Sel of the dual fibre torus over T0(t0)), inside J^T.
inline RelativeSubspace relative_dual_selmer(const SurfaceSpec& spec, const FiberContext& ctx) {
  return detail::relative_solve(spec, ctx, relative_dual_conditions(spec, ctx));
}

/// R = ev^{-1}(Sel of the fibre torus over T0(t0)), inside J^T.
inline RelativeSubspace relative_selmer(const SurfaceSpec& spec, const FiberContext& ctx) {
  std::vector<LocalSubspace> conditions;
  for (const auto& W : relative_dual_conditions(spec, ctx)) conditions.push_back(W.orthogonal());
  return detail::relative_solve(spec, ctx, conditions);
}

/// Hilbert conditions at the witness primes: for i not in J',
/// <p_i(t0), ev(x)>_{u_i} = 0, and for i in J', <p_i(t0), ev(x[-d][p_J])>_{u_i} = 0.
inline bool witness_conditions_hold(const SurfaceSpec& spec, const FiberContext& ctx,
                                    const GElement& x) {
  const Rational& t0 = ctx.adm.t0;
  const GElement twist = element_minus_d(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Place u = Place::finite(ctx.adm.witnesses[i]);
    GElement y = has_index(x.poly, i) ? x * twist : x;
    Rational value = Rational(y.c.value()) * spec.p_set(y.poly, t0);
    if (hilbert_symbol(spec.p(i, t0), value, u) != 0) return false;
  }
  return true;
}

/// Number of places of S0 where -d p_J(t_v) is a square, the expected gap
/// dim R - dim R^.
inline std::size_t split_count(const SurfaceSpec& spec, const PartialAdelicPoint& P) {
  std::size_t n = 0;
  for (const auto& v : spec.s0) {
    if (!P.covers(v)) continue;
    Rational x = -Rational(spec.d()) * spec.p_set(spec.all(), P.at(v).t);
    if (is_local_square(x, v)) ++n;
  }
  return n;
}

}  // namespace fibdescent
