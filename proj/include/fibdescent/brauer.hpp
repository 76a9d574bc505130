#pragma once

// Vertical Brauer classes (c, f(t)) with c constant and f linear, their
// residues at rational points of the affine line, and local invariants.

#include <fibdescent/conditiond.hpp>
#include <fibdescent/local.hpp>
#include <fibdescent/surface.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

/// slope * t + intercept
struct LinearPoly {
  Rational slope, intercept;

  Rational operator()(const Rational& t) const { return slope * t + intercept; }
  bool is_constant() const { return slope == 0; }
  friend bool operator==(const LinearPoly&, const LinearPoly&) = default;
};

/// The quaternion algebra (left, right(t)) over Q(t).
struct QuaternionClass {
  Rational left;
  LinearPoly right;
  friend bool operator==(const QuaternionClass&, const QuaternionClass&) = default;
};

/// A_i = (a p_A(-d_i/c_i), p_i(t)) for i not in A, (b p_B(-d_i/c_i), p_i(t)) for i in A.
inline QuaternionClass brauer_generator(const SurfaceSpec& spec, std::size_t i) {
  const Rational root = spec.factors[i].root();
  Rational left = spec.in_a(i) ? Rational(spec.b) * spec.p_set(spec.part_b(), root)
                               : Rational(spec.a) * spec.p_set(spec.part_a, root);
  if (left == 0) throw std::logic_error("Brauer generator with zero constant");
  return {left, LinearPoly{Rational(spec.factors[i].c), Rational(spec.factors[i].d)}};
}

/// A closed point of the affine line, given by a monic irreducible polynomial
/// (coefficients from the constant term up). Only degree 1 is supported.
struct ClosedPoint {
  std::vector<Rational> monic;

  static ClosedPoint rational(const Rational& m) { return {{-m, Rational(1)}}; }
  std::size_t degree() const { return monic.empty() ? 0 : monic.size() - 1; }
  Rational value() const {
    if (degree() != 1) {
      throw std::domain_error("closed point of degree " + std::to_string(degree()) +
                              " is not supported");
    }
    return -monic[0];
  }
};

namespace detail {

inline int order_at(const LinearPoly& f, const Rational& m) {
  if (f.slope == 0 && f.intercept == 0) throw std::domain_error("zero function");
  return (!f.is_constant() && f(m) == 0) ? 1 : 0;
}

}  // namespace detail

/// Tame symbol (-1)^{v(f)v(g)} f^{v(g)} / g^{v(f)} at the point, modulo squares.
inline SquareClass residue_at(const QuaternionClass& q, const ClosedPoint& point) {
  if (q.left == 0) throw std::domain_error("zero constant entry");
  const Rational m = point.value();
  const int vg = detail::order_at(q.right, m);
  // v(f) = 0 for the constant entry, so the symbol is left^{v(g)}.
  return vg % 2 != 0 ? square_class(q.left) : SquareClass::identity();
}

/// Sum (in Br) of the classes in `terms`; residues add.
inline SquareClass residue_at(const std::vector<QuaternionClass>& terms, const ClosedPoint& point) {
  SquareClass acc;
  for (const auto& q : terms) acc *= residue_at(q, point);
  return acc;
}

/// inv_v A_i(P_v) = <left_i, p_i(t_v)>_v.
inline int invariant(const SurfaceSpec& spec, std::size_t i, const Rational& t_v, const Place& v) {
  QuaternionClass q = brauer_generator(spec, i);
  Rational right = q.right(t_v);
  if (right == 0) throw std::domain_error("invariant: p_i(t_v) = 0");
  return hilbert_symbol(q.left, right, v);
}

struct ObstructionSum {
  int value = 0;
  bool determinate = true;
  std::vector<Place> missing;                 // places of S0 u S_bad absent from P
  std::vector<std::pair<Place, int>> terms;   // nonzero contributions
};

/// sum_v inv_v A_i(P_v) over the places of P. Places outside S0 u S_bad that
/// are absent contribute 0 for any locally soluble choice; absent places of
/// S0 u S_bad make the sum indeterminate.
inline ObstructionSum brauer_obstruction_sum(const SurfaceSpec& spec, const PartialAdelicPoint& P,
                                             std::size_t i) {
  ObstructionSum out;
  for (const auto& v : set_union(spec.s0, compute_S_bad(spec))) {
    if (!P.covers(v)) out.missing.push_back(v);
  }
  out.determinate = out.missing.empty();
  for (const auto& [v, pt] : P.entries) {
    int inv = invariant(spec, i, pt.t, v);
    if (inv) out.terms.emplace_back(v, inv);
    out.value ^= inv;
  }
  return out;
}

}  // namespace fibdescent
