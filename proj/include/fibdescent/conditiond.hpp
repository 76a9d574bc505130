#pragma once

// The group G = Q*/Q*^2 (+) F2<[p_i]>, the constants D_i^{J'} and their dual
// variants, the subgroups G_i, G^i and Condition (D).

#include <fibdescent/surface.hpp>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

/// [c][p_{J'}] in G.
struct GElement {
  SquareClass c;
  IndexSet poly = 0;

  static GElement identity() { return {}; }
  bool is_identity() const { return c.is_identity() && poly == 0; }

  friend GElement operator*(const GElement& x, const GElement& y) {
    return {x.c * y.c, x.poly ^ y.poly};
  }
  friend bool operator==(const GElement& x, const GElement& y) {
    return x.c == y.c && x.poly == y.poly;
  }
  /// Square-free value of c, then subset mask.
  friend bool operator<(const GElement& x, const GElement& y) {
    if (x.c < y.c) return true;
    if (y.c < x.c) return false;
    return x.poly < y.poly;
  }
};

inline std::string to_string(const GElement& x, std::size_t n) {
  return "[" + x.c.to_string() + "][p" + index_set_to_string(x.poly, n) + "]";
}

/// ([a], A)
inline GElement element_a(const SurfaceSpec& spec) { return {square_class(spec.a), spec.part_a}; }
/// ([d], J)
inline GElement element_d(const SurfaceSpec& spec) { return {square_class(spec.d()), spec.all()}; }
/// ([-d], J)
inline GElement element_minus_d(const SurfaceSpec& spec) {
  return {square_class(Integer(-spec.d())), spec.all()};
}

namespace detail {

inline Rational D_generic(const SurfaceSpec& spec, std::size_t i, IndexSet subset,
                          const Integer& twist) {
  const Rational root = spec.factors[i].root();
  Rational value = has_index(subset, i)
                       ? Rational(twist) * spec.p_set(spec.all() & ~subset, root)
                       : spec.p_set(subset, root);
  if (value == 0) throw std::logic_error("D value vanished: factors are proportional");
  return value;
}

}  // namespace detail

/// D_i^{J'}: p_{J'}(-d_i/c_i) if i is not in J', else d p_{J \ J'}(-d_i/c_i).
inline Rational D_value(const SurfaceSpec& spec, std::size_t i, IndexSet subset) {
  return detail::D_generic(spec, i, subset, spec.d());
}

/// The dual constant: d replaced by -d in the second branch.
inline Rational D_hat_value(const SurfaceSpec& spec, std::size_t i, IndexSet subset) {
  return detail::D_generic(spec, i, subset, Integer(-spec.d()));
}

/// a D_i^A. For i in A this agrees with b p_B(-d_i/c_i) up to squares.
inline SquareClass aDA_class(const SurfaceSpec& spec, std::size_t i) {
  return square_class(Rational(spec.a) * D_value(spec, i, spec.part_a));
}

inline bool in_G_i(const SurfaceSpec& spec, const GElement& x, std::size_t i) {
  SquareClass v = x.c * square_class(D_value(spec, i, x.poly));
  return v.is_identity() || v == aDA_class(spec, i);
}

inline bool in_Ghat_i(const SurfaceSpec& spec, const GElement& x, std::size_t i) {
  SquareClass v = x.c * square_class(D_hat_value(spec, i, x.poly));
  return v.is_identity() || v == aDA_class(spec, i);
}

/// Every element of `gens`-span, sorted.
inline std::vector<GElement> span_elements(const std::vector<GElement>& gens) {
  std::set<GElement> out{GElement::identity()};
  for (const auto& g : gens) {
    std::vector<GElement> add;
    for (const auto& e : out) add.push_back(e * g);
    out.insert(add.begin(), add.end());
  }
  return {out.begin(), out.end()};
}

/// Greedy basis of a set of elements, in canonical order.
inline std::vector<GElement> greedy_basis(const std::vector<GElement>& elements) {
  std::vector<GElement> sorted = elements;
  std::sort(sorted.begin(), sorted.end());
  std::vector<GElement> basis;
  std::set<GElement> span{GElement::identity()};
  for (const auto& e : sorted) {
    if (span.contains(e)) continue;
    basis.push_back(e);
    std::vector<GElement> add;
    for (const auto& s : span) add.push_back(s * e);
    span.insert(add.begin(), add.end());
  }
  return basis;
}

/// A finite subgroup of G given by all of its elements and a basis.
struct GSubgroup {
  std::vector<GElement> elements;  // sorted
  std::vector<GElement> basis;

  bool contains(const GElement& x) const {
    return std::binary_search(elements.begin(), elements.end(), x);
  }
  std::size_t dimension() const { return basis.size(); }
};

namespace detail {

template <typename Member>
GSubgroup intersect_subgroups(const SurfaceSpec& spec, bool dual, Member&& member) {
  const std::size_t n = spec.size();
  std::vector<SquareClass> aDA(n);
  for (std::size_t i = 0; i < n; ++i) aDA[i] = aDA_class(spec, i);
  std::vector<GElement> found;
  for (IndexSet subset = 0; subset <= spec.all(); ++subset) {
    // Membership at i pins [c] to {[D_i], [a D_i^A D_i]}; intersect over i.
    std::vector<SquareClass> candidates;
    for (std::size_t i = 0; i < n; ++i) {
      SquareClass D = square_class(dual ? D_hat_value(spec, i, subset) : D_value(spec, i, subset));
      std::vector<SquareClass> here{D, D * aDA[i]};
      if (i == 0) {
        candidates = here;
        if (candidates[0] == candidates[1]) candidates.pop_back();
        continue;
      }
      std::vector<SquareClass> kept;
      for (const auto& c : candidates) {
        if (c == here[0] || c == here[1]) kept.push_back(c);
      }
      candidates = std::move(kept);
      if (candidates.empty()) break;
    }
    for (const auto& c : candidates) {
      GElement x{c, subset};
      if (!member(x)) throw std::logic_error("candidate outside the intersection");
      found.push_back(x);
    }
    if (subset == spec.all()) break;
  }
  std::sort(found.begin(), found.end());
  GSubgroup out;
  out.basis = greedy_basis(found);
  out.elements = span_elements(out.basis);
  if (out.elements != found) throw std::logic_error("intersection of G_i is not closed");
  return out;
}

}  // namespace detail

/// G_D = intersection of the G_i, by subset enumeration.
inline GSubgroup compute_GD(const SurfaceSpec& spec) {
  return detail::intersect_subgroups(spec, false, [&](const GElement& x) {
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (!in_G_i(spec, x, i)) return false;
    }
    return true;
  });
}

/// G^D = intersection of the G^i.
inline GSubgroup compute_GDhat(const SurfaceSpec& spec) {
  return detail::intersect_subgroups(spec, true, [&](const GElement& x) {
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (!in_Ghat_i(spec, x, i)) return false;
    }
    return true;
  });
}

struct ConditionDReport {
  GSubgroup GD, GDhat;
  bool holds = false;
  std::vector<GElement> witnesses;       // elements of G_D beyond <[a][p_A], [d][p_J]>
  std::vector<GElement> hat_witnesses;   // elements of G^D beyond <[-d][p_J]>
};

inline ConditionDReport check_condition_D(const SurfaceSpec& spec) {
  ConditionDReport r;
  r.GD = compute_GD(spec);
  r.GDhat = compute_GDhat(spec);
  auto target = span_elements({element_a(spec), element_d(spec)});
  auto target_hat = span_elements({element_minus_d(spec)});
  for (const auto& x : target) {
    if (!r.GD.contains(x)) throw std::logic_error("[a][p_A] or [d][p_J] missing from G_D");
  }
  for (const auto& x : target_hat) {
    if (!r.GDhat.contains(x)) throw std::logic_error("[-d][p_J] missing from G^D");
  }
  for (const auto& x : r.GD.elements) {
    if (!std::binary_search(target.begin(), target.end(), x)) r.witnesses.push_back(x);
  }
  for (const auto& x : r.GDhat.elements) {
    if (!std::binary_search(target_hat.begin(), target_hat.end(), x)) r.hat_witnesses.push_back(x);
  }
  r.holds = r.witnesses.empty() && r.hat_witnesses.empty();
  return r;
}

}  // namespace fibdescent
