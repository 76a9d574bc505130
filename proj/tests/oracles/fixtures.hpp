#pragma once

// Spec generators and the partial adelic points the descent tests start from.

#include "oracles.hpp"

#include <fibdescent/brauer.hpp>
#include <fibdescent/conditiond.hpp>
#include <fibdescent/io.hpp>
#include <fibdescent/points.hpp>

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace fibdescent;

inline SurfaceSpec spec_from(const std::string& text) { return validate_spec(parse_spec(text)); }

/// A random valid spec: |a|, |b| <= coeff, 1..max_factors factors with
/// c in [1, max_c], |d| <= coeff.
inline std::optional<SurfaceSpec> random_spec(std::mt19937_64& rng, int coeff, int max_c,
                                              int max_factors, const PlaceSet& s0 = {Place::real()}) {
  auto rnd = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RawSpec r;
  r.s0 = s0;
  r.a = rnd(-coeff, coeff);
  r.b = rnd(-coeff, coeff);
  const int n = rnd(1, max_factors);
  for (int i = 0; i < n; ++i) r.factors.push_back({rnd(1, max_c), rnd(-coeff, coeff)});
  for (int i = 0; i < n; ++i) {
    if (rnd(0, 1)) r.part_a.push_back(static_cast<std::size_t>(i));
  }
  try {
    return validate_spec(r);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::vector<int> invariants(const SurfaceSpec& spec, const Rational& t, const Place& v) {
  std::vector<int> out;
  for (std::size_t i = 0; i < spec.size(); ++i) out.push_back(invariant(spec, i, t, v));
  return out;
}

/// Local points on S0 u S_bad whose Brauer invariants copy those of the
/// global base point t_global, with d p_J(t_v) of valuation at most 1 (exactly
/// 1 at 2) and -d p_J(t_v) positive at the real place.
inline std::optional<PartialAdelicPoint> adelic_point(const SurfaceSpec& spec,
                                                      const Rational& t_global) {
  PartialAdelicPoint P;
  for (const auto& v : set_union(spec.s0, compute_S_bad(spec))) {
    const auto target = invariants(spec, t_global, v);
    bool found = false;
    for (long k = 0; k < 400 && !found; ++k) {
      const long tv = v.is_real() ? (k % 2 ? 1000 + k : -1000 - k) : (k % 2 ? k / 2 + 1 : -(k / 2));
      const Rational T(tv);
      if (spec.p_set(spec.all(), T) == 0) continue;
      const Rational dp = Rational(spec.d()) * spec.p_set(spec.all(), T);
      if (v.is_real()) {
        if (dp >= 0) continue;
      } else {
        const int val = valuation(dp, v);
        if (val > 1 || (v.prime() == 2 && val != 1)) continue;
      }
      if (invariants(spec, T, v) != target) continue;
      auto pt = find_local_point(spec, T, v);
      if (!pt) continue;
      P.entries.emplace(v, *pt);
      found = true;
    }
    if (!found) return std::nullopt;
  }
  return P;
}

/// A spec together with a global integral point and local data built from it.
struct Instance {
  std::string text;
  SurfaceSpec spec;
  oracle::IntegralPoint global;
  PartialAdelicPoint P;
};

inline std::optional<Instance> instance(const std::string& text, long height = 60) {
  Instance out;
  out.text = text;
  out.spec = spec_from(text);
  auto g = oracle::integral_point(out.spec, height);
  if (!g) return std::nullopt;
  out.global = *g;
  auto P = adelic_point(out.spec, Rational(g->t));
  if (!P) return std::nullopt;
  out.P = *P;
  return out;
}

}  // namespace fixtures
