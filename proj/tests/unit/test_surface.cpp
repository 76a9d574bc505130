#include "fixtures.hpp"

#include <fibdescent/brauer.hpp>
#include <fibdescent/conditiond.hpp>
#include <fibdescent/io.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace fibdescent;

namespace {

const char* kRunning = "s0 inf\na 2\nb 3\nfactor 1 1 0\nfactor 2 1 1\npartA 1\n";

SurfaceSpec running() { return fixtures::spec_from(kRunning); }

PlaceSet places(std::initializer_list<long> ps) {
  PlaceSet out;
  for (long p : ps) out.push_back(p == 0 ? Place::real() : Place::finite(static_cast<unsigned long>(p)));
  return normalize(out);
}

}  // namespace

TEST(Surface, ValidatesRunningExample) {
  SurfaceSpec s = running();
  EXPECT_EQ(s.d(), 6);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.in_a(0));
  EXPECT_FALSE(s.in_a(1));
}

TEST(Surface, RejectsBadSpecs) {
  EXPECT_THROW(fixtures::spec_from("s0 inf\na 2\nb 3\nfactor 1 1 0\nfactor 2 2 0\npartA 1\n"), SpecError);
  EXPECT_THROW(fixtures::spec_from("s0 inf\na 0\nb 3\nfactor 1 1 0\npartA\n"), SpecError);
  EXPECT_THROW(fixtures::spec_from("s0 5\na 2\nb 3\nfactor 1 1 0\npartA\n"), SpecError);
  EXPECT_THROW(fixtures::spec_from("s0 inf\na 2\nb 3\nfactor 1 2 4\npartA\n"), SpecError);
  EXPECT_THROW(fixtures::spec_from("s0 inf\na 2\nb 3\nfactor 1 0 1\npartA\n"), SpecError);
}

TEST(Surface, BadAndWorkingPlaces) {
  SurfaceSpec s = running();
  EXPECT_EQ(compute_S_bad(s), places({2, 3}));
  EXPECT_EQ(compute_S(s, {}), places({0, 2, 3}));
  EXPECT_EQ(compute_S(s, {Place::finite(7)}), places({0, 2, 3, 7}));
  EXPECT_THROW(compute_S(s, {Place::finite(3)}), std::invalid_argument);
  SurfaceSpec s5 = fixtures::spec_from("s0 inf 5\na 2\nb 3\nfactor 1 1 0\nfactor 2 1 1\npartA 1\n");
  EXPECT_TRUE(contains(compute_S(s5, {}), Place::finite(5)));
  EXPECT_FALSE(contains(compute_S_bad(s5), Place::finite(5)));
}

TEST(Surface, SBadCoversResidueExhaustion) {
  // t (t + 1) vanishes at every residue mod 2; 2 is in S_bad anyway, and 3
  // appears for t (t + 1) (t + 2).
  SurfaceSpec s = fixtures::spec_from("s0 inf\na 1\nb 1\nfactor 1 1 0\nfactor 2 1 1\nfactor 3 1 2\npartA 1\n");
  EXPECT_TRUE(contains(compute_S_bad(s), Place::finite(3)));
}

TEST(Surface, UniqueVanishingFactorOutsideSBad) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 200; ++k) {
    auto s = fixtures::random_spec(rng, 20, 6, 3);
    if (!s) continue;
    const PlaceSet bad = set_union(s->s0, compute_S_bad(*s));
    for (unsigned long p : {3UL, 5UL, 7UL, 11UL, 13UL, 17UL, 19UL, 23UL}) {
      const Place v = Place::finite(p);
      if (contains(bad, v)) continue;
      for (long t = 0; t < static_cast<long>(p * p); ++t) {
        if (s->p_set(s->all(), Rational(t)) == 0) continue;
        EXPECT_LE(vanishing_factors(*s, Rational(t), v).size(), 1u);
      }
    }
  }
}

TEST(Surface, Fibres) {
  SurfaceSpec s = running();
  FiberSpec f = fiber(s, Rational(1));
  EXPECT_EQ(f.aA, 2);
  EXPECT_EQ(f.bB, 6);
  EXPECT_EQ(f.torus_d, -12);
  EXPECT_THROW(fiber(s, Rational(0)), DegenerateFiber);
  FiberSpec g = fiber(s, Rational(-2));
  EXPECT_EQ(g.aA, -4);
  EXPECT_EQ(g.bB, -3);
  EXPECT_EQ(g.torus_d, -12);
  for (long t = -30; t <= 30; ++t) {
    if (t == 0 || t == -7) continue;
    FiberSpec h = fiber(s, make_rational(t, 7));
    EXPECT_EQ(h.aA * h.bB, -h.torus_d);
  }
}

TEST(Surface, EvaluatePoint) {
  SurfaceSpec s = running();
  EXPECT_NE(evaluate_point(s, Rational(1), Rational(1), Rational(3)), 0);
  EXPECT_EQ(evaluate_point(s, Rational(3), Rational(2), Rational(5)),
            evaluate_point(s, Rational(-3), Rational(2), Rational(5)));
  // 2 t x^2 = 1 at t = 1/2, x = 1, y = 0
  EXPECT_EQ(evaluate_point(s, Rational(1), Rational(0), make_rational(1, 2)), 0);
}

TEST(ConditionD, DValues) {
  SurfaceSpec s = running();
  EXPECT_EQ(D_value(s, 0, 0b10), 1);
  EXPECT_EQ(D_value(s, 1, 0b10), -6);
  EXPECT_EQ(D_hat_value(s, 1, 0b10), 6);
}

TEST(ConditionD, GeneratorsLieInEveryGi) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    auto s = fixtures::random_spec(rng, 15, 5, 3);
    if (!s) continue;
    for (std::size_t i = 0; i < s->size(); ++i) {
      EXPECT_TRUE(in_G_i(*s, element_a(*s), i));
      EXPECT_TRUE(in_G_i(*s, element_d(*s), i));
      EXPECT_TRUE(in_G_i(*s, GElement::identity(), i));
      EXPECT_TRUE(in_Ghat_i(*s, element_minus_d(*s), i));
    }
    auto GD = compute_GD(*s);
    EXPECT_TRUE(GD.contains(GElement::identity()));
    if (s->size() == 1) {
      EXPECT_LE(GD.elements.size(), 4u);
    }
  }
}

TEST(ConditionD, MembershipIgnoresSquareFactors) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    auto s = fixtures::random_spec(rng, 15, 5, 3);
    if (!s) continue;
    const long c = static_cast<long>(rng() % 61) - 30;
    if (c == 0) continue;
    const IndexSet subset = static_cast<IndexSet>(rng() % (s->all() + 1));
    GElement x{square_class(Integer(c)), subset}, y{square_class(Integer(c * 49)), subset};
    for (std::size_t i = 0; i < s->size(); ++i) EXPECT_EQ(in_G_i(*s, x, i), in_G_i(*s, y, i));
  }
}

TEST(ConditionD, MatchesSupportBoundedEnumeration) {
  std::mt19937_64 rng(10);
  int checked = 0;
  while (checked < 30) {
    auto s = fixtures::random_spec(rng, 12, 4, 3);
    if (!s) continue;
    ++checked;
    for (bool dual : {false, true}) {
      GSubgroup g = dual ? compute_GDhat(*s) : compute_GD(*s);
      auto expect = oracle::g_intersection(*s, dual);
      std::set<oracle::GKey> got;
      for (const auto& x : g.elements) got.insert({x.c.value(), x.poly});
      EXPECT_TRUE(got == expect) << serialize_spec(*s);
    }
  }
}

TEST(ConditionD, RunningExampleHolds) {
  ConditionDReport r = check_condition_D(running());
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.GD.dimension(), 2u);
  EXPECT_EQ(r.GDhat.dimension(), 1u);
}

TEST(ConditionD, ReportsWitnessWhenItFails) {
  std::mt19937_64 rng(12);
  bool seen = false;
  for (int k = 0; k < 2000 && !seen; ++k) {
    auto s = fixtures::random_spec(rng, 6, 3, 2);
    if (!s) continue;
    ConditionDReport r = check_condition_D(*s);
    if (r.holds) continue;
    seen = true;
    EXPECT_FALSE(r.witnesses.empty() && r.hat_witnesses.empty());
    for (const auto& w : r.witnesses) EXPECT_TRUE(r.GD.contains(w));
  }
  EXPECT_TRUE(seen);
}

TEST(Brauer, Generators) {
  SurfaceSpec s = running();
  QuaternionClass q2 = brauer_generator(s, 1);
  EXPECT_EQ(q2.left, -2);
  EXPECT_EQ(q2.right.slope, 1);
  EXPECT_EQ(q2.right.intercept, 1);
  QuaternionClass q1 = brauer_generator(s, 0);
  EXPECT_EQ(q1.left, 3);
  EXPECT_EQ(q1.right.intercept, 0);
  SurfaceSpec noA = fixtures::spec_from("s0 inf\na 5\nb 3\nfactor 1 1 0\nfactor 2 1 1\npartA\n");
  for (std::size_t i = 0; i < noA.size(); ++i) EXPECT_EQ(brauer_generator(noA, i).left, 5);
}

TEST(Brauer, Residues) {
  SurfaceSpec s = running();
  EXPECT_EQ(residue_at(brauer_generator(s, 1), ClosedPoint::rational(Rational(-1))).value(), -2);
  QuaternionClass c_t{Rational(7), LinearPoly{1, 0}};
  EXPECT_TRUE(residue_at(c_t, ClosedPoint::rational(Rational(5))).is_identity());
  QuaternionClass four_t{Rational(4), LinearPoly{1, 0}};
  EXPECT_TRUE(residue_at(four_t, ClosedPoint::rational(Rational(0))).is_identity());
  EXPECT_THROW(residue_at(c_t, ClosedPoint{{Rational(1), Rational(0), Rational(1)}}), std::domain_error);
}

TEST(Brauer, Invariants) {
  SurfaceSpec s = running();
  // A_2 = (-2, t + 1); at the real place with t + 1 < 0 both entries are negative.
  EXPECT_EQ(invariant(s, 1, Rational(-5), Place::real()), 1);
  EXPECT_EQ(invariant(s, 1, Rational(5), Place::real()), 0);
  EXPECT_THROW(invariant(s, 1, Rational(-1), Place::real()), std::domain_error);
}

TEST(Brauer, ObstructionSumNeedsBadPlaces) {
  SurfaceSpec s = running();
  PartialAdelicPoint P;
  P.entries.emplace(Place::real(), LocalPoint{0, 0, Rational(-5), 0});
  ObstructionSum sum = brauer_obstruction_sum(s, P, 1);
  EXPECT_FALSE(sum.determinate);
  EXPECT_EQ(sum.value, 1);
}
