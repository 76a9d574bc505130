#include "oracles.hpp"

#include <fibdescent/gf2.hpp>
#include <fibdescent/hensel.hpp>
#include <fibdescent/local.hpp>
#include <fibdescent/points.hpp>
#include <fibdescent/primes.hpp>
#include <fibdescent/square_class.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace fibdescent;

TEST(Integer, ParsesAndPrintsRationals) {
  EXPECT_EQ(to_string(parse_rational("6/-4")), "-3/2");
  EXPECT_EQ(to_string(parse_rational("7")), "7");
  EXPECT_THROW(parse_rational("1/0"), std::exception);
  EXPECT_THROW(parse_integer("12x"), std::exception);
}

TEST(Integer, Valuations) {
  EXPECT_EQ(valuation(Rational(48), Place::finite(2)), 4);
  EXPECT_EQ(valuation(make_rational(5, 18), Place::finite(3)), -2);
  EXPECT_EQ(integer_valuation(Integer(0) + 250, Integer(5)), 3);
}

TEST(Primes, AgreeWithTrialDivision) {
  for (long n = -5; n < 3000; ++n) EXPECT_EQ(is_prime(Integer(n)), oracle::small_prime(n)) << n;
  EXPECT_TRUE(is_prime(Integer("2305843009213693951")));
  EXPECT_FALSE(is_prime(Integer("3825123056546413051")));  // strong pseudoprime to bases 2..23
  EXPECT_THROW(is_prime(Integer("170141183460469231731687303715884105727")), std::domain_error);
}

TEST(Primes, FactorizationMultipliesBack) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    Integer n = Integer(static_cast<unsigned long>(rng() % 1000000007ULL) + 2) *
                Integer(static_cast<unsigned long>(rng() % 100003ULL) + 2);
    Integer acc = 1;
    for (auto& [p, e] : factor(n)) {
      EXPECT_TRUE(is_prime(p));
      acc *= pow(p, static_cast<unsigned long>(e));
    }
    EXPECT_EQ(acc, n);
  }
}

TEST(Local, JacobiMatchesEulerCriterion) {
  for (long p = 3; p < 200; p += 2) {
    if (!oracle::small_prime(p)) continue;
    for (long a = -50; a <= 50; ++a) EXPECT_EQ(jacobi(Integer(a), Integer(p)), euler_criterion(Integer(a), Integer(p)));
  }
}

TEST(SquareClass, ReducesToSquareFreeKernel) {
  EXPECT_EQ(square_class(Integer(12)).value(), 3);
  EXPECT_EQ(square_class(make_rational(-18, 5)).value(), -10);
  EXPECT_TRUE(square_class(make_rational(4, 9)).is_identity());
  for (long n = -300; n <= 300; ++n) {
    if (n) {
      EXPECT_EQ(square_class(Integer(n)).value(), Integer(static_cast<long>(oracle::kernel(n)))) << n;
    }
  }
}

TEST(Hilbert, KnownValues) {
  const Place two = Place::finite(2), three = Place::finite(3), five = Place::finite(5);
  EXPECT_EQ(hilbert_symbol(Rational(-1), Rational(-1), Place::real()), 1);
  EXPECT_EQ(hilbert_symbol(Rational(-1), Rational(-1), two), 1);
  EXPECT_EQ(hilbert_symbol(Rational(2), Rational(3), three), 1);
  EXPECT_EQ(hilbert_symbol(Rational(2), Rational(5), five), 1);
  EXPECT_EQ(hilbert_symbol(Rational(-1), Rational(5), two), 0);
  EXPECT_EQ(hilbert_symbol(Rational(3), Rational(7), three), 0);
}

TEST(Hilbert, MatchesConicOracleOnSmallRange) {
  for (long p : {0L, 2L, 3L, 5L, 7L}) {
    const Place v = p == 0 ? Place::real() : Place::finite(static_cast<unsigned long>(p));
    for (long a = -20; a <= 20; ++a) {
      for (long b = -20; b <= 20; ++b) {
        if (!a || !b) continue;
        ASSERT_EQ(hilbert_symbol(Rational(a), Rational(b), v), oracle::hilbert(a, b, p))
            << a << " " << b << " at " << v.to_string();
      }
    }
  }
}

TEST(Hilbert, BilinearAndSymmetric) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    long a = static_cast<long>(rng() % 2001) - 1000, b = static_cast<long>(rng() % 2001) - 1000,
         c = static_cast<long>(rng() % 2001) - 1000;
    if (!a || !b || !c) continue;
    for (long p : {2L, 3L, 5L, 7L, 11L}) {
      Place v = Place::finite(static_cast<unsigned long>(p));
      EXPECT_EQ(hilbert_symbol(Rational(a), Rational(b), v), hilbert_symbol(Rational(b), Rational(a), v));
      EXPECT_EQ(hilbert_symbol(Rational(a * b), Rational(c), v),
                hilbert_symbol(Rational(a), Rational(c), v) ^ hilbert_symbol(Rational(b), Rational(c), v));
    }
  }
}

TEST(Local, SquareTestMatchesOracle) {
  for (long p : {0L, 2L, 3L, 5L, 13L}) {
    const Place v = p == 0 ? Place::real() : Place::finite(static_cast<unsigned long>(p));
    for (long m = -200; m <= 200; ++m) {
      if (m) {
        EXPECT_EQ(is_local_square(Rational(m), v), oracle::local_square(m, p)) << m << " " << p;
      }
    }
  }
}

TEST(Local, RepresentativesHaveTheirCoordinates) {
  for (unsigned long p : {2UL, 3UL, 7UL}) {
    const Place v = Place::finite(p);
    for (unsigned bits = 0; bits < (1U << local_dimension(v)); ++bits) {
      EXPECT_EQ(local_square_class(local_representative(v, static_cast<std::uint8_t>(bits)), v).bits, bits);
    }
  }
}

TEST(Gf2, KernelVectorsAnnihilateRows) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 9;
    std::vector<gf2::BitVector> m;
    for (std::size_t r = 0; r < rows; ++r) {
      gf2::BitVector row(cols);
      for (std::size_t c = 0; c < cols; ++c) row.set(c, rng() & 1);
      m.push_back(row);
    }
    auto ker = gf2::kernel(m, cols);
    EXPECT_EQ(ker.size() + gf2::rank(m), cols);
    for (const auto& k : ker) {
      for (const auto& row : m) EXPECT_FALSE(row.dot(k));
    }
  }
}

TEST(Hensel, SquareRootsModPrimePowers) {
  for (unsigned long p : {3UL, 5UL, 7UL, 11UL}) {
    for (long a = 1; a < 40; ++a) {
      if (a % static_cast<long>(p) == 0 || jacobi(Integer(a), Integer(p)) < 0) continue;
      Integer r = sqrt_mod_prime_power(Integer(a), Integer(p), 6);
      Integer m = pow(Integer(p), 6);
      EXPECT_EQ(mod(r * r - a, m), 0);
    }
  }
  Integer r = sqrt_mod_prime_power(Integer(17), Integer(2), 10);
  EXPECT_EQ(mod(r * r - 17, Integer(1024)), 0);
}

TEST(Hensel, SolvesDiagonalConics) {
  auto res = hensel_solve(Polynomial2::diagonal_conic(Integer(3), Integer(5)), Integer(7), 6);
  ASSERT_TRUE(res.found());
  EXPECT_EQ(mod(3 * res.x * res.x + 5 * res.y * res.y - 1, pow(Integer(7), res.precision)), 0);
  // 3 x^2 = 1 has no 5-adic root and 5 y^2 vanishes mod 5.
  auto none = hensel_solve(Polynomial2::diagonal_conic(Integer(3), Integer(5)), Integer(5), 4);
  EXPECT_EQ(none.status, HenselStatus::certified_none);
}
