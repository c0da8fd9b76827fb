#include <random>

#include <gtest/gtest.h>

#include "dslab/intervals.hpp"
#include "oracles.hpp"

using namespace dslab;
using oracle::frac;

namespace {

support_function half_on(std::uint64_t lo, std::uint64_t hi) { return support_function::constant(lo, hi, frac(1, 2)); }

interval_union from_pairs(std::vector<std::pair<rational, rational>> ps) {
  std::vector<interval> iv;
  for (auto& [a, b] : ps) iv.push_back({a, b});
  return interval_union::from_intervals(iv);
}

}  // namespace

TEST(SupportFunction, StoresExactlyTheSupport) {
  support_function f;
  f.set(3, frac(1, 4));
  f.set(5, 0);
  f.set(3, 0);
  EXPECT_TRUE(f.empty());
  EXPECT_THROW(f.set(2, frac(3, 5)), precondition_error);
  EXPECT_THROW(f.set(2, -1), precondition_error);
  EXPECT_THROW(f.set(0, frac(1, 4)), precondition_error);
  support_function g(value_range::nonnegative);
  g.set(2, 7);
  EXPECT_EQ(g(2), 7);
}

TEST(BuildSet, Examples) {
  auto a1 = build_set(1, frac(1, 2), numerators::coprime);
  EXPECT_EQ(a1, from_pairs({{0, 1}}));
  EXPECT_EQ(measure(a1), 1);

  auto a6 = build_set(6, frac(1, 4), numerators::coprime);
  EXPECT_EQ(a6, from_pairs({{frac(1, 6) - frac(1, 24), frac(1, 6) + frac(1, 24)},
                            {frac(5, 6) - frac(1, 24), frac(5, 6) + frac(1, 24)}}));
  EXPECT_EQ(measure(a6), frac(1, 6));

  EXPECT_EQ(measure(build_set(6, frac(1, 4), numerators::all)), frac(1, 2));
  EXPECT_TRUE(build_set(9, 0, numerators::all).empty());
  EXPECT_TRUE(build_set(9, 0, numerators::coprime).empty());
  EXPECT_THROW(build_set(9, frac(2, 3), numerators::all), precondition_error);
  EXPECT_THROW(build_set(0, frac(1, 3), numerators::all), precondition_error);
}

TEST(BuildSet, MeasureFormulasForAllSmallN) {
  for (std::uint64_t n = 1; n <= 120; ++n) {
    for (auto psi : {frac(1, 8), frac(1, 3), frac(1, 2), frac(2, 7)}) {
      auto A = build_set(n, psi, numerators::coprime);
      auto E = build_set(n, psi, numerators::all);
      ASSERT_EQ(measure(A), 2 * to_rational(oracle::phi(n)) * psi / to_rational(n)) << n;
      ASSERT_EQ(measure(E), 2 * psi) << n;
      ASSERT_EQ(measure(A), oracle::set_measure(n, psi, true));
      ASSERT_TRUE(E.contains(A));
    }
  }
}

TEST(IntervalUnion, CanonicalForm) {
  auto u = from_pairs({{frac(1, 2), frac(3, 4)}, {0, frac(1, 4)}, {frac(1, 4), frac(1, 3)}, {frac(3, 5), frac(2, 3)}});
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u.intervals()[0].lo, 0);
  EXPECT_EQ(u.intervals()[0].hi, frac(1, 3));
  EXPECT_EQ(u.intervals()[1].hi, frac(3, 4));
  EXPECT_EQ(measure(u), frac(7, 12));
  EXPECT_THROW(from_pairs({{frac(1, 2), frac(1, 3)}}), precondition_error);
  EXPECT_THROW(from_pairs({{frac(-1, 2), frac(1, 3)}}), precondition_error);
  EXPECT_EQ(measure(interval_union{}), 0);
  EXPECT_EQ(measure(from_pairs({{0, 1}})), 1);
}

TEST(IntervalUnion, MeasureOfRandomUnionsMatchesSweep) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<rational, rational>> ps;
    for (int i = 0, k = static_cast<int>(rng() % 12); i < k; ++i) {
      long long d = static_cast<long long>(rng() % 30) + 1;
      long long a = static_cast<long long>(rng() % (d + 1)), b = static_cast<long long>(rng() % (d + 1));
      if (a > b) std::swap(a, b);
      ps.push_back({frac(a, d), frac(b, d)});
    }
    auto u = from_pairs(ps);
    ASSERT_EQ(measure(u), oracle::union_length(ps));
    for (std::size_t i = 1; i < u.size(); ++i) ASSERT_LT(u.intervals()[i - 1].hi, u.intervals()[i].lo);
  }
}

TEST(Intersect, Examples) {
  auto a1 = build_set(1, frac(1, 2), numerators::coprime);
  auto a2 = build_set(2, frac(1, 2), numerators::coprime);
  auto a3 = build_set(3, frac(1, 2), numerators::coprime);
  EXPECT_EQ(intersect_measure(a1, a2), frac(1, 2));
  EXPECT_EQ(intersect_measure(a2, a3), frac(1, 2));
  EXPECT_EQ(intersect_measure(a3, a3), measure(a3));
}

TEST(Intersect, SymmetricBoundedAndMatchesInclusionExclusion) {
  for (std::uint64_t n = 1; n <= 25; ++n) {
    for (std::uint64_t m = 1; m <= 25; ++m) {
      auto pn = frac(1, static_cast<long long>(2 + n % 5)), pm = frac(1, static_cast<long long>(2 + m % 3));
      auto A = build_set(n, pn, numerators::coprime), B = build_set(m, pm, numerators::coprime);
      rational x = intersect_measure(A, B);
      ASSERT_EQ(x, intersect_measure(B, A));
      ASSERT_LE(x, std::min(measure(A), measure(B)));
      ASSERT_GE(x, 0);
      ASSERT_EQ(x, oracle::intersection(n, pn, m, pm));
    }
  }
}

TEST(UnionMeasure, Examples) {
  EXPECT_EQ(union_measure(std::vector<interval_union>{}), 0);
  auto a6 = build_set(6, frac(1, 4), numerators::coprime);
  EXPECT_EQ(union_measure(std::vector<interval_union>{a6}), measure(a6));
}

TEST(UnionMeasure, SubadditiveAndMatchesSweep) {
  std::vector<interval_union> sets;
  std::vector<std::pair<rational, rational>> flat;
  rational total = 0;
  for (std::uint64_t n = 1; n <= 40; ++n) {
    auto psi = frac(1, static_cast<long long>(3 + n % 4));
    sets.push_back(build_set(n, psi, numerators::all));
    auto iv = oracle::set_intervals(n, psi, false);
    flat.insert(flat.end(), iv.begin(), iv.end());
    total += measure(sets.back());
    ASSERT_EQ(union_measure(sets), oracle::union_length(flat));
    ASSERT_LE(union_measure(sets), total);
  }
}

TEST(UnionMeasure, RationalFallbackForHugeDenominators) {
  // Each union has an integer form on its own; the lcm 3 * 2^40 * 3^30 does not fit.
  integer d1 = 1, d2 = 1;
  mpz_ui_pow_ui(d1.get_mpz_t(), 2, 40);
  mpz_ui_pow_ui(d2.get_mpz_t(), 3, 30);
  auto a = interval_union::from_intervals({{frac(1, 3), make_rational(integer(d1 / 2 + 1), d1)}});
  auto b = interval_union::from_intervals({{make_rational(integer(d2 / 3 + 1), d2), frac(2, 3)}});
  ASSERT_NE(a.scale(), 0u);
  ASSERT_NE(b.scale(), 0u);
  rational want = oracle::union_length({{a.intervals()[0].lo, a.intervals()[0].hi}, {b.intervals()[0].lo, b.intervals()[0].hi}});
  EXPECT_EQ(union_measure(std::vector<interval_union>{a, b}), want);
  rational meet = measure(a) + measure(b) - want;
  EXPECT_EQ(intersect_measure(a, b), meet);
}

TEST(CountSolutions, Examples) {
  EXPECT_EQ(count_solutions(frac(3, 10), 3, half_on(1, 3)), 3u);
  EXPECT_EQ(count_solutions(frac(1, 2), 2, half_on(1, 2)), 3u);
  EXPECT_EQ(count_solutions(frac(7, 13), 50, support_function{}), 0u);
}

TEST(CountSolutions, AgreesWithEnumeration) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    std::map<std::uint64_t, rational> vals;
    for (std::uint64_t n = 1; n <= 40; ++n) {
      if (rng() % 3) vals[n] = frac(static_cast<long long>(rng() % 5), 8);
    }
    auto psi = support_function::from_map(vals);
    rational alpha = frac(static_cast<long long>(rng() % 1000), 997);
    ASSERT_EQ(count_solutions(alpha, 40, psi), oracle::count_solutions(alpha, 40, vals));
  }
}

TEST(PsiMass, Examples) {
  EXPECT_EQ(psi_mass(1, half_on(1, 1)), 1);
  EXPECT_EQ(psi_mass(3, half_on(1, 3)), frac(13, 6));
  EXPECT_EQ(psi_mass(50, support_function{}), 0);
}

TEST(PsiMass, IsTheSumOfMeasuresOfA) {
  auto psi = half_on(1, 200);
  std::vector<rational> ms;
  for (std::uint64_t n = 1; n <= 200; ++n) ms.push_back(measure(build_set(n, psi(n), numerators::coprime)));
  EXPECT_EQ(psi_mass(200, psi), sum(ms));
}
