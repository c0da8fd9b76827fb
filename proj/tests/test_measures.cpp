#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dslab/measures.hpp"
#include "oracles.hpp"

using namespace dslab;
using oracle::frac;

namespace {

const auto phi = multiplicative_weight::totient();

support_function half_on(std::uint64_t lo, std::uint64_t hi) { return support_function::constant(lo, hi, frac(1, 2)); }

pair_set complete(const support_function& psi, const support_function& theta) {
  std::vector<edge> es;
  for (auto v : psi.support())
    for (auto w : theta.support()) es.push_back({v, w});
  return pair_set(psi, theta, es);
}

std::set<std::pair<std::uint64_t, std::uint64_t>> as_set(const pair_set& E) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const auto& e : E.edges()) out.insert({e.v, e.w});
  return out;
}

std::map<std::uint64_t, rational> random_values(std::mt19937_64& rng, std::uint64_t hi, int count) {
  static const rational choices[] = {frac(1, 2), frac(1, 3), frac(1, 5), frac(1, 8), frac(1, 40), frac(3, 7)};
  std::map<std::uint64_t, rational> out;
  for (int i = 0; i < count; ++i) out[rng() % hi + 1] = choices[rng() % 6];
  return out;
}

}  // namespace

TEST(MuSet, Examples) {
  auto psi = half_on(1, 3);
  EXPECT_EQ(mu_set(psi, phi, std::vector<std::uint64_t>{}), 0);
  support_function one;
  one.set(6, frac(1, 4));
  EXPECT_EQ(mu_set(one, phi, std::vector<std::uint64_t>{6}), frac(1, 12));
  EXPECT_EQ(mu_set(psi, phi, std::vector<std::uint64_t>{1, 2, 3}), frac(13, 12));
  EXPECT_EQ(2 * mu_support(psi, phi), psi_mass(3, psi));
}

TEST(MuSet, TwiceTheSupportMeasureIsPsiMass) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto psi = support_function::from_map(random_values(rng, 300, 80));
    EXPECT_EQ(2 * mu_support(psi, phi), psi_mass(300, psi));
  }
}

TEST(MuPairs, Examples) {
  auto psi = half_on(1, 6), theta = half_on(2, 9);
  EXPECT_EQ(mu_pairs(pair_set(psi, theta, {}), phi, phi), 0);
  pair_set single(psi, theta, {{4, 9}});
  EXPECT_EQ(mu_pairs(single, phi, phi), mu_point(psi, phi, 4) * mu_point(theta, phi, 9));
  EXPECT_EQ(mu_pairs(complete(psi, theta), phi, phi), mu_support(psi, phi) * mu_support(theta, phi));
  EXPECT_THROW(pair_set(psi, theta, {{7, 3}}), precondition_error);
}

TEST(MuPairs, BilinearAndMonotone) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto psi = support_function::from_map(random_values(rng, 60, 15));
    auto theta = support_function::from_map(random_values(rng, 60, 15));
    auto f = trial % 2 ? phi : multiplicative_weight::one();
    auto full = complete(psi, theta);
    ASSERT_EQ(mu_pairs(full, f, f), mu_set(psi, f, psi.support()) * mu_set(theta, f, theta.support()));
    std::vector<edge> sub;
    for (const auto& e : full.edges())
      if (rng() % 2) sub.push_back(e);
    ASSERT_LE(mu_pairs(pair_set(psi, theta, sub), f, f), mu_pairs(full, f, f));
  }
}

TEST(EdgeSet, Examples) {
  auto psi = half_on(2, 3);
  auto E = build_edge_set(psi, psi, 1, frac(1, 2), 1);
  EXPECT_TRUE(E.empty());
  EXPECT_TRUE(neighborhood(E, 2).empty());
  EXPECT_TRUE(neighborhood(E, 3).empty());

  auto wide = half_on(1, 40);
  EXPECT_TRUE(build_edge_set(wide, wide, 1, mertens_sum(40) + frac(1, 1000), 1).empty());
  EXPECT_THROW(build_edge_set(wide, wide, frac(1, 2), 0, 1), precondition_error);

  auto all = build_edge_set(wide, wide, 1, 0, 1);
  for (std::uint64_t v = 1; v <= 40; ++v)
    for (std::uint64_t w = 1; w <= 40; ++w)
      ASSERT_EQ(all.contains(v, w), oracle::D(v, w, frac(1, 2), frac(1, 2)) <= 1) << v << "," << w;
  EXPECT_EQ(as_set(build_edge_set(wide, wide, 1, -3, 1)), as_set(all));
}

TEST(EdgeSet, AgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  const rational ts[] = {1, 2, frac(5, 2), 7};
  const rational Cs[] = {-1, 0, frac(1, 3), frac(1, 2), 1};
  for (int trial = 0; trial < 25; ++trial) {
    auto pv = random_values(rng, 500, 50), tv = random_values(rng, 500, 50);
    // Force shared factors so the gcd buckets are populated.
    for (std::uint64_t k = 1; k <= 20; ++k) {
      pv[k * 12] = frac(1, 2);
      tv[k * 18 > 500 ? k : k * 18] = frac(1, 3);
    }
    rational t = ts[trial % 4], C = Cs[trial % 5];
    auto E = build_edge_set(support_function::from_map(pv), support_function::from_map(tv), t, C, 1 + trial % 3);
    ASSERT_EQ(as_set(E), oracle::edge_set(pv, tv, t, C)) << trial;
    ASSERT_EQ(mu_pairs(E, phi, phi), oracle::mu_pairs(as_set(E), pv, tv));
  }
}

TEST(EdgeSet, WorkerCountDoesNotChangeTheResult) {
  auto psi = half_on(1, 150);
  auto a = build_edge_set(psi, psi, 2, frac(1, 4), 1);
  auto b = build_edge_set(psi, psi, 2, frac(1, 4), 4);
  EXPECT_EQ(a.edges(), b.edges());
  EXPECT_FALSE(a.empty());
}

TEST(ScaledEdgeSet, Examples) {
  auto psi = half_on(1, 40);
  auto scaled = scaled_support(psi, 5, frac(61, 2), 3);
  EXPECT_EQ(scaled.support().front(), 5u);
  EXPECT_EQ(scaled.support().back(), 30u);
  EXPECT_EQ(scaled(7), frac(1, 6));

  auto restricted = half_on(1, 30);
  EXPECT_EQ(build_scaled_edge_set(psi, 1, 30, 1, frac(1, 3), 1).edges(),
            build_edge_set(restricted, restricted, 1, frac(1, 3), 1).edges());

  auto E = build_scaled_edge_set(psi, 1, 30, 2, 0, 1);
  for (std::uint64_t v = 1; v <= 30; ++v)
    for (std::uint64_t w = 1; w <= 30; ++w)
      ASSERT_EQ(E.contains(v, w), oracle::D(v, w, frac(1, 2), frac(1, 2)) <= 2) << v << "," << w;
  EXPECT_TRUE(scaled_support(psi, 20, 10, 2).empty());
}

TEST(LayerMatrix, Example) {
  support_function psi;
  psi.set(2, frac(1, 2));
  psi.set(4, frac(1, 2));
  support_function theta;
  theta.set(2, frac(1, 2));
  auto M = layer_matrix(complete(psi, theta), phi, phi, 2);
  EXPECT_EQ(M.total, frac(1, 8));
  EXPECT_EQ(M.at(1, 1), frac(1, 2));
  EXPECT_EQ(M.at(2, 1), frac(1, 2));
  EXPECT_EQ(M.at(0, 0), 0);
  EXPECT_EQ(M.alpha_at(1), frac(1, 2));
  EXPECT_EQ(M.alpha_at(2), frac(1, 2));
  EXPECT_EQ(M.beta_at(1), 1);

  EXPECT_THROW(layer_matrix(pair_set(psi, theta, {}), phi, phi, 2), precondition_error);
  EXPECT_THROW(layer_matrix(complete(psi, theta), phi, phi, 4), precondition_error);
}

TEST(LayerMatrix, CoprimePrimeGivesOneCell) {
  auto psi = half_on(1, 20);
  auto M = layer_matrix(build_edge_set(psi, psi, 1, 0, 1), phi, phi, 23);
  ASSERT_EQ(M.entries.size(), 1u);
  EXPECT_EQ(M.at(0, 0), 1);
}

TEST(LayerMatrix, NormalizedWithConsistentMarginals) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    auto psi = support_function::from_map(random_values(rng, 200, 60));
    auto theta = support_function::from_map(random_values(rng, 200, 60));
    auto E = build_edge_set(psi, theta, 1, 0, 1);
    if (E.empty()) continue;
    std::uint64_t p = std::vector<std::uint64_t>{2, 3, 5, 7}[trial % 4];
    auto M = layer_matrix(E, phi, phi, p);

    std::vector<rational> cells, as, bs;
    std::map<unsigned, rational> rows;
    for (auto& [ij, m] : M.entries) {
      ASSERT_GT(m, 0);
      cells.push_back(m);
      rows[ij.first] += m;
    }
    for (auto& [i, a] : M.alpha) as.push_back(a);
    for (auto& [j, b] : M.beta) bs.push_back(b);
    ASSERT_EQ(sum(cells), 1);
    ASSERT_EQ(sum(as), 1);
    ASSERT_EQ(sum(bs), 1);

    // Row sums times mu(E) equal mu(E ∩ (V_i x W)), recomputed from scratch.
    for (auto& [i, r] : rows) {
      rational direct = 0;
      for (const auto& e : E.edges()) {
        if (valuation(e.v, p) == i) direct += oracle::mu(e.v, psi(e.v)) * oracle::mu(e.w, theta(e.w));
      }
      ASSERT_EQ(r * M.total, direct);
    }
  }
}

TEST(Neighborhood, Examples) {
  auto psi = half_on(1, 4), theta = half_on(5, 7);
  auto E = complete(psi, theta);
  EXPECT_EQ(neighborhood(E, 2), (std::vector<std::uint64_t>{5, 6, 7}));
  EXPECT_TRUE(neighborhood(E, 9).empty());
  EXPECT_EQ(neighborhood_of_right(E, 6), (std::vector<std::uint64_t>{1, 2, 3, 4}));
  EXPECT_EQ(E.left(), (std::vector<std::uint64_t>{1, 2, 3, 4}));
  EXPECT_EQ(E.right(), (std::vector<std::uint64_t>{5, 6, 7}));
}
