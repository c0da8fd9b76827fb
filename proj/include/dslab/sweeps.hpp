#pragma once

// Instance generators shared by the CLI and the acceptance runs. Everything
// random is drawn up front from the seed, so results do not depend on the
// worker count.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/intervals.hpp"
#include "dslab/measures.hpp"
#include "dslab/parallel.hpp"
#include "dslab/verify.hpp"

namespace dslab {

/// psi(n) = c/n on [a, b] with c chosen so sum_{a<=n<=b} psi(n) phi(n)/n = 1.
inline support_function normalized_inverse(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b < a) throw precondition_error("normalized_inverse: need 1 <= a <= b");
  std::vector<rational> terms;
  for (std::uint64_t n = a; n <= b; ++n) terms.push_back(make_rational(euler_phi(n), n) / to_rational(n));
  rational c = 1 / sum(terms);
  std::map<std::uint64_t, rational> values;
  for (std::uint64_t n = a; n <= b; ++n) values[n] = c / to_rational(n);
  return support_function::from_map(values, value_range::nonnegative);
}

/// frac(sqrt(k)) truncated to `digits` decimals, as an exact rational.
inline rational decimal_sqrt_fraction(std::uint64_t k, unsigned digits) {
  integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  integer r;
  integer target = to_integer(k) * scale * scale;
  mpz_sqrt(r.get_mpz_t(), target.get_mpz_t());
  integer whole = r / scale;
  return make_rational(integer(r - whole * scale), scale);
}

struct main_sweep_options {
  std::uint64_t max_n = 30;
  std::vector<rational> values{make_rational(1, 8), make_rational(1, 4), make_rational(1, 2)};
  unsigned random_per_support = 4;  // extra per-element draws on top of the constant pairs
  std::uint64_t seed = 0;
  std::vector<rational> ts{1, 2};
  std::vector<rational> Cs{0, 1};
  rational eps = make_rational(2, 5);
  std::uint64_t p0 = 1;
};

struct main_sweep_instance {
  std::string id;
  std::uint64_t a = 0, b = 0;
  rational t, C;
  std::size_t edges = 0;
  main_theorem_result result;
};

struct main_sweep_shape {
  std::string id;
  std::uint64_t a, b;
  support_function psi, theta;
};

/// Supports are the intervals [a, b] of [1, max_n]; on each, every constant
/// (psi, theta) pair from `values` plus `random_per_support` seeded per-element
/// draws. E is the full E^{t,C} for every (t, C).
inline std::vector<main_sweep_shape> main_sweep_shapes(const main_sweep_options& o) {
  if (o.max_n == 0 || o.values.empty()) throw precondition_error("main sweep: need max_n >= 1 and some values");
  std::mt19937_64 rng(o.seed);
  std::vector<main_sweep_shape> out;
  for (std::uint64_t a = 1; a <= o.max_n; ++a) {
    for (std::uint64_t b = a; b <= o.max_n; ++b) {
      std::string span = "[" + std::to_string(a) + "," + std::to_string(b) + "]";
      for (std::size_t i = 0; i < o.values.size(); ++i) {
        for (std::size_t j = 0; j < o.values.size(); ++j) {
          out.push_back({span + " const " + to_string(o.values[i]) + "," + to_string(o.values[j]), a, b,
                         support_function::constant(a, b, o.values[i], value_range::nonnegative),
                         support_function::constant(a, b, o.values[j], value_range::nonnegative)});
        }
      }
      for (unsigned r = 0; r < o.random_per_support; ++r) {
        std::map<std::uint64_t, rational> pv, tv;
        for (std::uint64_t n = a; n <= b; ++n) {
          pv[n] = o.values[rng() % o.values.size()];
          tv[n] = o.values[rng() % o.values.size()];
        }
        out.push_back({span + " draw " + std::to_string(r), a, b, support_function::from_map(pv, value_range::nonnegative),
                       support_function::from_map(tv, value_range::nonnegative)});
      }
    }
  }
  return out;
}

inline std::vector<main_sweep_instance> main_theorem_sweep(const main_sweep_options& o,
                                                           unsigned workers = default_workers()) {
  auto shapes = main_sweep_shapes(o);
  auto eps = epsilon_params::make(o.eps, o.p0);
  std::size_t per_shape = o.ts.size() * o.Cs.size();
  std::vector<main_sweep_instance> out(shapes.size() * per_shape);
  parallel_for(shapes.size(), workers, [&](std::size_t s) {
    auto phi = multiplicative_weight::totient();
    std::size_t k = s * per_shape;
    for (const auto& t : o.ts) {
      for (const auto& C : o.Cs) {
        auto& inst = out[k++];
        inst.id = shapes[s].id + " t=" + to_string(t) + " C=" + to_string(C);
        inst.a = shapes[s].a;
        inst.b = shapes[s].b;
        inst.t = t;
        inst.C = C;
        auto E = build_edge_set(shapes[s].psi, shapes[s].theta, t, C, 1);
        inst.edges = E.size();
        inst.result = main_theorem_ratio(E, phi, phi, eps, t, C, inst.id);
      }
    }
  });
  return out;
}

}  // namespace dslab
