#pragma once

// Duffin–Schaeffer blocks: N_k = product of the primes in [N0, N1), with
//   full:    psi_k(N_k/d) = eps_k/d for d | N_k, d != N_k
//   refined: psi_k(N_k/p) = eps_k/p for p | N_k
// and the measure identities they are built to exhibit.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/intervals.hpp"
#include "dslab/measures.hpp"
#include "dslab/parallel.hpp"

namespace dslab {

enum class ds_variant { full, refined };

inline const char* to_string(ds_variant v) { return v == ds_variant::full ? "full" : "refined"; }

struct ds_family {
  unsigned k = 0;
  std::uint64_t N0 = 0;
  std::uint64_t N1 = 0;
  std::uint64_t N = 1;  // N_k
  std::vector<std::uint64_t> primes;
  rational eps;  // eps_k
  support_function psi;
  ds_variant variant = ds_variant::full;
};

/// eps_k defaults to 2^{-k}; pass `eps` to use another summable sequence.
inline ds_family build_family(unsigned k, std::uint64_t N0, std::uint64_t N1, ds_variant variant,
                              std::optional<rational> eps = std::nullopt) {
  ds_family fam;
  fam.k = k;
  fam.N0 = N0;
  fam.N1 = N1;
  fam.variant = variant;
  if (N1 == 0 || N1 <= N0) throw precondition_error("build_family: empty prime range");
  fam.primes = default_sieve().primes_between(N0, N1 - 1);
  if (fam.primes.empty()) {
    throw precondition_error("build_family: no primes in [" + std::to_string(N0) + ", " + std::to_string(N1) + ")");
  }
  for (auto p : fam.primes) {
    if (fam.N > std::numeric_limits<std::uint64_t>::max() / p) throw precondition_error("build_family: N_k overflows");
    fam.N *= p;
  }
  if (eps) {
    fam.eps = *eps;
  } else {
    integer den = 1;
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), k);
    fam.eps = make_rational(integer(1), den);
  }
  if (fam.eps <= 0) throw precondition_error("build_family: eps_k must be positive");
  try {
    if (variant == ds_variant::full) {
      for (auto d : divisors(fam.N)) {
        if (d != fam.N) fam.psi.set(fam.N / d, fam.eps / to_rational(d));
      }
    } else {
      for (auto p : fam.primes) fam.psi.set(fam.N / p, fam.eps / to_rational(p));
    }
  } catch (const precondition_error& e) {
    throw precondition_error(std::string("build_family: ") + e.what());
  }
  return fam;
}

struct ds_diagnostics {
  rational union_E;  // lambda of the union of E_n over the support
  rational sum_E;    // sum of lambda(E_n)
  rational sum_A;    // sum of lambda(A_n)
  rational union_E_closed;
  rational sum_E_closed;
  rational sum_A_closed;
  rational prime_mass;  // prod (1 + 1/p)
  bool consistent = false;
};

inline ds_diagnostics family_diagnostics(const ds_family& fam, unsigned workers = default_workers()) {
  auto support = fam.psi.support();
  std::vector<interval_union> Es(support.size());
  std::vector<rational> mE(support.size()), mA(support.size());
  parallel_for(support.size(), workers, [&](std::size_t i) {
    std::uint64_t n = support[i];
    Es[i] = build_set(n, fam.psi(n), numerators::all);
    mE[i] = measure(Es[i]);
    mA[i] = measure(build_set(n, fam.psi(n), numerators::coprime));
  });
  ds_diagnostics out;
  out.union_E = union_measure(Es);
  out.sum_E = sum(mE);
  out.sum_A = sum(mA);

  rational NN = to_rational(fam.N);
  out.prime_mass = 1;
  for (auto p : fam.primes) out.prime_mass *= 1 + 1 / to_rational(p);
  std::uint64_t phiN = euler_phi(fam.N);
  if (fam.variant == ds_variant::full) {
    out.union_E_closed = 2 * fam.eps;
    out.sum_E_closed = 2 * fam.eps * (out.prime_mass - 1 / NN);
    out.sum_A_closed = 2 * fam.eps * (NN - 1) / NN;  // sum_{d | N, d != 1} phi(d) = N - 1
  } else {
    out.union_E_closed = 2 * fam.eps * (NN - to_rational(phiN)) / NN;
    std::vector<std::uint64_t> ps = fam.primes;
    out.sum_E_closed = 2 * fam.eps * reciprocal_sum(ps);
    rational acc = 0;
    for (auto p : fam.primes) acc += to_rational(euler_phi(fam.N / p));
    out.sum_A_closed = 2 * fam.eps * acc / NN;
  }
  out.consistent = out.union_E == out.union_E_closed && out.sum_E == out.sum_E_closed && out.sum_A == out.sum_A_closed;
  return out;
}

struct valuation_witness {
  std::uint64_t v = 0;
  std::uint64_t w = 0;
  std::uint64_t prime = 0;
  int total = 0;
};

struct valuation_report {
  bool holds = true;
  std::vector<valuation_witness> witnesses;  // one per failing pair, v < w
};

/// |nu_p(v/N)| + |nu_p(w/N)| <= 1 for all unequal support pairs and all primes p.
inline valuation_report valuation_structure(const ds_family& fam) {
  auto support = fam.psi.support();
  std::vector<std::map<std::uint64_t, int>> vals;
  vals.reserve(support.size());
  for (auto n : support) vals.push_back(relative_valuations(n, fam.N));
  valuation_report out;
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t j = i + 1; j < support.size(); ++j) {
      std::map<std::uint64_t, int> total;
      for (auto [p, v] : vals[i]) total[p] += std::abs(v);
      for (auto [p, v] : vals[j]) total[p] += std::abs(v);
      for (auto [p, s] : total) {
        if (s > 1) {
          out.witnesses.push_back({support[i], support[j], p, s});
          break;
        }
      }
    }
  }
  out.holds = out.witnesses.empty();
  return out;
}

/// All ordered pairs (v, w), v != w, of the support, on psi_k x psi_k.
inline pair_set family_pair_set(const ds_family& fam) {
  auto support = fam.psi.support();
  std::vector<edge> edges;
  for (auto v : support) {
    for (auto w : support) {
      if (v != w) edges.push_back({v, w});
    }
  }
  return pair_set(fam.psi, fam.psi, std::move(edges));
}

}  // namespace dslab
