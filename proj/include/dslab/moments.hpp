#pragma once

// The second-moment side: Lemma 1.4 overlap factors, the double sum
// sum_{n,m <= N} lambda(A_n ∩ A_m), the E^1..E^5 / F^1..F^3 pair partition,
// and the edge-set sums of Propositions 6.3 and 6.4.

#include <bitset>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/bracket.hpp"
#include "dslab/intervals.hpp"
#include "dslab/measures.hpp"
#include "dslab/parallel.hpp"
#include "dslab/verify.hpp"

namespace dslab {

// ---------------------------------------------------------------------------
// Lemma 1.4

struct overlap_general {
  double u = 2.0;
  double T = 2.0;
};
struct overlap_optimized {
  rational rho;
};
struct overlap_constant {};

using overlap_mode = std::variant<overlap_general, overlap_optimized, overlap_constant>;

struct overlap_bound {
  rational D;
  rational product;   // exact prime product
  double error_term = 0.0;
  double factor = 1.0;  // (1 + error_term) * product
  double u = std::numeric_limits<double>::quiet_NaN();
  double T = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline rational prime_product(std::span<const std::uint64_t> primes, prime_threshold from, bool minus_one) {
  rational out = 1;
  for (auto p : primes) {
    if (!from.admits(p)) continue;
    out *= 1 + make_rational(1, 1) / to_rational(minus_one ? p - 1 : p);
  }
  return out;
}

}  // namespace detail

/// The non-constant factor on the right of (1.6), (1.7) or (1.8), with D = D(n,m).
inline overlap_bound overlap_rhs(std::uint64_t n, std::uint64_t m, const support_function& psi,
                                 const overlap_mode& mode) {
  if (n == m) throw precondition_error("overlap_rhs: n and m must differ");
  overlap_bound out;
  out.D = big_D(n, m, psi(n), psi(m));
  auto primes = separating_primes(n, m);

  if (std::holds_alternative<overlap_constant>(mode)) {
    out.product = detail::prime_product(primes, prime_threshold::above(out.D), false);
    out.factor = out.product.get_d();
    return out;
  }
  if (out.D <= 0) throw precondition_error("overlap_rhs: D(n,m) must be positive");

  if (auto* g = std::get_if<overlap_general>(&mode)) {
    if (!(g->u >= 1.0) || !(g->T >= 2.0)) throw precondition_error("overlap_rhs: need u >= 1 and T >= 2");
    out.u = g->u;
    out.T = g->T;
    double D = out.D.get_d();
    out.error_term = std::pow(g->u, -g->u / 2) + std::pow(g->T, g->u) * std::log(D + 2) * std::log(g->T) / D;
    out.product = detail::prime_product(primes, prime_threshold::above(rational(g->T)), true);
  } else {
    const auto& o = std::get<overlap_optimized>(mode);
    if (out.D <= 1) throw precondition_error("overlap_rhs: optimized mode needs D(n,m) > 1");
    bracket T = f_rho_bracket(out.D, o.rho);
    out.u = std::sqrt(log(out.D).mid());
    out.T = T.mid();
    out.error_term = 1.0 / out.T;
    out.product = detail::prime_product(primes, prime_threshold::above(T), true);
  }
  out.factor = (1 + out.error_term) * out.product.get_d();
  return out;
}

// ---------------------------------------------------------------------------
// Corollary 6.1

struct second_moment_result {
  rational sum;
  rational psi_N;  // Psi(N)
  std::optional<double> ratio_to_psi_sq;
};

/// sum_{n,m <= N} lambda(A_n ∩ A_m): diagonal plus twice the upper triangle.
inline second_moment_result second_moment(std::uint64_t N, const support_function& psi,
                                          unsigned workers = default_workers()) {
  if (N == 0) throw precondition_error("second_moment: N must be positive");
  std::vector<std::uint64_t> ns;
  for (const auto& kv : psi.values()) {
    if (kv.first <= N) ns.push_back(kv.first);
  }
  std::vector<interval_union> sets(ns.size());
  parallel_for(ns.size(), workers, [&](std::size_t i) { sets[i] = build_set(ns[i], psi(ns[i]), numerators::coprime); });

  std::vector<rational> rows(ns.size());
  parallel_for(ns.size(), workers, [&](std::size_t i) {
    std::vector<rational> terms;
    terms.reserve(ns.size() - i);
    terms.push_back(measure(sets[i]));
    for (std::size_t j = i + 1; j < ns.size(); ++j) terms.push_back(2 * intersect_measure(sets[i], sets[j]));
    rows[i] = sum(terms);
  });

  second_moment_result out;
  out.sum = sum(rows);
  out.psi_N = psi_mass(N, psi);
  if (out.psi_N > 0) out.ratio_to_psi_sq = rational(out.sum / (out.psi_N * out.psi_N)).get_d();
  return out;
}

// ---------------------------------------------------------------------------
// The partition of [1,N]^2 used for Corollary 6.1

enum class e_label { E1 = 1, E2, E3, E4, E5 };

inline const char* to_string(e_label l) {
  static const char* names[] = {"E1", "E2", "E3", "E4", "E5"};
  return names[static_cast<int>(l) - 1];
}

struct pair_class {
  e_label label = e_label::E1;
  std::bitset<3> f;  // F1, F2, F3; only filled for E5
  bool decided = true;
  rational D;
};

/// Classifies pairs against fixed psi, N and delta. `f_level` is the constant
/// in L_{sqrt D} >= 10 of F^3 (and <= 10 of F^1).
class pair_classifier {
 public:
  pair_classifier(support_function psi, std::uint64_t N, rational delta, rational f_level = 10)
      : psi_(std::move(psi)), N_(N), delta_(std::move(delta)), f_level_(std::move(f_level)) {
    if (N_ == 0) throw precondition_error("classify: N must be positive");
    if (delta_ <= 0 || delta_ * 10 >= 1) throw precondition_error("classify: delta must lie in (0, 1/10)");
    Psi_ = psi_mass(N_, psi_);
    if (Psi_ <= 1) throw precondition_error("classify: Psi(N) must exceed 1");
    threshold4_ = bracket::point(4.0) / f_rho_bracket(Psi_, 2 * delta_);
    H_ = exp(f_rho_bracket(Psi_, 5 * delta_));
  }

  const rational& psi_N() const { return Psi_; }
  bracket l_threshold() const { return threshold4_; }
  bracket H() const { return H_; }

  pair_class classify(std::uint64_t n, std::uint64_t m) const {
    if (n == 0 || m == 0 || n > N_ || m > N_) throw precondition_error("classify: n, m must lie in [1, N]");
    pair_class out;
    if (n == m) {
      out.label = e_label::E1;
      out.D = psi_(n);
      return out;
    }
    out.D = big_D(n, m, psi_(n), psi_(m));
    if (out.D * out.D <= Psi_) {
      rational L = l_sum(n, m, prime_threshold::at_least(Psi_));
      out.label = L <= 1 ? e_label::E2 : e_label::E3;
      return out;
    }
    rational L_f;
    try {
      L_f = l_sum(n, m, prime_threshold::at_least(f_rho_bracket(out.D, delta_)));
    } catch (const indeterminate_error&) {
      out.decided = false;
      out.label = e_label::E4;
      return out;
    }
    verdict small = decide_le(to_bracket(L_f), threshold4_);
    if (small == verdict::indeterminate) {
      out.decided = false;
      out.label = e_label::E4;
      return out;
    }
    if (small == verdict::holds) {
      out.label = e_label::E4;
      return out;
    }
    out.label = e_label::E5;
    rational L_root = l_sum(n, m, prime_threshold::at_least_sqrt(out.D));
    ordering3 vs_H = compare(to_bracket(out.D), H_);
    if (vs_H == ordering3::overlap) out.decided = false;
    // L_f > threshold already, so the ">= 4/F" conditions of F1 and F2 hold.
    if (vs_H == ordering3::less && L_root <= f_level_) out.f.set(0);
    if (vs_H == ordering3::greater) out.f.set(1);
    if (L_root >= f_level_) out.f.set(2);
    return out;
  }

 private:
  support_function psi_;
  std::uint64_t N_;
  rational delta_;
  rational f_level_;
  rational Psi_;
  bracket threshold4_;
  bracket H_;
};

inline pair_class classify_pair(std::uint64_t n, std::uint64_t m, const support_function& psi, std::uint64_t N,
                                const rational& delta, const rational& f_level = 10) {
  return pair_classifier(psi, N, delta, f_level).classify(n, m);
}

// ---------------------------------------------------------------------------
// Propositions 6.3 and 6.4

struct prop6_gcd {
  rational s;
  rational eps;
};
struct prop6_anatomy {
  rational s;
  rational t;
  rational A;
  rational eta;
};
using prop6_variant = std::variant<prop6_gcd, prop6_anatomy>;

struct prop6_result {
  ratio_report report;
  std::size_t edges = 0;
};

/// lhs = sum over the variant's edge set of (psi phi / n)(psi phi / m), against
/// Psi(N)^2 / s^{1-2eps} (gcd) or Psi(N)^2 s^{1/2+eta} e^{-(1-eta)t/A} (anatomy).
inline prop6_result prop6_bounds(const support_function& psi, std::uint64_t N, const prop6_variant& variant,
                                 unsigned workers = default_workers()) {
  auto phi = multiplicative_weight::totient();
  rational Psi = psi_mass(N, psi);
  if (Psi <= 0) throw precondition_error("prop6_bounds: Psi(N) must be positive");
  auto window = psi.rescaled(1, 1, N, value_range::nonnegative);
  prop6_result out;
  ratio_report& r = out.report;
  rational scale;  // psi = scale * psi~
  rational t = 1, C = 0;
  bracket log_core = log(Psi) * bracket::point(2.0);
  if (auto* g = std::get_if<prop6_gcd>(&variant)) {
    if (g->s <= 0) throw precondition_error("prop6_bounds: s must be positive");
    if (g->eps <= 0) throw precondition_error("prop6_bounds: eps must be positive");
    scale = Psi / g->s;
    log_core = log_core - to_bracket(rational(1 - 2 * g->eps)) * log(g->s);
    r.instance_id = "gcd s=" + to_string(g->s) + " eps=" + to_string(g->eps);
  } else {
    const auto& a = std::get<prop6_anatomy>(variant);
    if (a.s <= 0 || a.A <= 0) throw precondition_error("prop6_bounds: s and A must be positive");
    if (a.t < 0) throw precondition_error("prop6_bounds: t must be >= 0");
    if (a.eta <= 0 || a.eta * 2 >= 1) throw precondition_error("prop6_bounds: eta must lie in (0, 1/2)");
    scale = a.s * Psi;
    t = a.t < 1 ? rational(1) : a.t;  // every prime is >= 1 anyway
    C = 1 / a.A;
    log_core = log_core + to_bracket(rational(make_rational(1, 2) + a.eta)) * log(a.s) -
               to_bracket(rational((1 - a.eta) * a.t / a.A));
    r.instance_id = "anatomy s=" + to_string(a.s) + " t=" + to_string(a.t) + " A=" + to_string(a.A) +
                    " eta=" + to_string(a.eta);
  }
  auto scaled = window.rescaled(1 / scale, 1, N, value_range::nonnegative);
  auto E = build_edge_set(scaled, scaled, t, C, workers);
  out.edges = E.size();
  r.lhs = scale * scale * mu_pairs(E, phi, phi);
  r.log_rhs = log_core;
  detail::finish_ratio(r);
  return out;
}

}  // namespace dslab
