#pragma once

// Counts and divisor sums over integers whose large prime factors carry a lot
// of reciprocal mass, i.e. sum_{p >= t, p | n} 1/p >= c, with the bound cores
// of Lemmas 4.1, 4.2, B.2, B.3 and the witnesses of Lemmas B.5, B.6.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/bracket.hpp"
#include "dslab/verify.hpp"

namespace dslab {

/// sum_{p >= t, p | n} 1/p >= c, exactly.
inline bool heavy(const factorization& n, prime_threshold t, const rational& c) {
  if (c <= 0) return true;
  std::vector<std::uint64_t> kept;
  double approx = 0.0;
  for (auto [p, e] : n.entries()) {
    if (t.admits(p)) {
      kept.push_back(p);
      approx += 1.0 / static_cast<double>(p);
    }
  }
  double cd = c.get_d();
  if (approx < cd * (1 - 1e-9) - 1e-12) return false;
  if (approx > cd * (1 + 1e-9) + 1e-12) return true;
  return reciprocal_sum(kept) >= c;
}

struct anatomy_result {
  rational value;  // a count or a weighted sum
  ratio_report report;
};

namespace detail {

inline std::uint64_t floor_u64(const rational& x) {
  integer f = floor(x);
  if (f < 0) return 0;
  return to_u64(f);
}

}  // namespace detail

/// |{n <= x : sum_{p >= t, p | n} 1/p >= c}|.
inline std::uint64_t anatomy_count_value(const rational& x, const rational& t, const rational& c) {
  if (x < 1 || t < 1) throw precondition_error("anatomy_count: need x >= 1 and t >= 1");
  std::uint64_t X = detail::floor_u64(x);
  if (c <= 0) return X;
  prime_threshold thr = prime_threshold::at_least(t);
  std::uint64_t count = 0;
  for (std::uint64_t n = 1; n <= X; ++n) {
    if (heavy(factorize(n), thr, c)) ++count;
  }
  return count;
}

/// Count with its ratio to the core x e^{-100ct} of Lemma 4.1.
inline anatomy_result anatomy_count(const rational& x, const rational& t, const rational& c) {
  anatomy_result out;
  out.value = to_rational(anatomy_count_value(x, t, c));
  out.report.instance_id = "x=" + to_string(x) + " t=" + to_string(t) + " c=" + to_string(c);
  out.report.lhs = out.value;
  out.report.log_rhs = log(x) - to_bracket(rational(100 * c * t));
  detail::finish_ratio(out.report);
  return out;
}

/// sum over mn = M with sum_{p >= t, p | m} 1/p >= c of f(n).
inline rational anatomy_divisor_sum_value(std::uint64_t M, const multiplicative_weight& f, const rational& t,
                                          const rational& c) {
  if (M == 0 || t < 1) throw precondition_error("anatomy_divisor_sum: need M >= 1 and t >= 1");
  prime_threshold thr = prime_threshold::at_least(t);
  std::vector<rational> terms;
  for (auto m : divisors(M)) {
    if (heavy(factorize(m), thr, c)) terms.push_back(f(M / m));
  }
  return sum(terms);
}

inline anatomy_result anatomy_divisor_sum(std::uint64_t M, const multiplicative_weight& f, const rational& t,
                                          const rational& c) {
  anatomy_result out;
  out.value = anatomy_divisor_sum_value(M, f, t, c);
  out.report.instance_id = "M=" + std::to_string(M) + " t=" + to_string(t) + " c=" + to_string(c);
  out.report.lhs = out.value;
  out.report.log_rhs = log(to_rational(M)) - to_bracket(rational(100 * c * t));
  detail::finish_ratio(out.report);
  return out;
}

/// "Sufficiently large" in Appendix B, made concrete: eps c log t / log log t >= level.
struct anatomy_hypothesis {
  rational level = 10;
};

/// t^{e^{a c}} as an enclosure.
inline bracket tower(const rational& t, const rational& a, const rational& c) {
  return exp(log(t) * exp(to_bracket(rational(a * c))));
}

namespace detail {

inline void require_improved_range(const rational& t, const rational& c, const rational& eps,
                                   const anatomy_hypothesis& hyp, bool need_e_e) {
  if (c <= 0) throw precondition_error("anatomy_improved: c must be positive");
  if (eps <= 0 || eps >= 1) throw precondition_error("anatomy_improved: eps must lie in (0, 1)");
  if (t <= 1) throw precondition_error("anatomy_improved: t must exceed 1");
  if (need_e_e) {
    verdict big_t = decide_le(exp(exp(bracket::point(1.0))), to_bracket(t));
    if (big_t != verdict::holds) throw precondition_error("anatomy_improved: t must be >= e^e");
  }
  bracket lt = log(t);
  if (!(lt.lo > 1.0)) throw precondition_error("anatomy_improved: log log t must be positive");
  bracket strength = to_bracket(rational(eps * c)) * lt / log(lt);
  if (decide_le(to_bracket(hyp.level), strength) != verdict::holds) {
    throw precondition_error("anatomy_improved: eps c log t / log log t is below the configured level " +
                             to_string(hyp.level));
  }
}

}  // namespace detail

struct anatomy_improved_result {
  rational value;
  ratio_report report;  // against x e^{-100 t^{e^{(1-eps)c}}}
  bracket shift_T;      // t^{e^{(1-2eps)c}}
};

/// Lemma B.2 (weighted = false, value is a count up to x) or Lemma B.3
/// (weighted = true, value is the divisor sum for M = floor(x)).
inline anatomy_improved_result anatomy_improved(const rational& x, const rational& t, const rational& c,
                                                const rational& eps, bool weighted,
                                                const multiplicative_weight& f = multiplicative_weight::totient(),
                                                anatomy_hypothesis hyp = {}) {
  detail::require_improved_range(t, c, eps, hyp, true);
  if (x < 1) throw precondition_error("anatomy_improved: x must be >= 1");
  anatomy_improved_result out;
  if (weighted) {
    out.value = anatomy_divisor_sum_value(detail::floor_u64(x), f, t, c);
  } else {
    out.value = to_rational(anatomy_count_value(x, t, c));
  }
  out.report.instance_id = std::string(weighted ? "M=" : "x=") + to_string(x) + " t=" + to_string(t) +
                           " c=" + to_string(c) + " eps=" + to_string(eps);
  out.report.lhs = out.value;
  bracket scale = weighted ? log(to_rational(detail::floor_u64(x))) : log(x);
  out.report.log_rhs = scale - bracket::point(100.0) * tower(t, 1 - eps, c);
  detail::finish_ratio(out.report);
  out.shift_T = tower(t, 1 - 2 * eps, c);
  return out;
}

struct containment_result {
  bool holds = true;
  std::uint64_t inner_count = 0;  // at (t, c)
  std::uint64_t outer_count = 0;  // at (T, eps c)
  std::optional<std::uint64_t> witness;
  bracket T;
};

/// Lemma B.1 for every n <= x: heavy at (t, c) implies heavy at (T, eps c).
inline containment_result anatomy_containment(std::uint64_t x, const rational& t, const rational& c,
                                              const rational& eps, anatomy_hypothesis hyp = {}) {
  if (eps <= 0 || eps * 2 >= 1) throw precondition_error("anatomy_containment: eps must lie in (0, 1/2)");
  detail::require_improved_range(t, c, eps, hyp, false);
  containment_result out;
  out.T = tower(t, 1 - 2 * eps, c);
  prime_threshold inner = prime_threshold::at_least(t);
  prime_threshold outer = prime_threshold::at_least(out.T);
  rational ec = eps * c;
  for (std::uint64_t n = 1; n <= x; ++n) {
    auto fac = factorize(n);
    bool a = heavy(fac, inner, c);
    bool b = heavy(fac, outer, ec);
    out.inner_count += a;
    out.outer_count += b;
    if (a && !b && !out.witness) out.witness = n;
  }
  out.holds = !out.witness;
  return out;
}

enum class witness_mode { large_c, small_c };

struct lower_witness {
  integer n0;
  std::vector<std::uint64_t> primes;
  rational mass;  // sum of 1/p over the primes of n0
  std::uint64_t T = 0;
};

/// n0 = product of the primes in [t, T] with T = t^{e^{(1+eps)c}} (large_c)
/// or T = 3t (small_c), after checking sum 1/p >= c exactly.
inline lower_witness anatomy_lower_witness(const rational& t, const rational& c, const rational& eps,
                                           witness_mode mode) {
  if (t < 1) throw precondition_error("anatomy_lower_witness: t must be >= 1");
  std::uint64_t hi = 0;
  if (mode == witness_mode::small_c) {
    hi = detail::floor_u64(3 * t);
  } else {
    if (eps <= 0) throw precondition_error("anatomy_lower_witness: eps must be positive");
    bracket T = tower(t, 1 + eps, c);
    if (T.hi > 1e9) throw precondition_error("anatomy_lower_witness: T is too large to enumerate");
    double lo = std::floor(T.lo), up = std::floor(T.hi);
    if (lo != up) throw indeterminate_error("anatomy_lower_witness: floor(T) is not determined");
    hi = static_cast<std::uint64_t>(std::max(lo, 0.0));
  }
  std::uint64_t lo = detail::floor_u64(ceil(t) == floor(t) ? t : rational(floor(t) + 1));
  lower_witness out;
  out.T = hi;
  out.primes = default_sieve().primes_between(lo, hi);
  if (out.primes.empty()) {
    throw precondition_error("anatomy_lower_witness: no primes in [" + to_string(t) + ", " + std::to_string(hi) + "]");
  }
  out.n0 = 1;
  for (auto p : out.primes) out.n0 *= to_integer(p);
  out.mass = reciprocal_sum(out.primes);
  if (out.mass < c) {
    throw precondition_error("anatomy_lower_witness: witness mass " + to_string(out.mass) + " is below c = " +
                             to_string(c));
  }
  return out;
}

}  // namespace dslab
