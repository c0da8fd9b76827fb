#pragma once

// Statement-level checkers: the Theorem 1.7 ratio monitor, Proposition 1.8,
// Lemma 3.1's pointwise bound, Lemma 3.2's instance contract, and the
// regularity / gcd-structure properties of a near counterexample.
//
// Nothing here turns an implied-constant statement into pass/fail. Those come
// back as ratio reports; only bounds with explicit constants return a verdict.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/bracket.hpp"
#include "dslab/measures.hpp"
#include "dslab/rational.hpp"

namespace dslab {

struct ratio_report {
  std::string instance_id;
  rational lhs;
  std::optional<rational> rhs_exact;  // set when the core is rational
  bracket log_rhs;                    // enclosure of log(rhs_core)
  double rhs_core = 0.0;
  double ratio = 0.0;                 // lhs / rhs_core; 0 when lhs = 0
  double log_ratio = -std::numeric_limits<double>::infinity();
  double max_over_sweep = 0.0;
};

namespace detail {

inline void finish_ratio(ratio_report& r) {
  r.rhs_core = std::exp(r.log_rhs.mid());
  if (r.lhs <= 0) {
    r.ratio = 0.0;
    r.log_ratio = -std::numeric_limits<double>::infinity();
  } else {
    r.log_ratio = log(r.lhs).mid() - r.log_rhs.mid();
    r.ratio = std::exp(r.log_ratio);
  }
  r.max_over_sweep = r.ratio;
}

inline ratio_report exact_ratio(std::string id, rational lhs, const rational& rhs) {
  ratio_report r;
  r.instance_id = std::move(id);
  r.lhs = std::move(lhs);
  r.rhs_exact = rhs;
  r.log_rhs = rhs > 0 ? log(rhs) : bracket{-std::numeric_limits<double>::infinity(),
                                           -std::numeric_limits<double>::infinity()};
  finish_ratio(r);
  return r;
}

}  // namespace detail

inline void merge_max(std::vector<ratio_report>& reports) {
  double m = 0.0;
  for (const auto& r : reports) m = std::max(m, r.ratio);
  for (auto& r : reports) r.max_over_sweep = m;
}

/// Raised when an edge set is not contained in the set a statement is about.
class containment_error : public precondition_error {
 public:
  containment_error(std::uint64_t v, std::uint64_t w, const std::string& why)
      : precondition_error("pair (" + std::to_string(v) + ", " + std::to_string(w) + ") " + why), v_(v), w_(w) {}
  std::uint64_t v() const { return v_; }
  std::uint64_t w() const { return w_; }

 private:
  std::uint64_t v_, w_;
};

/// Raised when an instance violates the hypothesis of the lemma it is fed to.
class hypothesis_error : public precondition_error {
 public:
  hypothesis_error(long i, long j, const std::string& why)
      : precondition_error("hypothesis fails at (" + std::to_string(i) + ", " + std::to_string(j) + "): " + why),
        i_(i),
        j_(j) {}
  long i() const { return i_; }
  long j() const { return j_; }

 private:
  long i_, j_;
};

// ---------------------------------------------------------------------------
// Theorem 1.7

struct main_theorem_result {
  ratio_report report;
  rational mu_V;
  rational mu_W;
  std::uint64_t P = 0;  // P_{psi,theta}(eps)
  bracket log_bound;    // log of 1000^P * rhs_core
  verdict absolute = verdict::holds;
};

/// P = p0 + #{p <= p0 : p | v w for some v in supp psi, w in supp theta}.
inline std::uint64_t big_P(const support_function& psi, const support_function& theta, std::uint64_t p0) {
  if (psi.empty() || theta.empty()) return p0;
  std::uint64_t count = 0;
  for (std::uint64_t p = 2; p <= p0; ++p) {
    if (!is_prime(p)) continue;
    bool hit = false;
    for (const auto& kv : psi.values()) {
      if (kv.first % p == 0) {
        hit = true;
        break;
      }
    }
    for (auto it = theta.values().begin(); !hit && it != theta.values().end(); ++it) {
      if (it->first % p == 0) hit = true;
    }
    if (hit) ++count;
  }
  return p0 + count;
}

namespace detail {

inline void require_admissible(const multiplicative_weight& f, std::uint64_t limit) {
  if (limit == 0 || f.admissible_up_to() >= limit) return;
  multiplicative_weight copy = f;
  auto cert = certify_admissible(copy, limit);
  if (!cert.admissible) {
    throw precondition_error(f.name() + " is not admissible: (1*f)(" + std::to_string(*cert.witness) +
                             ") = " + to_string(cert.value_at_witness));
  }
}

}  // namespace detail

/// Ratio of mu(E) to (mu_psi^f(V) mu_theta^g(W) e^{-Ct})^{1/2+eps} with V = supp psi,
/// W = supp theta, plus a rigorous verdict on the explicit bound with 1000^P.
inline main_theorem_result main_theorem_ratio(const pair_set& E, const multiplicative_weight& f,
                                              const multiplicative_weight& g, const epsilon_params& eps,
                                              const rational& t, const rational& C, std::string id = {}) {
  if (t < 1) throw precondition_error("main_theorem_ratio: t must be >= 1");
  prime_threshold thr = prime_threshold::at_least(t);
  for (const auto& e : E.edges()) {
    if (!in_edge_set(e.v, e.w, E.psi()(e.v), E.theta()(e.w), thr, C)) {
      throw containment_error(e.v, e.w, "is not in E^{t,C}_{psi,theta}");
    }
  }
  detail::require_admissible(f, E.psi().max_support());
  detail::require_admissible(g, E.theta().max_support());

  main_theorem_result out;
  out.mu_V = mu_support(E.psi(), f);
  out.mu_W = mu_support(E.theta(), g);
  out.P = big_P(E.psi(), E.theta(), eps.p0);

  ratio_report& r = out.report;
  r.instance_id = std::move(id);
  r.lhs = mu_pairs(E, f, g);
  bracket expo = to_bracket(eps.half_plus());
  if (out.mu_V <= 0 || out.mu_W <= 0) {
    // Empty supports: the bound is 0 and so is the left side.
    r.log_rhs = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    detail::finish_ratio(r);
    out.absolute = r.lhs == 0 ? verdict::holds : verdict::fails;
    return out;
  }
  r.log_rhs = expo * (log(out.mu_V) + log(out.mu_W) - to_bracket(rational(C * t)));
  detail::finish_ratio(r);
  out.log_bound = to_bracket(to_rational(out.P)) * log(to_bracket(rational(1000))) + r.log_rhs;
  out.absolute = r.lhs == 0 ? verdict::holds : decide_le(log(r.lhs), out.log_bound);
  return out;
}

// ---------------------------------------------------------------------------
// Proposition 1.8

struct prop54_result {
  rational normalization;  // sum_{X<=n<=Y} psi(n) phi(n) / n
  std::vector<ratio_report> reports;  // one per t, ratio = lhs * t
  std::vector<std::size_t> edge_counts;
};

inline prop54_result prop54_check(const support_function& psi, const rational& X, const rational& Y,
                                  const std::vector<rational>& ts, const rational& C = 10,
                                  unsigned workers = default_workers()) {
  auto phi = multiplicative_weight::totient();
  prop54_result out;
  auto window = scaled_support(psi, X, Y, 1);
  out.normalization = mu_support(window, phi);
  if (out.normalization < 1 || out.normalization > 2) {
    throw precondition_error("prop54_check: normalization sum " + to_string(out.normalization) +
                             " is outside [1, 2]");
  }
  for (const auto& t : ts) {
    if (t < 1) throw precondition_error("prop54_check: t must be >= 1");
    auto E = build_scaled_edge_set(psi, X, Y, t, C, workers);
    rational lhs = t * t * mu_pairs(E, phi, phi);
    out.reports.push_back(detail::exact_ratio("t=" + to_string(t), lhs, 1 / t));
    out.edge_counts.push_back(E.size());
  }
  merge_max(out.reports);
  return out;
}

// ---------------------------------------------------------------------------
// Lemma 3.1

struct bilinear_violations {
  std::vector<std::pair<unsigned, unsigned>> violations;
  std::vector<std::pair<unsigned, unsigned>> indeterminate;
};

/// Cells with m(i,j) > c1 p^{-|i-j|/q} (alpha_i beta_j e^{[i != j]})^{1/q'}.
inline bilinear_violations bilinear_bound_violations(const measure_matrix& M, const epsilon_params& eps,
                                                     const rational& c1) {
  bilinear_violations out;
  bracket inv_q = to_bracket(rational(1 / eps.q));
  bracket inv_qp = to_bracket(rational(1 / eps.q_prime));
  bracket log_p = log(to_rational(M.prime));
  for (const auto& [ij, m] : M.entries) {
    auto [i, j] = ij;
    if (m <= 0) continue;
    rational a = M.alpha_at(i), b = M.beta_at(j);
    if (c1 <= 0 || a == 0 || b == 0) {
      out.violations.push_back(ij);
      continue;
    }
    unsigned gap = i > j ? i - j : j - i;
    bracket rhs = log(c1) - to_bracket(rational(gap)) * inv_q * log_p +
                  inv_qp * (log(a) + log(b) + bracket::point(i != j ? 1.0 : 0.0));
    switch (decide_le(log(m), rhs)) {
      case verdict::holds: break;
      case verdict::fails: out.violations.push_back(ij); break;
      default: out.indeterminate.push_back(ij);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma 3.2

struct concentration_instance {
  std::map<std::pair<long, long>, rational> m;
  std::map<long, rational> x;
  std::map<long, rational> y;
  rational lambda;
  rational c1;
  rational c2;
  rational C3;
  rational q;
  double norm_tolerance = 1e-12;
};

struct concentration_result {
  long k = 0;
  rational offdiag_mass;
  bool c1_bound_holds = false;
  rational c1_lower;  // c2 / (1 + (2 C3 - 1) lambda)
};

namespace detail {

inline rational seq_at(const std::map<long, rational>& s, long i) {
  auto it = s.find(i);
  return it == s.end() ? rational(0) : it->second;
}

inline double lp_norm_power(const std::map<long, rational>& s, double p) {
  double acc = 0.0;
  for (const auto& kv : s) acc += std::pow(kv.second.get_d(), p);
  return acc;
}

}  // namespace detail

/// The bound of (3.2) at cell (i, j).
inline rational concentration_cap(const concentration_instance& inst, long i, long j) {
  rational xy = detail::seq_at(inst.x, i) * detail::seq_at(inst.y, j);
  if (i == j) return inst.c1 * xy;
  unsigned long gap = static_cast<unsigned long>(i > j ? i - j : j - i);
  return inst.c1 * inst.C3 * pow(inst.lambda, static_cast<unsigned>(gap)) * xy;
}

inline void validate(const concentration_instance& inst) {
  if (inst.q <= 2) throw precondition_error("concentration: q must exceed 2");
  if (inst.c1 > 1) throw precondition_error("concentration: c1 must be <= 1");
  if (inst.c2 <= 0 || inst.c2 >= 1) throw precondition_error("concentration: c2 must lie in (0,1)");
  if (inst.lambda <= 0 || inst.lambda > 1 - inst.c2) {
    throw precondition_error("concentration: lambda must lie in (0, 1 - c2]");
  }
  if (inst.C3 <= 0) throw precondition_error("concentration: C3 must be positive");
  std::vector<rational> masses;
  for (const auto& [ij, v] : inst.m) {
    if (v < 0) throw precondition_error("concentration: negative mass");
    masses.push_back(v);
  }
  if (sum(masses) != 1) throw precondition_error("concentration: m is not a probability measure");
  for (const auto* s : {&inst.x, &inst.y}) {
    for (const auto& kv : *s) {
      if (kv.second < 0) throw precondition_error("concentration: sequences must be nonnegative");
    }
  }
  double qp = rational(inst.q / (inst.q - 1)).get_d();
  for (const auto* s : {&inst.x, &inst.y}) {
    double n = std::pow(detail::lp_norm_power(*s, qp), 1.0 / qp);
    if (std::fabs(n - 1.0) > inst.norm_tolerance) {
      throw precondition_error("concentration: sequence does not have unit l^{q'} norm");
    }
  }
  for (const auto& [ij, v] : inst.m) {
    if (v > concentration_cap(inst, ij.first, ij.second)) {
      throw hypothesis_error(ij.first, ij.second, "m(i,j) = " + to_string(v) + " exceeds the bilinear bound");
    }
  }
}

inline concentration_result concentration_check(const concentration_instance& inst) {
  validate(inst);
  concentration_result out;
  std::optional<rational> best;
  std::vector<long> idx;
  for (const auto& kv : inst.x) idx.push_back(kv.first);
  for (const auto& kv : inst.y) idx.push_back(kv.first);
  std::sort(idx.begin(), idx.end());
  for (long i : idx) {
    rational v = detail::seq_at(inst.x, i) * detail::seq_at(inst.y, i);
    if (!best || v > *best) {
      best = v;
      out.k = i;
    }
  }
  std::vector<rational> off;
  for (const auto& [ij, v] : inst.m) {
    if (std::labs(ij.first - out.k) + std::labs(ij.second - out.k) >= 2) off.push_back(v);
  }
  out.offdiag_mass = sum(off);
  out.c1_lower = inst.c2 / (1 + (2 * inst.C3 - 1) * inst.lambda);
  out.c1_bound_holds = inst.c1 >= out.c1_lower;
  return out;
}

namespace detail {

inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// A random instance satisfying (3.2) by construction: m is proportional to the
/// cap shape times random weights, and c1 is the smallest constant that makes
/// (3.2) hold. Draws with c1 > 1 are discarded and redrawn.
inline concentration_instance random_concentration_instance(std::mt19937_64& rng) {
  for (;;) {
    concentration_instance inst;
    long K = 1 + static_cast<long>(rng() % 6);
    long offset = static_cast<long>(rng() % 5) - 2;
    std::uint64_t eps_num = 1 + rng() % 40;  // eps in (0, 2/5]
    rational eps = make_rational(static_cast<long long>(eps_num), 100);
    inst.q = 2 / (1 - 2 * eps);
    inst.q.canonicalize();
    double qp = 2.0 / (1.0 + 2.0 * eps.get_d());
    inst.lambda = make_rational(static_cast<long long>(1 + rng() % 63), 64);
    inst.c2 = 1 - inst.lambda;
    inst.C3 = rational(std::exp(1.0));

    auto draw = [&](std::map<long, rational>& s) {
      std::vector<double> raw(K);
      double acc = 0.0;
      for (auto& r : raw) {
        r = 0.05 + detail::unit_double(rng);
        acc += std::pow(r, qp);
      }
      double scale = std::pow(acc, -1.0 / qp);
      for (long i = 0; i < K; ++i) s[offset + i] = rational(raw[i] * scale);
    };
    draw(inst.x);
    draw(inst.y);

    std::map<std::pair<long, long>, rational> shape, weight;
    std::vector<rational> ws;
    inst.c1 = 1;
    for (long i = offset; i < offset + K; ++i) {
      for (long j = offset; j < offset + K; ++j) {
        if (rng() % 4 == 0 && !(i == j)) continue;  // sparse off-diagonal support
        rational cap = concentration_cap(inst, i, j);  // with c1 = 1
        rational u = make_rational(static_cast<long long>(1 + rng() % 1000), 1000);
        shape[{i, j}] = cap;
        weight[{i, j}] = cap * u;
        ws.push_back(weight[{i, j}]);
      }
    }
    rational total = sum(ws);
    rational c1 = 0;
    for (auto& [ij, w] : weight) {
      rational m = w / total;
      inst.m[ij] = m;
      rational r = m / shape[ij];
      if (r > c1) c1 = r;
    }
    if (c1 > 1) continue;
    inst.c1 = c1;
    return inst;
  }
}

// ---------------------------------------------------------------------------
// Proposition 2.1, properties (2) and (3)

struct regularity_witness {
  bool left = true;  // true: v in V', false: w in W'
  std::uint64_t vertex = 0;
  rational neighborhood_mass;
  rational required;
};

struct regularity_result {
  bool holds = true;
  std::vector<regularity_witness> witnesses;
};

inline regularity_result regularity_check(const pair_set& E, const multiplicative_weight& f,
                                          const multiplicative_weight& g, const epsilon_params& eps) {
  if (E.empty()) throw precondition_error("regularity_check: empty edge set");
  auto V = E.left();
  auto W = E.right();
  rational muV = mu_set(E.psi(), f, V);
  rational muW = mu_set(E.theta(), g, W);
  if (muV <= 0 || muW <= 0) throw precondition_error("regularity_check: zero vertex measure");
  rational muE = mu_pairs(E, f, g);
  rational inv_qp = 1 / eps.q_prime;
  regularity_result out;

  rational need_v = inv_qp * muE / muV;
  for (auto v : V) {
    auto nb = neighborhood(E, v);
    rational mass = mu_set(E.theta(), g, nb);
    if (mass < need_v) out.witnesses.push_back({true, v, mass, need_v});
  }
  rational need_w = inv_qp * muE / muW;
  std::map<std::uint64_t, std::vector<std::uint64_t>> by_w;
  for (const auto& e : E.edges()) by_w[e.w].push_back(e.v);
  for (auto& [w, vs] : by_w) {
    rational mass = mu_set(E.psi(), f, vs);
    if (mass < need_w) out.witnesses.push_back({false, w, mass, need_w});
  }
  out.holds = out.witnesses.empty();
  return out;
}

struct gcd_witness {
  edge pair;
  std::uint64_t prime = 0;  // set for valuation failures
  std::string reason;
};

struct gcd_consequence_result {
  bool holds = true;
  std::vector<gcd_witness> witnesses;
};

/// Valuation structure |nu_p(v/N)| + |nu_p(w/N)| <= 1 on every edge, then
/// psi(v) <= 1/(v- w+) and theta(w) <= 1/(v+ w-).
inline gcd_consequence_result gcd_consequence_check(const pair_set& E, std::uint64_t N) {
  if (N == 0) throw precondition_error("gcd_consequence_check: N must be positive");
  gcd_consequence_result out;
  for (const auto& e : E.edges()) {
    if (big_D(e.v, e.w, E.psi()(e.v), E.theta()(e.w)) > 1) {
      throw containment_error(e.v, e.w, "has D > 1");
    }
  }
  for (const auto& e : E.edges()) {
    auto rv = relative_valuations(e.v, N);
    auto rw = relative_valuations(e.w, N);
    std::map<std::uint64_t, int> total;
    for (auto [p, val] : rv) total[p] += std::abs(val);
    for (auto [p, val] : rw) total[p] += std::abs(val);
    bool structured = true;
    for (auto [p, s] : total) {
      if (s > 1) {
        out.witnesses.push_back({e, p, "valuation sum " + std::to_string(s)});
        structured = false;
        break;
      }
    }
    if (!structured) continue;
    auto dv = pm_decompose(e.v, N);
    auto dw = pm_decompose(e.w, N);
    rational bound_v = make_rational(1, 1) / (to_rational(dv.v_minus) * to_rational(dw.v_plus));
    rational bound_w = make_rational(1, 1) / (to_rational(dv.v_plus) * to_rational(dw.v_minus));
    if (E.psi()(e.v) > bound_v) out.witnesses.push_back({e, 0, "psi(v) > 1/(v- w+)"});
    if (E.theta()(e.w) > bound_w) out.witnesses.push_back({e, 0, "theta(w) > 1/(v+ w-)"});
  }
  out.holds = out.witnesses.empty();
  return out;
}

}  // namespace dslab
