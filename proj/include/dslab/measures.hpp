#pragma once

// Weighted measures mu_psi^f, mu_{psi,theta}^{f,g}, the edge sets
// E^{t,C}_{psi,theta}, and the p-adic layer matrix m(i,j).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/intervals.hpp"
#include "dslab/parallel.hpp"
#include "dslab/rational.hpp"

namespace dslab {

struct edge {
  std::uint64_t v = 0;
  std::uint64_t w = 0;
  auto operator<=>(const edge&) const = default;
};

/// A finite set of ordered pairs with the two functions it lives on.
/// Edges are kept sorted and unique; every v lies in supp psi, every w in supp theta.
class pair_set {
 public:
  pair_set() = default;
  pair_set(support_function psi, support_function theta, std::vector<edge> edges)
      : psi_(std::move(psi)), theta_(std::move(theta)), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& e : edges_) {
      if (!psi_.in_support(e.v) || !theta_.in_support(e.w)) {
        throw precondition_error("pair (" + std::to_string(e.v) + ", " + std::to_string(e.w) +
                                 ") lies outside supp psi x supp theta");
      }
    }
  }

  const support_function& psi() const { return psi_; }
  const support_function& theta() const { return theta_; }
  const std::vector<edge>& edges() const& { return edges_; }
  std::vector<edge> edges() && { return std::move(edges_); }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  bool contains(std::uint64_t v, std::uint64_t w) const {
    return std::binary_search(edges_.begin(), edges_.end(), edge{v, w});
  }

  /// E|_V, sorted.
  std::vector<std::uint64_t> left() const {
    std::vector<std::uint64_t> out;
    for (const auto& e : edges_) {
      if (out.empty() || out.back() != e.v) out.push_back(e.v);
    }
    return out;
  }

  /// E|_W, sorted.
  std::vector<std::uint64_t> right() const {
    std::vector<std::uint64_t> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.push_back(e.w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  support_function psi_;
  support_function theta_;
  std::vector<edge> edges_;
};

/// Gamma_E(v) = {w : (v,w) in E}.
inline std::vector<std::uint64_t> neighborhood(const pair_set& E, std::uint64_t v) {
  auto lo = std::lower_bound(E.edges().begin(), E.edges().end(), edge{v, 0});
  std::vector<std::uint64_t> out;
  for (auto it = lo; it != E.edges().end() && it->v == v; ++it) out.push_back(it->w);
  return out;
}

/// Gamma_E(w) = {v : (v,w) in E}.
inline std::vector<std::uint64_t> neighborhood_of_right(const pair_set& E, std::uint64_t w) {
  std::vector<std::uint64_t> out;
  for (const auto& e : E.edges()) {
    if (e.w == w) out.push_back(e.v);
  }
  return out;
}

/// mu_psi^f(v) = f(v) psi(v) / v.
inline rational mu_point(const support_function& psi, const multiplicative_weight& f, std::uint64_t v) {
  rational p = psi(v);
  if (p == 0) return 0;
  return f(v) * p / to_rational(v);
}

inline rational mu_set(const support_function& psi, const multiplicative_weight& f,
                       std::span<const std::uint64_t> V) {
  std::vector<rational> terms;
  terms.reserve(V.size());
  for (auto v : V) terms.push_back(mu_point(psi, f, v));
  return sum(terms);
}

inline rational mu_support(const support_function& psi, const multiplicative_weight& f) {
  auto V = psi.support();
  return mu_set(psi, f, V);
}

/// mu^{f,g}_{psi,theta}(E), grouped by left vertex.
inline rational mu_pairs(const pair_set& E, const multiplicative_weight& f, const multiplicative_weight& g) {
  std::unordered_map<std::uint64_t, rational> right;
  std::vector<rational> terms;
  const auto& es = E.edges();
  for (std::size_t i = 0; i < es.size();) {
    std::uint64_t v = es[i].v;
    std::vector<rational> inner;
    for (; i < es.size() && es[i].v == v; ++i) {
      auto [it, fresh] = right.try_emplace(es[i].w);
      if (fresh) it->second = mu_point(E.theta(), g, es[i].w);
      inner.push_back(it->second);
    }
    terms.push_back(mu_point(E.psi(), f, v) * sum(inner));
  }
  return sum(terms);
}

namespace detail {

// psi(n) as a u64 fraction when both parts fit; den == 0 means "use the rational".
struct small_fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 0;
};

inline small_fraction to_small(const rational& r) {
  if (mpz_sizeinbase(r.get_num_mpz_t(), 2) > 62 || mpz_sizeinbase(r.get_den_mpz_t(), 2) > 62) return {};
  return {to_u64(r.get_num()), to_u64(r.get_den())};
}

// a * value <= g, exactly.
inline bool scaled_at_most(std::uint64_t a, const small_fraction& s, const rational& value, std::uint64_t g) {
  if (s.den != 0) {
    return static_cast<unsigned __int128>(a) * s.num <= static_cast<unsigned __int128>(g) * s.den;
  }
  return to_rational(a) * value <= to_rational(g);
}

}  // namespace detail

/// L_t(v, w) >= C, deciding exactly and using a float estimate only to skip work.
inline bool anatomy_at_least(std::uint64_t v, std::uint64_t w, prime_threshold t, const rational& C) {
  if (C <= 0) return true;
  auto ps = separating_primes(v, w);
  std::vector<std::uint64_t> kept;
  double approx = 0.0;
  for (auto p : ps) {
    if (t.admits(p)) {
      kept.push_back(p);
      approx += 1.0 / static_cast<double>(p);
    }
  }
  double c = C.get_d();
  if (approx < c * (1 - 1e-9) - 1e-12) return false;
  if (approx > c * (1 + 1e-9) + 1e-12) return true;
  return reciprocal_sum(kept) >= C;
}

/// Membership test of Definition 1.6 for a single pair.
inline bool in_edge_set(std::uint64_t v, std::uint64_t w, const rational& psi_v, const rational& theta_w,
                        prime_threshold t, const rational& C) {
  if (psi_v <= 0 || theta_w <= 0) return false;
  if (big_D(v, w, psi_v, theta_w) > 1) return false;
  return anatomy_at_least(v, w, t, C);
}

/// E^{t,C}_{psi,theta}. Pairs are enumerated by g = gcd(v,w): D <= 1 forces
/// w <= g / psi(v), which prunes each bucket to a prefix of its sorted W-list.
inline pair_set build_edge_set(const support_function& psi, const support_function& theta, const rational& t,
                               const rational& C, unsigned workers = default_workers()) {
  if (t < 1) throw precondition_error("build_edge_set: t must be >= 1");
  prime_threshold threshold = prime_threshold::at_least(t);

  std::map<std::uint64_t, std::vector<std::uint64_t>> vb, wb;
  for (const auto& kv : psi.values()) {
    for (auto d : divisors(kv.first)) vb[d].push_back(kv.first);
  }
  for (const auto& kv : theta.values()) {
    for (auto d : divisors(kv.first)) wb[d].push_back(kv.first);
  }
  std::vector<std::uint64_t> gs;
  for (const auto& kv : vb) {
    if (wb.count(kv.first)) gs.push_back(kv.first);
  }

  std::unordered_map<std::uint64_t, detail::small_fraction> theta_small;
  for (const auto& [w, val] : theta.values()) theta_small[w] = detail::to_small(val);

  std::vector<std::vector<edge>> found(gs.size());
  parallel_for(gs.size(), workers, [&](std::size_t k) {
    std::uint64_t g = gs[k];
    const auto& Vg = vb.at(g);
    const auto& Wg = wb.at(g);
    for (auto v : Vg) {
      const rational& pv = psi.values().at(v);
      integer cap = floor(rational(to_rational(g) / pv));
      std::uint64_t w_max = mpz_sizeinbase(cap.get_mpz_t(), 2) > 63 ? std::numeric_limits<std::uint64_t>::max()
                                                                      : to_u64(cap);
      for (auto w : Wg) {
        if (w > w_max) break;
        if (std::gcd(v, w) != g) continue;
        if (!detail::scaled_at_most(v, theta_small.at(w), theta.values().at(w), g)) continue;
        if (!anatomy_at_least(v, w, threshold, C)) continue;
        found[k].push_back({v, w});
      }
    }
  });
  std::vector<edge> all;
  for (auto& part : found) all.insert(all.end(), part.begin(), part.end());
  return pair_set(psi, theta, std::move(all));
}

/// psi~ = 1_{[X,Y]} psi / t and the edge set E^{t,C}_{psi~,psi~}.
inline support_function scaled_support(const support_function& psi, const rational& X, const rational& Y,
                                       const rational& t) {
  if (t < 1) throw precondition_error("scaled support: t must be >= 1");
  integer lo = ceil(X);
  integer hi = floor(Y);
  if (lo < 1) lo = 1;
  if (hi < lo) return support_function(value_range::nonnegative);
  return psi.rescaled(1 / t, to_u64(lo), to_u64(hi), value_range::nonnegative);
}

inline pair_set build_scaled_edge_set(const support_function& psi, const rational& X, const rational& Y,
                                      const rational& t, const rational& C, unsigned workers = default_workers()) {
  auto scaled = scaled_support(psi, X, Y, t);
  return build_edge_set(scaled, scaled, t, C, workers);
}

/// m(i,j) = mu(E ∩ (V_i x W_j)) / mu(E) with marginals alpha_i, beta_j, where
/// V_i = {v in supp psi : p^i || v} and W_j likewise. Zero cells are not stored.
struct measure_matrix {
  std::uint64_t prime = 0;
  rational total;  // mu(E)
  std::map<std::pair<unsigned, unsigned>, rational> entries;
  std::map<unsigned, rational> alpha;
  std::map<unsigned, rational> beta;

  rational at(unsigned i, unsigned j) const {
    auto it = entries.find({i, j});
    return it == entries.end() ? rational(0) : it->second;
  }
  rational alpha_at(unsigned i) const {
    auto it = alpha.find(i);
    return it == alpha.end() ? rational(0) : it->second;
  }
  rational beta_at(unsigned j) const {
    auto it = beta.find(j);
    return it == beta.end() ? rational(0) : it->second;
  }
};

inline measure_matrix layer_matrix(const pair_set& E, const multiplicative_weight& f, const multiplicative_weight& g,
                                   std::uint64_t p) {
  if (!is_prime(p)) throw precondition_error("layer_matrix: " + std::to_string(p) + " is not prime");
  measure_matrix out;
  out.prime = p;

  std::map<std::pair<unsigned, unsigned>, std::vector<rational>> cells;
  std::unordered_map<std::uint64_t, rational> mw;
  for (const auto& e : E.edges()) {
    auto [it, fresh] = mw.try_emplace(e.w);
    if (fresh) it->second = mu_point(E.theta(), g, e.w);
    cells[{valuation(e.v, p), valuation(e.w, p)}].push_back(mu_point(E.psi(), f, e.v) * it->second);
  }
  std::vector<rational> cell_sums;
  std::map<std::pair<unsigned, unsigned>, rational> raw;
  for (auto& [ij, terms] : cells) {
    raw[ij] = sum(terms);
    cell_sums.push_back(raw[ij]);
  }
  out.total = sum(cell_sums);
  if (out.total <= 0) throw precondition_error("layer_matrix: mu(E) = 0, so m(i,j) is undefined");
  for (auto& [ij, v] : raw) {
    if (v != 0) out.entries[ij] = v / out.total;
  }

  auto marginal = [p](const support_function& fn, const multiplicative_weight& weight) {
    std::map<unsigned, std::vector<rational>> layers;
    std::vector<rational> all;
    for (const auto& kv : fn.values()) {
      rational m = mu_point(fn, weight, kv.first);
      layers[valuation(kv.first, p)].push_back(m);
      all.push_back(m);
    }
    std::map<unsigned, rational> res;
    rational total = sum(all);
    if (total <= 0) throw precondition_error("layer_matrix: marginal measure is zero");
    for (auto& [i, terms] : layers) {
      rational s = sum(terms);
      if (s != 0) res[i] = s / total;
    }
    return res;
  };
  out.alpha = marginal(E.psi(), f);
  out.beta = marginal(E.theta(), g);
  return out;
}

}  // namespace dslab
