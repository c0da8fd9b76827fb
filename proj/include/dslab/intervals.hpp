#pragma once

// Exact interval unions in [0,1] for the approximation sets
//   A_n = U_{0<=a<=n, gcd(a,n)=1} [a/n - psi(n)/n, a/n + psi(n)/n] ∩ [0,1]
//   E_n = same union over all 0<=a<=n,
// plus measures, pairwise intersections, finite unions and the solution count S(N, alpha).
//
// Intervals are closed. Unions are kept canonical: sorted, with overlapping or
// touching intervals merged. When every endpoint denominator divides a common
// denominator below 2^62, the union also carries its endpoints as integers over
// that denominator, and measures are computed with integer arithmetic (still exact).

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "dslab/arith.hpp"
#include "dslab/rational.hpp"

namespace dslab {

enum class value_range { at_most_half, nonnegative };

/// Finitely supported psi: N -> Q_{>=0}. Zero values are not stored, so
/// the stored keys are exactly the support.
class support_function {
 public:
  explicit support_function(value_range range = value_range::at_most_half) : range_(range) {}

  static support_function constant(std::uint64_t from, std::uint64_t to, const rational& value,
                                   value_range range = value_range::at_most_half) {
    support_function out(range);
    for (std::uint64_t n = std::max<std::uint64_t>(from, 1); n <= to; ++n) out.set(n, value);
    return out;
  }

  static support_function from_map(const std::map<std::uint64_t, rational>& values,
                                   value_range range = value_range::at_most_half) {
    support_function out(range);
    for (auto& [n, v] : values) out.set(n, v);
    return out;
  }

  void set(std::uint64_t n, const rational& v) {
    if (n == 0) throw precondition_error("support_function: arguments are positive integers");
    if (v < 0) throw precondition_error("support_function: negative value at n=" + std::to_string(n));
    if (range_ == value_range::at_most_half && v * 2 > 1) {
      throw precondition_error("support_function: value " + to_string(v) + " at n=" + std::to_string(n) +
                               " exceeds 1/2");
    }
    if (v == 0) {
      values_.erase(n);
    } else {
      values_[n] = v;
    }
  }

  rational operator()(std::uint64_t n) const {
    auto it = values_.find(n);
    return it == values_.end() ? rational(0) : it->second;
  }

  bool in_support(std::uint64_t n) const { return values_.count(n) != 0; }
  const std::map<std::uint64_t, rational>& values() const& { return values_; }
  std::map<std::uint64_t, rational> values() && { return std::move(values_); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  value_range range() const { return range_; }
  std::uint64_t max_support() const { return values_.empty() ? 0 : values_.rbegin()->first; }

  std::vector<std::uint64_t> support() const {
    std::vector<std::uint64_t> out;
    out.reserve(values_.size());
    for (auto& kv : values_) out.push_back(kv.first);
    return out;
  }

  /// factor * psi restricted to [from, to].
  support_function rescaled(const rational& factor, std::uint64_t from = 1,
                            std::uint64_t to = std::numeric_limits<std::uint64_t>::max(),
                            value_range range = value_range::nonnegative) const {
    support_function out(range);
    for (auto& [n, v] : values_) {
      if (n >= from && n <= to) out.set(n, v * factor);
    }
    return out;
  }

  bool operator==(const support_function& o) const { return values_ == o.values_; }

 private:
  value_range range_;
  std::map<std::uint64_t, rational> values_;
};

struct interval {
  rational lo;
  rational hi;
};

class interval_union {
 public:
  interval_union() = default;

  /// Canonicalizes: sorts, merges overlapping/touching intervals. Endpoints must lie in [0,1].
  static interval_union from_intervals(std::vector<interval> in) {
    for (auto& iv : in) {
      if (iv.lo < 0 || iv.hi > 1 || iv.lo > iv.hi) {
        throw precondition_error("interval [" + to_string(iv.lo) + ", " + to_string(iv.hi) + "] outside [0,1]");
      }
    }
    std::sort(in.begin(), in.end(), [](const interval& a, const interval& b) { return a.lo < b.lo; });
    return from_sorted(std::move(in));
  }

  const std::vector<interval>& intervals() const& { return intervals_; }
  std::vector<interval> intervals() && { return std::move(intervals_); }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }

  /// Common denominator of the integer form, or 0 when not available.
  std::uint64_t scale() const { return scale_; }
  std::span<const std::int64_t> scaled_endpoints() const { return scaled_; }

  /// Closed-set containment: every interval of `inner` lies inside one interval of this union.
  bool contains(const interval_union& inner) const {
    std::size_t j = 0;
    for (const auto& iv : inner.intervals_) {
      while (j < intervals_.size() && intervals_[j].hi < iv.lo) ++j;
      if (j == intervals_.size()) return false;
      if (intervals_[j].lo > iv.lo || intervals_[j].hi < iv.hi) return false;
    }
    return true;
  }

  bool operator==(const interval_union& o) const {
    if (intervals_.size() != o.intervals_.size()) return false;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      if (intervals_[i].lo != o.intervals_[i].lo || intervals_[i].hi != o.intervals_[i].hi) return false;
    }
    return true;
  }

  // Input must already be sorted by lo.
  static interval_union from_sorted(std::vector<interval> in) {
    interval_union out;
    for (auto& iv : in) {
      if (!out.intervals_.empty() && iv.lo <= out.intervals_.back().hi) {
        if (iv.hi > out.intervals_.back().hi) out.intervals_.back().hi = iv.hi;
      } else {
        out.intervals_.push_back(std::move(iv));
      }
    }
    out.build_scaled();
    return out;
  }

 private:
  static constexpr unsigned __int128 scale_cap = static_cast<unsigned __int128>(1) << 62;

  void build_scaled() {
    unsigned __int128 l = 1;
    for (const auto& iv : intervals_) {
      for (const rational* e : {&iv.lo, &iv.hi}) {
        if (mpz_sizeinbase(e->get_den_mpz_t(), 2) > 62) return;
        std::uint64_t d = to_u64(e->get_den());
        std::uint64_t g = std::gcd(static_cast<std::uint64_t>(l), d);
        l = l / g * d;
        if (l > scale_cap) return;
      }
    }
    scale_ = static_cast<std::uint64_t>(l);
    scaled_.reserve(intervals_.size() * 2);
    for (const auto& iv : intervals_) {
      for (const rational* e : {&iv.lo, &iv.hi}) {
        std::uint64_t d = to_u64(e->get_den());
        std::uint64_t num = to_u64(e->get_num());
        scaled_.push_back(static_cast<std::int64_t>(num * (scale_ / d)));
      }
    }
  }

  std::vector<interval> intervals_;
  std::uint64_t scale_ = 0;
  std::vector<std::int64_t> scaled_;
};

enum class numerators { coprime, all };

/// A_n (coprime) or E_n (all) for a single n with radius psi_n / n.
inline interval_union build_set(std::uint64_t n, const rational& psi_n, numerators mode) {
  if (n == 0) throw precondition_error("build_set: n must be positive");
  if (psi_n < 0 || psi_n * 2 > 1) throw precondition_error("build_set: psi(n) must lie in [0, 1/2]");
  if (psi_n == 0) return {};
  std::vector<interval> out;
  rational nn = to_rational(n);
  for (std::uint64_t a = 0; a <= n; ++a) {
    if (mode == numerators::coprime && std::gcd(a, n) != 1) continue;
    rational ra = to_rational(a);
    rational lo = (ra - psi_n) / nn;
    rational hi = (ra + psi_n) / nn;
    if (lo < 0) lo = 0;
    if (hi > 1) hi = 1;
    out.push_back({std::move(lo), std::move(hi)});
  }
  return interval_union::from_sorted(std::move(out));
}

inline rational measure(const interval_union& u) {
  if (u.scale() != 0) {
    auto e = u.scaled_endpoints();
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < e.size(); i += 2) sum += e[i + 1] - e[i];
    return make_rational(integer(std::to_string(sum)), to_integer(u.scale()));
  }
  rational sum = 0;
  for (const auto& iv : u.intervals()) sum += iv.hi - iv.lo;
  return sum;
}

namespace detail {

inline std::optional<std::uint64_t> common_scale(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return std::nullopt;
  unsigned __int128 l = static_cast<unsigned __int128>(a / std::gcd(a, b)) * b;
  if (l > (static_cast<unsigned __int128>(1) << 62)) return std::nullopt;
  return static_cast<std::uint64_t>(l);
}

}  // namespace detail

/// Measure of the intersection of two canonical unions by a two-pointer merge.
inline rational intersect_measure(const interval_union& u, const interval_union& v) {
  if (u.empty() || v.empty()) return 0;
  if (auto l = detail::common_scale(u.scale(), v.scale())) {
    std::int64_t fu = static_cast<std::int64_t>(*l / u.scale());
    std::int64_t fv = static_cast<std::int64_t>(*l / v.scale());
    auto a = u.scaled_endpoints();
    auto b = v.scaled_endpoints();
    std::size_t i = 0, j = 0;
    std::int64_t sum = 0;
    while (i < a.size() && j < b.size()) {
      std::int64_t alo = a[i] * fu, ahi = a[i + 1] * fu;
      std::int64_t blo = b[j] * fv, bhi = b[j + 1] * fv;
      std::int64_t lo = std::max(alo, blo), hi = std::min(ahi, bhi);
      if (hi > lo) sum += hi - lo;
      if (ahi < bhi) {
        i += 2;
      } else {
        j += 2;
      }
    }
    return make_rational(integer(std::to_string(sum)), to_integer(*l));
  }
  const auto& a = u.intervals();
  const auto& b = v.intervals();
  std::size_t i = 0, j = 0;
  rational sum = 0;
  while (i < a.size() && j < b.size()) {
    const rational& lo = a[i].lo > b[j].lo ? a[i].lo : b[j].lo;
    const rational& hi = a[i].hi < b[j].hi ? a[i].hi : b[j].hi;
    if (hi > lo) sum += hi - lo;
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

/// Canonical union of finitely many unions.
inline interval_union unite(std::span<const interval_union> us) {
  std::vector<interval> all;
  std::size_t total = 0;
  for (const auto& u : us) total += u.size();
  all.reserve(total);
  for (const auto& u : us) all.insert(all.end(), u.intervals().begin(), u.intervals().end());
  return interval_union::from_intervals(std::move(all));
}

inline rational union_measure(std::span<const interval_union> us) {
  if (us.empty()) return 0;
  // Integer fast path: merge scaled endpoints under one common denominator.
  std::optional<std::uint64_t> l = us.front().scale() ? std::optional<std::uint64_t>(us.front().scale()) : std::nullopt;
  for (std::size_t k = 1; l && k < us.size(); ++k) l = detail::common_scale(*l, us[k].scale());
  if (l) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ivs;
    for (const auto& u : us) {
      std::int64_t f = static_cast<std::int64_t>(*l / u.scale());
      auto e = u.scaled_endpoints();
      for (std::size_t i = 0; i < e.size(); i += 2) ivs.emplace_back(e[i] * f, e[i + 1] * f);
    }
    std::sort(ivs.begin(), ivs.end());
    std::int64_t sum = 0;
    std::int64_t cur_lo = 0, cur_hi = -1;
    bool open = false;
    for (auto [lo, hi] : ivs) {
      if (open && lo <= cur_hi) {
        cur_hi = std::max(cur_hi, hi);
      } else {
        if (open) sum += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
        open = true;
      }
    }
    if (open) sum += cur_hi - cur_lo;
    return make_rational(integer(std::to_string(sum)), to_integer(*l));
  }
  return measure(unite(us));
}

/// S(N, alpha): coprime pairs (a, n), 1 <= n <= N, 0 <= a <= n, |alpha - a/n| <= psi(n)/n.
/// Only n in the support of psi are counted.
inline std::uint64_t count_solutions(const rational& alpha, std::uint64_t N, const support_function& psi) {
  if (alpha < 0 || alpha > 1) throw precondition_error("count_solutions: alpha must lie in [0,1]");
  std::uint64_t count = 0;
  for (const auto& [n, p] : psi.values()) {
    if (n > N) break;
    rational na = alpha * to_rational(n);
    integer lo = ceil(rational(na - p));
    integer hi = floor(rational(na + p));
    if (lo < 0) lo = 0;
    integer nz = to_integer(n);
    if (hi > nz) hi = nz;
    for (integer a = lo; a <= hi; ++a) {
      if (std::gcd(to_u64(a), n) == 1) ++count;
    }
  }
  return count;
}

/// Psi(N) = sum_{n <= N} 2 phi(n) psi(n) / n.
inline rational psi_mass(std::uint64_t N, const support_function& psi) {
  if (N == 0) throw precondition_error("psi_mass: N must be positive");
  std::vector<rational> terms;
  for (const auto& [n, p] : psi.values()) {
    if (n > N) break;
    terms.push_back(2 * to_rational(euler_phi(n)) * p / to_rational(n));
  }
  return sum(terms);
}

}  // namespace dslab
