#pragma once

// Slow, obvious reimplementations used as ground truth. Nothing here calls
// into dslab except for the rational type.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace oracle {

using q = mpq_class;
using u64 = std::uint64_t;

inline q frac(long long a, long long b) {
  q r(static_cast<long>(a), static_cast<long>(b));
  r.canonicalize();
  return r;
}

inline std::map<u64, unsigned> factor(u64 n) {
  std::map<u64, unsigned> out;
  for (u64 d = 2; d * d <= n; ++d) {
    while (n % d == 0) {
      ++out[d];
      n /= d;
    }
  }
  if (n > 1) ++out[n];
  return out;
}

inline bool prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline u64 phi(u64 n) {
  u64 c = 0;
  for (u64 a = 1; a <= n; ++a) c += std::gcd(a, n) == 1;
  return c;
}

inline std::vector<u64> divisors(u64 n) {
  std::vector<u64> out;
  for (u64 d = 1; d <= n; ++d) {
    if (n % d == 0) out.push_back(d);
  }
  return out;
}

inline q recip_primes(const std::vector<u64>& ps) {
  q s = 0;
  for (auto p : ps) s += q(1, p);
  return s;
}

/// Primes p >= t dividing n m / gcd(n,m)^2.
inline std::vector<u64> separating(u64 n, u64 m, const q& t) {
  u64 g = std::gcd(n, m);
  u64 a = n / g, b = m / g;
  std::vector<u64> out;
  for (u64 p = 2; p <= std::max(a, b); ++p) {
    if (prime(p) && (a % p == 0 || b % p == 0) && q(p) >= t) out.push_back(p);
  }
  return out;
}

inline q D(u64 v, u64 w, const q& pv, const q& tw) {
  q a = q(w) * pv, b = q(v) * tw;
  return (a > b ? a : b) / q(std::gcd(v, w));
}

/// Measure of a union of closed intervals by a depth-counting sweep.
inline q union_length(std::vector<std::pair<q, q>> iv) {
  std::vector<std::pair<q, int>> events;
  for (auto& [a, b] : iv) {
    if (b < a) continue;
    events.push_back({a, +1});
    events.push_back({b, -1});
  }
  std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second > y.second;  // opens before closes at a shared point
  });
  q total = 0, start = 0;
  int depth = 0;
  for (auto& [x, d] : events) {
    if (depth == 0 && d > 0) start = x;
    depth += d;
    if (depth == 0) total += x - start;
  }
  return total;
}

/// Intervals of A_n (coprime) or E_n (all), clipped to [0,1].
inline std::vector<std::pair<q, q>> set_intervals(u64 n, const q& psi, bool coprime) {
  std::vector<std::pair<q, q>> out;
  if (psi == 0) return out;
  for (u64 a = 0; a <= n; ++a) {
    if (coprime && std::gcd(a, n) != 1) continue;
    q c(a, n);
    c.canonicalize();
    q r = psi / q(n);
    q lo = c - r, hi = c + r;
    if (lo < 0) lo = 0;
    if (hi > 1) hi = 1;
    if (lo <= hi) out.push_back({lo, hi});
  }
  return out;
}

inline q set_measure(u64 n, const q& psi, bool coprime) { return union_length(set_intervals(n, psi, coprime)); }

inline q intersection(u64 n, const q& pn, u64 m, const q& pm) {
  auto a = set_intervals(n, pn, true);
  auto b = set_intervals(m, pm, true);
  q la = union_length(a), lb = union_length(b);
  a.insert(a.end(), b.begin(), b.end());
  return la + lb - union_length(a);
}

inline u64 count_solutions(const q& alpha, u64 N, const std::map<u64, q>& psi) {
  u64 c = 0;
  for (u64 n = 1; n <= N; ++n) {
    auto it = psi.find(n);
    if (it == psi.end() || it->second == 0) continue;
    for (u64 a = 0; a <= n; ++a) {
      if (std::gcd(a, n) != 1) continue;
      q d = q(n) * alpha - q(a);
      if (abs(d) <= it->second) ++c;
    }
  }
  return c;
}

inline q psi_mass(u64 N, const std::map<u64, q>& psi) {
  q s = 0;
  for (auto& [n, v] : psi) {
    if (n <= N) s += 2 * q(phi(n)) * v / q(n);
  }
  return s;
}

/// sum_{n,m <= N} lambda(A_n ∩ A_m), every ordered pair.
inline q second_moment(u64 N, const std::map<u64, q>& psi) {
  q s = 0;
  for (auto& [n, pn] : psi) {
    for (auto& [m, pm] : psi) {
      if (n <= N && m <= N) s += intersection(n, pn, m, pm);
    }
  }
  return s;
}

inline q mu(u64 v, const q& psi_v) { return q(phi(v)) * psi_v / q(v); }

/// E^{t,C} by direct test of every pair.
inline std::set<std::pair<u64, u64>> edge_set(const std::map<u64, q>& psi, const std::map<u64, q>& theta, const q& t,
                                              const q& C) {
  std::set<std::pair<u64, u64>> out;
  for (auto& [v, pv] : psi) {
    if (pv == 0) continue;
    for (auto& [w, tw] : theta) {
      if (tw == 0) continue;
      if (D(v, w, pv, tw) > 1) continue;
      if (recip_primes(separating(v, w, t)) < C) continue;
      out.insert({v, w});
    }
  }
  return out;
}

inline q mu_pairs(const std::set<std::pair<u64, u64>>& E, const std::map<u64, q>& psi, const std::map<u64, q>& theta) {
  q s = 0;
  for (auto& [v, w] : E) s += mu(v, psi.at(v)) * mu(w, theta.at(w));
  return s;
}

/// sum over primes p >= t dividing n of 1/p, against c.
inline bool heavy(u64 n, const q& t, const q& c) {
  q s = 0;
  for (auto& [p, e] : factor(n)) {
    if (q(p) >= t) s += q(1, p);
  }
  return s >= c;
}

inline u64 anatomy_count(u64 x, const q& t, const q& c) {
  u64 k = 0;
  for (u64 n = 1; n <= x; ++n) k += heavy(n, t, c);
  return k;
}

inline q anatomy_divisor_sum_phi(u64 M, const q& t, const q& c) {
  q s = 0;
  for (auto m : divisors(M)) {
    if (heavy(m, t, c)) s += q(phi(M / m));
  }
  return s;
}

/// nu_p(v/N) for every prime dividing v or N.
inline std::map<u64, int> rel_val(u64 v, u64 N) {
  std::map<u64, int> out;
  for (auto& [p, e] : factor(v)) out[p] += static_cast<int>(e);
  for (auto& [p, e] : factor(N)) out[p] -= static_cast<int>(e);
  return out;
}

}  // namespace oracle
