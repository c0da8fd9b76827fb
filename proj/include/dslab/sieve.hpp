#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dslab/rational.hpp"

namespace dslab {

/// Prime factorization of a positive integer; the empty map is 1.
class factorization {
 public:
  factorization() = default;
  explicit factorization(std::map<std::uint64_t, unsigned> entries) : entries_(std::move(entries)) {}

  const std::map<std::uint64_t, unsigned>& entries() const& { return entries_; }
  std::map<std::uint64_t, unsigned> entries() && { return std::move(entries_); }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  unsigned exponent(std::uint64_t p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? 0u : it->second;
  }

  integer value() const {
    integer out = 1;
    for (auto [p, e] : entries_) {
      integer pe;
      mpz_pow_ui(pe.get_mpz_t(), to_integer(p).get_mpz_t(), e);
      out *= pe;
    }
    return out;
  }

  std::vector<std::uint64_t> primes() const {
    std::vector<std::uint64_t> out;
    out.reserve(entries_.size());
    for (auto& kv : entries_) out.push_back(kv.first);
    return out;
  }

  void add(std::uint64_t p, unsigned e = 1) {
    if (e) entries_[p] += e;
  }

  bool operator==(const factorization&) const = default;

 private:
  std::map<std::uint64_t, unsigned> entries_;
};

/// Smallest-prime-factor table up to a fixed limit. Immutable after
/// construction; concurrent reads are safe.
class prime_sieve {
 public:
  explicit prime_sieve(std::uint32_t limit) : limit_(limit < 2 ? 2 : limit), spf_(limit_ + 1, 0) {
    for (std::uint32_t i = 2; i <= limit_; ++i) {
      if (spf_[i] == 0) {
        spf_[i] = i;
        primes_.push_back(i);
      }
      for (std::uint32_t p : primes_) {
        std::uint64_t m = static_cast<std::uint64_t>(p) * i;
        if (p > spf_[i] || m > limit_) break;
        spf_[m] = p;
      }
    }
  }

  std::uint32_t limit() const { return limit_; }
  std::span<const std::uint32_t> primes() const { return primes_; }

  std::uint32_t smallest_factor(std::uint32_t n) const { return spf_[n]; }

  bool is_prime(std::uint64_t n) const {
    if (n < 2) return false;
    if (n <= limit_) return spf_[n] == n;
    for (std::uint32_t p : primes_) {
      std::uint64_t pp = static_cast<std::uint64_t>(p) * p;
      if (pp > n) return true;
      if (n % p == 0) return false;
    }
    for (std::uint64_t d = static_cast<std::uint64_t>(limit_) + 1; d <= n / d; ++d) {
      if (n % d == 0) return false;
    }
    return true;
  }

  /// Sieve lookup below the limit, trial division above it.
  factorization factorize(std::uint64_t n) const {
    if (n == 0) throw precondition_error("factorize: n must be positive");
    std::map<std::uint64_t, unsigned> out;
    while (n > limit_) {
      std::uint64_t d = trial_factor(n);
      if (d == n) {
        out[n] += 1;
        return factorization(std::move(out));
      }
      while (n % d == 0) {
        n /= d;
        out[d] += 1;
      }
    }
    while (n > 1) {
      std::uint32_t p = spf_[n];
      out[p] += 1;
      n /= p;
    }
    return factorization(std::move(out));
  }

  /// Primes in [lo, hi]; extends past the table with trial division.
  std::vector<std::uint64_t> primes_between(std::uint64_t lo, std::uint64_t hi) const {
    std::vector<std::uint64_t> out;
    if (hi < lo || hi < 2) return out;
    for (std::uint32_t p : primes_) {
      if (p > hi) return out;
      if (p >= lo) out.push_back(p);
    }
    for (std::uint64_t n = std::max<std::uint64_t>(lo, std::uint64_t{limit_} + 1); n <= hi; ++n) {
      if (is_prime(n)) out.push_back(n);
      if (n == UINT64_MAX) break;
    }
    return out;
  }

 private:
  std::uint64_t trial_factor(std::uint64_t n) const {
    for (std::uint32_t p : primes_) {
      if (static_cast<std::uint64_t>(p) * p > n) return n;
      if (n % p == 0) return p;
    }
    for (std::uint64_t d = std::uint64_t{limit_} + 1; d <= n / d; ++d) {
      if (n % d == 0) return d;
    }
    return n;
  }

  std::uint32_t limit_;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> primes_;
};

inline constexpr std::uint32_t default_sieve_limit = 10'000'000;

/// Process-wide sieve, built on first use.
inline const prime_sieve& default_sieve() {
  static const prime_sieve sieve(default_sieve_limit);
  return sieve;
}

inline factorization factorize(std::uint64_t n) { return default_sieve().factorize(n); }
inline bool is_prime(std::uint64_t n) { return default_sieve().is_prime(n); }

inline unsigned valuation(std::uint64_t n, std::uint64_t p) {
  unsigned e = 0;
  while (n != 0 && n % p == 0) {
    n /= p;
    ++e;
  }
  return e;
}

inline std::vector<std::uint64_t> divisors(const factorization& f) {
  std::vector<std::uint64_t> out{1};
  for (auto [p, e] : f.entries()) {
    std::size_t base = out.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t n) { return divisors(factorize(n)); }

/// Exact sum of 1/p over distinct primes, by binary splitting (no gcds).
inline rational reciprocal_sum(std::span<const std::uint64_t> primes) {
  if (primes.empty()) return 0;
  struct part {
    integer num, den;
  };
  auto split = [](auto&& self, std::span<const std::uint64_t> ps) -> part {
    if (ps.size() == 1) return {1, to_integer(ps[0])};
    auto mid = ps.size() / 2;
    part l = self(self, ps.first(mid));
    part r = self(self, ps.subspan(mid));
    return {l.num * r.den + r.num * l.den, l.den * r.den};
  };
  part p = split(split, primes);
  return make_rational(p.num, p.den);
}

}  // namespace dslab
