#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dslab/bracket.hpp"
#include "dslab/rational.hpp"
#include "dslab/sieve.hpp"

namespace dslab {

inline std::uint64_t euler_phi(const factorization& f) {
  std::uint64_t out = 1;
  for (auto [p, e] : f.entries()) {
    out *= p - 1;
    for (unsigned k = 1; k < e; ++k) out *= p;
  }
  return out;
}

inline std::uint64_t euler_phi(std::uint64_t n) { return euler_phi(factorize(n)); }

/// phi(0..n) by sieve; entry 0 is unused.
inline std::vector<std::uint64_t> phi_table(std::uint64_t n) {
  std::vector<std::uint64_t> phi(n + 1);
  std::iota(phi.begin(), phi.end(), std::uint64_t{0});
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (phi[p] != p) continue;
    for (std::uint64_t m = p; m <= n; m += p) phi[m] -= phi[m] / p;
  }
  return phi;
}

/// A non-negative multiplicative function, specified on prime powers.
/// Prime-power values are memoized in a cache shared between copies.
class multiplicative_weight {
 public:
  using rule = std::function<rational(std::uint64_t p, unsigned k)>;

  multiplicative_weight(std::string name, rule r)
      : name_(std::move(name)), rule_(std::move(r)), cache_(std::make_shared<cache>()) {}

  static multiplicative_weight totient() {
    return {"phi", [](std::uint64_t p, unsigned k) {
              rational v = to_rational(p - 1);
              for (unsigned i = 1; i < k; ++i) v *= to_rational(p);
              return v;
            }};
  }
  static multiplicative_weight identity() {
    return {"id", [](std::uint64_t p, unsigned k) { return pow(to_rational(p), k); }};
  }
  /// The constant function 1.
  static multiplicative_weight one() {
    return {"one", [](std::uint64_t, unsigned) { return rational(1); }};
  }
  /// f(1) = 1 and f(n) = 0 for n > 1.
  static multiplicative_weight unit() {
    return {"unit", [](std::uint64_t, unsigned) { return rational(0); }};
  }

  const std::string& name() const { return name_; }

  rational at_prime_power(std::uint64_t p, unsigned k) const {
    if (k == 0) return 1;
    std::lock_guard lock(cache_->mutex);
    auto key = std::make_pair(p, k);
    auto it = cache_->values.find(key);
    if (it != cache_->values.end()) return it->second;
    rational v = rule_(p, k);
    if (v < 0) throw precondition_error(name_ + ": negative value at a prime power");
    cache_->values.emplace(key, v);
    return v;
  }

  rational operator()(const factorization& f) const {
    rational out = 1;
    for (auto [p, e] : f.entries()) out *= at_prime_power(p, e);
    return out;
  }

  rational operator()(std::uint64_t n) const {
    if (n == 0) throw precondition_error("multiplicative weight evaluated at 0");
    return (*this)(factorize(n));
  }

  /// Largest n for which (1 * f)(m) <= m has been certified for all m <= n.
  std::uint64_t admissible_up_to() const { return admissible_up_to_; }
  void mark_admissible_up_to(std::uint64_t n) { admissible_up_to_ = std::max(admissible_up_to_, n); }

 private:
  struct cache {
    std::mutex mutex;
    std::map<std::pair<std::uint64_t, unsigned>, rational> values;
  };

  std::string name_;
  rule rule_;
  std::shared_ptr<cache> cache_;
  std::uint64_t admissible_up_to_ = 0;
};

inline rational dirichlet_convolve(const multiplicative_weight& f, const multiplicative_weight& g, std::uint64_t n) {
  rational out = 0;
  for (std::uint64_t d : divisors(n)) out += f(d) * g(n / d);
  return out;
}

struct admissibility {
  bool admissible = true;
  std::optional<std::uint64_t> witness;
  rational value_at_witness;  // (1 * f)(witness)
};

/// Checks (1 * f)(n) <= n for all n <= limit using the Euler product of 1 * f.
/// Marks f on success.
inline admissibility certify_admissible(multiplicative_weight& f, std::uint64_t limit) {
  if (limit == 0) throw precondition_error("certify_admissible: limit must be >= 1");
  for (std::uint64_t n = 1; n <= limit; ++n) {
    rational conv = 1;
    for (auto [p, e] : factorize(n).entries()) {
      rational local = 1;
      for (unsigned k = 1; k <= e; ++k) local += f.at_prime_power(p, k);
      conv *= local;
    }
    if (conv > to_rational(n)) return {false, n, conv};
  }
  f.mark_admissible_up_to(limit);
  return {};
}

/// max(w psi(v), v theta(w)) / gcd(v, w).
inline rational big_D(std::uint64_t v, std::uint64_t w, const rational& psi_v, const rational& theta_w) {
  if (v == 0 || w == 0) throw precondition_error("big_D: v and w must be positive");
  rational a = to_rational(w) * psi_v;
  rational b = to_rational(v) * theta_w;
  rational m = a > b ? a : b;
  return m / to_rational(std::gcd(v, w));
}

class indeterminate_error : public error {
 public:
  using error::error;
};

/// The set of primes p >= `from`. Real thresholds are resolved to the
/// smallest admissible integer exactly (or rigorously, via brackets).
struct prime_threshold {
  std::uint64_t from = 0;

  bool admits(std::uint64_t p) const { return p >= from; }

  static prime_threshold at_least(const rational& x) {
    if (x <= 0) return {0};
    integer c = ceil(x);
    if (mpz_sizeinbase(c.get_mpz_t(), 2) > 63) return {std::numeric_limits<std::uint64_t>::max()};
    return {to_u64(c)};
  }
  /// Primes p > x.
  static prime_threshold above(const rational& x) {
    if (x < 0) return {0};
    integer c = floor(x) + 1;
    if (mpz_sizeinbase(c.get_mpz_t(), 2) > 63) return {std::numeric_limits<std::uint64_t>::max()};
    return {to_u64(c)};
  }
  /// Primes p >= sqrt(r).
  static prime_threshold at_least_sqrt(const rational& r) {
    integer c = ceil_sqrt(r);
    if (mpz_sizeinbase(c.get_mpz_t(), 2) > 63) return {std::numeric_limits<std::uint64_t>::max()};
    return {to_u64(c)};
  }
  /// Primes p >= x for an enclosed real x; throws when an integer sits inside the bracket.
  static prime_threshold at_least(bracket x) {
    if (x.hi <= 0) return {0};
    if (x.lo >= 9.0e18) return {std::numeric_limits<std::uint64_t>::max()};
    double lo = std::ceil(std::max(x.lo, 0.0));
    double hi = std::ceil(x.hi);
    if (lo != hi) throw indeterminate_error("prime threshold straddles an integer");
    return {static_cast<std::uint64_t>(lo)};
  }
  /// Primes p > x for an enclosed real x.
  static prime_threshold above(bracket x) {
    if (x.hi < 0) return {0};
    if (x.lo >= 9.0e18) return {std::numeric_limits<std::uint64_t>::max()};
    double lo = std::floor(std::max(x.lo, 0.0));
    double hi = std::floor(x.hi);
    if (lo != hi) throw indeterminate_error("prime threshold straddles an integer");
    return {static_cast<std::uint64_t>(lo) + 1};
  }
};

/// Sorted primes dividing n*m/gcd(n,m)^2.
inline std::vector<std::uint64_t> separating_primes(std::uint64_t n, std::uint64_t m) {
  std::uint64_t g = std::gcd(n, m);
  auto a = factorize(n / g).primes();
  auto b = factorize(m / g).primes();
  std::vector<std::uint64_t> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Sum of 1/p over primes p in `primes` admitted by the threshold.
inline rational reciprocal_sum_from(std::span<const std::uint64_t> primes, prime_threshold x) {
  std::vector<std::uint64_t> kept;
  for (auto p : primes) {
    if (x.admits(p)) kept.push_back(p);
  }
  return reciprocal_sum(kept);
}

/// L_x(n, m): sum of 1/p over primes p >= x dividing n*m/gcd(n,m)^2.
inline rational l_sum(std::uint64_t n, std::uint64_t m, prime_threshold x) {
  if (n == 0 || m == 0) throw precondition_error("l_sum: n and m must be positive");
  auto ps = separating_primes(n, m);
  return reciprocal_sum_from(ps, x);
}

inline rational l_sum(std::uint64_t n, std::uint64_t m, const rational& x) {
  return l_sum(n, m, prime_threshold::at_least(x));
}

/// Sum of 1/p over primes p <= x.
inline rational mertens_sum(const rational& x) {
  if (x < 0) throw precondition_error("mertens_sum: x must be >= 0");
  integer fx = floor(x);
  if (fx < 2) return 0;
  auto ps = default_sieve().primes_between(2, to_u64(fx));
  return reciprocal_sum(ps);
}

/// exp((log x)^(1/2 - rho)); reporting-grade float.
inline double f_rho(double x, double rho) {
  if (!(x > 1.0)) throw precondition_error("f_rho: x must exceed 1");
  if (!(rho > 0.0 && rho < 0.5)) throw precondition_error("f_rho: rho must lie in (0, 1/2)");
  return std::exp(std::pow(std::log(x), 0.5 - rho));
}

/// Enclosure of exp((log x)^(1/2 - rho)) for exact x > 1 and rho in (0, 1/2).
inline bracket f_rho_bracket(const rational& x, const rational& rho) {
  if (x <= 1) throw precondition_error("f_rho: x must exceed 1");
  if (rho <= 0 || rho * 2 >= 1) throw precondition_error("f_rho: rho must lie in (0, 1/2)");
  bracket lx = log(x);
  lx.lo = std::max(lx.lo, std::numeric_limits<double>::min());
  return exp(pow(lx, to_bracket(rational(1, 2) - rho)));
}

/// v = N * v_plus / v_minus with v_minus, v_plus squarefree and coprime.
struct plus_minus {
  std::uint64_t v_minus = 1;
  std::uint64_t v_plus = 1;
};

class valuation_error : public precondition_error {
 public:
  valuation_error(std::uint64_t prime, int val)
      : precondition_error("valuation of v/N at p=" + std::to_string(prime) + " is " + std::to_string(val)),
        prime_(prime),
        valuation_(val) {}
  std::uint64_t prime() const { return prime_; }
  int valuation() const { return valuation_; }

 private:
  std::uint64_t prime_;
  int valuation_;
};

/// nu_p(v / N) for every prime dividing v or N (zeros omitted).
inline std::map<std::uint64_t, int> relative_valuations(std::uint64_t v, std::uint64_t N) {
  std::map<std::uint64_t, int> out;
  for (auto [p, e] : factorize(v).entries()) out[p] += static_cast<int>(e);
  for (auto [p, e] : factorize(N).entries()) out[p] -= static_cast<int>(e);
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

inline plus_minus pm_decompose(std::uint64_t v, std::uint64_t N) {
  if (v == 0 || N == 0) throw precondition_error("pm_decompose: v and N must be positive");
  plus_minus out;
  for (auto [p, val] : relative_valuations(v, N)) {
    if (val == 1) {
      out.v_plus *= p;
    } else if (val == -1) {
      out.v_minus *= p;
    } else {
      throw valuation_error(p, val);
    }
  }
  return out;
}

/// epsilon with its conjugate exponents q = 2/(1-2eps), q' = 2/(1+2eps).
struct epsilon_params {
  rational epsilon;
  rational q;
  rational q_prime;
  std::uint64_t p0 = 0;

  static epsilon_params make(const rational& eps, std::uint64_t p0 = 0) {
    if (eps <= 0 || eps * 2 >= 1) throw precondition_error("epsilon must lie in (0, 1/2)");
    epsilon_params out;
    out.epsilon = eps;
    out.q = rational(2) / (1 - 2 * eps);
    out.q_prime = rational(2) / (1 + 2 * eps);
    out.q.canonicalize();
    out.q_prime.canonicalize();
    out.p0 = p0;
    return out;
  }

  /// 1/2 + eps, the exponent 1/q'.
  rational half_plus() const { return rational(1, 2) + epsilon; }
};

}  // namespace dslab
