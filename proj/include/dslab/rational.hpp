#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dslab {

using integer = mpz_class;
using rational = mpq_class;

/// Base for every precondition/contract failure raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class precondition_error : public error {
 public:
  using error::error;
};

inline rational make_rational(long long num, long long den = 1) {
  if (den == 0) throw precondition_error("zero denominator");
  rational r(integer(std::to_string(num)), integer(std::to_string(den)));
  r.canonicalize();
  return r;
}

inline rational make_rational(const integer& num, const integer& den = 1) {
  if (den == 0) throw precondition_error("zero denominator");
  rational r(num, den);
  r.canonicalize();
  return r;
}

inline integer to_integer(std::uint64_t v) {
  integer z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return z;
}

inline rational to_rational(std::uint64_t v) { return rational(to_integer(v)); }

inline std::uint64_t to_u64(const integer& z) {
  if (z < 0 || mpz_sizeinbase(z.get_mpz_t(), 2) > 64) {
    throw precondition_error("integer does not fit in 64 bits: " + z.get_str());
  }
  std::uint64_t v = 0;
  mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, z.get_mpz_t());
  return v;
}

/// Parses "p/q", "p" or "-p/q". Rejects zero denominators and junk.
inline rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw precondition_error("empty rational literal");
  auto slash = s.find('/');
  auto valid_int = [](const std::string& part) {
    if (part.empty()) return false;
    std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i) {
      if (part[i] < '0' || part[i] > '9') return false;
    }
    return true;
  };
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den)) {
    throw precondition_error("malformed rational literal '" + s + "' (expected p/q)");
  }
  if (num[0] == '+') num.erase(0, 1);
  if (den[0] == '+') den.erase(0, 1);
  return make_rational(integer(num), integer(den));
}

/// Canonical "p/q" text; integers keep the "/1" so every exact field has one shape.
inline std::string to_string(const rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline integer floor(const rational& r) {
  integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline integer ceil(const rational& r) {
  integer q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline rational abs(const rational& r) { return r < 0 ? rational(-r) : r; }

/// Smallest integer k >= 0 with k*k >= r (r >= 0).
inline integer ceil_sqrt(const rational& r) {
  if (r <= 0) return 0;
  integer c = ceil(r);
  integer k;
  mpz_sqrt(k.get_mpz_t(), c.get_mpz_t());
  while (rational(k * k) < r) ++k;
  while (k > 0 && rational((k - 1) * (k - 1)) >= r) --k;
  return k;
}

/// Exact sum by pairwise splitting; reduces once at the end.
inline rational sum(std::span<const rational> terms) {
  if (terms.empty()) return 0;
  struct part {
    integer num, den;
  };
  auto split = [](auto&& self, std::span<const rational> ts) -> part {
    if (ts.size() == 1) return {ts[0].get_num(), ts[0].get_den()};
    auto mid = ts.size() / 2;
    part l = self(self, ts.first(mid));
    part r = self(self, ts.subspan(mid));
    if (l.den == r.den) return {l.num + r.num, l.den};
    return {l.num * r.den + r.num * l.den, l.den * r.den};
  };
  part p = split(split, terms);
  return make_rational(p.num, p.den);
}

inline rational pow(const rational& base, unsigned exp) {
  rational out = 1;
  for (unsigned i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace dslab
