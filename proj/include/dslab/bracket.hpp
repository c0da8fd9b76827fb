#pragma once

// Outward-rounded enclosures for the few transcendental quantities the
// checkers need (e^x, log x, rational powers). Every operation computes in
// binary64 and then widens the result by a couple of ulps, which encloses the
// true value as long as libm is within 1 ulp (glibc's exp/log/pow are).

#include <algorithm>
#include <cmath>
#include <limits>

#include "dslab/rational.hpp"

namespace dslab {

enum class verdict { holds, fails, indeterminate };

inline const char* to_string(verdict v) {
  switch (v) {
    case verdict::holds: return "holds";
    case verdict::fails: return "fails";
    default: return "indeterminate";
  }
}

enum class ordering3 { less, greater, overlap };

struct bracket {
  double lo = 0.0;
  double hi = 0.0;

  static bracket point(double v) { return {v, v}; }
  double mid() const { return lo / 2 + hi / 2; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

namespace detail {

inline double down(double v, int ulps = 1) {
  for (int i = 0; i < ulps; ++i) v = std::nextafter(v, -std::numeric_limits<double>::infinity());
  return v;
}

inline double up(double v, int ulps = 1) {
  for (int i = 0; i < ulps; ++i) v = std::nextafter(v, std::numeric_limits<double>::infinity());
  return v;
}

inline bracket widen(double lo, double hi, int ulps) {
  if (std::isnan(lo) || std::isnan(hi)) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  return {down(lo, ulps), up(hi, ulps)};
}

// log(|z|) for z != 0, with a relative error of a few ulps.
inline double log_abs_integer(const integer& z) {
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

}  // namespace detail

inline bracket to_bracket(const rational& r) {
  double d = r.get_d();  // truncates toward zero
  if (std::isinf(d)) {
    return d > 0 ? bracket{std::numeric_limits<double>::max(), d} : bracket{d, -std::numeric_limits<double>::max()};
  }
  if (rational(d) == r) return bracket::point(d);
  return detail::widen(d, d, 1);
}

inline bracket operator+(bracket a, bracket b) { return detail::widen(a.lo + b.lo, a.hi + b.hi, 1); }
inline bracket operator-(bracket a, bracket b) { return detail::widen(a.lo - b.hi, a.hi - b.lo, 1); }
inline bracket operator-(bracket a) { return {-a.hi, -a.lo}; }

inline bracket operator*(bracket a, bracket b) {
  double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  for (double& v : c) {
    if (std::isnan(v)) v = 0.0;  // 0 * inf
  }
  return detail::widen(*std::min_element(c, c + 4), *std::max_element(c, c + 4), 1);
}

inline bracket operator/(bracket a, bracket b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return detail::widen(*std::min_element(c, c + 4), *std::max_element(c, c + 4), 1);
}

inline bracket exp(bracket a) { return detail::widen(std::exp(a.lo), std::exp(a.hi), 2); }

/// Natural log of a positive bracket; lower end clamps to -inf at zero.
inline bracket log(bracket a) {
  double lo = a.lo > 0 ? std::log(a.lo) : -std::numeric_limits<double>::infinity();
  return detail::widen(lo, std::log(a.hi), 2);
}

/// Natural log of a positive exact rational, robust to huge numerators/denominators.
inline bracket log(const rational& r) {
  if (r <= 0) throw precondition_error("log of non-positive rational " + to_string(r));
  double v = detail::log_abs_integer(r.get_num()) - detail::log_abs_integer(r.get_den());
  // Each integer log carries a few ulps of error relative to its own magnitude.
  double slack = 8 * std::numeric_limits<double>::epsilon() *
                 (std::fabs(detail::log_abs_integer(r.get_num())) + std::fabs(detail::log_abs_integer(r.get_den())) + 1.0);
  return {v - slack, v + slack};
}

/// base^e for base >= 0 and a real exponent bracket.
inline bracket pow(bracket base, bracket e) {
  if (base.hi <= 0.0) return bracket::point(0.0);
  bracket lb = log(base);
  return exp(lb * e);
}

inline bracket sqrt(bracket a) {
  return detail::widen(std::sqrt(std::max(a.lo, 0.0)), std::sqrt(std::max(a.hi, 0.0)), 1);
}

inline ordering3 compare(bracket a, bracket b) {
  if (a.hi < b.lo) return ordering3::less;
  if (a.lo > b.hi) return ordering3::greater;
  return ordering3::overlap;
}

/// Decides a <= b; indeterminate when the enclosures overlap.
inline verdict decide_le(bracket a, bracket b) {
  if (a.hi <= b.lo) return verdict::holds;
  if (a.lo > b.hi) return verdict::fails;
  return verdict::indeterminate;
}

/// exp(x) bracket for an exact rational exponent.
inline bracket exp(const rational& x) { return exp(to_bracket(x)); }

}  // namespace dslab
