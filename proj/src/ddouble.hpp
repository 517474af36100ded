#pragma once

// Double-double arithmetic (unevaluated sum hi + lo, ~106-bit significand).
// Every binary operation is written so that swapping its operands gives a
// bit-identical result.

#include <cmath>

namespace kpent::detail {

struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DD quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD operator+(DD a, DD b) {
  const DD s = two_sum(a.hi, b.hi);
  const DD t = two_sum(a.lo, b.lo);
  DD r = quick_two_sum(s.hi, s.lo + t.hi);
  return quick_two_sum(r.hi, r.lo + t.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
  const DD p = two_prod(a.hi, b.hi);
  const double cross = a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo + cross);
}

inline DD operator*(DD a, double b) { return a * DD{b, 0.0}; }

inline DD dd_div(DD a, DD b) {
  const double q1 = a.hi / b.hi;
  const DD r = a - b * q1;
  const double q2 = r.hi / b.hi;
  const DD r2 = r - b * q2;
  const double q3 = r2.hi / b.hi;
  return DD{q1, 0.0} + DD{q2, 0.0} + DD{q3, 0.0};
}

inline constexpr DD kPiDD{3.141592653589793116, 1.2246467991473532e-16};

struct CDD {
  DD re;
  DD im;
};

inline CDD operator+(const CDD& a, const CDD& b) { return {a.re + b.re, a.im + b.im}; }
inline CDD operator-(const CDD& a, const CDD& b) { return {a.re - b.re, a.im - b.im}; }
inline CDD operator*(const CDD& a, const CDD& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

}  // namespace kpent::detail
