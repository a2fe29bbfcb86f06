#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace weaksym {

/// Exact rational number on 64-bit numerator/denominator.
/// Always stored reduced with positive denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  bool is_zero() const { return num == 0; }
  bool is_one() const { return num == 1 && den == 1; }
  bool is_integer() const { return den == 1; }
  double to_double() const { return double(num) / double(den); }

  static Rational from_i128(__int128 n, __int128 d) {
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 g = 1;
    {
      __int128 x = a, y = d;
      while (y != 0) { __int128 t = x % y; x = y; y = t; }
      g = x == 0 ? 1 : x;
    }
    n /= g; d /= g;
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim)
      throw std::overflow_error("rational overflow");
    Rational r;
    r.num = (long long)n;
    r.den = (long long)d;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.den + (__int128)b.num * a.den,
                     (__int128)a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.den - (__int128)b.num * a.den,
                     (__int128)a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.num, (__int128)a.den * b.den);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw std::domain_error("rational division by zero");
    return from_i128((__int128)a.num * b.den, (__int128)a.den * b.num);
  }
  Rational operator-() const { Rational r; r.num = -num; r.den = den; return r; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num * b.den < (__int128)b.num * a.den;
  }

  /// Integer power; exponent may be negative.
  Rational pow_int(long long e) const {
    if (e == 0) return Rational(1);
    Rational base = *this;
    if (e < 0) {
      if (num == 0) throw std::domain_error("zero to negative power");
      base = Rational(den, num);
      e = -e;
    }
    Rational acc(1);
    while (e > 0) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

}  // namespace weaksym
