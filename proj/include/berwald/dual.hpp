#pragma once

// Forward-mode differentiation by dual numbers a + b*e with e*e = 0.
// Duals nest: Dual<Dual<double>> carries mixed second derivatives.

#include <cmath>
#include <type_traits>

namespace berwald {

template <typename T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), eps(0.0) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T v, T e) : val(v), eps(e) {}

  constexpr Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  constexpr Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  constexpr Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  constexpr Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.eps + b.eps}; }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.eps - b.eps}; }
  friend constexpr Dual operator-(const Dual& a) { return {-a.val, -a.eps}; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.val * b.eps + a.eps * b.val};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    return {a.val / b.val, (a.eps * b.val - a.val * b.eps) / (b.val * b.val)};
  }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T>
struct is_dual<Dual<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Innermost real value of a (possibly nested) dual.
inline constexpr double value_of(double x) { return x; }
template <typename T>
constexpr double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <typename T>
bool all_finite(const Dual<T>& x) {
  return all_finite(x.val) && all_finite(x.eps);
}

template <typename T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, e * a.eps};
}

template <typename T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.val), a.eps / a.val};
}

template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.val);
  return {s, a.eps / (2.0 * s)};
}

template <typename T>
Dual<T> sin(const Dual<T>& a) {
  using std::sin;
  using std::cos;
  return {sin(a.val), cos(a.val) * a.eps};
}

template <typename T>
Dual<T> cos(const Dual<T>& a) {
  using std::sin;
  using std::cos;
  return {cos(a.val), -sin(a.val) * a.eps};
}

/// Real power for positive base.
template <typename T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.val, p), p * pow(a.val, p - 1.0) * a.eps};
}

/// Integer power by repeated squaring; negative exponents invert.
template <typename T>
T ipow(const T& base, int n) {
  if (n < 0) return T(1.0) / ipow(base, -n);
  T result(1.0);
  T b = base;
  while (n > 0) {
    if (n & 1) result = result * b;
    b = b * b;
    n >>= 1;
  }
  return result;
}

}  // namespace berwald
