#pragma once

#include <cmath>

namespace hpl {

// Forward-mode dual number a + b*eps with eps^2 = 0.
template <typename T>
struct Dual {
  T value{};
  T deriv{};

  constexpr Dual() = default;
  constexpr Dual(T v) : value(v) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T v, T d) : value(v), deriv(d) {}

  constexpr Dual& operator+=(const Dual& o) {
    value += o.value;
    deriv += o.deriv;
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    value -= o.value;
    deriv -= o.deriv;
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    deriv = deriv * o.value + value * o.deriv;
    value *= o.value;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    deriv = (deriv * o.value - value * o.deriv) / (o.value * o.value);
    value /= o.value;
    return *this;
  }
};

template <typename T>
constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.value, -a.deriv}; }
template <typename T>
constexpr Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T>
constexpr Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T>
constexpr Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T>
constexpr Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }

template <typename T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.value);
  return {e, e * a.deriv};
}

template <typename T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.value), a.deriv / a.value};
}

/// Value part of a plain or dual scalar.
inline double value_of(double x) { return x; }
template <typename T>
T value_of(const Dual<T>& x) { return x.value; }

inline bool is_finite(double x) { return std::isfinite(x); }
template <typename T>
bool is_finite(const Dual<T>& x) { return std::isfinite(x.value) && std::isfinite(x.deriv); }

}  // namespace hpl
