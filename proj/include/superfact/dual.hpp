#pragma once

// Forward-mode dual numbers over a complex base.
//
// A dual number a + b·ε with ε² = 0 carries a value and a first-order
// directional derivative. Nesting Dual<Dual<Complex>> gives access to mixed
// second derivatives, which the bracket-of-bracket observables need.

#include <cmath>
#include <complex>
#include <concepts>
#include <type_traits>

#include "superfact/errors.hpp"

namespace superfact {

using Complex = std::complex<double>;

template <class T>
struct Dual;

inline bool is_zero(const Complex& z) { return z == Complex(0.0, 0.0); }
inline bool is_zero(double x) { return x == 0.0; }

namespace detail {

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

}  // namespace detail

/// Plain numbers that can be mixed into dual arithmetic as constants.
template <class U>
concept PlainScalar = std::is_arithmetic_v<U> || detail::is_complex<U>::value;

template <class T>
struct Dual {
  T value{};
  T deriv{};

  constexpr Dual() = default;
  constexpr Dual(const T& v, const T& d) : value(v), deriv(d) {}
  // Constants lift with a zero infinitesimal part.
  template <PlainScalar U>
  constexpr Dual(const U& v) : value(T(v)), deriv(T(0.0)) {}  // NOLINT(google-explicit-constructor)
  template <class U>
    requires(!PlainScalar<U> && std::same_as<U, T>)
  constexpr Dual(const U& v) : value(v), deriv(T(0.0)) {}  // NOLINT(google-explicit-constructor)

  Dual& operator+=(const Dual& o) {
    value += o.value;
    deriv += o.deriv;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    deriv -= o.deriv;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    deriv = deriv * o.value + value * o.deriv;
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator-(const Dual& a) { return {-a.value, -a.deriv}; }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    if (is_zero(b.value)) {
      throw DomainError("division by zero in dual evaluation");
    }
    const T inv = T(1.0) / b.value;
    return {a.value * inv, (a.deriv * b.value - a.value * b.deriv) * inv * inv};
  }

  template <PlainScalar U>
  friend Dual operator+(Dual a, const U& c) {
    a.value += T(c);
    return a;
  }
  template <PlainScalar U>
  friend Dual operator+(const U& c, Dual a) {
    return a + c;
  }
  template <PlainScalar U>
  friend Dual operator-(Dual a, const U& c) {
    a.value -= T(c);
    return a;
  }
  template <PlainScalar U>
  friend Dual operator-(const U& c, const Dual& a) {
    return {T(c) - a.value, -a.deriv};
  }
  template <PlainScalar U>
  friend Dual operator*(const Dual& a, const U& c) {
    return {a.value * T(c), a.deriv * T(c)};
  }
  template <PlainScalar U>
  friend Dual operator*(const U& c, const Dual& a) {
    return a * c;
  }
  template <PlainScalar U>
  friend Dual operator/(const Dual& a, const U& c) {
    return a / Dual(c);
  }
  template <PlainScalar U>
  friend Dual operator/(const U& c, const Dual& a) {
    return Dual(c) / a;
  }

  friend bool is_zero(const Dual& x) { return is_zero(x.value); }
};

using DualComplex = Dual<Complex>;
using DualComplex2 = Dual<DualComplex>;

/// Underlying complex value of any scalar in the tower.
inline Complex base_value(double x) { return {x, 0.0}; }
inline Complex base_value(const Complex& z) { return z; }
template <class T>
Complex base_value(const Dual<T>& x) {
  return base_value(x.value);
}

// Elementary functions. The chain rule is applied at each nesting level.
using std::cos;
using std::sin;
using std::sqrt;
using std::tan;

template <class T>
Dual<T> sin(const Dual<T>& x) {
  return {sin(x.value), x.deriv * cos(x.value)};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  return {cos(x.value), -(x.deriv * sin(x.value))};
}

template <class T>
Dual<T> tan(const Dual<T>& x) {
  const T c = cos(x.value);
  if (is_zero(c)) {
    throw DomainError("tan evaluated at a pole");
  }
  return {tan(x.value), x.deriv / (c * c)};
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  const T s = sqrt(x.value);
  if (is_zero(s)) {
    throw DomainError("sqrt derivative undefined at zero");
  }
  return {s, x.deriv / (2.0 * s)};
}

/// Integer power by repeated multiplication; exponent must be non-negative.
template <class S>
S ipow(const S& base, int exponent) {
  S result = S(1.0);
  for (int k = 0; k < exponent; ++k) {
    result = result * base;
  }
  return result;
}

/// Square root restricted to arguments with positive real part (principal branch).
template <class S>
S positive_sqrt(const S& x) {
  if (!(base_value(x).real() > 0.0)) {
    throw PositivityError("square root of a non-positive argument");
  }
  return sqrt(x);
}

}  // namespace superfact
