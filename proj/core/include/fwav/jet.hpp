#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace fwav {

/// Truncated Taylor series in time: c[k] = f^(k)(t0) / k!.
///
/// Arithmetic propagates all coefficients exactly up to order K, so composing
/// smooth maps of polynomial inputs yields exact derivatives at t0.
template <std::size_t K>
struct Jet {
  std::array<double, K + 1> c{};

  Jet() = default;
  Jet(double value) { c[0] = value; }  // NOLINT: implicit constant promotion

  static Jet variable(double value) {
    Jet j(value);
    if constexpr (K >= 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  /// k-th time derivative at t0.
  double derivative(std::size_t k) const {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return c[k] * f;
  }

  static Jet from_derivatives(const std::array<double, K + 1>& d) {
    Jet j;
    double f = 1.0;
    for (std::size_t k = 0; k <= K; ++k) {
      if (k > 1) f *= static_cast<double>(k);
      j.c[k] = d[k] / f;
    }
    return j;
  }

  /// Time derivative; the top coefficient becomes unknown and is set to zero.
  Jet dt() const {
    Jet r;
    for (std::size_t k = 0; k < K; ++k) r.c[k] = static_cast<double>(k + 1) * c[k + 1];
    return r;
  }

  Jet operator-() const {
    Jet r;
    for (std::size_t k = 0; k <= K; ++k) r.c[k] = -c[k];
    return r;
  }
  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k <= K; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k <= K; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c) v *= s;
    return *this;
  }
};

template <std::size_t K>
Jet<K> operator+(Jet<K> a, const Jet<K>& b) { return a += b; }
template <std::size_t K>
Jet<K> operator-(Jet<K> a, const Jet<K>& b) { return a -= b; }
template <std::size_t K>
Jet<K> operator*(Jet<K> a, double s) { return a *= s; }
template <std::size_t K>
Jet<K> operator*(double s, Jet<K> a) { return a *= s; }
template <std::size_t K>
Jet<K> operator+(Jet<K> a, double s) { a.c[0] += s; return a; }
template <std::size_t K>
Jet<K> operator+(double s, Jet<K> a) { a.c[0] += s; return a; }
template <std::size_t K>
Jet<K> operator-(Jet<K> a, double s) { a.c[0] -= s; return a; }
template <std::size_t K>
Jet<K> operator-(double s, const Jet<K>& a) { return -a + s; }

template <std::size_t K>
Jet<K> operator*(const Jet<K>& a, const Jet<K>& b) {
  Jet<K> r;
  for (std::size_t k = 0; k <= K; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}

template <std::size_t K>
Jet<K> operator/(const Jet<K>& a, const Jet<K>& b) {
  Jet<K> r;
  for (std::size_t k = 0; k <= K; ++k) {
    double s = a.c[k];
    for (std::size_t j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  return r;
}

template <std::size_t K>
Jet<K> operator/(const Jet<K>& a, double s) { return a * (1.0 / s); }

template <std::size_t K>
Jet<K> sqrt(const Jet<K>& a) {
  Jet<K> r;
  r.c[0] = std::sqrt(a.c[0]);
  for (std::size_t k = 1; k <= K; ++k) {
    double s = a.c[k];
    for (std::size_t j = 1; j < k; ++j) s -= r.c[j] * r.c[k - j];
    r.c[k] = s / (2.0 * r.c[0]);
  }
  return r;
}

/// sin and cos of a series, computed together by the recurrence of (sin u)' = cos u u'.
template <std::size_t K>
void sincos(const Jet<K>& u, Jet<K>& s, Jet<K>& co) {
  s = Jet<K>();
  co = Jet<K>();
  s.c[0] = std::sin(u.c[0]);
  co.c[0] = std::cos(u.c[0]);
  for (std::size_t k = 1; k <= K; ++k) {
    double ss = 0.0, cc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const double ju = static_cast<double>(j) * u.c[j];
      ss += ju * co.c[k - j];
      cc -= ju * s.c[k - j];
    }
    s.c[k] = ss / static_cast<double>(k);
    co.c[k] = cc / static_cast<double>(k);
  }
}

/// Integral of a series with a given constant term.
template <std::size_t K>
Jet<K> integrate(const Jet<K>& d, double constant) {
  Jet<K> r;
  r.c[0] = constant;
  for (std::size_t k = 1; k <= K; ++k) r.c[k] = d.c[k - 1] / static_cast<double>(k);
  return r;
}

/// atan2(y, x) via its derivative (x y' - y x') / (x^2 + y^2).
template <std::size_t K>
Jet<K> atan2(const Jet<K>& y, const Jet<K>& x) {
  const Jet<K> rate = (x * y.dt() - y * x.dt()) / (x * x + y * y);
  return integrate(rate, std::atan2(y.c[0], x.c[0]));
}

/// sgn(x) x^2 expanded about t0. The sign is taken from the leading nonzero
/// coefficient, so a series that merely touches zero at t0 keeps its side.
template <std::size_t K>
Jet<K> signed_square(const Jet<K>& x) {
  double s = 0.0;
  for (double v : x.c) {
    if (v != 0.0) {
      s = (v > 0.0) ? 1.0 : -1.0;
      break;
    }
  }
  return (x * x) * s;
}

}  // namespace fwav
