#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace rdc {

// Forward-mode first-order jet: value plus N partial derivatives.
// Used to carry exact directional derivatives of the mortar integration
// kernel with respect to the nodal quantities it consumes.  Comparisons act
// on the value part only, so branchy geometry code (clipping, clamping)
// differentiates the branch actually taken.
template <int N>
struct Jet {
  double v = 0.0;
  std::array<double, N> d{};

  Jet() = default;
  Jet(double value) : v(value) { d.fill(0.0); }  // NOLINT: implicit by design
  static Jet seeded(double value, int slot) {
    Jet j(value);
    j.d[slot] = 1.0;
    return j;
  }

  Jet operator-() const {
    Jet r(-v);
    for (int i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.v;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator/(Jet a, const Jet& b) { return a /= b; }

  friend bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
  friend bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }
  friend bool operator<=(const Jet& a, const Jet& b) { return a.v <= b.v; }
  friend bool operator>=(const Jet& a, const Jet& b) { return a.v >= b.v; }
  friend bool operator==(const Jet& a, const Jet& b) { return a.v == b.v; }
  friend bool operator!=(const Jet& a, const Jet& b) { return a.v != b.v; }
};

template <int N>
inline Jet<N> sqrt(const Jet<N>& a) {
  Jet<N> r(std::sqrt(a.v));
  const double s = 0.5 / r.v;
  for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
  return r;
}

template <int N>
inline Jet<N> abs(const Jet<N>& a) {
  return a.v < 0.0 ? -a : a;
}

// Scalar access helpers so kernels can be written generically over
// double and Jet<N>.
inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Jet<N>& x) {
  return x.v;
}

using std::abs;
using std::sqrt;

}  // namespace rdc
