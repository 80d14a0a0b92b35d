#pragma once

#include <cmath>
#include <vector>

#include "almostmin/errors.hpp"

namespace almostmin::jets {

/// Truncated univariate Taylor series: c[p] = f^{(p)}(t0) / p!.
/// All operations are exact to round-off at any order.
class Jet {
 public:
  Jet() = default;
  explicit Jet(int order) : c_(order + 1, 0.0) {}
  static Jet constant(double v, int order) {
    Jet j(order);
    j.c_[0] = v;
    return j;
  }
  static Jet variable(double v, int order) {
    Jet j(order);
    j.c_[0] = v;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int p) const { return c_[p]; }
  double& operator[](int p) { return c_[p]; }
  double value() const { return c_[0]; }
  double derivative(int p) const {  // f^{(p)}(t0)
    double fact = 1.0;
    for (int i = 2; i <= p; ++i) fact *= i;
    return c_[p] * fact;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int p = 0; p <= a.order(); ++p) r.c_[p] = a.c_[p] + b.c_[p];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int p = 0; p <= a.order(); ++p) r.c_[p] = a.c_[p] - b.c_[p];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int p = 0; p <= a.order(); ++p)
      for (int q = 0; q <= p; ++q) r.c_[p] += a.c_[q] * b.c_[p - q];
    return r;
  }
  friend Jet operator*(double s, const Jet& a) {
    Jet r(a.order());
    for (int p = 0; p <= a.order(); ++p) r.c_[p] = s * a.c_[p];
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    // r = a/b via the convolution recurrence.
    Jet r(a.order());
    for (int p = 0; p <= a.order(); ++p) {
      double acc = a.c_[p];
      for (int q = 0; q < p; ++q) acc -= r.c_[q] * b.c_[p - q];
      r.c_[p] = acc / b.c_[0];
    }
    return r;
  }

  friend Jet exp(const Jet& a) {
    // y' = a' y  =>  p y_p = sum_{q=1..p} q a_q y_{p-q}
    Jet r(a.order());
    r.c_[0] = std::exp(a.c_[0]);
    for (int p = 1; p <= a.order(); ++p) {
      double acc = 0.0;
      for (int q = 1; q <= p; ++q) acc += q * a.c_[q] * r.c_[p - q];
      r.c_[p] = acc / p;
    }
    return r;
  }

 private:
  std::vector<double> c_;
};

/// exp(-1/s) extended by 0 for s <= 0, as a jet at s. Below `cutoff` the
/// zero jet is returned; with cutoff = 1/120 the truncation error is below
/// 1e-18 for derivative orders up to 8.
inline Jet flat_exp(const Jet& s, double cutoff = 1.0 / 120.0) {
  if (s.value() <= cutoff) return Jet(s.order());
  Jet one = Jet::constant(1.0, s.order());
  return exp(Jet(s.order()) - one / s);
}

/// The C^inf transition profile S(u) = e(u) / (e(u) + e(1-u)) with
/// e(s) = exp(-1/s) for s > 0 and 0 otherwise: S == 0 for u <= 0,
/// S == 1 for u >= 1.
inline Jet smoothstep(const Jet& u) {
  const int ord = u.order();
  if (u.value() <= 0.0) return Jet(ord);
  if (u.value() >= 1.0) return Jet::constant(1.0, ord);
  Jet one = Jet::constant(1.0, ord);
  Jet eu = flat_exp(u);
  Jet ev = flat_exp(one - u);
  return eu / (eu + ev);
}

}  // namespace almostmin::jets
