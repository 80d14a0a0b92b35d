#include "almostmin/bump.hpp"

#include <cmath>

namespace almostmin::bump {

using jets::Jet;

int multi_order(const MultiIndex& beta) {
  int s = 0;
  for (int b : beta) s += b;
  return s;
}

std::vector<double> BumpFunction::profile_derivatives(double t, int order) const {
  if (order > max_order_)
    throw OrderError("BumpFunction: derivative order exceeds max_order");
  const double a = std::abs(t);
  std::vector<double> out(order + 1, 0.0);
  if (a >= kSupportHalfWidth) return out;  // identically 0 outside support
  if (a <= kPlateauHalfWidth) {
    out[0] = 1.0;  // plateau: derivatives vanish (C^inf flat at the edge)
    return out;
  }
  // u = (0.6 - a)/0.1 as a jet in a
  Jet u(order);
  u[0] = (kSupportHalfWidth - a) / 0.1;
  if (order >= 1) u[1] = -10.0;
  Jet s = jets::smoothstep(u);
  const double sign = (t < 0.0) ? -1.0 : 1.0;
  double flip = 1.0;
  for (int p = 0; p <= order; ++p) {
    out[p] = flip * s.derivative(p);
    flip *= sign;  // psi^{(p)}(t) = (-1)^p psi^{(p)}(-t)
  }
  return out;
}

double BumpFunction::value(const Vec& u) const {
  double v = 1.0;
  for (int d = 0; d < u.size() && v != 0.0; ++d)
    v *= profile_derivatives(u[d], 0)[0];
  return v;
}

double BumpFunction::derivative(const Vec& u, const MultiIndex& beta) const {
  if (static_cast<int>(beta.size()) != u.size())
    throw SpecError("BumpFunction: multi-index dimension mismatch");
  if (multi_order(beta) > max_order_)
    throw OrderError("BumpFunction: |beta| exceeds max_order");
  double v = 1.0;
  for (int d = 0; d < u.size() && v != 0.0; ++d)
    v *= profile_derivatives(u[d], beta[d])[beta[d]];
  return v;
}

}  // namespace almostmin::bump
