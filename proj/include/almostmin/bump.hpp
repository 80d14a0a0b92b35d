#pragma once

#include <array>
#include <vector>

#include "almostmin/geom.hpp"
#include "almostmin/jets.hpp"

namespace almostmin::bump {

using geom::Vec;

/// Multi-index with |beta| entries per axis.
using MultiIndex = std::vector<int>;

int multi_order(const MultiIndex& beta);

/// Tensor-product cutoff phi(x) = prod psi(x_d), psi(t) = S((0.6-|t|)/0.1):
/// phi == 1 on [-0.5, 0.5]^m, supp(phi) in [-0.6, 0.6]^m, C^inf.
/// Derivatives via jet arithmetic, exact to round-off.
class BumpFunction {
 public:
  BumpFunction() = default;
  explicit BumpFunction(int max_order) : max_order_(max_order) {}

  static constexpr double kPlateauHalfWidth = 0.5;
  static constexpr double kSupportHalfWidth = 0.6;

  int max_order() const { return max_order_; }

  /// psi value and derivatives 0..order at t.
  std::vector<double> profile_derivatives(double t, int order) const;

  double value(const Vec& u) const;

  /// partial derivative d^beta phi(u); requires |beta| <= max_order.
  double derivative(const Vec& u, const MultiIndex& beta) const;

 private:
  int max_order_ = 0;
};

}  // namespace almostmin::bump
