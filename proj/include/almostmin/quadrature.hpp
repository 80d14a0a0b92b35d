#pragma once

#include <functional>

#include "almostmin/geom.hpp"

namespace almostmin::quadrature {

using geom::Vec;

struct QuadratureConfig {
  double target_rel_tol = 1e-9;
  int max_subdivision_depth = 30;
  bool polar_mode = false;
  int max_regions = 400000;
  double min_abs_tol = 1e-16;  // stop once the error estimate is below this
};

void validate(const QuadratureConfig& cfg);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive Gauss-Legendre on [a, b]; refines the interval with the largest
/// error estimate until the total estimate meets target_rel_tol.
/// Deterministic (ties broken by creation order).
QuadResult integrate_interval(const std::function<double(double)>& f,
                              double a, double b,
                              const QuadratureConfig& cfg);

/// Adaptive tensor Gauss-Legendre over the disk B_radius(center) in R^2,
/// in polar coordinates about the center.
QuadResult integrate_disk(const std::function<double(const Vec&)>& f,
                          const Vec& center, double radius,
                          const QuadratureConfig& cfg);

/// Integral over the star-shaped region {pole + rho dir(theta) : 0 <= rho <=
/// reach(theta)} in polar coordinates about `pole`.
QuadResult integrate_polar(const std::function<double(const Vec&)>& f,
                           const Vec& pole,
                           const std::function<double(double)>& reach,
                           const QuadratureConfig& cfg);

/// Same disk, but in polar coordinates about `pole` (a point of the closed
/// disk). Designed for integrands whose derivatives blow up at `pole`.
QuadResult integrate_disk_polar_at(const std::function<double(const Vec&)>& f,
                                   const Vec& center, double radius,
                                   const Vec& pole,
                                   const QuadratureConfig& cfg);

}  // namespace almostmin::quadrature
