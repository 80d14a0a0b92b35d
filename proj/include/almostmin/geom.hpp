#pragma once

#include <Eigen/Dense>
#include <utility>

#include "almostmin/errors.hpp"

namespace almostmin::geom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// An affine m-plane in R^{m+n}, stored by explicit orthonormal bases.
/// Immutable after construction; safe for concurrent reads.
struct MPlane {
  Vec base;     // point in R^{m+n}
  Mat tangent;  // (m+n) x m, orthonormal columns
  Mat normal;   // (m+n) x n, orthonormal columns

  int m() const { return static_cast<int>(tangent.cols()); }
  int n() const { return static_cast<int>(normal.cols()); }
  int ambient() const { return static_cast<int>(base.size()); }

  /// Ambient point from (tangential, normal) plane coordinates.
  Vec embed(const Vec& t, const Vec& nu) const {
    return base + tangent * t + normal * nu;
  }
  Vec embed_tangential(const Vec& t) const { return base + tangent * t; }
};

/// The coordinate plane R^m x {0}^n through `base` (default: origin).
MPlane standard_plane(int m, int n);
MPlane standard_plane(int m, int n, const Vec& base);

/// Checks pairwise dot products and norms of the combined basis.
/// Throws SpecError if not orthonormal to `tol`.
void validate_orthonormal(const MPlane& plane, double tol = 1e-12);

struct Cylinder {
  MPlane plane;
  Vec center;  // in R^{m+n}
  double radius = 0.0;
};

Cylinder make_cylinder(MPlane plane, Vec center, double radius);

/// The linear map A : pi_0 -> pi_0^perp defining a tilted graph plane.
struct LinearGraphMap {
  Mat matrix;  // n x m
};

/// Orthogonal decomposition of x relative to the plane:
/// x = base + tangent * t + normal * nu.
std::pair<Vec, Vec> project(const MPlane& plane, const Vec& x);

/// The m-plane spanned by {(v, Av)} translated through `through`.
/// Basis by modified Gram-Schmidt with a re-orthogonalization pass.
MPlane plane_of_linear_map(const LinearGraphMap& A, const Vec& through);

/// Largest singular value of A.
double operator_norm(const LinearGraphMap& A);

/// tau = (1 + Lambda^2)^{-1/2}, the cosine of the tilt angle.
double tilt_cosine(double lambda);

/// Volume of the unit m-disk.
double unit_ball_volume(int m);

}  // namespace almostmin::geom
