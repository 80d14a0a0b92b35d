#include "almostmin/geom.hpp"

#include <cmath>
#include <numbers>

namespace almostmin::geom {

MPlane standard_plane(int m, int n) {
  return standard_plane(m, n, Vec::Zero(m + n));
}

MPlane standard_plane(int m, int n, const Vec& base) {
  MPlane p;
  p.base = base;
  p.tangent = Mat::Zero(m + n, m);
  p.normal = Mat::Zero(m + n, n);
  for (int i = 0; i < m; ++i) p.tangent(i, i) = 1.0;
  for (int j = 0; j < n; ++j) p.normal(m + j, j) = 1.0;
  return p;
}

void validate_orthonormal(const MPlane& plane, double tol) {
  const int m = plane.m();
  const int n = plane.n();
  Mat basis(plane.ambient(), m + n);
  basis << plane.tangent, plane.normal;
  Mat gram = basis.transpose() * basis;
  for (int i = 0; i < m + n; ++i)
    for (int j = 0; j < m + n; ++j) {
      double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - want) > tol)
        throw SpecError("MPlane basis not orthonormal");
    }
  for (int i = 0; i < plane.ambient(); ++i)
    if (!std::isfinite(plane.base[i])) throw SpecError("MPlane base not finite");
}

Cylinder make_cylinder(MPlane plane, Vec center, double radius) {
  if (!(radius > 0.0)) throw SpecError("Cylinder radius must be positive");
  return Cylinder{std::move(plane), std::move(center), radius};
}

std::pair<Vec, Vec> project(const MPlane& plane, const Vec& x) {
  Vec d = x - plane.base;
  return {plane.tangent.transpose() * d, plane.normal.transpose() * d};
}

namespace {

// Modified Gram-Schmidt with a second pass.
void mgs(Mat& cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < cols.cols(); ++j) {
      for (int i = 0; i < j; ++i)
        cols.col(j) -= cols.col(i).dot(cols.col(j)) * cols.col(i);
      double nrm = cols.col(j).norm();
      if (nrm < 1e-14) throw SpecError("degenerate basis in orthonormalization");
      cols.col(j) /= nrm;
    }
  }
}

}  // namespace

MPlane plane_of_linear_map(const LinearGraphMap& A, const Vec& through) {
  const int n = static_cast<int>(A.matrix.rows());
  const int m = static_cast<int>(A.matrix.cols());
  MPlane p;
  p.base = through;
  p.tangent = Mat::Zero(m + n, m);
  p.normal = Mat::Zero(m + n, n);
  // tangent candidates (e_i, A e_i); normal candidates (-A^t e_j, e_j).
  for (int i = 0; i < m; ++i) {
    p.tangent(i, i) = 1.0;
    for (int j = 0; j < n; ++j) p.tangent(m + j, i) = A.matrix(j, i);
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) p.normal(i, j) = -A.matrix(j, i);
    p.normal(m + j, j) = 1.0;
  }
  mgs(p.tangent);
  mgs(p.normal);
  return p;
}

double operator_norm(const LinearGraphMap& A) {
  if (A.matrix.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(A.matrix);
  return svd.singularValues()[0];
}

double tilt_cosine(double lambda) { return 1.0 / std::sqrt(1.0 + lambda * lambda); }

double unit_ball_volume(int m) {
  // omega_m = pi^{m/2} / Gamma(m/2 + 1)
  return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
}

}  // namespace almostmin::geom
