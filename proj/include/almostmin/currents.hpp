#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "almostmin/geom.hpp"
#include "almostmin/quadrature.hpp"

namespace almostmin::currents {

using geom::LinearGraphMap;
using geom::Mat;
using geom::MPlane;
using geom::Vec;
using quadrature::QuadratureConfig;
using quadrature::QuadResult;

struct SheetValue {
  Vec value;     // in R^n
  Mat jacobian;  // n x m
};

/// A single-valued sheet in plane coordinates of its domain plane.
using SheetFn = std::function<SheetValue(const Vec&)>;

struct GraphSheet {
  MPlane domain_plane;
  SheetFn eval;
  double lip_bound = std::numeric_limits<double>::infinity();
};

/// Q sheets over a common plane, given by a single evaluator returning an
/// unordered Q-tuple (values may coincide). Branch points are listed so the
/// quadrature can switch to polar coordinates around them.
struct MultiGraph {
  int m = 2;
  int n = 1;
  int q = 1;
  std::function<std::vector<SheetValue>(const Vec&)> eval;
  std::vector<Vec> singular_points;  // plane coordinates
};

MultiGraph from_sheets(int m, int n, std::vector<SheetFn> sheets);

/// sqrt(det(I_m + J^T J)) for an n x m Jacobian.
double area_element(const Mat& jacobian);

/// Mass of the multigraph over the disk B_r(center) in the base plane:
/// integral of the summed area elements.
QuadResult mass_over_cylinder(const MultiGraph& f, const Vec& center,
                              double r, const QuadratureConfig& cfg);

/// mass_over_cylinder - q * omega_m * r^m, computed from the cancellation-free
/// integrand sum_i (area element - 1).
QuadResult excess(const MultiGraph& f, const Vec& center, double r,
                  const QuadratureConfig& cfg);

/// sum_i integral of |grad g_i|^2 over the base disk.
QuadResult dirichlet(const MultiGraph& f, const Vec& center, double r,
                     const QuadratureConfig& cfg);

/// Mass of the competitor equal to each sheet's boundary affine fit on
/// B_{(1-s)r} and blended linearly to the sheet across the collar.
/// Shares the sheet boundary, so it bounds the minimal mass from above.
QuadResult affine_competitor_mass(const MultiGraph& f, const Vec& center,
                                  double r, double collar_fraction,
                                  const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Reparametrization of a graph over pi_0 as a graph over a tilted plane.

struct ReparamInput {
  int m = 2;
  int n = 1;
  SheetFn f;            // over pi_0 plane coordinates, defined on B_{r/delta}(x_prime)
  Vec x_prime;          // domain center, pi_0 coordinates
  Vec x_bar;            // cylinder center height in pi_0^perp (often f(x_prime))
  LinearGraphMap A;     // tilt; the target plane is the graph plane of A
  double r = 1.0;
  double delta = 1.0;
  double sigma = 0.0;
  double lambda = 0.0;  // declared bound for Lip(f - A)
};

struct NewtonStats {
  int max_iterations = 0;
  double max_residual = 0.0;
  int64_t calls = 0;
};

struct ReparamResult {
  MPlane plane;          // the tilted plane (through the origin)
  Vec y_prime;           // chart center: p_plane(x_prime, f(x_prime)), plane coords
  double domain_radius;  // tau * r / delta
  double tau;
  SheetFn g;             // over plane coords of `plane`
  std::function<Vec(const Vec&)> chart_inverse;  // z -> x in pi_0 coords
  std::shared_ptr<NewtonStats> stats;
};

/// Rewrites gr(f) as gr(g) over the graph plane of A, inverting
/// y(x) = p_plane(x, f(x)) by damped Newton.
/// Requires delta + Lip(A) sigma / sqrt(1 + Lip(A)^2) <= tau = (1+lambda^2)^{-1/2}.
ReparamResult reparametrize(const ReparamInput& in);

struct SeminormComparison {
  double lhs = 0.0;  // sampled [grad g]_{C^alpha}
  double rhs = 0.0;  // sampled [grad f]_{C^alpha}
  double ratio = 0.0;
};

/// Compares the Hoelder seminorm of grad g on its chart domain with that of
/// grad f on B_{r/delta}(x_prime), over n_pairs sampled pairs.
SeminormComparison check_hseminorm(const ReparamInput& in,
                                   const ReparamResult& res, double alpha,
                                   int n_pairs, uint64_t seed);

/// Max over sampled z of lhs - rhs for the pairwise relative-gradient bound:
/// |grad g1 - grad g2| <= Lip(A)^alpha (1+Lip(A)^2)^{-alpha/2}
///     * min_i [grad f_i]_{C^alpha} * |f1 - f2|^alpha + sup|grad f1 - grad f2|.
double check_relgrad(const ReparamInput& in1, const ReparamInput& in2,
                     double alpha, int n_samples, uint64_t seed);

/// Holder seminorm of the jacobian of a sheet over sampled pairs in B_r(c).
double sampled_gradient_seminorm(const SheetFn& f, const Vec& center,
                                 double r, double alpha, int n_pairs,
                                 uint64_t seed);

}  // namespace almostmin::currents
