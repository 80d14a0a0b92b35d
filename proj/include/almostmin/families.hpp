#pragma once

#include <cstdint>
#include <vector>

#include "almostmin/currents.hpp"
#include "almostmin/regdist.hpp"

namespace almostmin::families {

using geom::Mat;
using geom::Vec;
using quadrature::QuadratureConfig;

// ---------------------------------------------------------------------------
// Multi-sheeted graph family: Q ordered sheets f_i = i * eta / (4 Q lipbound)
// over the plane, vanishing exactly on E = K cup {dist(.,K) >= 1}.

struct GraphFamily {
  int Q = 2;
  int k = 1;
  double alpha_star = 1.0;
  double alpha = 0.5;  // (k + alpha_star - 1)/(k + alpha_star)
  sets::ClosedSetOracle K_oracle;
  sets::ClosedSetOracle E_oracle;
  regdist::RegularizedDistance eta;
  double lipbound = 0.0;

  int m() const { return eta.decomposition.m; }
  /// f_i and grad f_i (zero-extended on E and the collar), i in 1..Q.
  double sheet_value(int i, const Vec& x) const;
  Vec sheet_grad(int i, const Vec& x) const;
  currents::MultiGraph as_multigraph() const;
};

GraphFamily build_graph_family(const sets::SetSpec& K, int Q, int k,
                               double alpha_star, int J, const sets::Box& box);

/// Measured constant in |grad f_i - grad f_j| <= C4 |f_i - f_j|^alpha over
/// the samples (points on E, where both sides vanish, are skipped).
double check_pairwise_condition(const GraphFamily& family,
                                const std::vector<Vec>& samples,
                                int min_samples = 1000);

// ---------------------------------------------------------------------------
// Tangential-touching criterion for general ordered scalar sheet families.

struct ScalarSheet {
  // x -> (value, gradient)
  std::function<std::pair<double, Vec>(const Vec&)> eval;
};

struct TangentialCheckResult {
  bool pass = false;
  double c4 = 0.0;        // 2 max{1, max pairwise [grad f_i - grad f_j]_{C^alpha*}}
  double worst_margin = 0.0;  // max of lhs - rhs; pass iff <= tolerance
  Vec witness;            // sample achieving the worst margin
  int witness_i = 0, witness_j = 0;
};

/// Checks |grad(f_i - f_j)(x)| <= c4 * (f_i - f_j)(x)^{alpha*/(1+alpha*)}
/// at every sample, with c4 from the sampled pairwise gradient seminorms.
/// Ordered families touching tangentially pass; transversal crossings fail.
TangentialCheckResult check_tangential_implies_condition(
    const std::vector<ScalarSheet>& sheets, double alpha_star,
    const std::vector<Vec>& samples, uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Branched family in R^4 = C x C: per Whitney cube L_l a branched patch
// w_l(z) = kappa r_l^p eta((z - z_l)/r_l) ((z - z_l)/r_l)^p e^{2 pi i j / Q},
// p = k + 1/Q, with branch cut along [z_l, z_l + r_l].

struct Patch {
  Vec z;             // branch point (cube center), plane coords
  double r = 0.0;    // r_l = side / 4
  double cut_angle = 0.0;
};

struct BranchedFamily {
  int Q = 2;
  int k = 1;
  double alpha = 1.0 / 3.0;  // (Qk + 1 - Q)/(Qk + 1)
  double exponent = 1.5;     // p = (Qk + 1)/Q
  sets::ClosedSetOracle K_oracle;
  whitney::WhitneyDecomposition dec;  // of box \ K, cube sides <= 1
  std::vector<Patch> patches;
  // per cube position in dec.cubes: (first patch index, splits per axis)
  std::vector<std::pair<int, int>> cube_patches;
  regdist::RegularizedDistance ref_eta;  // for E = R^2 \ B_{1/2}(0)
  double kappa = 0.0;
  double ref_eta_max = 0.0;  // sup eta over B_{1/2}
};

BranchedFamily build_branched_family(const sets::SetSpec& K, int Q, int k,
                                     int J, const sets::Box& box);

/// Unordered Q-tuple of branch values (R^2) and 2x2 Jacobians at z.
/// Throws UnresolvedRegion in the collar; returns Q zeros on E and off
/// patch supports.
std::vector<currents::SheetValue> eval_branched(const BranchedFamily& f,
                                                const Vec& z);
/// Same, but zero-extended on the collar (for quadrature).
std::vector<currents::SheetValue> eval_branched_or_zero(
    const BranchedFamily& f, const Vec& z);

currents::MultiGraph as_multigraph(const BranchedFamily& f);

struct BallClass {
  char label = 'a';           // a: I = I* empty; b: I empty, I* not; c: I nonempty
  std::vector<int> I;         // patches with z_l in B_{2r}
  std::vector<int> I_star;    // patches with B_{r_l}(z_l) meeting B_r
};

/// Trichotomy for the ball B_r(x0), x0 in R^4, by its plane projection.
BallClass classify_ball(const BranchedFamily& f, const Vec& x0, double r);

/// Permutation of the branches after analytic continuation around the
/// circle of radius rho about patch `patch_index`, tracked in `steps` steps.
std::vector<int> monodromy(const BranchedFamily& f, int patch_index,
                           double rho, int steps = 360);

struct BlowupResult {
  std::vector<double> radii;
  std::vector<double> heights;  // h(r) = sup |branch value| over B_r(x)
  double fitted_exponent = 0.0;
  double c_measured = 0.0;  // max h(r) / r^p
};

/// Height decay of the support around x in K; certifies flat blow-up when
/// the fitted exponent reaches p = (Qk+1)/Q.
BlowupResult blowup_flatness(const BranchedFamily& f, const Vec& x,
                             const std::vector<double>& radii, int n_samples,
                             uint64_t seed);

// ---------------------------------------------------------------------------
// Mass-ratio example: two sheets over the complement of a union of shrinking
// balls at rational centers; the flat multiplicity-2 part carries almost all
// of the mass as eps -> 0.

struct MassRatioResult {
  double ratio = 0.0;       // flat mass over B_r / total mass
  double flat_mass = 0.0;   // 2 |K_eps cap B_r| (exact areas)
  double total_mass = 0.0;
  double sup_grad = 0.0;    // sampled sup |grad f_Q|
  double analytic_lower_bound = 0.0;  // (1 - eps^2/3)/(1 + sup_grad^2), r = 1
  int balls_total = 0;
  int balls_resolved = 0;   // balls large enough to carry integrated excess
  double resolution = 0.0;
};

MassRatioResult mass_ratio_example(double eps, int n_points, double r, int J,
                                   const QuadratureConfig& cfg);

/// Area of the intersection of two disks (exact formula).
double disk_intersection_area(const Vec& c1, double r1, const Vec& c2,
                              double r2);

}  // namespace almostmin::families
