#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "almostmin/bump.hpp"
#include "almostmin/whitney.hpp"

namespace almostmin::regdist {

using bump::BumpFunction;
using bump::MultiIndex;
using geom::Vec;
using sets::Box;
using whitney::WhitneyDecomposition;

/// eta(x) = sum_L side(L)^s phi((x - x_L)/side(L)), s = k + alpha_star.
/// Vanishes identically on E; comparable to dist(x,E)^s away from the
/// unresolved collar.
struct RegularizedDistance {
  WhitneyDecomposition decomposition;
  int k = 1;
  double alpha_star = 1.0;
  BumpFunction bump;

  double exponent() const { return k + alpha_star; }
  /// Side length below which acceptance may have failed at max_level.
  double collar_width() const;
};

RegularizedDistance make_regularized_distance(WhitneyDecomposition d, int k,
                                              double alpha_star);

double eval_eta(const RegularizedDistance& eta, const Vec& x);

/// d^beta eta; |beta| <= k+1.
double eval_deriv(const RegularizedDistance& eta, const Vec& x,
                  const MultiIndex& beta);

Vec eval_grad(const RegularizedDistance& eta, const Vec& x);

/// Extension of eval_deriv by 0 on E and on the unresolved collar.
double eval_deriv_extended(const RegularizedDistance& eta, const Vec& x,
                           const MultiIndex& beta);

/// All multi-indices of dimension m with 1 <= |beta| <= max_ord,
/// in a fixed deterministic order.
std::vector<MultiIndex> multi_indices_up_to(int m, int max_ord);

struct ComparabilityResult {
  double c_low = 0.0;   // min eta / dist^s
  double c_high = 0.0;  // max eta / dist^s
  std::map<MultiIndex, double> c_beta;  // max |d^beta eta| / dist^{s-|beta|}
  int used_samples = 0;
  int skipped_samples = 0;
};

/// Measures the two-sided comparability eta ~ dist^s and the derivative
/// bounds |d^beta eta| <~ dist^{s-|beta|} over the given samples. Samples
/// closer to E than 4 * 2^{-J} * scale are skipped; at least `min_samples`
/// must survive.
ComparabilityResult comparability_scan(const RegularizedDistance& eta,
                                       const std::vector<Vec>& samples,
                                       int min_samples = 1000);

/// Sampled sup over |beta| = order of
/// |d^beta eta(x) - d^beta eta(y)| / |x-y|^alpha_star, using the
/// zero-extension on E; pairs with an endpoint in the unresolved collar
/// are skipped (the cutoff there is a resolution artifact, not eta).
/// The best pairs are refined by a deterministic pattern search so the
/// value is stable under changes of the pair budget.
double holder_seminorm(const RegularizedDistance& eta, int order,
                       double alpha_star,
                       const std::vector<std::pair<Vec, Vec>>& sample_pairs);

/// Pair sampler stratified across the three seminorm regimes: both points
/// near E, both far, and mixed. Deterministic in `seed`.
std::vector<std::pair<Vec, Vec>> stratified_pairs(
    const RegularizedDistance& eta, const Box& box, int n_pairs,
    uint64_t seed);

/// Uniform samples from the box restricted to the resolved region with
/// dist >= min_dist. Deterministic in `seed`.
std::vector<Vec> resolved_samples(const RegularizedDistance& eta,
                                  const Box& box, int n, uint64_t seed,
                                  double min_dist = 0.0);

/// Certified-style upper bound for Lip(eta):
/// max(c_1 * M^{s-1}, grid max |grad eta|) * 1.05, where c_1 is the
/// first-order comparability constant and M bounds dist(.,E) on the box.
double lip_upper_bound(const RegularizedDistance& eta,
                       const std::vector<Vec>& samples, double dist_bound_M);

}  // namespace almostmin::regdist
