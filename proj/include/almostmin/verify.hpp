#pragma once

#include <string>

#include "almostmin/families.hpp"

#include <nlohmann/json.hpp>

namespace almostmin::verify {

using geom::Vec;
using quadrature::QuadratureConfig;

struct BallResult {
  Vec center;
  double r = 0.0;
  char case_label = 'g';
  int q = 0;
  double mass = 0.0;
  double excess = 0.0;
  double dirichlet = 0.0;
  double competitor_gap = 0.0;
  bool pass = true;
  std::string note;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

struct Constants {
  double C0 = 0.0;
  double C4 = 0.0;
  double kappa = 0.0;
  double Cbar = 0.0;
};

struct VerificationReport {
  nlohmann::json family_meta;
  std::vector<BallResult> balls;
  FitResult fit;
  Constants constants;
  bool pass = true;

  nlohmann::json to_json() const;
};

struct BallCampaign {
  std::vector<Vec> centers;     // base-plane coordinates
  std::vector<double> radii;    // dyadic ladder, shared by all centers
  double r0_budget = 0.25;      // radii above the budget are skipped
  double c0_config = std::numeric_limits<double>::infinity();
  double slope_tol = 0.1;
  QuadratureConfig quad;
  uint64_t seed = 1;
  bool with_dirichlet = false;
  bool with_competitor = false;
  double collar_fraction = 0.25;
};

/// Per-ball excess records plus a pooled log-log regression of excess
/// against radius (one intercept per center, common slope). The decay
/// exponent certifies the almost-minimality rate m + 2 alpha.
VerificationReport verify_excess_decay(
    const currents::MultiGraph& F, const BallCampaign& campaign,
    double target_exponent,
    const std::function<char(const Vec&, double)>& classify = {});

struct DirichletCheck {
  double lhs = 0.0;   // sum of Dirichlet energies over the disk
  double rhs = 0.0;   // Cbar * q * diam^{2 alpha} * area
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, cbar = 0.0;
  bool hypotheses_ok = true;
  bool pass = false;
};

/// Measures the three sampled gradient hypotheses on the disk (smallest
/// gradient anchor, pairwise gap at the anchors, oscillation), forms
/// Cbar = (C1 + C2 + C3)^2, and checks the Dirichlet bound against it.
DirichletCheck verify_dirichlet_bound(const currents::MultiGraph& F,
                                      const Vec& center, double r,
                                      double alpha,
                                      const std::vector<Vec>& samples,
                                      const QuadratureConfig& cfg,
                                      double tol = 1e-6);

struct BombieriRecord {
  Vec center;
  double r = 0.0;
  double excess = 0.0;
  double cylinder_mass = 0.0;
  double c_measured = 0.0;  // excess / (r^{2 alpha} * cylinder mass)
};

struct BombieriReport {
  std::vector<BombieriRecord> records;
  double c_max = 0.0;
};

/// excess <= C r^{2 alpha} * (cylinder mass) across the campaign, with the
/// measured C reported.
BombieriReport verify_bombieri_form(const currents::MultiGraph& F,
                                    const BallCampaign& campaign,
                                    double alpha);

struct CompetitorRecord {
  Vec center;
  double r = 0.0;
  double mass = 0.0;
  double competitor_mass = 0.0;
  double gap = 0.0;             // mass - competitor mass
  double gap_over_power = 0.0;  // gap / r^{target exponent}
};

struct CompetitorReport {
  std::vector<CompetitorRecord> records;
  double c0_witnessed = 0.0;  // max of gap_over_power
};

/// Explicit boundary-matching competitors: mass(F) - competitor mass
/// bounded by C0 r^{m + 2 alpha} with the witnessed C0 reported.
CompetitorReport verify_competitor(const currents::MultiGraph& F,
                                   const BallCampaign& campaign,
                                   double target_exponent,
                                   double collar_fraction);

struct SingularMassRow {
  double eps = 0.0;
  families::MassRatioResult result;
};

/// Mass-ratio table across a list of eps values (fixed cylinder radius).
std::vector<SingularMassRow> singular_mass_report(
    const std::vector<double>& eps_values, int n_points, double r, int J,
    const QuadratureConfig& cfg);

/// Stratified campaign centers for a graph family: points of K, near-boundary
/// points of E, deep flat points, and uniform random points.
std::vector<Vec> stratified_graph_centers(const families::GraphFamily& fam,
                                          const sets::Box& box, int per_class,
                                          uint64_t seed);

/// Campaign centers for a branched family: branch points, case-b offsets,
/// and far (case a) points.
std::vector<Vec> stratified_branched_centers(
    const families::BranchedFamily& fam, int n_patches, uint64_t seed);

/// Excess of a graph family over the tangent plane of its middle sheet,
/// for comparison with the base-plane excess (chart independence).
std::pair<double, double> tilted_excess_crosscheck(
    const families::GraphFamily& fam, const Vec& center, double r,
    const QuadratureConfig& cfg);

}  // namespace almostmin::verify
