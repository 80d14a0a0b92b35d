#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "almostmin/errors.hpp"

namespace almostmin::config {

/// A full run description: family parameters plus the verification campaign.
/// Parsed from versioned key = value text; unknown keys are errors.
struct RunConfig {
  int version = 1;
  std::string set_file;
  std::string family = "graphs";  // graphs | branched | massratio | single-sheet
  int Q = 2;
  int k = 1;
  double alpha_star = 1.0;
  int J = 10;
  int m = 2;
  double box_lo = -2.0;
  double box_hi = 2.0;
  std::vector<double> radii;  // dyadic ladder for the campaign
  int centers_per_class = 3;
  double r0 = 0.25;
  double slope_tol = 0.1;
  double quad_tol = 1e-7;
  uint64_t seed = 1;
  double eps = 0.25;   // mass-ratio family
  int n_balls = 40;    // mass-ratio family
  double cyl_r = 1.0;  // mass-ratio family

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace almostmin::config
