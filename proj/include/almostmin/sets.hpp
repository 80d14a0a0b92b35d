#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "almostmin/errors.hpp"
#include "almostmin/geom.hpp"

namespace almostmin::sets {

using geom::Vec;

struct Box {
  Vec lo;
  Vec hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

struct SetSpec;

struct FinitePoints {
  std::vector<Vec> points;
};

/// Cantor(ratio) set on [0,1] along `axis`, zero on the remaining axes.
struct CantorProduct {
  double ratio = 1.0 / 3.0;
  int depth = 16;
  int axis = 0;
  int m = 1;
};

/// K = R^m \ union of pairwise disjoint open balls.
struct BallComplementTruncated {
  std::vector<Vec> centers;
  std::vector<double> radii;
  int m = 2;
};

/// E = R^m \ B_radius(0).
struct UnitDiskComplement {
  int m = 2;
  double radius = 0.5;
};

/// E = R^m (used for degenerate-input tests: the complement is empty).
struct Everything {
  int m = 1;
};

struct Union {
  std::vector<SetSpec> parts;
};

/// E = K cup {x : dist(x, K) >= threshold}.
struct Inflation {
  std::unique_ptr<SetSpec> base;
  double threshold = 1.0;
};

struct SetSpec {
  std::variant<FinitePoints, CantorProduct, BallComplementTruncated,
               UnitDiskComplement, Everything, Union, Inflation>
      variant;
};

SetSpec clone(const SetSpec& spec);

/// A closed set presented as a distance function with certified accuracy.
/// Pure and immutable; concurrent evaluation is safe.
struct ClosedSetOracle {
  std::function<double(const Vec&)> dist_fn;
  // Optional lower bound for dist(x, closure of the complement of E),
  // with the same accuracy as dist_fn. Lets cube decompositions skip
  // regions certified to lie inside E instead of subdividing them.
  std::function<double(const Vec&)> interior_gauge;
  double accuracy = 0.0;
  int m = 0;
  std::optional<Box> bounding_hint;  // nullopt: unbounded
  // Witnesses for tests: points of E, and points strictly outside E.
  std::vector<Vec> member_witnesses;
  std::vector<Vec> exterior_witnesses;
};

ClosedSetOracle build_oracle(const SetSpec& spec);

/// The first N enumerated rational points with radii eps*2^{-i}; balls
/// overlapping a previously retained one are dropped. Enumeration is a
/// fixed deterministic sweep over dyadic rationals in [-window, window]^m,
/// by increasing denominator then lexicographic order.
SetSpec rational_truncation(double eps, int n_points, int m = 2,
                            double window = 3.0);

/// Exact 1-D distance to the depth-truncated Cantor(ratio) set on [0,1].
double cantor_distance_1d(double t, double ratio, int depth);

/// Parse the set-definition DSL (key = value lines, `type` selects the
/// variant). Unknown keys are errors.
SetSpec parse_set_spec(const std::string& text);
SetSpec load_set_file(const std::string& path);

}  // namespace almostmin::sets
