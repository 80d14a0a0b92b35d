#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "almostmin/sets.hpp"

namespace almostmin::whitney {

using geom::Vec;
using sets::Box;
using sets::ClosedSetOracle;

constexpr int kMaxDim = 3;

struct DyadicCube {
  int level = 0;                       // side = root_scale * 2^{-level}
  std::array<int64_t, kMaxDim> index{};  // grid index at this level
  Vec center;
  double side = 0.0;
  double center_dist = 0.0;  // oracle value at the center
};

struct WhitneyDecomposition {
  std::vector<DyadicCube> cubes;  // ordered by (level, index)
  Vec root_origin;
  double root_scale = 0.0;
  int m = 0;
  int max_level = 0;
  double unresolved_measure = 0.0;  // volume of level-J cells not accepted
  int64_t unresolved_cells = 0;
  double accuracy = 0.0;  // oracle accuracy used at build time
  std::function<double(const Vec&)> dist_fn;  // the oracle used at build time

  double diam(const DyadicCube& c) const;
  bool in_root_box(const Vec& x) const;

  // (level, packed index) -> cube position in `cubes`.
  std::unordered_map<uint64_t, uint32_t> lookup;
  std::vector<int> levels_present;

  const DyadicCube* find(int level, const std::array<int64_t, kMaxDim>& idx) const;
};

/// Stein-style decomposition of box \ E. Accepts a cube at the first level
/// where the oracle certifies dist(L, E) >= diam(L); rejection of the
/// parent then gives dist(L, E) <= 4 diam(L).
WhitneyDecomposition build_whitney(const ClosedSetOracle& oracle,
                                   const Box& box, int max_level);

struct Unresolved {};
struct InE {};
using LocateResult = std::variant<const DyadicCube*, Unresolved, InE>;

/// The accepted cube whose closed cube contains x; face ties broken by
/// smallest (level, index).
LocateResult locate(const WhitneyDecomposition& d, const Vec& x);

/// All accepted cubes L with x in factor*L (concentric enlargement).
std::vector<const DyadicCube*> enlarged_hits(const WhitneyDecomposition& d,
                                             const Vec& x, double factor);

/// Cubes whose closed cubes touch `c` (excluding `c`).
std::vector<const DyadicCube*> neighbors(const WhitneyDecomposition& d,
                                         const DyadicCube& c);

struct NeighborStats {
  int max_touching = 0;          // measured Lambda(m)
  double min_side_ratio = 1.0;   // over touching pairs
  double max_side_ratio = 1.0;
};

NeighborStats neighbor_stats(const WhitneyDecomposition& d);

}  // namespace almostmin::whitney
