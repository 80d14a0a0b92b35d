#include "almostmin/whitney.hpp"

#include <algorithm>
#include <cmath>

namespace almostmin::whitney {

namespace {

uint64_t pack(int level, const std::array<int64_t, kMaxDim>& idx, int m) {
  // levels <= 31, indices < 2^19 per axis
  uint64_t key = static_cast<uint64_t>(level);
  for (int d = 0; d < m; ++d)
    key = key * (1ull << 19) + static_cast<uint64_t>(idx[d]);
  return key;
}

struct BuildCtx {
  const ClosedSetOracle* oracle;
  WhitneyDecomposition* out;
  int m;
  int J;
};

void subdivide(BuildCtx& ctx, int level, std::array<int64_t, kMaxDim> idx) {
  const int m = ctx.m;
  const double side = ctx.out->root_scale * std::pow(0.5, level);
  Vec center(m);
  for (int d = 0; d < m; ++d)
    center[d] = ctx.out->root_origin[d] + side * (static_cast<double>(idx[d]) + 0.5);
  const double d0 = ctx.oracle->dist_fn(center);
  const double diam = side * std::sqrt(static_cast<double>(m));
  const double acc = ctx.oracle->accuracy;
  if (d0 - diam / 2.0 - acc >= diam) {
    DyadicCube c;
    c.level = level;
    c.index = idx;
    c.center = center;
    c.side = side;
    c.center_dist = d0;
    ctx.out->cubes.push_back(std::move(c));
    return;
  }
  // Cells certified to lie inside E need no subdivision.
  if (d0 <= acc && ctx.oracle->interior_gauge &&
      ctx.oracle->interior_gauge(center) - acc >= diam / 2.0)
    return;
  if (level == ctx.J) {
    ctx.out->unresolved_measure += std::pow(side, m);
    ctx.out->unresolved_cells += 1;
    return;
  }
  // children in lexicographic order for determinism
  for (int child = 0; child < (1 << m); ++child) {
    std::array<int64_t, kMaxDim> cidx{};
    for (int d = 0; d < m; ++d)
      cidx[d] = 2 * idx[d] + ((child >> (m - 1 - d)) & 1);
    subdivide(ctx, level + 1, cidx);
  }
}

}  // namespace

double WhitneyDecomposition::diam(const DyadicCube& c) const {
  return c.side * std::sqrt(static_cast<double>(m));
}

bool WhitneyDecomposition::in_root_box(const Vec& x) const {
  for (int d = 0; d < m; ++d)
    if (x[d] < root_origin[d] - 1e-12 * root_scale ||
        x[d] > root_origin[d] + root_scale + 1e-12 * root_scale)
      return false;
  return true;
}

const DyadicCube* WhitneyDecomposition::find(
    int level, const std::array<int64_t, kMaxDim>& idx) const {
  int64_t cells = int64_t{1} << level;
  for (int d = 0; d < m; ++d)
    if (idx[d] < 0 || idx[d] >= cells) return nullptr;
  auto it = lookup.find(pack(level, idx, m));
  return it == lookup.end() ? nullptr : &cubes[it->second];
}

WhitneyDecomposition build_whitney(const ClosedSetOracle& oracle,
                                   const Box& box, int max_level) {
  const int m = box.dim();
  if (m < 1 || m > kMaxDim) throw SpecError("build_whitney: dimension out of range");
  if (oracle.m != m) throw SpecError("build_whitney: oracle/box dimension mismatch");
  if (max_level < 1 || max_level > 28)
    throw SpecError("build_whitney: max level out of range");

  WhitneyDecomposition out;
  out.m = m;
  out.max_level = max_level;
  out.root_origin = box.lo;
  double scale = 0.0;
  for (int d = 0; d < m; ++d) scale = std::max(scale, box.hi[d] - box.lo[d]);
  if (!(scale > 0.0)) throw SpecError("build_whitney: empty box");
  out.root_scale = scale;
  out.accuracy = oracle.accuracy;
  out.dist_fn = oracle.dist_fn;

  if (oracle.accuracy > std::pow(0.5, max_level + 4) * scale)
    throw AccuracyError("oracle accuracy too coarse for requested Whitney level");

  BuildCtx ctx{&oracle, &out, m, max_level};
  subdivide(ctx, 0, {});

  if (out.cubes.empty())
    throw EmptyComplementError("no Whitney cube accepted: box lies in E");

  std::sort(out.cubes.begin(), out.cubes.end(),
            [](const DyadicCube& a, const DyadicCube& b) {
              if (a.level != b.level) return a.level < b.level;
              return a.index < b.index;
            });
  out.lookup.reserve(out.cubes.size() * 2);
  for (uint32_t i = 0; i < out.cubes.size(); ++i) {
    const auto& c = out.cubes[i];
    out.lookup.emplace(pack(c.level, c.index, m), i);
    if (out.levels_present.empty() || out.levels_present.back() != c.level)
      out.levels_present.push_back(c.level);
  }
  return out;
}

LocateResult locate(const WhitneyDecomposition& d, const Vec& x) {
  if (!d.in_root_box(x)) throw OutOfBox("locate: point outside root box");
  const DyadicCube* best = nullptr;
  for (int level : d.levels_present) {
    double side = d.root_scale * std::pow(0.5, level);
    // candidate indices per axis: the containing cell, and the one below
    // when x sits on a shared face
    std::array<std::array<int64_t, 2>, kMaxDim> cand{};
    std::array<int, kMaxDim> ncand{};
    for (int dd = 0; dd < d.m; ++dd) {
      double t = (x[dd] - d.root_origin[dd]) / side;
      int64_t i0 = static_cast<int64_t>(std::floor(t));
      ncand[dd] = 0;
      cand[dd][ncand[dd]++] = i0 - 1;  // closed-cube tie on lower face
      cand[dd][ncand[dd]++] = i0;
    }
    std::array<int64_t, kMaxDim> idx{};
    int combos = 1;
    for (int dd = 0; dd < d.m; ++dd) combos *= ncand[dd];
    for (int c = 0; c < combos; ++c) {
      int rem = c;
      for (int dd = 0; dd < d.m; ++dd) {
        idx[dd] = cand[dd][rem % ncand[dd]];
        rem /= ncand[dd];
      }
      const DyadicCube* cube = d.find(level, idx);
      if (!cube) continue;
      bool inside = true;
      for (int dd = 0; dd < d.m && inside; ++dd) {
        double lo = d.root_origin[dd] + side * static_cast<double>(idx[dd]);
        if (x[dd] < lo - 1e-13 * d.root_scale ||
            x[dd] > lo + side + 1e-13 * d.root_scale)
          inside = false;
      }
      if (!inside) continue;
      if (!best || cube->level < best->level ||
          (cube->level == best->level && cube->index < best->index))
        best = cube;
    }
    if (best && best->level == level) break;  // deeper levels cannot tie lower
  }
  if (best) return best;
  if (d.dist_fn(x) <= d.accuracy) return InE{};
  return Unresolved{};
}

std::vector<const DyadicCube*> enlarged_hits(const WhitneyDecomposition& d,
                                             const Vec& x, double factor) {
  if (factor < 1.0 || factor > 2.0)
    throw SpecError("enlarged_hits: factor must be in [1, 2]");
  if (!d.in_root_box(x)) throw OutOfBox("enlarged_hits: point outside root box");
  std::vector<const DyadicCube*> hits;
  std::array<int64_t, kMaxDim> idx{};
  for (int level : d.levels_present) {
    double side = d.root_scale * std::pow(0.5, level);
    double half = factor * side / 2.0 + 1e-14 * d.root_scale;
    std::array<int64_t, kMaxDim> imin{}, imax{};
    for (int dd = 0; dd < d.m; ++dd) {
      double t = (x[dd] - d.root_origin[dd]) / side;
      imin[dd] = static_cast<int64_t>(std::floor(t - half / side - 0.5));
      imax[dd] = static_cast<int64_t>(std::floor(t + half / side - 0.5)) + 1;
    }
    std::function<void(int)> rec = [&](int dim) {
      if (dim == d.m) {
        const DyadicCube* cube = d.find(level, idx);
        if (!cube) return;
        for (int dd = 0; dd < d.m; ++dd)
          if (std::abs(x[dd] - cube->center[dd]) > half) return;
        hits.push_back(cube);
        return;
      }
      for (int64_t i = imin[dim]; i <= imax[dim]; ++i) {
        idx[dim] = i;
        rec(dim + 1);
      }
    };
    rec(0);
  }
  std::sort(hits.begin(), hits.end(),
            [](const DyadicCube* a, const DyadicCube* b) {
              if (a->level != b->level) return a->level < b->level;
              return a->index < b->index;
            });
  return hits;
}

std::vector<const DyadicCube*> neighbors(const WhitneyDecomposition& d,
                                         const DyadicCube& c) {
  std::vector<const DyadicCube*> out;
  double lo[kMaxDim], hi[kMaxDim];
  for (int dd = 0; dd < d.m; ++dd) {
    lo[dd] = d.root_origin[dd] + c.side * static_cast<double>(c.index[dd]);
    hi[dd] = lo[dd] + c.side;
  }
  const double tol = 1e-13 * d.root_scale;
  for (int level : d.levels_present) {
    if (level < c.level - 2 || level > c.level + 2) continue;
    double side = d.root_scale * std::pow(0.5, level);
    std::array<int64_t, kMaxDim> imin{}, imax{}, idx{};
    for (int dd = 0; dd < d.m; ++dd) {
      imin[dd] = static_cast<int64_t>(std::floor((lo[dd] - d.root_origin[dd]) / side - 1e-12)) - 1;
      imax[dd] = static_cast<int64_t>(std::floor((hi[dd] - d.root_origin[dd]) / side + 1e-12)) + 1;
    }
    std::function<void(int)> rec = [&](int dim) {
      if (dim == d.m) {
        const DyadicCube* n = d.find(level, idx);
        if (!n || n == &c) return;
        for (int dd = 0; dd < d.m; ++dd) {
          double nlo = d.root_origin[dd] + side * static_cast<double>(idx[dd]);
          if (nlo > hi[dd] + tol || nlo + side < lo[dd] - tol) return;
        }
        out.push_back(n);
        return;
      }
      for (int64_t i = imin[dim]; i <= imax[dim]; ++i) {
        idx[dim] = i;
        rec(dim + 1);
      }
    };
    rec(0);
  }
  return out;
}

NeighborStats neighbor_stats(const WhitneyDecomposition& d) {
  NeighborStats st;
  for (const auto& c : d.cubes) {
    auto nbrs = neighbors(d, c);
    st.max_touching = std::max(st.max_touching, static_cast<int>(nbrs.size()));
    for (const auto* n : nbrs) {
      double ratio = n->side / c.side;
      st.min_side_ratio = std::min(st.min_side_ratio, ratio);
      st.max_side_ratio = std::max(st.max_side_ratio, ratio);
    }
  }
  return st;
}

}  // namespace almostmin::whitney
