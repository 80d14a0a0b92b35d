#include "almostmin/families.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

namespace almostmin::families {

using currents::MultiGraph;
using currents::SheetValue;
using regdist::RegularizedDistance;
using whitney::DyadicCube;

namespace {

double eta_ext(const RegularizedDistance& eta, const Vec& x) {
  static thread_local bump::MultiIndex zero;
  zero.assign(x.size(), 0);
  return regdist::eval_deriv_extended(eta, x, zero);
}

Vec eta_grad_ext(const RegularizedDistance& eta, const Vec& x) {
  const int m = static_cast<int>(x.size());
  Vec g(m);
  bump::MultiIndex beta(m, 0);
  for (int d = 0; d < m; ++d) {
    beta[d] = 1;
    g[d] = regdist::eval_deriv_extended(eta, x, beta);
    beta[d] = 0;
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Graph family

double GraphFamily::sheet_value(int i, const Vec& x) const {
  return i * eta_ext(eta, x) / (4.0 * Q * lipbound);
}

Vec GraphFamily::sheet_grad(int i, const Vec& x) const {
  return (i / (4.0 * Q * lipbound)) * eta_grad_ext(eta, x);
}

currents::MultiGraph GraphFamily::as_multigraph() const {
  MultiGraph f;
  f.m = m();
  f.n = 1;
  f.q = Q;
  const GraphFamily* self = this;  // family must outlive the multigraph
  f.eval = [self](const Vec& x) {
    const double e = eta_ext(self->eta, x);
    const Vec g = eta_grad_ext(self->eta, x);
    const double scale = 1.0 / (4.0 * self->Q * self->lipbound);
    std::vector<SheetValue> out(self->Q);
    for (int i = 1; i <= self->Q; ++i) {
      out[i - 1].value = Vec::Constant(1, i * scale * e);
      out[i - 1].jacobian = (i * scale) * g.transpose();
    }
    return out;
  };
  return f;
}

GraphFamily build_graph_family(const sets::SetSpec& K, int Q, int k,
                               double alpha_star, int J,
                               const sets::Box& box) {
  if (Q < 2) throw SpecError("graph family: Q must be >= 2");
  if (k < 1) throw SpecError("graph family: k must be >= 1");
  if (!(alpha_star > 0.0 && alpha_star <= 1.0))
    throw SpecError("graph family: alpha_star must be in (0, 1]");

  GraphFamily fam;
  fam.Q = Q;
  fam.k = k;
  fam.alpha_star = alpha_star;
  fam.alpha = (k + alpha_star - 1.0) / (k + alpha_star);
  fam.K_oracle = sets::build_oracle(K);

  sets::Inflation inflation;
  inflation.base = std::make_unique<sets::SetSpec>(sets::clone(K));
  inflation.threshold = 1.0;
  sets::SetSpec e_spec;
  e_spec.variant = std::move(inflation);
  fam.E_oracle = sets::build_oracle(e_spec);

  whitney::WhitneyDecomposition dec;
  try {
    dec = whitney::build_whitney(fam.E_oracle, box, J);
  } catch (const EmptyComplementError&) {
    throw DegenerateEta("graph family: E covers the box, no sheets to build");
  }
  fam.eta = regdist::make_regularized_distance(std::move(dec), k, alpha_star);

  auto samples = regdist::resolved_samples(fam.eta, box, 4000, 20260826ull);
  fam.lipbound = regdist::lip_upper_bound(fam.eta, samples, 1.0);
  if (!(fam.lipbound > 0.0))
    throw DegenerateEta("graph family: vanishing gradient bound");
  return fam;
}

double check_pairwise_condition(const GraphFamily& family,
                                const std::vector<Vec>& samples,
                                int min_samples) {
  double c4 = 0.0;
  int used = 0;
  for (const Vec& x : samples) {
    const double e = eta_ext(family.eta, x);
    if (e <= 0.0) continue;
    const Vec g = eta_grad_ext(family.eta, x);
    const double scale = 1.0 / (4.0 * family.Q * family.lipbound);
    for (int i = 1; i <= family.Q; ++i)
      for (int j = i + 1; j <= family.Q; ++j) {
        const double val_gap = (j - i) * scale * e;
        const double grad_gap = (j - i) * scale * g.norm();
        if (val_gap <= 0.0) continue;
        c4 = std::max(c4, grad_gap / std::pow(val_gap, family.alpha));
      }
    ++used;
  }
  if (used < min_samples)
    throw InsufficientSamples("pairwise condition: too few samples off E");
  return c4;
}

TangentialCheckResult check_tangential_implies_condition(
    const std::vector<ScalarSheet>& sheets, double alpha_star,
    const std::vector<Vec>& samples, uint64_t seed) {
  const int Q = static_cast<int>(sheets.size());
  if (samples.size() < 2 || Q < 2)
    throw InsufficientSamples("tangential check: need >= 2 sheets and samples");

  // sampled pairwise gradient seminorms -> c4
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
  double max_seminorm = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const Vec& x = samples[pick(rng)];
    const Vec& y = samples[pick(rng)];
    const double h = (x - y).norm();
    if (h <= 1e-14) continue;
    const double hw = std::pow(h, alpha_star);
    for (int i = 0; i < Q; ++i)
      for (int j = i + 1; j < Q; ++j) {
        Vec dx = sheets[i].eval(x).second - sheets[j].eval(x).second;
        Vec dy = sheets[i].eval(y).second - sheets[j].eval(y).second;
        max_seminorm = std::max(max_seminorm, (dx - dy).norm() / hw);
      }
  }

  TangentialCheckResult res;
  res.c4 = 2.0 * std::max(1.0, max_seminorm);
  const double power = alpha_star / (1.0 + alpha_star);
  res.worst_margin = -std::numeric_limits<double>::infinity();
  for (const Vec& x : samples) {
    std::vector<std::pair<double, Vec>> vals(Q);
    for (int i = 0; i < Q; ++i) vals[i] = sheets[i].eval(x);
    for (int i = 0; i < Q; ++i)
      for (int j = i + 1; j < Q; ++j) {
        const double gap = std::abs(vals[j].first - vals[i].first);
        const double lhs = (vals[j].second - vals[i].second).norm();
        const double margin = lhs - res.c4 * std::pow(gap, power);
        if (margin > res.worst_margin) {
          res.worst_margin = margin;
          res.witness = x;
          res.witness_i = i + 1;
          res.witness_j = j + 1;
        }
      }
  }
  res.pass = res.worst_margin <= 1e-8 * std::max(1.0, res.c4);
  return res;
}

// ---------------------------------------------------------------------------
// Branched family

namespace {

// value and Jacobian of eta(zeta) * zeta^p * e^{2 pi i j / Q} at zeta,
// with the branch angle taken in [cut_angle, cut_angle + 2 pi)
SheetValue branch_core(const RegularizedDistance& ref_eta, double p, int Q,
                       int j, const Vec& zeta, double cut_angle) {
  SheetValue out;
  out.value = Vec::Zero(2);
  out.jacobian = Mat::Zero(2, 2);
  const double rho = zeta.norm();
  if (rho == 0.0) return out;

  double theta = std::atan2(zeta[1], zeta[0]);
  while (theta < cut_angle) theta += 2.0 * M_PI;
  while (theta >= cut_angle + 2.0 * M_PI) theta -= 2.0 * M_PI;

  const double e = eta_ext(ref_eta, zeta);
  const Vec ge = eta_grad_ext(ref_eta, zeta);
  const double phase = 2.0 * M_PI * j / Q;
  const std::complex<double> u =
      std::pow(rho, p) * std::polar(1.0, p * theta + phase);
  const std::complex<double> du =
      p * std::pow(rho, p - 1.0) * std::polar(1.0, (p - 1.0) * theta + phase);

  const std::complex<double> h = e * u;
  const std::complex<double> hx = ge[0] * u + e * du;
  const std::complex<double> hy =
      ge[1] * u + e * du * std::complex<double>(0.0, 1.0);
  out.value << h.real(), h.imag();
  out.jacobian << hx.real(), hy.real(), hx.imag(), hy.imag();
  return out;
}

double bisect_kappa(double grad_sup_unit, double p) {
  if (!std::isfinite(grad_sup_unit) || grad_sup_unit <= 0.0)
    throw KappaSearchFailure("branched family: degenerate gradient scan");
  const double target = 0.25 / 1.05;
  const double scales[3] = {0.25, 0.125, 0.0625};
  auto ok = [&](double kappa) {
    for (double r : scales)
      if (kappa * std::pow(r, p - 1.0) * grad_sup_unit > target) return false;
    return true;
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = (lo + hi) / 2.0;
    (ok(mid) ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw KappaSearchFailure("branched family: kappa search collapsed");
  return lo;
}

}  // namespace

BranchedFamily build_branched_family(const sets::SetSpec& K, int Q, int k,
                                     int J, const sets::Box& box) {
  if (Q < 2) throw SpecError("branched family: Q must be >= 2");
  if (k < 1) throw SpecError("branched family: k must be >= 1");
  BranchedFamily fam;
  fam.Q = Q;
  fam.k = k;
  fam.alpha = (Q * k + 1.0 - Q) / (Q * k + 1.0);
  fam.exponent = (Q * k + 1.0) / Q;
  fam.K_oracle = sets::build_oracle(K);
  if (fam.K_oracle.m != 2)
    throw SpecError("branched family: K must live in the plane");
  fam.dec = whitney::build_whitney(fam.K_oracle, box, J);

  // patches: one per cube, splitting cubes with side > 1 into unit-scale
  // subcells so that r_l = side/4 <= 1/4
  fam.cube_patches.reserve(fam.dec.cubes.size());
  for (const DyadicCube& c : fam.dec.cubes) {
    int splits = 1;
    double side = c.side;
    while (side > 1.0) {
      side /= 2.0;
      splits *= 2;
    }
    fam.cube_patches.emplace_back(static_cast<int>(fam.patches.size()), splits);
    for (int ix = 0; ix < splits; ++ix)
      for (int iy = 0; iy < splits; ++iy) {
        Patch p;
        p.z = Vec(2);
        p.z[0] = c.center[0] - c.side / 2.0 + side * (ix + 0.5);
        p.z[1] = c.center[1] - c.side / 2.0 + side * (iy + 0.5);
        p.r = side / 4.0;
        p.cut_angle = 0.0;
        fam.patches.push_back(std::move(p));
      }
  }

  // reference cutoff for E = R^2 \ B_{1/2}(0)
  sets::SetSpec disk_spec;
  disk_spec.variant = sets::UnitDiskComplement{2, 0.5};
  sets::Box ref_box;
  ref_box.lo = Vec::Constant(2, -0.75);
  ref_box.hi = Vec::Constant(2, 0.75);
  auto ref_dec = whitney::build_whitney(sets::build_oracle(disk_spec), ref_box, 12);
  fam.ref_eta =
      regdist::make_regularized_distance(std::move(ref_dec), k, 1.0 / Q);

  // gradient scan of the unit-scale branch; kappa by bisection
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double grad_sup = 0.0;
  for (int t = 0; t < 10000; ++t) {
    double ang = 2.0 * M_PI * unif(rng);
    double rho = 0.5 * std::sqrt(unif(rng));
    Vec zeta(2);
    zeta << rho * std::cos(ang), rho * std::sin(ang);
    SheetValue s = branch_core(fam.ref_eta, fam.exponent, Q, 0, zeta, 0.0);
    grad_sup =
        std::max(grad_sup, geom::operator_norm(geom::LinearGraphMap{s.jacobian}));
    fam.ref_eta_max = std::max(fam.ref_eta_max, eta_ext(fam.ref_eta, zeta));
  }
  fam.kappa = bisect_kappa(grad_sup, fam.exponent);
  return fam;
}

namespace {

// index of the patch whose support B_{r/2}(z_l) contains z, or -1
int find_patch(const BranchedFamily& f, const Vec& z) {
  if (!f.dec.in_root_box(z)) return -1;
  auto loc = whitney::locate(f.dec, z);
  const DyadicCube* const* cube = std::get_if<const DyadicCube*>(&loc);
  if (!cube) return -1;
  const size_t pos = *cube - f.dec.cubes.data();
  const auto [first, splits] = f.cube_patches[pos];
  const double sub = (*cube)->side / splits;
  int ix = std::clamp(
      static_cast<int>(std::floor((z[0] - ((*cube)->center[0] - (*cube)->side / 2.0)) / sub)),
      0, splits - 1);
  int iy = std::clamp(
      static_cast<int>(std::floor((z[1] - ((*cube)->center[1] - (*cube)->side / 2.0)) / sub)),
      0, splits - 1);
  const int idx = first + ix * splits + iy;
  const Patch& p = f.patches[idx];
  return ((z - p.z).norm() < p.r / 2.0) ? idx : -1;
}

std::vector<SheetValue> zeros(int Q) {
  std::vector<SheetValue> out(Q);
  for (auto& s : out) {
    s.value = Vec::Zero(2);
    s.jacobian = Mat::Zero(2, 2);
  }
  return out;
}

std::vector<SheetValue> eval_patches(const BranchedFamily& f, const Vec& z) {
  int idx = find_patch(f, z);
  if (idx < 0) return zeros(f.Q);
  const Patch& p = f.patches[idx];
  Vec zeta = (z - p.z) / p.r;
  const double vscale = f.kappa * std::pow(p.r, f.exponent);
  const double jscale = f.kappa * std::pow(p.r, f.exponent - 1.0);
  std::vector<SheetValue> out(f.Q);
  for (int j = 0; j < f.Q; ++j) {
    SheetValue s = branch_core(f.ref_eta, f.exponent, f.Q, j, zeta, p.cut_angle);
    out[j].value = vscale * s.value;
    out[j].jacobian = jscale * s.jacobian;
  }
  return out;
}

}  // namespace

std::vector<SheetValue> eval_branched(const BranchedFamily& f, const Vec& z) {
  if (f.K_oracle.dist_fn(z) <= f.K_oracle.accuracy) return zeros(f.Q);
  if (f.dec.in_root_box(z)) {
    auto loc = whitney::locate(f.dec, z);
    if (std::holds_alternative<whitney::Unresolved>(loc))
      throw UnresolvedRegion("branched family: point in unresolved collar");
  }
  return eval_patches(f, z);
}

std::vector<SheetValue> eval_branched_or_zero(const BranchedFamily& f,
                                              const Vec& z) {
  return eval_patches(f, z);
}

currents::MultiGraph as_multigraph(const BranchedFamily& f) {
  MultiGraph g;
  g.m = 2;
  g.n = 2;
  g.q = f.Q;
  const BranchedFamily* self = &f;  // family must outlive the multigraph
  g.eval = [self](const Vec& z) { return eval_patches(*self, z); };
  for (const Patch& p : f.patches) g.singular_points.push_back(p.z);
  return g;
}

BallClass classify_ball(const BranchedFamily& f, const Vec& x0, double r) {
  Vec z0 = (x0.size() == 4) ? Vec(x0.head(2)) : x0;
  BallClass out;
  for (size_t i = 0; i < f.patches.size(); ++i) {
    const double d = (f.patches[i].z - z0).norm();
    if (d < 2.0 * r) out.I.push_back(static_cast<int>(i));
    if (d < f.patches[i].r + r) out.I_star.push_back(static_cast<int>(i));
  }
  out.label = !out.I.empty() ? 'c' : (!out.I_star.empty() ? 'b' : 'a');
  return out;
}

std::vector<int> monodromy(const BranchedFamily& f, int patch_index,
                           double rho, int steps) {
  if (patch_index < 0 || patch_index >= static_cast<int>(f.patches.size()))
    throw SpecError("monodromy: patch index out of range");
  const Patch& p = f.patches[patch_index];
  if (!(rho > 0.0 && rho < p.r / 2.0))
    throw SpecError("monodromy: loop radius must be in (0, r_l/2)");

  auto values_at = [&](double angle) {
    Vec z(2);
    z << p.z[0] + rho * std::cos(angle), p.z[1] + rho * std::sin(angle);
    auto sheets = eval_patches(f, z);
    std::vector<Vec> vals(f.Q);
    for (int j = 0; j < f.Q; ++j) vals[j] = sheets[j].value;
    return vals;
  };

  const double start = p.cut_angle + M_PI / steps;  // off the cut
  auto initial = values_at(start);
  std::vector<int> labels(f.Q);  // labels[j]: initial branch tracked in slot j
  for (int j = 0; j < f.Q; ++j) labels[j] = j;
  auto current = initial;

  // greedy nearest matching; empty result when the step was too coarse
  auto try_match = [&](const std::vector<Vec>& from,
                       const std::vector<Vec>& to) -> std::vector<int> {
    double minsep = std::numeric_limits<double>::infinity();
    for (int a = 0; a < f.Q; ++a)
      for (int b = a + 1; b < f.Q; ++b)
        minsep = std::min(minsep, (to[a] - to[b]).norm());
    if (minsep < 1e-10)
      throw TrackingLoss("monodromy: branch separation below threshold");
    std::vector<int> assign(f.Q, -1);
    std::vector<bool> taken(f.Q, false);
    for (int a = 0; a < f.Q; ++a) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int b = 0; b < f.Q; ++b) {
        double d = (from[a] - to[b]).norm();
        if (d < best_d) {
          best_d = d;
          best = b;
        }
      }
      if (best_d > 0.45 * minsep || taken[best]) return {};
      assign[a] = best;
      taken[best] = true;
    }
    return assign;
  };

  // advance from a0 to a1, bisecting whenever the matching is ambiguous
  // (eta varies at the scale of single cutoff bumps, so a fixed step can
  // be too coarse locally)
  std::function<std::vector<int>(const std::vector<Vec>&, double, double, int)>
      advance = [&](const std::vector<Vec>& from, double a0, double a1,
                    int depth) -> std::vector<int> {
    auto to = values_at(a1);
    auto assign = try_match(from, to);
    if (!assign.empty()) {
      current = std::move(to);
      return assign;
    }
    if (depth >= 30) throw TrackingLoss("monodromy: ambiguous step matching");
    double mid = 0.5 * (a0 + a1);
    auto first = advance(from, a0, mid, depth + 1);
    auto mid_vals = current;  // copy: `current` mutates during recursion
    auto second = advance(mid_vals, mid, a1, depth + 1);
    std::vector<int> comp(f.Q);
    for (int a = 0; a < f.Q; ++a) comp[a] = second[first[a]];
    return comp;
  };

  for (int s = 1; s <= steps; ++s) {
    double a0 = start + 2.0 * M_PI * (s - 1) / steps;
    double a1 = start + 2.0 * M_PI * s / steps;
    auto from = current;
    auto assign = advance(from, a0, a1, 0);
    std::vector<int> new_labels(f.Q);
    for (int a = 0; a < f.Q; ++a) new_labels[assign[a]] = labels[a];
    labels = std::move(new_labels);
  }
  // slot j now carries initial branch labels[j]; initial branch i ended at
  // the value of slot j with labels[j] = i, i.e. at branch index j
  std::vector<int> perm(f.Q);
  for (int j = 0; j < f.Q; ++j) perm[labels[j]] = j;
  return perm;
}

BlowupResult blowup_flatness(const BranchedFamily& f, const Vec& x,
                             const std::vector<double>& radii, int n_samples,
                             uint64_t seed) {
  if (radii.size() < 2 || n_samples < 1)
    throw InsufficientSamples("blowup: need >= 2 radii and samples");
  BlowupResult out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto height_at = [&](const Vec& z) {
    double h = 0.0;
    for (const auto& s : eval_patches(f, z)) h = std::max(h, s.value.norm());
    return h;
  };
  for (double r : radii) {
    double h = 0.0;
    for (int t = 0; t < n_samples; ++t) {
      double ang = 2.0 * M_PI * unif(rng);
      double rr = r * std::sqrt(unif(rng));
      Vec z(2);
      z << x[0] + rr * std::cos(ang), x[1] + rr * std::sin(ang);
      h = std::max(h, height_at(z));
    }
    // deterministic sweep of every patch support inside the ball
    for (const Patch& p : f.patches) {
      if ((p.z - x).norm() + p.r / 2.0 > r) continue;
      for (int a = 0; a < 16; ++a)
        for (int b = 1; b <= 8; ++b) {
          double ang = 2.0 * M_PI * (a + 0.37) / 16;
          double rr = p.r / 2.0 * b / 9.0;
          Vec z(2);
          z << p.z[0] + rr * std::cos(ang), p.z[1] + rr * std::sin(ang);
          h = std::max(h, height_at(z));
        }
    }
    out.radii.push_back(r);
    out.heights.push_back(h);
    if (h > 0.0)
      out.c_measured = std::max(out.c_measured, h / std::pow(r, f.exponent));
  }
  // least-squares slope of log h vs log r over positive heights
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < out.radii.size(); ++i) {
    if (!(out.heights[i] > 0.0)) continue;
    double lx = std::log(out.radii[i]), ly = std::log(out.heights[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n >= 2) out.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

// ---------------------------------------------------------------------------
// Mass-ratio example

double disk_intersection_area(const Vec& c1, double r1, const Vec& c2,
                              double r2) {
  const double d = (c1 - c2).norm();
  if (d >= r1 + r2) return 0.0;
  const double rs = std::min(r1, r2), rl = std::max(r1, r2);
  if (d <= rl - rs) return M_PI * rs * rs;
  const double a1 =
      std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
  const double a2 =
      std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
  return r1 * r1 * (a1 - std::sin(2.0 * a1) / 2.0) +
         r2 * r2 * (a2 - std::sin(2.0 * a2) / 2.0);
}

MassRatioResult mass_ratio_example(double eps, int n_points, double r, int J,
                                   const QuadratureConfig& cfg) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw SpecError("mass ratio: eps must be in (0, 1]");
  if (n_points < 1) throw SpecError("mass ratio: need at least one ball");
  if (!(r > 0.0)) throw SpecError("mass ratio: radius must be positive");

  sets::SetSpec spec = sets::rational_truncation(eps, n_points, 2);
  const auto& balls = std::get<sets::BallComplementTruncated>(spec.variant);

  sets::Box box;
  box.lo = Vec::Constant(2, -(r + 0.5));
  box.hi = Vec::Constant(2, r + 0.5);
  auto oracle = sets::build_oracle(spec);
  auto dec = whitney::build_whitney(oracle, box, J);
  auto eta = regdist::make_regularized_distance(std::move(dec), 1, 1.0);

  MassRatioResult res;
  res.balls_total = static_cast<int>(balls.centers.size());
  res.resolution = 4.0 * std::pow(0.5, J) * eta.decomposition.root_scale;

  // sampling concentrated in the resolved balls (rejection from the box
  // would almost never hit them)
  std::vector<Vec> samples;
  std::mt19937_64 rng(8891ull);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (size_t i = 0; i < balls.centers.size(); ++i) {
    if (balls.radii[i] < res.resolution) continue;
    for (int t = 0; t < 300; ++t) {
      double ang = 2.0 * M_PI * unif(rng);
      double rr = balls.radii[i] * std::sqrt(unif(rng));
      Vec x = balls.centers[i];
      x[0] += rr * std::cos(ang);
      x[1] += rr * std::sin(ang);
      if (!eta.decomposition.in_root_box(x)) continue;
      auto loc = whitney::locate(eta.decomposition, x);
      if (std::holds_alternative<const DyadicCube*>(loc)) samples.push_back(x);
    }
  }
  const double lip =
      samples.empty() ? 1.0 : regdist::lip_upper_bound(eta, samples, eps / 2.0);

  // sup |grad f_Q| = sup |grad eta| / (4 lip); sampled
  for (const Vec& x : samples)
    res.sup_grad =
        std::max(res.sup_grad, eta_grad_ext(eta, x).norm() / (4.0 * lip));

  // flat part: exact multiplicity-2 area of K_eps cap B_r
  const Vec origin = Vec::Zero(2);
  double removed = 0.0;
  for (size_t i = 0; i < balls.centers.size(); ++i)
    removed += disk_intersection_area(balls.centers[i], balls.radii[i], origin, r);
  res.flat_mass = 2.0 * (M_PI * r * r - removed);

  // excess integrand of the two sheets f_i = i eta / (8 lip)
  auto integrand = [&](const Vec& x) {
    const Vec g = eta_grad_ext(eta, x);
    double s = 0.0;
    for (int i = 1; i <= 2; ++i) {
      const double g2 = (i / (8.0 * lip)) * (i / (8.0 * lip)) * g.squaredNorm();
      s += g2 / (std::sqrt(1.0 + g2) + 1.0);
    }
    return s;
  };
  auto reach_to_circle = [](const Vec& pole, const Vec& center, double radius,
                            double theta) {
    Vec dir(2);
    dir << std::cos(theta), std::sin(theta);
    const Vec d = center - pole;
    const double proj = d.dot(dir);
    const double disc = radius * radius - (d.squaredNorm() - proj * proj);
    return proj + std::sqrt(std::max(disc, 0.0));
  };

  double excess = 0.0;
  for (size_t i = 0; i < balls.centers.size(); ++i) {
    const Vec& c = balls.centers[i];
    const double rb = balls.radii[i];
    const double d = c.norm();
    if (d >= r + rb) continue;          // outside the cylinder
    if (rb < 4.0 * res.resolution) continue;  // mostly collar: flat there
    ++res.balls_resolved;
    // skip the unresolved collar ring near the ball boundary, where the
    // zero-extension jumps: the integrand there is O(collar^2) anyway,
    // and the jump stalls the adaptive refinement
    const double pad = std::min(2.0 * res.resolution, rb / 8.0);
    const double rbe = rb - pad;  // effective (resolved) ball radius
    if (d >= r + rbe) continue;
    Vec pole = c;
    if (d + 1e-12 >= r) {  // ball center outside B_r: pole inside the lens
      const double mid = (d - rbe + r) / 2.0;
      pole = c * (mid / d);
    }
    auto reach = [&](double theta) {
      return std::min(reach_to_circle(pole, c, rbe, theta),
                      reach_to_circle(pole, origin, r, theta));
    };
    excess += quadrature::integrate_polar(integrand, pole, reach, cfg).value;
  }

  res.total_mass = 2.0 * M_PI * r * r + excess;
  res.ratio = res.flat_mass / res.total_mass;
  res.analytic_lower_bound =
      (1.0 - eps * eps / 3.0) / (1.0 + res.sup_grad * res.sup_grad);
  return res;
}

}  // namespace almostmin::families
