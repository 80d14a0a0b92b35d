#include "almostmin/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace almostmin::verify {

using currents::MultiGraph;
using nlohmann::json;

json VerificationReport::to_json() const {
  json j;
  j["family_meta"] = family_meta;
  j["balls"] = json::array();
  for (const auto& b : balls) {
    json jb;
    jb["center"] = std::vector<double>(b.center.data(),
                                       b.center.data() + b.center.size());
    jb["r"] = b.r;
    jb["case"] = std::string(1, b.case_label);
    jb["q"] = b.q;
    jb["mass"] = b.mass;
    jb["excess"] = b.excess;
    jb["dirichlet"] = b.dirichlet;
    jb["competitor_gap"] = b.competitor_gap;
    jb["pass"] = b.pass;
    j["balls"].push_back(std::move(jb));
  }
  j["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
  j["constants"] = {{"C0", constants.C0},
                    {"C4", constants.C4},
                    {"kappa", constants.kappa},
                    {"Cbar", constants.Cbar}};
  return j;
}

namespace {

FitResult pooled_fit(const std::vector<std::vector<std::pair<double, double>>>&
                         groups) {  // per center: (log r, log excess)
  FitResult fit;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    double xb = 0.0, yb = 0.0;
    for (const auto& [x, y] : g) {
      xb += x;
      yb += y;
    }
    xb /= g.size();
    yb /= g.size();
    for (const auto& [x, y] : g) {
      sxx += (x - xb) * (x - xb);
      sxy += (x - xb) * (y - yb);
    }
    fit.points += static_cast<int>(g.size());
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  double ss_tot = 0.0, ss_res = 0.0, icpt = 0.0;
  int n_groups = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    double xb = 0.0, yb = 0.0;
    for (const auto& [x, y] : g) {
      xb += x;
      yb += y;
    }
    xb /= g.size();
    yb /= g.size();
    icpt += yb - fit.slope * xb;
    ++n_groups;
    for (const auto& [x, y] : g) {
      ss_tot += (y - yb) * (y - yb);
      double e = y - yb - fit.slope * (x - xb);
      ss_res += e * e;
    }
  }
  if (n_groups > 0) fit.intercept = icpt / n_groups;
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

VerificationReport verify_excess_decay(
    const MultiGraph& F, const BallCampaign& campaign, double target_exponent,
    const std::function<char(const Vec&, double)>& classify) {
  VerificationReport rep;
  rep.constants.C0 = 0.0;
  std::vector<std::vector<std::pair<double, double>>> groups;
  for (const Vec& c : campaign.centers) {
    groups.emplace_back();
    for (double r : campaign.radii) {
      if (r > campaign.r0_budget) continue;
      BallResult b;
      b.center = c;
      b.r = r;
      b.q = F.q;
      b.case_label = classify ? classify(c, r) : 'g';
      try {
        auto e = currents::excess(F, c, r, campaign.quad);
        b.excess = e.value;
        b.mass = e.value + F.q * geom::unit_ball_volume(F.m) * std::pow(r, F.m);
        if (campaign.with_dirichlet)
          b.dirichlet = currents::dirichlet(F, c, r, campaign.quad).value;
        if (campaign.with_competitor) {
          auto comp = currents::affine_competitor_mass(
              F, c, r, campaign.collar_fraction, campaign.quad);
          b.competitor_gap = b.mass - comp.value;
        }
        const double ratio = b.excess / std::pow(r, target_exponent);
        rep.constants.C0 = std::max(rep.constants.C0, ratio);
        b.pass = b.excess >= -10.0 * std::max(e.error, 1e-14) &&
                 (!std::isfinite(campaign.c0_config) ||
                  ratio <= campaign.c0_config);
        // away from every branch patch the support is flat with multiplicity
        if (b.case_label == 'a')
          b.pass = b.pass && b.excess <= 100.0 * std::max(e.error, 1e-12);
        // the decay-rate fit is meaningful at singular centers only
        if (b.excess > 0.0 && (b.case_label == 'g' || b.case_label == 'c'))
          groups.back().emplace_back(std::log(r), std::log(b.excess));
      } catch (const Error& err) {
        b.pass = false;
        b.note = err.what();
      }
      rep.pass = rep.pass && b.pass;
      rep.balls.push_back(std::move(b));
    }
  }
  rep.fit = pooled_fit(groups);
  if (rep.fit.points >= 4)
    rep.pass = rep.pass &&
               rep.fit.slope >= target_exponent - campaign.slope_tol;
  return rep;
}

DirichletCheck verify_dirichlet_bound(const MultiGraph& F, const Vec& center,
                                      double r, double alpha,
                                      const std::vector<Vec>& samples,
                                      const QuadratureConfig& cfg,
                                      double tol) {
  if (samples.size() < 2)
    throw InsufficientSamples("dirichlet bound: need sample points");
  const int q = F.q;
  const double diam = 2.0 * r;
  const double diam_a = std::pow(diam, alpha);

  std::vector<Vec> in_disk;
  for (const Vec& x : samples)
    if ((x - center).norm() < r) in_disk.push_back(x);
  if (in_disk.size() < 2)
    throw InsufficientSamples("dirichlet bound: no samples in the disk");

  const int ns = static_cast<int>(in_disk.size());
  std::vector<std::vector<geom::Mat>> grads(ns);
  for (int s = 0; s < ns; ++s) {
    auto vals = F.eval(in_disk[s]);
    grads[s].reserve(q);
    for (const auto& v : vals) grads[s].push_back(v.jacobian);
  }

  DirichletCheck out;
  // anchors: per sheet, the sample with the smallest gradient
  std::vector<int> anchor(q, 0);
  double c1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < ns; ++s) {
      double g = grads[s][i].norm();
      if (g < best) {
        best = g;
        anchor[i] = s;
      }
    }
    c1 = std::min(c1, best / diam_a);
  }
  out.c1 = c1;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      if (i == j) continue;
      double d = (grads[anchor[i]][i] - grads[anchor[i]][j]).norm();
      out.c2 = std::max(out.c2, d / diam_a);
    }
  const int cap = std::min(ns, 250);
  for (int i = 0; i < q; ++i)
    for (int s = 0; s < cap; ++s)
      for (int t = s + 1; t < cap; ++t)
        out.c3 = std::max(out.c3, (grads[s][i] - grads[t][i]).norm() / diam_a);

  out.cbar = (out.c1 + out.c2 + out.c3) * (out.c1 + out.c2 + out.c3);
  out.hypotheses_ok = std::isfinite(out.cbar);
  out.lhs = currents::dirichlet(F, center, r, cfg).value;
  out.rhs = out.cbar * q * std::pow(diam, 2.0 * alpha) *
            geom::unit_ball_volume(F.m) * std::pow(r, F.m);
  out.pass = out.hypotheses_ok && out.lhs <= out.rhs * (1.0 + tol);
  return out;
}

BombieriReport verify_bombieri_form(const MultiGraph& F,
                                    const BallCampaign& campaign,
                                    double alpha) {
  BombieriReport rep;
  for (const Vec& c : campaign.centers)
    for (double r : campaign.radii) {
      if (r > campaign.r0_budget) continue;
      BombieriRecord rec;
      rec.center = c;
      rec.r = r;
      auto e = currents::excess(F, c, r, campaign.quad);
      rec.excess = e.value;
      rec.cylinder_mass =
          e.value + F.q * geom::unit_ball_volume(F.m) * std::pow(r, F.m);
      rec.c_measured =
          rec.excess / (std::pow(r, 2.0 * alpha) * rec.cylinder_mass);
      rep.c_max = std::max(rep.c_max, rec.c_measured);
      rep.records.push_back(std::move(rec));
    }
  return rep;
}

CompetitorReport verify_competitor(const MultiGraph& F,
                                   const BallCampaign& campaign,
                                   double target_exponent,
                                   double collar_fraction) {
  CompetitorReport rep;
  for (const Vec& c : campaign.centers)
    for (double r : campaign.radii) {
      if (r > campaign.r0_budget) continue;
      CompetitorRecord rec;
      rec.center = c;
      rec.r = r;
      rec.mass = currents::mass_over_cylinder(F, c, r, campaign.quad).value;
      rec.competitor_mass =
          currents::affine_competitor_mass(F, c, r, collar_fraction,
                                           campaign.quad)
              .value;
      rec.gap = rec.mass - rec.competitor_mass;
      rec.gap_over_power = rec.gap / std::pow(r, target_exponent);
      rep.c0_witnessed = std::max(rep.c0_witnessed, rec.gap_over_power);
      rep.records.push_back(std::move(rec));
    }
  return rep;
}

std::vector<SingularMassRow> singular_mass_report(
    const std::vector<double>& eps_values, int n_points, double r, int J,
    const QuadratureConfig& cfg) {
  std::vector<SingularMassRow> rows;
  for (double eps : eps_values) {
    SingularMassRow row;
    row.eps = eps;
    row.result = families::mass_ratio_example(eps, n_points, r, J, cfg);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Vec> stratified_graph_centers(const families::GraphFamily& fam,
                                          const sets::Box& box, int per_class,
                                          uint64_t seed) {
  std::vector<Vec> centers;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = box.dim();
  auto random_in_box = [&]() {
    Vec x(m);
    for (int d = 0; d < m; ++d)
      x[d] = box.lo[d] + unif(rng) * (box.hi[d] - box.lo[d]);
    return x;
  };
  // points of K
  for (const Vec& w : fam.K_oracle.member_witnesses) {
    if (static_cast<int>(centers.size()) >= per_class) break;
    bool inside = true;
    for (int d = 0; d < m; ++d)
      if (w[d] < box.lo[d] || w[d] > box.hi[d]) inside = false;
    if (inside) centers.push_back(w);
  }
  // near the outer boundary of E, deep flat points, random points
  int near = 0, flat = 0, rnd = 0;
  for (int t = 0; t < 200000 && (near < per_class || flat < per_class);
       ++t) {
    Vec x = random_in_box();
    double dk = fam.K_oracle.dist_fn(x);
    if (near < per_class && dk > 0.85 && dk < 0.98) {
      centers.push_back(x);
      ++near;
    } else if (flat < per_class && dk > 1.2) {
      centers.push_back(x);
      ++flat;
    }
  }
  for (; rnd < per_class; ++rnd) centers.push_back(random_in_box());
  return centers;
}

std::vector<Vec> stratified_branched_centers(
    const families::BranchedFamily& fam, int n_patches, uint64_t seed) {
  std::vector<Vec> centers;
  std::mt19937_64 rng(seed);
  if (fam.patches.empty()) return centers;
  const size_t stride = std::max<size_t>(1, fam.patches.size() / n_patches);
  for (size_t i = 0; i < fam.patches.size() &&
       centers.size() < static_cast<size_t>(3 * n_patches); i += stride) {
    const auto& p = fam.patches[i];
    centers.push_back(p.z);  // case c for small r
    Vec off = p.z;           // on the support ring: case b for tiny r
    off[1] += 0.35 * p.r;
    centers.push_back(off);
    Vec far = p.z;           // outside the support: case a for tiny r
    far[0] += 0.45 * 4.0 * p.r;  // 0.45 * side, inside the cube, off support
    far[1] += 0.45 * 4.0 * p.r;
    centers.push_back(far);
  }
  return centers;
}

std::pair<double, double> tilted_excess_crosscheck(
    const families::GraphFamily& fam, const Vec& center, double r,
    const QuadratureConfig& cfg) {
  MultiGraph base = fam.as_multigraph();
  const double flat_excess = currents::excess(base, center, r, cfg).value;

  const int m = fam.m();
  const int mid = (fam.Q + 1) / 2;
  geom::LinearGraphMap A{fam.sheet_grad(mid, center).transpose()};

  std::vector<currents::ReparamResult> reps;
  for (int i = 1; i <= fam.Q; ++i) {
    currents::ReparamInput in;
    in.m = m;
    in.n = 1;
    const int sheet = i;
    const families::GraphFamily* f = &fam;
    in.f = [f, sheet](const Vec& x) {
      currents::SheetValue v;
      v.value = Vec::Constant(1, f->sheet_value(sheet, x));
      v.jacobian = f->sheet_grad(sheet, x).transpose();
      return v;
    };
    in.x_prime = center;
    in.x_bar = Vec::Constant(1, fam.sheet_value(mid, center));
    in.A = A;
    in.r = r;
    in.delta = 0.5;
    in.sigma = 0.4;
    in.lambda = 0.5;
    reps.push_back(currents::reparametrize(in));
  }

  MultiGraph tilted;
  tilted.m = m;
  tilted.n = 1;
  tilted.q = fam.Q;
  auto shared = std::make_shared<std::vector<currents::ReparamResult>>(
      std::move(reps));
  tilted.eval = [shared](const Vec& z) {
    std::vector<currents::SheetValue> out;
    out.reserve(shared->size());
    for (const auto& rr : *shared) out.push_back(rr.g(z));
    return out;
  };
  Vec lifted(m + 1);
  lifted.head(m) = center;
  lifted[m] = fam.sheet_value(mid, center);
  Vec z0 = (*shared)[0].plane.tangent.transpose() * lifted;
  const double tilted_excess = currents::excess(tilted, z0, r, cfg).value;
  return {flat_excess, tilted_excess};
}

}  // namespace almostmin::verify
