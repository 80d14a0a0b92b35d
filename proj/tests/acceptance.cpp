// End-to-end acceptance suite: one pass/fail line per criterion.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "almostmin/config.hpp"
#include "almostmin/verify.hpp"

using namespace almostmin;
using geom::Mat;
using geom::Vec;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

sets::Box boxn(int m, double lo, double hi) {
  sets::Box b;
  b.lo = Vec::Constant(m, lo);
  b.hi = Vec::Constant(m, hi);
  return b;
}

Vec v1(double a) { return Vec::Constant(1, a); }

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

sets::SetSpec finite(std::vector<Vec> pts) {
  sets::FinitePoints fp;
  fp.points = std::move(pts);
  return sets::SetSpec{std::move(fp)};
}

sets::SetSpec cantor(int m, int axis, double ratio, int depth = 16) {
  sets::CantorProduct cp;
  cp.ratio = ratio;
  cp.depth = depth;
  cp.axis = axis;
  cp.m = m;
  return sets::SetSpec{std::move(cp)};
}

struct Check {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

// caches shared between criteria (built once, reused read-only)
std::optional<families::GraphFamily> g_cloud_family;
std::optional<families::BranchedFamily> g_branched_q2;
std::optional<verify::BallCampaign> g_branched_campaign;
std::function<char(const Vec&, double)> g_branched_classify;

// ---------------------------------------------------------------------------
// 1. Whitney decompositions across the set variants.

Check crit_whitney() {
  Check c;
  struct Entry {
    std::string name;
    sets::SetSpec spec;
    sets::Box box;
  };
  std::vector<Entry> entries;
  auto add = [&](std::string name, sets::SetSpec s, sets::Box b) {
    entries.push_back({std::move(name), std::move(s), std::move(b)});
  };

  add("point-1d", finite({v1(0.0)}), boxn(1, -2.0, 2.0));
  add("points3-1d", finite({v1(-1.0), v1(0.5), v1(1.0)}), boxn(1, -2.0, 2.0));
  add("close-pair-1d", finite({v1(0.0), v1(1e-3), v1(0.7)}), boxn(1, -1.0, 1.0));
  add("point-2d", finite({v2(0.0, 0.0)}), boxn(2, -2.0, 2.0));
  {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(v2(u(rng), u(rng)));
    add("cloud5-2d", finite(std::move(pts)), boxn(2, -2.0, 2.0));
  }
  {
    std::vector<Vec> grid;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) grid.push_back(v2(2.5 * i, 2.5 * j));
    add("grid16-2d", finite(std::move(grid)), boxn(2, -1.25, 8.75));
  }
  add("cantor13-1d", cantor(1, 0, 1.0 / 3.0), boxn(1, -1.0, 2.0));
  add("cantor14-1d", cantor(1, 0, 0.25, 14), boxn(1, -1.0, 2.0));
  add("cantor-2d-x", cantor(2, 0, 1.0 / 3.0), boxn(2, -1.0, 2.0));
  add("cantor-2d-y", cantor(2, 1, 0.3), boxn(2, -1.0, 2.0));
  add("shrinking-balls-8", sets::rational_truncation(0.5, 8, 2),
      boxn(2, -1.5, 1.5));
  add("shrinking-balls-12", sets::rational_truncation(0.25, 12, 2),
      boxn(2, -1.5, 1.5));
  {
    sets::BallComplementTruncated bc;
    bc.m = 2;
    bc.centers = {v2(-0.4, 0.0), v2(0.5, 0.2)};
    bc.radii = {0.3, 0.2};
    add("two-balls-2d", sets::SetSpec{std::move(bc)}, boxn(2, -1.0, 1.0));
  }
  add("disk-complement-05", sets::SetSpec{sets::UnitDiskComplement{2, 0.5}},
      boxn(2, -1.0, 1.0));
  add("disk-complement-03", sets::SetSpec{sets::UnitDiskComplement{2, 0.3}},
      boxn(2, -1.0, 1.0));
  add("interval-complement", sets::SetSpec{sets::UnitDiskComplement{1, 0.5}},
      boxn(1, -1.0, 1.0));
  {
    sets::Union un;
    un.parts.push_back(finite({v1(-0.5)}));
    un.parts.push_back(cantor(1, 0, 1.0 / 3.0));
    add("union-1d", sets::SetSpec{std::move(un)}, boxn(1, -1.0, 2.0));
  }
  {
    sets::Union un;
    un.parts.push_back(finite({v2(0.0, 0.0)}));
    un.parts.push_back(finite({v2(1.0, 1.0)}));
    add("union-2d", sets::SetSpec{std::move(un)}, boxn(2, -2.0, 2.0));
  }
  {
    sets::Inflation inf;
    inf.base = std::make_unique<sets::SetSpec>(finite({v1(0.0)}));
    inf.threshold = 1.0;
    add("inflated-point-1d", sets::SetSpec{std::move(inf)}, boxn(1, -2.0, 2.0));
  }
  {
    sets::Inflation inf;
    inf.base = std::make_unique<sets::SetSpec>(finite({v2(0.0, 0.0)}));
    inf.threshold = 0.8;
    add("inflated-point-2d", sets::SetSpec{std::move(inf)}, boxn(2, -2.0, 2.0));
  }
  {
    sets::Inflation inf;
    inf.base = std::make_unique<sets::SetSpec>(
        finite({v2(0.0, 0.0), v2(1.5, 0.0), v2(0.0, 1.5)}));
    inf.threshold = 1.0;
    add("inflated-cloud-2d", sets::SetSpec{std::move(inf)}, boxn(2, -3.0, 3.0));
  }

  const int J = 12;
  std::vector<int> lambda_by_m(3, 0);
  double worst_time = 0.0;
  int built = 0;
  for (const auto& e : entries) {
    auto oracle = sets::build_oracle(e.spec);
    auto t0 = Clock::now();
    auto dec = whitney::build_whitney(oracle, e.box, J);
    double dt = seconds_since(t0);
    worst_time = std::max(worst_time, dt);
    c.require(dt <= 60.0, e.name + ": build took " + std::to_string(dt) + " s");
    c.require(!dec.cubes.empty(), e.name + ": empty decomposition");
    ++built;

    // certified distance/diameter ratio in [1, 4] modulo oracle accuracy
    const double acc = oracle.accuracy;
    size_t stride = std::max<size_t>(1, dec.cubes.size() / 50000);
    bool ratio_ok = true, locate_ok = true;
    for (size_t i = 0; i < dec.cubes.size(); i += stride) {
      const auto& cu = dec.cubes[i];
      const double diam = dec.diam(cu);
      // min of the oracle over a 3^m grid inside the cube
      double grid_min = std::numeric_limits<double>::infinity();
      std::vector<int> idx(dec.m, 0);
      int total = 1;
      for (int d = 0; d < dec.m; ++d) total *= 3;
      for (int t = 0; t < total; ++t) {
        int rem = t;
        Vec p = cu.center;
        for (int d = 0; d < dec.m; ++d) {
          p[d] += (rem % 3 - 1) * cu.side / 3.0;
          rem /= 3;
        }
        grid_min = std::min(grid_min, oracle.dist_fn(p));
      }
      if (grid_min < diam * (1.0 - 1e-9) - 2.0 * acc) ratio_ok = false;
      if (cu.level > 0 &&
          grid_min > 4.0 * diam * (1.0 + 1e-9) + diam / 3.0 + 2.0 * acc)
        ratio_ok = false;
    }
    c.require(ratio_ok, e.name + ": dist/diam ratio out of [1,4]");
    size_t lstride = std::max<size_t>(1, dec.cubes.size() / 200);
    for (size_t i = 0; i < dec.cubes.size(); i += lstride) {
      auto loc = whitney::locate(dec, dec.cubes[i].center);
      auto* cp = std::get_if<const whitney::DyadicCube*>(&loc);
      if (!cp || *cp != &dec.cubes[i]) locate_ok = false;
    }
    c.require(locate_ok, e.name + ": locate misses a cube center");

    auto stats = whitney::neighbor_stats(dec);
    c.require(stats.min_side_ratio >= 0.25 - 1e-12 &&
                  stats.max_side_ratio <= 4.0 + 1e-12,
              e.name + ": neighbor side ratio outside [1/4,4]");
    lambda_by_m[dec.m] = std::max(lambda_by_m[dec.m], stats.max_touching);
  }

  // determinism: rebuilding gives identical geometry and neighbor counts
  {
    auto oracle = sets::build_oracle(entries[3].spec);
    auto d1 = whitney::build_whitney(oracle, entries[3].box, J);
    auto d2 = whitney::build_whitney(oracle, entries[3].box, J);
    bool same = d1.cubes.size() == d2.cubes.size();
    for (size_t i = 0; same && i < d1.cubes.size(); ++i)
      same = d1.cubes[i].level == d2.cubes[i].level &&
             d1.cubes[i].index == d2.cubes[i].index;
    c.require(same, "rebuild changed the decomposition");
    c.require(whitney::neighbor_stats(d1).max_touching ==
                  whitney::neighbor_stats(d2).max_touching,
              "rebuild changed the touching-neighbor bound");
  }

  // degenerate input: a set with empty complement is flagged, not decomposed
  {
    bool flagged = false;
    try {
      auto oracle = sets::build_oracle(sets::SetSpec{sets::Everything{1}});
      auto dec = whitney::build_whitney(oracle, boxn(1, -1.0, 1.0), 6);
      flagged = dec.cubes.empty();
    } catch (const Error&) {
      flagged = true;
    }
    c.require(flagged, "empty complement was not flagged");
  }

  c.note << built << " sets at J=" << J << ", max touching neighbors m=1:"
         << lambda_by_m[1] << " m=2:" << lambda_by_m[2] << ", slowest build "
         << worst_time << " s";
  return c;
}

// ---------------------------------------------------------------------------
// 2. Regularized distance: comparability, derivative bounds, Hoelder
//    stability, and decay of all derivatives up to order k along approaches.

Check crit_regdist() {
  Check c;
  struct SetCase {
    std::string name;
    sets::SetSpec spec;
    sets::Box box;
    std::function<std::pair<Vec, Vec>(int)> approach;  // i -> (base, direction)
  };
  std::vector<SetCase> cases;
  cases.push_back({"origin-1d", finite({v1(0.0)}), boxn(1, -2.0, 2.0),
                   [](int i) {
                     return std::make_pair(v1(0.0), v1(i % 2 ? 1.0 : -1.0));
                   }});
  cases.push_back({"cantor-line-2d", cantor(2, 0, 1.0 / 3.0),
                   boxn(2, -2.0, 2.0), [](int i) {
                     // binary digits of i pick left/right thirds
                     double t = 0.0, w = 1.0;
                     for (int b = 0; b < 7; ++b) {
                       w /= 3.0;
                       if ((i >> b) & 1) t += 2.0 * w;
                     }
                     return std::make_pair(v2(t, 0.0),
                                           v2(0.0, i % 2 ? 1.0 : -1.0));
                   }});

  double worst_cc = 0.0;
  for (auto& sc : cases) {
    auto oracle = sets::build_oracle(sc.spec);
    auto dec = whitney::build_whitney(oracle, sc.box, 12);
    for (int k : {1, 2}) {
      for (double as : {0.5, 1.0}) {
        auto eta = regdist::make_regularized_distance(dec, k, as);
        std::string tag = sc.name + " k=" + std::to_string(k) +
                          " a*=" + std::to_string(as);

        auto samples = regdist::resolved_samples(eta, sc.box, 14000, 211);
        auto comp = regdist::comparability_scan(eta, samples, 10000);
        c.require(comp.used_samples >= 10000, tag + ": too few samples");
        c.require(comp.c_low > 0.0 && std::isfinite(comp.c_high),
                  tag + ": degenerate comparability");
        double cc = comp.c_high / comp.c_low;
        worst_cc = std::max(worst_cc, cc);
        c.require(cc <= 100.0,
                  tag + ": comparability ratio " + std::to_string(cc));
        int max_ord = 0;
        for (const auto& [beta, val] : comp.c_beta) {
          c.require(std::isfinite(val), tag + ": infinite derivative bound");
          max_ord = std::max(max_ord, bump::multi_order(beta));
        }
        c.require(max_ord == k + 1, tag + ": derivative orders not covered");

        // order-k Hoelder seminorm stable under 4x the pair count
        auto p1 = regdist::stratified_pairs(eta, sc.box, 2000, 733);
        auto p2 = regdist::stratified_pairs(eta, sc.box, 8000, 733);
        double s1 = regdist::holder_seminorm(eta, k, as, p1);
        double s2 = regdist::holder_seminorm(eta, k, as, p2);
        c.require(std::isfinite(s1) && std::isfinite(s2) && s1 > 0.0,
                  tag + ": degenerate seminorm");
        c.require(std::abs(s2 - s1) <= 0.1 * std::max(s1, s2),
                  tag + ": seminorm unstable (" + std::to_string(s1) + " vs " +
                      std::to_string(s2) + ")");

        // all derivatives up to order k vanish along approaches to E
        auto betas = regdist::multi_indices_up_to(eta.decomposition.m, k);
        betas.insert(betas.begin(),
                     bump::MultiIndex(eta.decomposition.m, 0));  // the value
        int bad = 0;
        for (int i = 0; i < 100; ++i) {
          auto [base, dir] = sc.approach(i);
          double head = 0.0, tail = 0.0;
          for (int j = 0; j <= 14; ++j) {
            Vec x = base + 0.7 * std::pow(0.5, j) * dir;
            double mj = 0.0;
            for (const auto& beta : betas)
              mj = std::max(mj,
                            std::abs(regdist::eval_deriv_extended(eta, x, beta)));
            if (j <= 2) head = std::max(head, mj);
            if (j >= 12) tail = std::max(tail, mj);
          }
          if (head > 0.0 && tail > 0.05 * head + 1e-12) ++bad;
        }
        c.require(bad == 0, tag + ": " + std::to_string(bad) +
                                " approach sequences fail to vanish");
      }
    }
  }
  c.note << "2 sets x 4 (k, a*) configs, worst two-sided comparability "
         << worst_cc << ", 100 approach sequences each";
  return c;
}

// ---------------------------------------------------------------------------
// 3. Jet-arithmetic derivatives against central finite differences.

Check crit_jets_vs_fd() {
  Check c;
  const double kRel = 1e-5;
  auto rel_ok = [&](double jet, double fd) {
    return std::abs(jet - fd) <= kRel * std::max({0.1, std::abs(jet)});
  };

  // regularized distance, 1-D (k=2) and 2-D (k=1)
  {
    auto oracle = sets::build_oracle(finite({v1(0.0)}));
    auto dec = whitney::build_whitney(oracle, boxn(1, -2.0, 2.0), 12);
    auto eta = regdist::make_regularized_distance(std::move(dec), 2, 1.0);
    auto pts = regdist::resolved_samples(eta, boxn(1, -2.0, 2.0), 1000, 311,
                                         0.05);
    const double h = 1e-6;
    int bad = 0;
    bump::MultiIndex b1{1}, b2{2};
    for (const Vec& x : pts) {
      double fd1 = (regdist::eval_eta(eta, x + v1(h)) -
                    regdist::eval_eta(eta, x - v1(h))) /
                   (2.0 * h);
      double fd2 = (regdist::eval_deriv(eta, x + v1(h), b1) -
                    regdist::eval_deriv(eta, x - v1(h), b1)) /
                   (2.0 * h);
      if (!rel_ok(regdist::eval_deriv(eta, x, b1), fd1)) ++bad;
      if (!rel_ok(regdist::eval_deriv(eta, x, b2), fd2)) ++bad;
    }
    c.require(bad == 0, "1-D eta: " + std::to_string(bad) + " FD mismatches");
  }
  {
    auto oracle = sets::build_oracle(cantor(2, 0, 1.0 / 3.0));
    auto dec = whitney::build_whitney(oracle, boxn(2, -2.0, 2.0), 11);
    auto eta = regdist::make_regularized_distance(std::move(dec), 1, 1.0);
    auto pts = regdist::resolved_samples(eta, boxn(2, -2.0, 2.0), 1000, 313,
                                         0.05);
    const double h = 1e-6;
    int bad = 0;
    for (const Vec& x : pts) {
      for (int d = 0; d < 2; ++d) {
        Vec e = Vec::Zero(2);
        e[d] = h;
        bump::MultiIndex beta{0, 0};
        beta[d] = 1;
        double fd = (regdist::eval_eta(eta, x + e) -
                     regdist::eval_eta(eta, x - e)) /
                    (2.0 * h);
        if (!rel_ok(regdist::eval_deriv(eta, x, beta), fd)) ++bad;
      }
    }
    c.require(bad == 0, "2-D eta: " + std::to_string(bad) + " FD mismatches");
  }

  // reparametrized sheets over tilted planes, 1-D and 2-D
  auto check_reparam_fd = [&](const currents::ReparamInput& in,
                              const std::string& tag) {
    auto res = currents::reparametrize(in);
    std::mt19937_64 rng(317);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-5;
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      Vec z = res.y_prime;
      for (int d = 0; d < in.m; ++d)
        z[d] += u(rng) * res.domain_radius * 0.85 / std::sqrt((double)in.m);
      auto g = res.g(z);
      for (int d = 0; d < in.m; ++d) {
        Vec e = Vec::Zero(in.m);
        e[d] = h;
        Vec fd = (res.g(z + e).value - res.g(z - e).value) / (2.0 * h);
        for (int r = 0; r < in.n; ++r)
          if (!rel_ok(g.jacobian(r, d), fd[r])) ++bad;
      }
    }
    c.require(bad == 0, tag + ": " + std::to_string(bad) + " FD mismatches");
  };
  {
    currents::ReparamInput in;
    in.m = 1;
    in.n = 1;
    in.f = [](const Vec& x) {
      currents::SheetValue s;
      s.value = Vec::Constant(1, x[0] * x[0] / 10.0);
      s.jacobian = Mat::Constant(1, 1, x[0] / 5.0);
      return s;
    };
    in.x_prime = v1(0.5);
    in.x_bar = v1(0.025);
    in.A = geom::LinearGraphMap{Mat::Constant(1, 1, 0.1)};
    in.r = 0.5;
    in.delta = 0.5;
    in.sigma = 0.4;
    in.lambda = 0.2;
    check_reparam_fd(in, "1-D reparametrized sheet");
  }
  {
    currents::ReparamInput in;
    in.m = 2;
    in.n = 1;
    in.f = [](const Vec& x) {
      currents::SheetValue s;
      s.value = Vec::Constant(1, (x[0] * x[0] + 2.0 * x[1] * x[1]) / 10.0);
      Mat J(1, 2);
      J << x[0] / 5.0, 2.0 * x[1] / 5.0;
      s.jacobian = J;
      return s;
    };
    in.x_prime = v2(0.3, 0.2);
    in.x_bar = Vec::Constant(1, in.f(in.x_prime).value[0]);
    Mat A(1, 2);
    A << 0.06, 0.08;
    in.A = geom::LinearGraphMap{A};
    in.r = 0.5;
    in.delta = 0.5;
    in.sigma = 0.4;
    in.lambda = 0.7;
    check_reparam_fd(in, "2-D reparametrized sheet");
  }
  c.note << "1000 points per object, relative tolerance 1e-5";
  return c;
}

// ---------------------------------------------------------------------------
// 4. Reparametrization: round trips, seminorm transfer, pairwise
//    relative-gradient bound, infeasible-cylinder rejection.

currents::ReparamInput quadratic_input_2d(double coeff) {
  currents::ReparamInput in;
  in.m = 2;
  in.n = 1;
  in.f = [coeff](const Vec& x) {
    currents::SheetValue s;
    s.value =
        Vec::Constant(1, coeff * (x[0] * x[0] + 2.0 * x[1] * x[1]) / 10.0);
    Mat J(1, 2);
    J << coeff * x[0] / 5.0, coeff * 2.0 * x[1] / 5.0;
    s.jacobian = J;
    return s;
  };
  in.x_prime = v2(0.3, 0.2);
  in.x_bar = Vec::Constant(1, in.f(in.x_prime).value[0]);
  Mat A(1, 2);
  A << 0.048, 0.064;  // gradient of the coeff = 0.8 member at x_prime
  in.A = geom::LinearGraphMap{A};
  in.r = 0.5;
  in.delta = 0.5;
  in.sigma = 0.4;
  in.lambda = 0.6 * coeff + 0.15;
  return in;
}

Check crit_reparam() {
  Check c;

  auto round_trip = [&](const currents::ReparamInput& in,
                        const std::string& tag) {
    auto res = currents::reparametrize(in);
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Vec z = res.y_prime;
      for (int d = 0; d < in.m; ++d)
        z[d] += u(rng) * res.domain_radius * 0.95 / std::sqrt((double)in.m);
      auto g = res.g(z);
      Vec ambient = res.plane.embed(z, g.value);
      Vec x = ambient.head(in.m);
      worst = std::max(worst,
                       std::abs(ambient[in.m] - in.f(x).value[0]));
    }
    c.require(worst <= 1e-9,
              tag + ": round-trip residual " + std::to_string(worst));
    c.require(res.stats->max_residual <= 1e-9, tag + ": Newton residual");
    auto cmp1 = currents::check_hseminorm(in, res, 0.5, 400, 402);
    auto cmp2 = currents::check_hseminorm(in, res, 0.5, 1600, 403);
    c.require(std::isfinite(cmp1.ratio) && std::isfinite(cmp2.ratio),
              tag + ": seminorm ratio not finite");
    c.require(cmp1.lhs <= 10.0 * std::max(cmp1.rhs, 1e-6) &&
                  cmp2.lhs <= 10.0 * std::max(cmp2.rhs, 1e-6),
              tag + ": seminorm blow-up under the chart change");
    c.require(cmp2.ratio <= 3.0 * cmp1.ratio + 1.0 &&
                  cmp1.ratio <= 3.0 * cmp2.ratio + 1.0,
              tag + ": seminorm ratio unstable");
    return res;
  };

  {
    currents::ReparamInput in;
    in.m = 1;
    in.n = 1;
    in.f = [](const Vec& x) {
      currents::SheetValue s;
      s.value = Vec::Constant(1, x[0] * x[0] / 10.0);
      s.jacobian = Mat::Constant(1, 1, x[0] / 5.0);
      return s;
    };
    in.x_prime = v1(0.5);
    in.x_bar = v1(0.025);
    in.A = geom::LinearGraphMap{Mat::Constant(1, 1, 0.1)};
    in.r = 0.5;
    in.delta = 0.5;
    in.sigma = 0.4;
    in.lambda = 0.2;
    round_trip(in, "1-D parabola");
  }
  round_trip(quadratic_input_2d(0.8), "2-D quadratic");

  // pairwise relative-gradient bound over 5 sheet pairs x 1000 samples
  std::vector<double> coeffs{0.4, 0.6, 0.8, 1.0, 1.2};
  double worst_violation = -1e300;
  for (size_t i = 0; i + 1 < coeffs.size(); ++i) {
    double v = currents::check_relgrad(quadratic_input_2d(coeffs[i]),
                                       quadratic_input_2d(coeffs[i + 1]), 0.5,
                                       1000, 404 + (uint64_t)i);
    worst_violation = std::max(worst_violation, v);
  }
  worst_violation = std::max(
      worst_violation, currents::check_relgrad(quadratic_input_2d(0.4),
                                               quadratic_input_2d(1.2), 0.5,
                                               1000, 409));
  c.require(worst_violation <= 1e-8, "relative-gradient bound violated by " +
                                         std::to_string(worst_violation));

  // infeasible cylinders are rejected up front
  int rejected = 0;
  for (int variant = 0; variant < 3; ++variant) {
    auto in = quadratic_input_2d(0.8);
    if (variant == 0) in.lambda = 2.0;   // tau drops below delta
    if (variant == 1) in.delta = 0.999;  // no slack left for the tilt
    if (variant == 2) {
      in.delta = 0.9;
      in.sigma = 3.0;
      Mat A(1, 2);
      A << 1.2, 0.0;
      in.A = geom::LinearGraphMap{A};
    }
    try {
      currents::reparametrize(in);
    } catch (const CloseEnoughViolation&) {
      ++rejected;
    }
  }
  c.require(rejected == 3, "only " + std::to_string(rejected) +
                               "/3 infeasible cylinders rejected");

  c.note << "round trips <= 1e-9 at 1000 points, relgrad margin "
         << worst_violation << ", 3/3 rejections";
  return c;
}

// ---------------------------------------------------------------------------
// 5. Two-sheet graph families certify the excess decay rate m + 2 alpha.

Check run_graph_family(Check c, const std::string& tag,
                       const families::GraphFamily& fam, const sets::Box& box,
                       const std::vector<Vec>& centers) {
  auto t0 = Clock::now();
  auto samples = regdist::resolved_samples(fam.eta, box, 12000, 501);
  double worst_grad = 0.0;
  for (size_t i = 0; i < samples.size(); i += 6)
    for (int q = 1; q <= fam.Q; ++q)
      worst_grad = std::max(worst_grad, fam.sheet_grad(q, samples[i]).norm());
  c.require(worst_grad <= 0.25 + 1e-9,
            tag + ": gradient budget exceeded: " + std::to_string(worst_grad));

  double c4 = families::check_pairwise_condition(fam, samples, 10000);
  c.require(std::isfinite(c4) && c4 > 0.0, tag + ": pairwise constant");

  verify::BallCampaign camp;
  camp.centers = centers;
  for (int a = 7; a >= 4; --a) camp.radii.push_back(std::pow(0.5, a));
  // the slope fit spans 2^12 in excess; per-ball 9e-3 is ample accuracy
  camp.quad.target_rel_tol = 9e-3;
  camp.quad.min_abs_tol = 1e-13;
  camp.slope_tol = 0.1;
  camp.seed = 502;
  double target = fam.m() + 2.0 * fam.alpha;
  auto rep = verify::verify_excess_decay(fam.as_multigraph(), camp, target);
  c.require(rep.pass, tag + ": campaign failed");
  c.require(rep.fit.points >= 4, tag + ": too few positive-excess balls");
  c.require(rep.fit.slope >= target - 0.1,
            tag + ": slope " + std::to_string(rep.fit.slope));
  c.require(std::isfinite(rep.constants.C0) && rep.constants.C0 > 0.0,
            tag + ": no single excess constant witnessed");
  double dt = seconds_since(t0);
  c.require(dt <= 1800.0, tag + ": exceeded the half-hour budget");
  c.note << tag << " slope " << rep.fit.slope << " (C4 " << c4 << ", "
         << (int)dt << " s); ";
  return c;
}

Check crit_graph_families() {
  Check c;
  {
    std::vector<Vec> grid;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) grid.push_back(v2(2.5 * i, 2.5 * j));
    sets::Box box = boxn(2, -1.25, 8.75);
    g_cloud_family.emplace(families::build_graph_family(
        finite(std::move(grid)), 2, 1, 1.0, 12, box));
    std::vector<Vec> centers{v2(0.0, 0.0), v2(2.5, 2.5), v2(0.0, 1.0)};
    c = run_graph_family(std::move(c), "point-cloud", *g_cloud_family, box,
                         centers);
  }
  {
    sets::Box box = boxn(2, -1.5, 2.5);
    auto fam = families::build_graph_family(cantor(2, 0, 1.0 / 3.0), 2, 1, 1.0,
                                            12, box);
    std::vector<Vec> centers{v2(0.0, 0.0), v2(2.0 / 3.0, 0.0), v2(0.0, 1.0)};
    c = run_graph_family(std::move(c), "cantor-line", fam, box, centers);
  }
  return c;
}

// ---------------------------------------------------------------------------
// 6. Branched families: gradient budget, monodromy, blow-up, trichotomy,
//    and the excess decay rate at branch points.

Check run_branched(Check c, int Q, const std::vector<Vec>& kpts,
                   bool cache_for_determinism) {
  std::string tag = "Q=" + std::to_string(Q);
  sets::Box box = boxn(2, -2.0, 2.0);
  auto fam_local = families::build_branched_family(finite(kpts), Q, 1, 9, box);
  const families::BranchedFamily* famp = &fam_local;
  if (cache_for_determinism) {
    g_branched_q2.emplace(std::move(fam_local));
    famp = &*g_branched_q2;
  }
  const auto& fam = *famp;

  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> u(-1.9, 1.9);
  double worst_grad = 0.0;
  for (int t = 0; t < 2000; ++t) {
    Vec z = v2(u(rng), u(rng));
    for (const auto& s : families::eval_branched_or_zero(fam, z))
      worst_grad = std::max(
          worst_grad, geom::operator_norm(geom::LinearGraphMap{s.jacobian}));
  }
  c.require(worst_grad <= 0.25 + 1e-9,
            tag + ": gradient budget exceeded: " + std::to_string(worst_grad));

  // monodromy is a full Q-cycle at 20 sampled branch points
  std::vector<int> big;
  for (size_t i = 0; i < fam.patches.size(); ++i)
    if (fam.patches[i].r >= 0.01) big.push_back((int)i);
  c.require(big.size() >= 20, tag + ": fewer than 20 sizable patches");
  int cycles = 0, tested = 0;
  for (size_t t = 0; t < 20 && t * big.size() / 20 < big.size(); ++t) {
    int pi = big[t * big.size() / 20];
    auto perm = families::monodromy(fam, pi, 0.3 * fam.patches[pi].r, 720);
    ++tested;
    std::vector<int> pos(Q);
    for (int i = 0; i < Q; ++i) pos[i] = i;
    bool cycle = true;
    for (int step = 1; step <= Q; ++step) {
      for (int i = 0; i < Q; ++i) pos[i] = perm[pos[i]];
      bool identity = true;
      for (int i = 0; i < Q; ++i)
        if (pos[i] != i) identity = false;
      if (identity != (step == Q)) cycle = false;
    }
    if (cycle) ++cycles;
  }
  c.require(cycles == tested, tag + ": " + std::to_string(tested - cycles) +
                                  " loops are not full cycles");

  // blow-ups at the 20 singular-set points are flat to order p
  std::vector<double> bradii;
  for (int a = 2; a <= 5; ++a) bradii.push_back(std::pow(0.5, a));
  double worst_exp = 1e300;
  for (const Vec& kp : kpts) {
    auto blow = families::blowup_flatness(fam, kp, bradii, 3000, 602);
    worst_exp = std::min(worst_exp, blow.fitted_exponent);
  }
  c.require(worst_exp >= fam.exponent - 0.1,
            tag + ": blow-up exponent " + std::to_string(worst_exp));

  // ball trichotomy: a far ball is flat (case a), an offset one is case b
  int big_patch = 0;
  for (size_t i = 0; i < fam.patches.size(); ++i)
    if (fam.patches[i].r > fam.patches[big_patch].r) big_patch = (int)i;
  {
    double best_min = -1.0;
    Vec far_pt = v2(0, 0);
    for (const auto& cu : fam.dec.cubes) {
      Vec cand = cu.center + Vec::Constant(2, 0.49 * cu.side);
      double mind = 1e300;
      for (const auto& q : fam.patches)
        mind = std::min(mind, (cand - q.z).norm() - q.r);
      if (mind > best_min) {
        best_min = mind;
        far_pt = cand;
      }
    }
    c.require(best_min > 0.0, tag + ": no point clear of all patches");
    Vec far4(4);
    far4 << far_pt[0], far_pt[1], 0.0, 0.0;
    auto cls = families::classify_ball(fam, far4, best_min / 4.0);
    c.require(cls.label == 'a', tag + ": far ball not flat");
    quadrature::QuadratureConfig qc;
    qc.target_rel_tol = 1e-6;
    auto e = currents::excess(families::as_multigraph(fam), far_pt,
                              best_min / 4.0, qc);
    c.require(std::abs(e.value) <= 1e-10, tag + ": flat ball carries excess");

    const auto& bp = fam.patches[big_patch];
    Vec off4(4);
    off4 << bp.z[0] + 1.05 * bp.r, bp.z[1], 0.0, 0.0;
    auto clsb = families::classify_ball(fam, off4, bp.r / 8.0);
    c.require(clsb.label == 'b', tag + ": offset ball not case b");
  }

  // excess decay at branch points, restricted to the singular centers
  std::vector<std::pair<double, int>> by_r;
  for (size_t i = 0; i < fam.patches.size(); ++i)
    by_r.push_back({-fam.patches[i].r, (int)i});
  std::sort(by_r.begin(), by_r.end());
  verify::BallCampaign camp;
  for (int t = 0; t < 4 && t < (int)by_r.size(); ++t)
    camp.centers.push_back(fam.patches[by_r[t].second].z);
  for (int a = 8; a >= 5; --a) camp.radii.push_back(std::pow(0.5, a));
  camp.quad.target_rel_tol = 1e-3;
  camp.quad.min_abs_tol = 1e-20;
  camp.slope_tol = 0.1;
  camp.seed = 603;
  auto classify = [famp](const Vec& center, double r) {
    Vec x4(4);
    x4 << center[0], center[1], 0.0, 0.0;
    return families::classify_ball(*famp, x4, r).label;
  };
  double target = 2.0 + 2.0 * fam.alpha;
  auto rep =
      verify::verify_excess_decay(families::as_multigraph(fam), camp, target,
                                  classify);
  c.require(rep.pass, tag + ": campaign failed");
  c.require(rep.fit.points >= 4, tag + ": too few branch-point balls");
  c.require(rep.fit.slope >= target - 0.1,
            tag + ": slope " + std::to_string(rep.fit.slope));
  if (cache_for_determinism) {
    g_branched_campaign = camp;
    g_branched_classify = classify;
  }
  c.note << tag << " slope " << rep.fit.slope << " blow-up exp " << worst_exp
         << "; ";
  return c;
}

Check crit_branched() {
  Check c;
  std::vector<Vec> kpts;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j)
      kpts.push_back(v2(-1.0 + 0.5 * i, -0.75 + 0.5 * j));
  c = run_branched(std::move(c), 2, kpts, true);
  c = run_branched(std::move(c), 3, kpts, false);
  return c;
}

// ---------------------------------------------------------------------------
// 7. Tangential touching implies the pairwise condition; transversal
//    crossings are rejected with a localized witness.

Check crit_tangential() {
  Check c;
  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(v1(u(rng)));

  auto power_sheet = [](double coeff, double p) {
    families::ScalarSheet s;
    s.eval = [coeff, p](const Vec& x) {
      double ax = std::abs(x[0]);
      double v = coeff * std::pow(ax, p);
      Vec g = Vec::Constant(
          1, ax == 0.0
                 ? 0.0
                 : coeff * p * std::pow(ax, p - 1.0) * (x[0] > 0 ? 1.0 : -1.0));
      return std::make_pair(v, g);
    };
    return s;
  };

  // ordered families touching tangentially at the origin
  for (double as : {0.5, 1.0}) {
    double p = 1.0 + as;
    std::vector<families::ScalarSheet> fam{power_sheet(0.0, p),
                                           power_sheet(0.7, p),
                                           power_sheet(1.0, p),
                                           power_sheet(2.0, p)};
    auto ok = families::check_tangential_implies_condition(fam, as, samples);
    c.require(ok.pass, "tangential family rejected at a* = " +
                           std::to_string(as));
    c.require(std::isfinite(ok.c4) && ok.c4 >= 2.0,
              "pairwise constant not of the certified form");
  }

  // transversal crossing at the origin fails, with the witness nearby
  families::ScalarSheet zero;
  zero.eval = [](const Vec&) { return std::make_pair(0.0, Vec::Zero(1)); };
  families::ScalarSheet line;
  line.eval = [](const Vec& x) {
    return std::make_pair(x[0], Vec::Constant(1, 1.0));
  };
  auto near_zero = samples;
  for (int j = 3; j <= 10; ++j) near_zero.push_back(v1(std::pow(0.5, j)));
  auto bad =
      families::check_tangential_implies_condition({zero, line}, 1.0,
                                                   near_zero);
  c.require(!bad.pass, "transversal crossing accepted");
  c.require(std::abs(bad.witness[0]) <= 0.1,
            "witness not localized at the crossing");
  c.note << "ordered power families pass, crossing witness at x = "
         << bad.witness[0];
  return c;
}

// ---------------------------------------------------------------------------
// 8. Mass ratios of the shrinking-ball example approach one.

Check crit_mass_ratio() {
  Check c;
  struct Row {
    double eps;
    int n, J;
  };
  std::vector<Row> rows{{0.5, 10, 8}, {0.25, 20, 9}, {0.125, 30, 10},
                        {0.0625, 40, 11}};
  quadrature::QuadratureConfig cfg;
  cfg.target_rel_tol = 1e-3;  // the excess is a sub-percent mass correction
  std::vector<double> ratios;
  for (const auto& row : rows) {
    auto res = families::mass_ratio_example(row.eps, row.n, 1.0, row.J, cfg);
    c.require(res.ratio > 0.0 && res.ratio <= 1.0 + 1e-12,
              "ratio out of (0,1] at eps " + std::to_string(row.eps));
    c.require(res.ratio >= res.analytic_lower_bound - 0.02,
              "ratio below the analytic bound at eps " +
                  std::to_string(row.eps));
    c.require(res.sup_grad <= 0.25 + 1e-9, "gradient budget exceeded");
    ratios.push_back(res.ratio);
    c.note << "eps " << row.eps << ": " << res.ratio << " (bound "
           << res.analytic_lower_bound << "); ";
  }
  for (size_t i = 1; i < ratios.size(); ++i)
    c.require(ratios[i] > ratios[i - 1], "ratios not strictly increasing");
  c.require(ratios.back() > 0.95, "smallest-eps ratio not above 0.95");
  return c;
}

// ---------------------------------------------------------------------------
// 9. Baselines: flat disks carry no excess; a single sheet certifies the
//    same decay rate without any multi-sheet structure.

Check crit_baselines() {
  Check c;
  auto flat = currents::from_sheets(
      2, 1,
      {[](const Vec&) {
         currents::SheetValue s;
         s.value = Vec::Constant(1, 0.4);
         s.jacobian = Mat::Zero(1, 2);
         return s;
       },
       [](const Vec&) {
         currents::SheetValue s;
         s.value = Vec::Constant(1, 0.4);
         s.jacobian = Mat::Zero(1, 2);
         return s;
       },
       [](const Vec&) {
         currents::SheetValue s;
         s.value = Vec::Constant(1, 0.4);
         s.jacobian = Mat::Zero(1, 2);
         return s;
       }});
  quadrature::QuadratureConfig qc;
  qc.target_rel_tol = 1e-9;
  for (double r : {0.3, 0.7}) {
    auto e = currents::excess(flat, v2(0.1, -0.2), r, qc);
    c.require(std::abs(e.value) <= 1e-12,
              "flat multiplicity-3 disk carries excess " +
                  std::to_string(e.value));
  }

  c.require(g_cloud_family.has_value(), "graph family cache missing");
  if (g_cloud_family) {
    const auto* fam = &*g_cloud_family;
    currents::MultiGraph single;
    single.m = 2;
    single.n = 1;
    single.q = 1;
    single.eval = [fam](const Vec& x) {
      currents::SheetValue s;
      s.value = Vec::Constant(1, fam->sheet_value(1, x));
      s.jacobian = fam->sheet_grad(1, x).transpose();
      return std::vector<currents::SheetValue>{s};
    };
    verify::BallCampaign camp;
    camp.centers = {v2(0.0, 0.0), v2(0.0, 1.0)};
    for (int a = 7; a >= 4; --a) camp.radii.push_back(std::pow(0.5, a));
    camp.quad.target_rel_tol = 3e-3;
    camp.quad.min_abs_tol = 1e-13;
    camp.seed = 901;
    double target = fam->m() + 2.0 * fam->alpha;
    auto rep = verify::verify_excess_decay(single, camp, target);
    c.require(rep.pass, "single-sheet campaign failed");
    c.require(rep.fit.slope >= target - 0.1,
              "single-sheet slope " + std::to_string(rep.fit.slope));
    c.note << "single-sheet slope " << rep.fit.slope;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 10. Determinism: identical config and seed give byte-identical reports,
//     both through the command line and through the library.

Check crit_determinism() {
  Check c;
  namespace fs = std::filesystem;
  fs::path dir = fs::current_path() / "acceptance_tmp";
  fs::create_directories(dir);
  fs::path setfile = dir / "origin.set";
  {
    std::ofstream out(setfile);
    out << "type = finite_points\nm = 1\npoints = 0.0\n";
  }
  fs::path cfgfile = dir / "run.cfg";
  {
    std::ofstream out(cfgfile);
    out << "version = 1\nfamily = graphs\nset_file = " << setfile.string()
        << "\nQ = 2\nk = 1\nalpha_star = 1\nJ = 11\nm = 1\n"
        << "box_lo = -2\nbox_hi = 2\n"
        << "radii = 0.0625, 0.03125, 0.015625, 0.0078125\n"
        << "quad_tol = 1e-6\nseed = 9\n";
  }
  auto run_cli = [&](const fs::path& out) {
    std::string cmd = std::string(ALMOSTMIN_CLI_PATH) + " verify --family " +
                      cfgfile.string() + " --out " + out.string() +
                      " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  int rc1 = run_cli(dir / "r1.json");
  int rc2 = run_cli(dir / "r2.json");
  c.require(rc1 == 0 && rc2 == 0, "command-line runs did not both succeed");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string b1 = slurp(dir / "r1.json"), b2 = slurp(dir / "r2.json");
  c.require(!b1.empty() && b1 == b2, "command-line reports differ");

  c.require(g_branched_q2.has_value() && g_branched_campaign.has_value(),
            "branched family cache missing");
  if (g_branched_q2 && g_branched_campaign) {
    double target = 2.0 + 2.0 * g_branched_q2->alpha;
    auto r1 = verify::verify_excess_decay(families::as_multigraph(*g_branched_q2),
                                          *g_branched_campaign, target,
                                          g_branched_classify);
    auto r2 = verify::verify_excess_decay(families::as_multigraph(*g_branched_q2),
                                          *g_branched_campaign, target,
                                          g_branched_classify);
    c.require(r1.to_json().dump() == r2.to_json().dump(),
              "library reports differ between reruns");
  }
  c.note << "CLI report " << b1.size() << " bytes, identical across reruns";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Check()> run;
  };
  std::vector<Criterion> criteria{
      {"whitney decompositions across set variants", crit_whitney},
      {"regularized distance comparability and regularity", crit_regdist},
      {"jet derivatives match finite differences", crit_jets_vs_fd},
      {"tilted-chart reparametrization certification", crit_reparam},
      {"two-sheet graph families certify the decay rate", crit_graph_families},
      {"branched families: monodromy, blow-up, decay rate", crit_branched},
      {"tangential touching criterion", crit_tangential},
      {"shrinking-ball mass ratios approach one", crit_mass_ratio},
      {"flat disks and single-sheet baselines", crit_baselines},
      {"byte-identical reports under fixed seeds", crit_determinism},
  };

  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    int i = std::atoi(argv[a]);
    if (i >= 1 && i <= (int)criteria.size()) selected[i - 1] = true;
  }

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    auto t0 = Clock::now();
    Check result;
    try {
      result = criteria[i].run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.note << " [exception: " << e.what() << "]";
    }
    if (!result.pass) ++failures;
    std::string note = result.note.str();
    std::printf("[%2zu] %s  %s (%.1f s)%s%s\n", i + 1,
                result.pass ? "PASS" : "FAIL", criteria[i].name.c_str(),
                seconds_since(t0), note.empty() ? "" : " | ", note.c_str());
    std::fflush(stdout);
  }
  int ran = 0;
  for (bool s : selected) ran += s;
  if (failures) std::printf("%d of %d criteria failed\n", failures, ran);
  else std::printf("all %d criteria passed\n", ran);
  return failures == 0 ? 0 : 1;
}
