#include <doctest.h>

#include <random>

#include "almostmin/families.hpp"

using namespace almostmin;
using geom::Mat;
using geom::Vec;

namespace {

sets::Box boxn(int m, double lo, double hi) {
  sets::Box b;
  b.lo = Vec::Constant(m, lo);
  b.hi = Vec::Constant(m, hi);
  return b;
}

sets::SetSpec point_set_1d() {
  sets::FinitePoints fp;
  fp.points = {Vec::Zero(1)};
  return sets::SetSpec{std::move(fp)};
}

sets::SetSpec point_set_2d() {
  sets::FinitePoints fp;
  fp.points = {Vec::Zero(2)};
  return sets::SetSpec{std::move(fp)};
}

}  // namespace

TEST_CASE("graph family: ordering, vanishing on E, Lipschitz budget") {
  auto fam = families::build_graph_family(point_set_1d(), 3, 1, 1.0, 11,
                                          boxn(1, -2.0, 2.0));
  CHECK(fam.alpha == doctest::Approx(0.5));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int interior = 0;
  for (int t = 0; t < 2000; ++t) {
    Vec x(1);
    x << u(rng);
    double prev = 0.0;
    for (int i = 1; i <= fam.Q; ++i) {
      double v = fam.sheet_value(i, x);
      CHECK(v >= prev - 1e-15);  // ordered sheets
      prev = v;
      CHECK(fam.sheet_grad(i, x).norm() <= 0.25 + 1e-12);
    }
    if (prev > 0.0) ++interior;
  }
  CHECK(interior > 500);
  // E contains K and the far region
  Vec far(1);
  far << 1.5;
  CHECK(fam.sheet_value(fam.Q, far) == 0.0);
  CHECK_THROWS_AS(families::build_graph_family(point_set_1d(), 1, 1, 1.0, 9,
                                               boxn(1, -2.0, 2.0)),
                  SpecError);
}

TEST_CASE("pairwise gradient-gap constant is finite") {
  auto fam = families::build_graph_family(point_set_1d(), 2, 1, 1.0, 11,
                                          boxn(1, -2.0, 2.0));
  auto samples =
      regdist::resolved_samples(fam.eta, boxn(1, -2.0, 2.0), 3000, 42);
  double c4 = families::check_pairwise_condition(fam, samples, 1000);
  CHECK(std::isfinite(c4));
  CHECK(c4 > 0.0);
}

TEST_CASE("tangential touching passes, transversal crossing fails") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(Vec::Constant(1, u(rng)));

  auto power_sheet = [](double c, double p) {
    families::ScalarSheet s;
    s.eval = [c, p](const Vec& x) {
      double ax = std::abs(x[0]);
      double v = c * std::pow(ax, p);
      Vec g = Vec::Constant(
          1, ax == 0.0 ? 0.0
                       : c * p * std::pow(ax, p - 1.0) * (x[0] > 0 ? 1.0 : -1.0));
      return std::make_pair(v, g);
    };
    return s;
  };
  // ordered tangential family: 0 <= |x|^2 <= 2 |x|^2, alpha_star = 1
  std::vector<families::ScalarSheet> tang{power_sheet(0.0, 2.0),
                                          power_sheet(1.0, 2.0),
                                          power_sheet(2.0, 2.0)};
  auto ok = families::check_tangential_implies_condition(tang, 1.0, samples);
  CHECK(ok.pass);

  // transversal: f1 = 0, f2 = x cross at 0 with gradient gap 1
  families::ScalarSheet zero;
  zero.eval = [](const Vec&) { return std::make_pair(0.0, Vec::Zero(1)); };
  families::ScalarSheet line;
  line.eval = [](const Vec& x) {
    return std::make_pair(x[0], Vec::Constant(1, 1.0));
  };
  std::vector<Vec> near_zero = samples;
  near_zero.push_back(Vec::Constant(1, 1e-9));
  auto bad = families::check_tangential_implies_condition(
      {zero, line}, 1.0, near_zero);
  CHECK(!bad.pass);
  CHECK(std::abs(bad.witness[0]) < 0.1);
}

TEST_CASE("branched family: gradient budget and branch geometry") {
  auto fam = families::build_branched_family(point_set_2d(), 2, 1, 8,
                                             boxn(2, -2.0, 2.0));
  CHECK(fam.exponent == doctest::Approx(1.5));
  CHECK(fam.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(!fam.patches.empty());
  CHECK(fam.kappa > 0.0);
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-1.9, 1.9);
  int nonzero = 0;
  for (int t = 0; t < 500; ++t) {
    Vec z(2);
    z << u(rng), u(rng);
    std::vector<currents::SheetValue> vals;
    try {
      vals = families::eval_branched(fam, z);
    } catch (const UnresolvedRegion&) {
      continue;
    }
    REQUIRE(static_cast<int>(vals.size()) == fam.Q);
    for (const auto& s : vals) {
      CHECK(geom::operator_norm(geom::LinearGraphMap{s.jacobian}) <=
            0.25 + 1e-9);
      if (s.value.norm() > 0.0) ++nonzero;
    }
  }
  CHECK(nonzero > 0);
}

TEST_CASE("monodromy is a full cycle of the branches") {
  for (int Q : {2, 3}) {
    auto fam = families::build_branched_family(point_set_2d(), Q, 1, 7,
                                               boxn(2, -2.0, 2.0));
    // pick a patch away from K so the loop stays resolved
    int best = 0;
    for (size_t i = 0; i < fam.patches.size(); ++i)
      if (fam.patches[i].z.norm() > fam.patches[best].z.norm()) best = i;
    const auto& p = fam.patches[best];
    auto perm = families::monodromy(fam, best, 0.3 * p.r, 720);
    REQUIRE(static_cast<int>(perm.size()) == Q);
    // a single Q-cycle: iterating Q times returns home, fewer never does
    std::vector<int> pos(Q);
    for (int i = 0; i < Q; ++i) pos[i] = i;
    for (int step = 1; step <= Q; ++step) {
      for (int i = 0; i < Q; ++i) pos[i] = perm[pos[i]];
      bool identity = true;
      for (int i = 0; i < Q; ++i)
        if (pos[i] != i) identity = false;
      CHECK(identity == (step == Q));
    }
  }
}

TEST_CASE("ball trichotomy around a branch point") {
  auto fam = families::build_branched_family(point_set_2d(), 2, 1, 7,
                                             boxn(2, -2.0, 2.0));
  int best = 0;
  for (size_t i = 0; i < fam.patches.size(); ++i)
    if (fam.patches[i].z.norm() > fam.patches[best].z.norm()) best = i;
  const auto& p = fam.patches[best];
  Vec x0(4);
  x0 << p.z[0], p.z[1], 0.0, 0.0;
  auto at_branch = families::classify_ball(fam, x0, p.r / 16.0);
  CHECK(at_branch.label == 'c');
  CHECK(!at_branch.I.empty());
  // a point near a cube corner is far from every branch point
  double best_min = -1.0;
  Vec far_pt;
  for (const auto& c : fam.dec.cubes) {
    Vec cand = c.center + Vec::Constant(2, 0.49 * c.side);
    double mind = 1e300;
    for (const auto& q : fam.patches)
      mind = std::min(mind, (cand - q.z).norm() - q.r);
    if (mind > best_min) {
      best_min = mind;
      far_pt = cand;
    }
  }
  REQUIRE(best_min > 0.0);
  Vec far4(4);
  far4 << far_pt[0], far_pt[1], 0.0, 0.0;
  auto far_ball = families::classify_ball(fam, far4, best_min / 4.0);
  CHECK(far_ball.label == 'a');
}

TEST_CASE("blow-up at the singular point is flat to order p") {
  auto fam = families::build_branched_family(point_set_2d(), 2, 1, 9,
                                             boxn(2, -2.0, 2.0));
  std::vector<double> radii;
  for (int a = 2; a <= 5; ++a) radii.push_back(std::pow(0.5, a));
  auto blow = families::blowup_flatness(fam, Vec::Zero(2), radii, 4000, 45);
  CHECK(blow.fitted_exponent >= fam.exponent - 0.1);
  CHECK(std::isfinite(blow.c_measured));
}

TEST_CASE("disk intersection areas: disjoint, nested, symmetric overlap") {
  Vec a = Vec::Zero(2);
  Vec b(2);
  b << 3.0, 0.0;
  CHECK(families::disk_intersection_area(a, 1.0, b, 1.0) == 0.0);
  CHECK(families::disk_intersection_area(a, 2.0, a, 0.5) ==
        doctest::Approx(M_PI * 0.25));
  Vec c(2);
  c << 1.0, 0.0;
  // two unit disks at distance 1: 2 acos(1/2) - (1/2) sqrt(3)
  CHECK(families::disk_intersection_area(a, 1.0, c, 1.0) ==
        doctest::Approx(2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0)));
}

TEST_CASE("mass ratio example: sane smoke at coarse settings") {
  quadrature::QuadratureConfig cfg;
  cfg.target_rel_tol = 1e-3;  // the excess is a tiny correction to the mass
  auto res = families::mass_ratio_example(0.5, 10, 1.0, 8, cfg);
  CHECK(res.ratio > 0.0);
  CHECK(res.ratio <= 1.0 + 1e-12);
  CHECK(res.flat_mass > 0.0);
  CHECK(res.total_mass >= res.flat_mass - 1e-9);
  CHECK(res.balls_total == 10);
  CHECK(res.sup_grad <= 0.25 + 1e-9);
}
