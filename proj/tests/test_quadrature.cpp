#include <doctest.h>

#include "almostmin/quadrature.hpp"

using namespace almostmin;
using geom::Vec;

namespace {
quadrature::QuadratureConfig tight() {
  quadrature::QuadratureConfig cfg;
  cfg.target_rel_tol = 1e-10;
  return cfg;
}
}  // namespace

TEST_CASE("interval rules hit smooth closed forms") {
  auto cfg = tight();
  auto r1 = quadrature::integrate_interval([](double x) { return x * x; }, 0.0,
                                           1.0, cfg);
  CHECK(r1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  auto r2 = quadrature::integrate_interval([](double x) { return std::sin(x); },
                                           0.0, M_PI, cfg);
  CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(r2.value - 2.0) <= 100.0 * std::max(r2.error, 1e-15));
}

TEST_CASE("adaptive refinement handles a kink") {
  auto cfg = tight();
  auto r = quadrature::integrate_interval(
      [](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, cfg);
  // exact: 0.3^2/2 + 0.7^2/2
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-9));
}

TEST_CASE("disk integrals: area and quadratic moment") {
  auto cfg = tight();
  Vec c = Vec::Zero(2);
  auto area = quadrature::integrate_disk([](const Vec&) { return 1.0; }, c, 1.5,
                                         cfg);
  CHECK(area.value == doctest::Approx(M_PI * 2.25).epsilon(1e-10));
  auto mom = quadrature::integrate_disk(
      [](const Vec& x) { return x.squaredNorm(); }, c, 1.0, cfg);
  CHECK(mom.value == doctest::Approx(M_PI / 2.0).epsilon(1e-10));
}

TEST_CASE("polar chart about an interior pole preserves the integral") {
  auto cfg = tight();
  Vec c = Vec::Zero(2);
  Vec pole(2);
  pole << 0.3, -0.1;
  auto plain = quadrature::integrate_disk(
      [](const Vec& x) { return std::exp(-x.squaredNorm()); }, c, 1.0, cfg);
  auto polar = quadrature::integrate_disk_polar_at(
      [](const Vec& x) { return std::exp(-x.squaredNorm()); }, c, 1.0, pole,
      cfg);
  CHECK(polar.value == doctest::Approx(plain.value).epsilon(1e-9));
}

TEST_CASE("pole chart integrates an inverse square-root singularity") {
  auto cfg = tight();
  Vec c = Vec::Zero(2);
  auto r = quadrature::integrate_disk_polar_at(
      [&c](const Vec& x) { return 1.0 / std::sqrt((x - c).norm()); }, c, 1.0, c,
      cfg);
  // int_0^2pi int_0^1 rho^{1/2} drho dtheta = 4 pi / 3
  CHECK(r.value == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-9));
}

TEST_CASE("star-shaped polar region with constant reach is a disk") {
  auto cfg = tight();
  Vec pole(2);
  pole << 1.0, 2.0;
  auto r = quadrature::integrate_polar([](const Vec& x) { return x[0]; }, pole,
                                       [](double) { return 0.5; }, cfg);
  // centroid x-coordinate times area
  CHECK(r.value == doctest::Approx(1.0 * M_PI * 0.25).epsilon(1e-9));
}

TEST_CASE("config validation and region budget") {
  quadrature::QuadratureConfig bad;
  bad.target_rel_tol = 1.0;
  CHECK_THROWS_AS(quadrature::validate(bad), ConfigError);
  quadrature::QuadratureConfig tiny;
  tiny.target_rel_tol = 1e-11;
  tiny.max_regions = 8;
  tiny.min_abs_tol = 0.0;
  CHECK_THROWS_AS(
      quadrature::integrate_interval(
          [](double x) { return std::abs(std::sin(50.0 * x)); }, 0.0, 3.0,
          tiny),
      QuadratureBudgetExceeded);
}
