#include "almostmin/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace almostmin::quadrature {

namespace {

// 8-point Gauss-Legendre on [-1, 1]
constexpr int kNodes = 8;
constexpr double kX[kNodes] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kW[kNodes] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double gauss1(const std::function<double(double)>& f, double a, double b) {
  const double h = (b - a) / 2.0, c = (a + b) / 2.0;
  double s = 0.0;
  for (int i = 0; i < kNodes; ++i) s += kW[i] * f(c + h * kX[i]);
  return s * h;
}

struct Region1 {
  double a, b, value, error;
  int depth;
  int64_t seq;
};
struct Worse1 {
  bool operator()(const Region1& x, const Region1& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.seq > y.seq;
  }
};

struct Region2 {
  double a0, a1, b0, b1;  // [a0,a1] x [b0,b1] in parameter space
  double value, error;
  int depth;
  int64_t seq;
};
struct Worse2 {
  bool operator()(const Region2& x, const Region2& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.seq > y.seq;
  }
};

double gauss2(const std::function<double(double, double)>& f, double a0,
              double a1, double b0, double b1) {
  const double ha = (a1 - a0) / 2.0, ca = (a0 + a1) / 2.0;
  const double hb = (b1 - b0) / 2.0, cb = (b0 + b1) / 2.0;
  double s = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    double si = 0.0;
    for (int j = 0; j < kNodes; ++j) si += kW[j] * f(ca + ha * kX[i], cb + hb * kX[j]);
    s += kW[i] * si;
  }
  return s * ha * hb;
}

// Adaptive integration of f over [a0,a1]x[b0,b1]; error of a region is
// |whole - sum of quarters|, and the quarters replace it on refinement.
QuadResult adapt2(const std::function<double(double, double)>& f, double a0,
                  double a1, double b0, double b1,
                  const QuadratureConfig& cfg) {
  std::priority_queue<Region2, std::vector<Region2>, Worse2> pq;
  int64_t seq = 0;
  int regions = 1;

  auto make = [&](double x0, double x1, double y0, double y1, int depth) {
    Region2 r{x0, x1, y0, y1, 0.0, 0.0, depth, seq++};
    r.value = gauss2(f, x0, x1, y0, y1);
    double cx = (x0 + x1) / 2.0, cy = (y0 + y1) / 2.0;
    double refined = gauss2(f, x0, cx, y0, cy) + gauss2(f, cx, x1, y0, cy) +
                     gauss2(f, x0, cx, cy, y1) + gauss2(f, cx, x1, cy, y1);
    r.error = std::abs(refined - r.value);
    r.value = refined;
    return r;
  };

  double total = 0.0, total_err = 0.0;
  {
    Region2 r = make(a0, a1, b0, b1, 0);
    total = r.value;
    total_err = r.error;
    pq.push(r);
  }
  while (total_err > cfg.target_rel_tol * std::abs(total) &&
         total_err > cfg.min_abs_tol) {
    Region2 r = pq.top();
    pq.pop();
    if (r.depth >= cfg.max_subdivision_depth)
      throw QuadratureBudgetExceeded("disk quadrature: max depth reached");
    regions += 3;
    if (regions > cfg.max_regions)
      throw QuadratureBudgetExceeded("disk quadrature: region budget exceeded");
    total -= r.value;
    total_err -= r.error;
    double cx = (r.a0 + r.a1) / 2.0, cy = (r.b0 + r.b1) / 2.0;
    Region2 kids[4] = {make(r.a0, cx, r.b0, cy, r.depth + 1),
                       make(cx, r.a1, r.b0, cy, r.depth + 1),
                       make(r.a0, cx, cy, r.b1, r.depth + 1),
                       make(cx, r.a1, cy, r.b1, r.depth + 1)};
    for (auto& k : kids) {
      total += k.value;
      total_err += k.error;
      pq.push(k);
    }
  }
  return {total, std::max(total_err, 0.0)};
}

}  // namespace

void validate(const QuadratureConfig& cfg) {
  if (!(cfg.target_rel_tol > 1e-12 && cfg.target_rel_tol < 1e-2))
    throw ConfigError("quadrature: target_rel_tol out of (1e-12, 1e-2)");
  if (cfg.max_subdivision_depth < 1)
    throw ConfigError("quadrature: max_subdivision_depth must be positive");
}

QuadResult integrate_interval(const std::function<double(double)>& f,
                              double a, double b,
                              const QuadratureConfig& cfg) {
  validate(cfg);
  std::priority_queue<Region1, std::vector<Region1>, Worse1> pq;
  int64_t seq = 0;
  int regions = 1;
  auto make = [&](double x0, double x1, int depth) {
    Region1 r{x0, x1, 0.0, 0.0, depth, seq++};
    double whole = gauss1(f, x0, x1);
    double c = (x0 + x1) / 2.0;
    r.value = gauss1(f, x0, c) + gauss1(f, c, x1);
    r.error = std::abs(r.value - whole);
    return r;
  };
  double total = 0.0, total_err = 0.0;
  {
    Region1 r = make(a, b, 0);
    total = r.value;
    total_err = r.error;
    pq.push(r);
  }
  while (total_err > cfg.target_rel_tol * std::abs(total) &&
         total_err > cfg.min_abs_tol) {
    Region1 r = pq.top();
    pq.pop();
    if (r.depth >= cfg.max_subdivision_depth)
      throw QuadratureBudgetExceeded("interval quadrature: max depth reached");
    regions += 1;
    if (regions > cfg.max_regions)
      throw QuadratureBudgetExceeded("interval quadrature: region budget exceeded");
    total -= r.value;
    total_err -= r.error;
    double c = (r.a + r.b) / 2.0;
    Region1 kids[2] = {make(r.a, c, r.depth + 1), make(c, r.b, r.depth + 1)};
    for (auto& k : kids) {
      total += k.value;
      total_err += k.error;
      pq.push(k);
    }
  }
  return {total, std::max(total_err, 0.0)};
}

QuadResult integrate_disk(const std::function<double(const Vec&)>& f,
                          const Vec& center, double radius,
                          const QuadratureConfig& cfg) {
  validate(cfg);
  if (!(radius > 0.0)) throw SpecError("integrate_disk: radius must be positive");
  Vec x(2);
  auto g = [&](double rho, double theta) {
    Vec p(2);
    p[0] = center[0] + rho * std::cos(theta);
    p[1] = center[1] + rho * std::sin(theta);
    return f(p) * rho;
  };
  return adapt2(g, 0.0, radius, 0.0, 2.0 * M_PI, cfg);
}

QuadResult integrate_polar(const std::function<double(const Vec&)>& f,
                           const Vec& pole,
                           const std::function<double(double)>& reach,
                           const QuadratureConfig& cfg) {
  validate(cfg);
  auto g = [&](double u, double theta) {
    double R = reach(theta);
    double rho = u * R;
    Vec p(2);
    p[0] = pole[0] + rho * std::cos(theta);
    p[1] = pole[1] + rho * std::sin(theta);
    return f(p) * rho * R;
  };
  return adapt2(g, 0.0, 1.0, 0.0, 2.0 * M_PI, cfg);
}

QuadResult integrate_disk_polar_at(const std::function<double(const Vec&)>& f,
                                   const Vec& center, double radius,
                                   const Vec& pole,
                                   const QuadratureConfig& cfg) {
  validate(cfg);
  Vec e = pole - center;
  const double ecc = e.norm();
  if (ecc > radius + 1e-12)
    throw SpecError("integrate_disk_polar_at: pole outside disk");
  const double phi0 = (ecc > 0.0) ? std::atan2(e[1], e[0]) : 0.0;
  // boundary reach from the pole in direction theta (relative to pole->center
  // being at angle phi0 + pi)
  auto reach = [&](double theta) {
    double c = std::cos(theta - phi0);
    double disc = radius * radius - ecc * ecc * (1.0 - c * c);
    return -ecc * c + std::sqrt(std::max(disc, 0.0));
  };
  auto g = [&](double u, double theta) {
    double R = reach(theta);
    double rho = u * R;
    Vec p(2);
    p[0] = pole[0] + rho * std::cos(theta);
    p[1] = pole[1] + rho * std::sin(theta);
    return f(p) * rho * R;
  };
  return adapt2(g, 0.0, 1.0, 0.0, 2.0 * M_PI, cfg);
}

}  // namespace almostmin::quadrature
