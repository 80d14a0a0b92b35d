#include "almostmin/currents.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace almostmin::currents {

MultiGraph from_sheets(int m, int n, std::vector<SheetFn> sheets) {
  MultiGraph f;
  f.m = m;
  f.n = n;
  f.q = static_cast<int>(sheets.size());
  f.eval = [sheets = std::move(sheets)](const Vec& x) {
    std::vector<SheetValue> out;
    out.reserve(sheets.size());
    for (const auto& s : sheets) out.push_back(s(x));
    return out;
  };
  return f;
}

double area_element(const Mat& jacobian) {
  const int m = static_cast<int>(jacobian.cols());
  Mat g = jacobian.transpose() * jacobian;
  Mat id = Mat::Identity(m, m);
  return std::sqrt((id + g).determinant());
}

namespace {

// area element - 1, without cancellation for small jacobians:
// det(I + J^T J) - 1 is a sum of nonnegative terms for m <= 2.
double area_excess(const Mat& jacobian) {
  const int m = static_cast<int>(jacobian.cols());
  double det_m1;  // det(I + J^T J) - 1
  if (m == 1) {
    det_m1 = jacobian.col(0).squaredNorm();
  } else if (m == 2) {
    const double a = jacobian.col(0).squaredNorm();
    const double c = jacobian.col(1).squaredNorm();
    const double b = jacobian.col(0).dot(jacobian.col(1));
    det_m1 = a + c + (a * c - b * b);
  } else {
    Mat g = jacobian.transpose() * jacobian;
    det_m1 = (Mat::Identity(m, m) + g).determinant() - 1.0;
  }
  return det_m1 / (std::sqrt(1.0 + det_m1) + 1.0);
}

QuadResult integrate_base_disk(const std::function<double(const Vec&)>& f,
                               const Vec& center, double r, int m,
                               const std::vector<Vec>& poles,
                               const QuadratureConfig& cfg) {
  if (center.size() != m) throw DomainMismatch("integration center dimension");
  if (m == 1) {
    // split at interior poles so the adaptive rule never straddles one
    std::vector<double> cuts{center[0] - r, center[0] + r};
    for (const Vec& p : poles)
      if (p[0] > cuts.front() && p[0] < cuts.back()) cuts.push_back(p[0]);
    std::sort(cuts.begin(), cuts.end());
    QuadResult total;
    auto g = [&f](double t) {
      Vec x(1);
      x[0] = t;
      return f(x);
    };
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      QuadResult part = quadrature::integrate_interval(g, cuts[i], cuts[i + 1], cfg);
      total.value += part.value;
      total.error += part.error;
    }
    return total;
  }
  if (m != 2) throw DomainMismatch("disk integration requires m in {1, 2}");
  const Vec* inside = nullptr;
  int n_inside = 0;
  for (const Vec& p : poles)
    if ((p - center).norm() < r * (1.0 - 1e-12)) {
      inside = &p;
      ++n_inside;
    }
  if (n_inside == 1)
    return quadrature::integrate_disk_polar_at(f, center, r, *inside, cfg);
  return quadrature::integrate_disk(f, center, r, cfg);
}

}  // namespace

QuadResult excess(const MultiGraph& f, const Vec& center, double r,
                  const QuadratureConfig& cfg) {
  auto integrand = [&f](const Vec& x) {
    double s = 0.0;
    for (const auto& sheet : f.eval(x)) s += area_excess(sheet.jacobian);
    return s;
  };
  return integrate_base_disk(integrand, center, r, f.m, f.singular_points, cfg);
}

QuadResult mass_over_cylinder(const MultiGraph& f, const Vec& center,
                              double r, const QuadratureConfig& cfg) {
  QuadResult e = excess(f, center, r, cfg);
  e.value += f.q * geom::unit_ball_volume(f.m) * std::pow(r, f.m);
  return e;
}

QuadResult dirichlet(const MultiGraph& f, const Vec& center, double r,
                     const QuadratureConfig& cfg) {
  auto integrand = [&f](const Vec& x) {
    double s = 0.0;
    for (const auto& sheet : f.eval(x)) s += sheet.jacobian.squaredNorm();
    return s;
  };
  return integrate_base_disk(integrand, center, r, f.m, f.singular_points, cfg);
}

QuadResult affine_competitor_mass(const MultiGraph& f, const Vec& center,
                                  double r, double collar_fraction,
                                  const QuadratureConfig& cfg) {
  if (!(collar_fraction > 0.0 && collar_fraction < 0.5))
    throw SpecError("affine competitor: collar fraction must be in (0, 1/2)");
  const int m = f.m, n = f.n, q = f.q;
  if (center.size() != m) throw DomainMismatch("competitor center dimension");

  // per-sheet affine fit a + B (x - center) from boundary samples
  std::vector<Vec> offsets(q, Vec::Zero(n));          // a
  std::vector<Mat> slopes(q, Mat::Zero(n, m));        // B
  if (m == 1) {
    Vec lo(1), hi(1);
    lo[0] = center[0] - r;
    hi[0] = center[0] + r;
    auto vlo = f.eval(lo), vhi = f.eval(hi);
    for (int i = 0; i < q; ++i) {
      slopes[i].col(0) = (vhi[i].value - vlo[i].value) / (2.0 * r);
      offsets[i] = (vhi[i].value + vlo[i].value) / 2.0;
    }
  } else {
    const int nb = 256;
    Mat design(nb, m + 1);
    std::vector<Mat> rhs(q, Mat(nb, n));
    for (int j = 0; j < nb; ++j) {
      double th = 2.0 * M_PI * (j + 0.5) / nb;
      Vec x(2);
      x[0] = center[0] + r * std::cos(th);
      x[1] = center[1] + r * std::sin(th);
      design(j, 0) = 1.0;
      for (int d = 0; d < m; ++d) design(j, d + 1) = x[d] - center[d];
      auto vals = f.eval(x);
      for (int i = 0; i < q; ++i) rhs[i].row(j) = vals[i].value.transpose();
    }
    Eigen::ColPivHouseholderQR<Mat> qr(design);
    for (int i = 0; i < q; ++i) {
      Mat coef = qr.solve(rhs[i]);  // (m+1) x n
      offsets[i] = coef.row(0).transpose();
      slopes[i] = coef.bottomRows(m).transpose();
    }
  }

  const double inner = (1.0 - collar_fraction) * r;
  auto integrand = [&](const Vec& x) {
    const double rho = (x - center).norm();
    const double t = std::clamp((rho - inner) / (collar_fraction * r), 0.0, 1.0);
    double s = 0.0;
    if (t <= 0.0) {
      for (int i = 0; i < q; ++i) s += area_excess(slopes[i]);
      return s;
    }
    Vec grad_t = Vec::Zero(m);
    if (rho > 0.0) grad_t = (x - center) / (rho * collar_fraction * r);
    auto vals = f.eval(x);
    for (int i = 0; i < q; ++i) {
      Vec aff = offsets[i] + slopes[i] * (x - center);
      Mat jac = (1.0 - t) * slopes[i] + t * vals[i].jacobian +
                (vals[i].value - aff) * grad_t.transpose();
      s += area_excess(jac);
    }
    return s;
  };
  QuadResult res = integrate_base_disk(integrand, center, r, m,
                                       f.singular_points, cfg);
  res.value += q * geom::unit_ball_volume(m) * std::pow(r, m);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

Mat stacked_differential(int m, const Mat& df) {
  Mat s(m + df.rows(), m);
  s.topRows(m) = Mat::Identity(m, m);
  s.bottomRows(df.rows()) = df;
  return s;
}

Vec lift(const Vec& x, const Vec& fx) {
  Vec out(x.size() + fx.size());
  out.head(x.size()) = x;
  out.tail(fx.size()) = fx;
  return out;
}

Vec sample_in_ball(const Vec& center, double radius, int m,
                   std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec dir(m);
  do {
    for (int d = 0; d < m; ++d) dir[d] = gauss(rng);
  } while (dir.norm() == 0.0);
  dir /= dir.norm();
  double rho = radius * std::pow(unif(rng), 1.0 / m);
  return center + rho * dir;
}

}  // namespace

ReparamResult reparametrize(const ReparamInput& in) {
  const int m = in.m, n = in.n;
  if (in.x_prime.size() != m || in.A.matrix.rows() != n ||
      in.A.matrix.cols() != m)
    throw DomainMismatch("reparametrize: dimension mismatch");
  if (!(in.delta > 0.0 && in.r > 0.0))
    throw SpecError("reparametrize: r and delta must be positive");

  const double lipA = geom::operator_norm(in.A);
  const double tau = geom::tilt_cosine(in.lambda);
  if (in.delta + lipA * in.sigma / std::sqrt(1.0 + lipA * lipA) >
      tau + 1e-12)
    throw CloseEnoughViolation("reparametrize: tilt/size condition fails");

  ReparamResult res;
  res.plane = geom::plane_of_linear_map(in.A, Vec::Zero(m + n));
  res.tau = tau;
  res.domain_radius = tau * in.r / in.delta;
  res.stats = std::make_shared<NewtonStats>();

  const MPlane plane = res.plane;
  const SheetFn f = in.f;
  const Vec x_prime = in.x_prime;
  const double domain_r = in.r / in.delta;
  auto stats = res.stats;

  auto chart = [plane, f](const Vec& x) {  // x -> plane-tangential coords
    SheetValue v = f(x);
    return Vec(plane.tangent.transpose() * lift(x, v.value));
  };
  res.y_prime = chart(x_prime);
  const Vec y_prime = res.y_prime;

  auto inverse = [plane, f, chart, x_prime, y_prime, domain_r, stats,
                  m](const Vec& z) {
    SheetValue v0 = f(x_prime);
    Mat jac0 = plane.tangent.transpose() * stacked_differential(m, v0.jacobian);
    Vec x = x_prime + jac0.partialPivLu().solve(z - y_prime);
    Vec res_vec = z - chart(x);
    double res_norm = res_vec.norm();
    const double tol = 1e-13 * std::max(1.0, z.norm());
    int iter = 0;
    while (res_norm > tol) {
      if (++iter > 50)
        throw NewtonDivergence("chart inversion: iteration limit");
      SheetValue v = f(x);
      Mat jac = plane.tangent.transpose() * stacked_differential(m, v.jacobian);
      res_vec = z - chart(x);
      Vec step = jac.partialPivLu().solve(res_vec);
      double scale = 1.0;
      Vec x_new;
      double new_norm;
      for (int halvings = 0;; ++halvings) {
        if (halvings > 40)
          throw NewtonDivergence("chart inversion: damping failed");
        x_new = x + scale * step;
        new_norm = (z - chart(x_new)).norm();
        if (new_norm < res_norm) break;
        scale /= 2.0;
      }
      x = x_new;
      res_norm = new_norm;
    }
    if ((x - x_prime).norm() > domain_r * (1.0 + 1e-9))
      throw DomainExceeded("chart inversion left the sheet domain");
    ++stats->calls;
    stats->max_iterations = std::max(stats->max_iterations, iter);
    stats->max_residual = std::max(stats->max_residual, res_norm);
    return x;
  };
  res.chart_inverse = inverse;

  res.g = [plane, f, inverse, m](const Vec& z) {
    Vec x = inverse(z);
    SheetValue v = f(x);
    Mat stack = stacked_differential(m, v.jacobian);
    SheetValue out;
    out.value = plane.normal.transpose() * lift(x, v.value);
    Mat dy = plane.tangent.transpose() * stack;  // m x m
    out.jacobian = (plane.normal.transpose() * stack) * dy.inverse();
    return out;
  };
  return res;
}

double sampled_gradient_seminorm(const SheetFn& f, const Vec& center,
                                 double r, double alpha, int n_pairs,
                                 uint64_t seed) {
  if (n_pairs < 1) throw InsufficientSamples("gradient seminorm: no pairs");
  const int m = static_cast<int>(center.size());
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    Vec x = sample_in_ball(center, r, m, rng);
    Vec y = sample_in_ball(center, r, m, rng);
    double h = (x - y).norm();
    if (h <= 1e-14) continue;
    double diff = (f(x).jacobian - f(y).jacobian).norm();
    best = std::max(best, diff / std::pow(h, alpha));
  }
  return best;
}

SeminormComparison check_hseminorm(const ReparamInput& in,
                                   const ReparamResult& res, double alpha,
                                   int n_pairs, uint64_t seed) {
  SeminormComparison out;
  out.lhs = sampled_gradient_seminorm(res.g, res.y_prime, res.domain_radius,
                                      alpha, n_pairs, seed);
  out.rhs = sampled_gradient_seminorm(in.f, in.x_prime, in.r / in.delta,
                                      alpha, n_pairs, seed + 1);
  if (out.lhs == 0.0)
    out.ratio = 0.0;
  else if (out.rhs == 0.0)
    out.ratio = std::numeric_limits<double>::infinity();
  else
    out.ratio = out.lhs / out.rhs;
  return out;
}

double check_relgrad(const ReparamInput& in1, const ReparamInput& in2,
                     double alpha, int n_samples, uint64_t seed) {
  if (n_samples < 1) throw InsufficientSamples("relgrad: no samples");
  ReparamResult r1 = reparametrize(in1);
  ReparamResult r2 = reparametrize(in2);
  const int m = in1.m;
  const double lipA = geom::operator_norm(in1.A);
  const double tilt_factor =
      std::pow(lipA, alpha) * std::pow(1.0 + lipA * lipA, -alpha / 2.0);

  std::mt19937_64 rng(seed);
  const double sem = std::min(
      sampled_gradient_seminorm(in1.f, in1.x_prime, in1.r / in1.delta, alpha,
                                400, seed + 11),
      sampled_gradient_seminorm(in2.f, in2.x_prime, in2.r / in2.delta, alpha,
                                400, seed + 12));
  double sup_grad_diff = 0.0;
  for (int i = 0; i < 500; ++i) {
    Vec x = sample_in_ball(in1.x_prime, in1.r / in1.delta, m, rng);
    sup_grad_diff = std::max(
        sup_grad_diff, (in1.f(x).jacobian - in2.f(x).jacobian).norm());
  }

  // z ranges over B_r(p_plane(x0)), x0 = (x_prime, x_bar)
  Vec z_center = r1.plane.tangent.transpose() * lift(in1.x_prime, in1.x_bar);
  double max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    Vec z = sample_in_ball(z_center, in1.r, m, rng);
    SheetValue g1 = r1.g(z), g2 = r2.g(z);
    double lhs = (g1.jacobian - g2.jacobian).norm();
    Vec x1 = r1.chart_inverse(z), x2 = r2.chart_inverse(z);
    double val_diff = (in1.f(x1).value - in2.f(x2).value).norm();
    double rhs = tilt_factor * sem * std::pow(val_diff, alpha) + sup_grad_diff;
    max_violation = std::max(max_violation, lhs - rhs);
  }
  return max_violation;
}

}  // namespace almostmin::currents
