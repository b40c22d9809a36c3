#include "sensflow/spread.hpp"

#include <algorithm>
#include <cmath>

namespace sensflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

double halton(std::uint64_t index, int base) {
  double f = 1.0, result = 0.0;
  while (index > 0) {
    f /= base;
    result += f * static_cast<double>(index % base);
    index /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

// j-th point of the unit ball: Halton directions via the inverse-normal-free
// construction (componentwise Box-Muller would need pairs; use the radial map
// on a Halton cube point folded to [-1,1]^n, rejecting the outside).
Vec ball_point(int dimension, std::uint64_t index) {
  // Rejection-free: direction from angles for n<=3, general fallback rejects.
  if (dimension == 1) {
    Vec v(1);
    v << 2.0 * halton(index, 2) - 1.0;
    return v;
  }
  if (dimension == 2) {
    const double rho = std::sqrt(halton(index, 2));
    const double theta = 2.0 * kPi * halton(index, 3);
    Vec v(2);
    v << rho * std::cos(theta), rho * std::sin(theta);
    return v;
  }
  if (dimension == 3) {
    const double rho = std::cbrt(halton(index, 2));
    const double cos_t = 2.0 * halton(index, 3) - 1.0;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * kPi * halton(index, 5);
    Vec v(3);
    v << rho * sin_t * std::cos(phi), rho * sin_t * std::sin(phi), rho * cos_t;
    return v;
  }
  // Higher dimensions: fold a Halton cube point into the ball by scaling.
  Vec v(dimension);
  for (int d = 0; d < dimension; ++d) {
    v(d) = 2.0 * halton(index, kPrimes[d % 10]) - 1.0;
  }
  const double norm = v.norm();
  if (norm > 1.0) v /= norm;
  return v;
}

}  // namespace

std::vector<Vec> spread_sample(const SpreadField& sf, const Vec& x) {
  if (sf.probe_count < 1) throw ArgumentError("spread_sample: probe_count must be >= 1");
  if (sf.epsilon < 0) throw ArgumentError("spread_sample: epsilon must be >= 0");
  if (sf.epsilon == 0.0) return sf.base.sample(x);

  std::vector<Vec> drifts;
  int failures = 0;
  auto gather = [&](const Vec& probe) {
    try {
      std::vector<Vec> local = sf.base.sample(probe);
      if (local.empty()) {
        ++failures;
        return;
      }
      for (Vec& d : local) drifts.push_back(std::move(d));
    } catch (const Error&) {
      ++failures;
    }
  };

  gather(x);
  for (int j = 0; j < sf.probe_count; ++j) {
    const std::uint64_t index = sf.seed * 7919ull + 1ull + static_cast<std::uint64_t>(j);
    gather(x + sf.epsilon * ball_point(sf.base.dimension, index));
  }
  if (drifts.empty()) {
    throw FieldUndefinedError("spread_sample: base field undefined at every probe");
  }
  return drifts;
}

VectorField as_field(const SpreadField& sf) {
  VectorField f;
  f.dimension = sf.base.dimension;
  f.sample = [sf](const Vec& x) { return spread_sample(sf, x); };
  // Drifts come from the eps-ball, so the growth constant inflates slightly.
  if (sf.base.growth_constant) {
    f.growth_constant = *sf.base.growth_constant * (1.0 + sf.epsilon);
  }
  return f;
}

Trajectory spread_integrate(const SpreadField& sf, const Vec& x0,
                            const PerturbationSignal& U, double T, double dt,
                            const DriftSelector& selector) {
  return integrate_perturbed(as_field(sf), x0, U, T, dt, selector);
}

Kernel uniform_kernel(double radius) {
  if (radius <= 0) throw ArgumentError("uniform_kernel: radius must be positive");
  Kernel k;
  k.radius = radius;
  k.weight = [](const Vec&) { return 1.0; };
  return k;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct BallQuadrature {
  std::vector<Vec> points;     // offsets within B_radius(0)
  std::vector<double> weights; // volume weights
};

// Product Gauss-Legendre mapped to the ball: radial GL (with the r^{n-1}
// Jacobian) times a symmetric angular rule.
BallQuadrature ball_quadrature(int dimension, double radius, int quad_points) {
  if (quad_points < 2) throw ArgumentError("ball_quadrature: quad_points must be >= 2");
  BallQuadrature q;
  std::vector<double> gn, gw;
  gauss_legendre(quad_points, gn, gw);

  if (dimension == 1) {
    for (int i = 0; i < quad_points; ++i) {
      Vec p(1);
      p << radius * gn[i];
      q.points.push_back(p);
      q.weights.push_back(radius * gw[i]);
    }
    return q;
  }
  if (dimension == 2) {
    const int n_theta = 2 * quad_points;
    for (int i = 0; i < quad_points; ++i) {
      const double r = radius * 0.5 * (gn[i] + 1.0);
      const double wr = radius * 0.5 * gw[i] * r;   // r dr
      for (int j = 0; j < n_theta; ++j) {
        const double theta = 2.0 * kPi * (j + 0.5) / n_theta;
        Vec p(2);
        p << r * std::cos(theta), r * std::sin(theta);
        q.points.push_back(p);
        q.weights.push_back(wr * 2.0 * kPi / n_theta);
      }
    }
    return q;
  }
  if (dimension == 3) {
    const int n_phi = 2 * quad_points;
    for (int i = 0; i < quad_points; ++i) {
      const double r = radius * 0.5 * (gn[i] + 1.0);
      const double wr = radius * 0.5 * gw[i] * r * r;  // r^2 dr
      for (int j = 0; j < quad_points; ++j) {
        const double ct = gn[j];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double wt = gw[j];
        for (int k = 0; k < n_phi; ++k) {
          const double phi = 2.0 * kPi * (k + 0.5) / n_phi;
          Vec p(3);
          p << r * st * std::cos(phi), r * st * std::sin(phi), r * ct;
          q.points.push_back(p);
          q.weights.push_back(wr * wt * 2.0 * kPi / n_phi);
        }
      }
    }
    return q;
  }
  throw UnsupportedError("ball_quadrature: dimensions above 3 are not supported");
}

}  // namespace

double kernel_quadrature_mass(const Kernel& kernel, int dimension, int quad_points) {
  const BallQuadrature q = ball_quadrature(dimension, kernel.radius, quad_points);
  double mass = 0.0;
  for (std::size_t j = 0; j < q.points.size(); ++j) {
    const double w = kernel.weight(q.points[j]);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("kernel weight must be finite and non-negative on the ball");
    }
    mass += q.weights[j] * w;
  }
  return mass;
}

VectorField convolve_field(const VectorField& base, const Kernel& kernel,
                           int quad_points) {
  if (kernel.radius <= 0) throw ArgumentError("convolve_field: kernel radius must be positive");
  const int n = base.dimension;
  const BallQuadrature q = ball_quadrature(n, kernel.radius, quad_points);

  double mass = 0.0;
  std::vector<double> kernel_w(q.points.size());
  for (std::size_t j = 0; j < q.points.size(); ++j) {
    const double w = kernel.weight(q.points[j]);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("convolve_field: kernel weight must be finite and non-negative");
    }
    kernel_w[j] = w;
    mass += q.weights[j] * w;
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ArgumentError("convolve_field: kernel is not normalizable");
  }

  VectorField f;
  f.dimension = n;
  if (base.growth_constant) {
    f.growth_constant = *base.growth_constant * (1.0 + kernel.radius);
  }
  f.sample = [base, q, kernel_w, mass, n](const Vec& x) -> std::vector<Vec> {
    Vec out = Vec::Zero(n);
    for (std::size_t j = 0; j < q.points.size(); ++j) {
      if (kernel_w[j] == 0.0) continue;
      const std::vector<Vec> drifts = base.sample(x - q.points[j]);
      if (drifts.empty()) {
        throw FieldUndefinedError("convolve_field: base field undefined at a node");
      }
      out += (q.weights[j] * kernel_w[j] / mass) * drifts.front();
    }
    return {out};
  };
  return f;
}

SpreadBoundCheck check_spread_bound(double C, double epsilon,
                                    const std::vector<SensitivityReport>& reports) {
  if (C <= 0) throw ArgumentError("check_spread_bound: C must be positive");
  if (epsilon < 0) throw ArgumentError("check_spread_bound: epsilon must be >= 0");
  SpreadBoundCheck check;
  check.per_report.reserve(reports.size());
  check.slack.reserve(reports.size());
  for (const SensitivityReport& r : reports) {
    const double rhs = C * (2.0 * epsilon + r.sup_perturbation) + 3.0 * epsilon;
    const double slack = rhs - r.sup_deviation;
    check.per_report.push_back(slack >= 0.0);
    check.slack.push_back(slack);
    if (slack < 0.0) check.pass = false;
  }
  return check;
}

}  // namespace sensflow
