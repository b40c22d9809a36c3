#include "sensflow/books.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace sensflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Vec3 CylPoint::cartesian() const {
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

CylPoint CylPoint::from_cartesian(const Vec3& p) {
  CylPoint c;
  c.r = std::hypot(p.x(), p.y());
  c.phi = (c.r > 0) ? std::atan2(p.y(), p.x()) : 0.0;
  c.z = p.z();
  return c;
}

bool BooksDomain::contains(const CylPoint& p) {
  return p.r <= kRMax + 1e-12 && p.z <= kZMax + 1e-12 && p.r >= 0;
}

bool BooksDomain::contains_restricted(const CylPoint& p, double zeta) {
  return p.r <= kRCap + 1e-12 && p.z < zeta && p.r >= 0;
}

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double books_h(double f, double r, double phi, double z) {
  return f + z - log_cosh(f * r * std::sin(f - phi)) / f - r * r / (1.0 + f);
}

namespace {

// Same bisection core as solve_f but with the domain check left to callers;
// needed for matched points that sit a few eps/3 outside the r <= 1/4 wall,
// where h is still strictly increasing in f (1 - r^2 - r > 0 up to r ~ 0.6).
double solve_f_core(const CylPoint& p, double tol) {
  if (tol <= 0) throw ArgumentError("solve_f: tol must be positive");
  double lo = std::max(1.0, -p.z);
  if (books_h(lo, p.r, p.phi, p.z) > 0) lo = 1.0;  // z slightly above -1
  double offset = 0.3;
  double hi = lo + offset;
  while (books_h(hi, p.r, p.phi, p.z) <= 0) {
    offset *= 2.0;
    hi = lo + offset;
    if (hi > 1e9) throw NumericError("solve_f: bracket expansion exceeded 1e9");
  }
  double mid = lo;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double hm = books_h(mid, p.r, p.phi, p.z);
    if (std::abs(hm) <= tol) return mid;
    if (hm < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace

double solve_f(const CylPoint& p, double tol) {
  if (!BooksDomain::contains(p)) {
    throw DomainError("solve_f: point outside the half cylinder Omega");
  }
  return solve_f_core(p, tol);
}

double level_surface_z(double a, double r, double phi) {
  return -a + log_cosh(a * r * std::sin(a - phi)) / a + r * r / (1.0 + a);
}

namespace {

// Cartesian partials of h at fixed f. With Q = x sin f - y cos f (so the
// lncosh argument is u = f Q, smooth through the axis):
//   dh/dx = -tanh(u) sin f - 2x/(1+f)
//   dh/dy = +tanh(u) cos f - 2y/(1+f)
//   dh/dz = 1
//   dh/df = 1 + lncosh(u)/f^2 - tanh(u) [Q + f (x cos f + y sin f)]/f
//           + (x^2+y^2)/(1+f)^2
Vec3 grad_f_at(double f, const Vec3& p) {
  const double x = p.x(), y = p.y();
  const double sf = std::sin(f), cf = std::cos(f);
  const double Q = x * sf - y * cf;
  const double u = f * Q;
  const double th = std::tanh(u);
  const double r2 = x * x + y * y;
  const double hx = -th * sf - 2.0 * x / (1.0 + f);
  const double hy = th * cf - 2.0 * y / (1.0 + f);
  const double hz = 1.0;
  const double hf = 1.0 + log_cosh(u) / (f * f) - th * (Q + f * (x * cf + y * sf)) / f +
                    r2 / ((1.0 + f) * (1.0 + f));
  return Vec3(-hx / hf, -hy / hf, -hz / hf);
}

}  // namespace

Vec3 grad_f(const CylPoint& p, double tol) {
  const double f = solve_f(p, tol);
  return grad_f_at(f, p.cartesian());
}

QuasiconvexityReport quasiconvexity_probe(double a, int pairs, std::uint64_t seed) {
  if (a < 1.0) throw ArgumentError("quasiconvexity_probe: a must be >= 1");
  if (pairs < 1) throw ArgumentError("quasiconvexity_probe: pairs must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_on_level = [&]() -> Vec3 {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double r = BooksDomain::kRMax * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      const double z = level_surface_z(a, r, phi);
      if (z <= BooksDomain::kZMax) return CylPoint{r, phi, z}.cartesian();
    }
    throw NumericError("quasiconvexity_probe: level surface leaves Omega");
  };

  QuasiconvexityReport report;
  report.pairs = pairs;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  report.min_strict_margin = std::numeric_limits<double>::infinity();
  const double solver_tol = 1e-12;
  for (int i = 0; i < pairs; ++i) {
    const Vec3 p1 = sample_on_level();
    const Vec3 p2 = sample_on_level();
    const Vec3 mid = 0.5 * (p1 + p2);
    const double f_mid = solve_f(CylPoint::from_cartesian(mid), solver_tol);
    const double excess = f_mid - a;
    report.worst_excess = std::max(report.worst_excess, excess);
    if (excess > 1e-9) ++report.failures;
    if ((p1 - p2).norm() >= 1e-3) {
      report.min_strict_margin = std::min(report.min_strict_margin, a - f_mid);
      if (f_mid >= a) ++report.failures;
    }
  }
  report.pass = report.failures == 0;
  return report;
}

namespace {

double g_page(double y, double two_pi_n) {
  return -std::tanh(two_pi_n * y) - 2.0 * y / (1.0 + two_pi_n);
}

}  // namespace

int spine_index_n_eps(double epsilon) {
  if (epsilon <= 0 || epsilon > 0.5) {
    throw ArgumentError("spine_index_n_eps: epsilon must be in (0, 1/2]");
  }
  int n_tilde = 1;
  while (g_page(-epsilon / 3.0, 2.0 * kPi * n_tilde) < 0.25) {
    ++n_tilde;
    if (n_tilde > 1000000) throw NumericError("spine_index_n_eps: n search did not terminate");
  }
  const int n_floor = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
  return std::max(n_tilde, n_floor);
}

namespace {

struct SpiralOde {
  double epsilon;
  double z0;
  double rate(double t, double r) const {
    return epsilon - 2.0 * r / (1.0 - z0 - t);
  }
  double rk4_step(double t, double r, double h) const {
    const double k1 = rate(t, r);
    const double k2 = rate(t + 0.5 * h, r + 0.5 * h * k1);
    const double k3 = rate(t + 0.5 * h, r + 0.5 * h * k2);
    const double k4 = rate(t + h, r + h * k3);
    return r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

}  // namespace

Trajectory SpiralCertificate::to_trajectory() const {
  Trajectory traj;
  traj.dt = dt;
  traj.perturbation_description = "spiral radial push, eps = " + std::to_string(epsilon);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double r = rs[i];
    const double phi = phi0 - t;
    const double z = z0 + t;
    const double rdot = epsilon - 2.0 * r / (1.0 - z0 - t);
    Vec state(3), drift(3), pert(3);
    state << r * std::cos(phi), r * std::sin(phi), z;
    // Field part of the velocity (the radial push eps rhat is the perturbation).
    drift << (rdot - epsilon) * std::cos(phi) + r * std::sin(phi),
        (rdot - epsilon) * std::sin(phi) - r * std::cos(phi), 1.0;
    pert << U_path[i].x(), U_path[i].y(), U_path[i].z();
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.drifts.push_back(drift);
    traj.perturbations.push_back(pert);
  }
  return traj;
}

SpiralCertificate spiral_construction(double epsilon, double zeta, double dt) {
  if (epsilon <= 0 || epsilon > 0.5) {
    throw ArgumentError("spiral_construction: epsilon must be in (0, 1/2]");
  }
  if (zeta > -1.0) throw ArgumentError("spiral_construction: zeta must be <= -1");
  if (dt <= 0) throw ArgumentError("spiral_construction: dt must be positive");

  SpiralCertificate cert;
  cert.epsilon = epsilon;
  cert.zeta = zeta;
  cert.dt = dt;
  cert.n_eps = spine_index_n_eps(epsilon);
  cert.z_eps = -2.0 * kPi * cert.n_eps;
  cert.z0 = cert.z_eps + zeta - 2.0 / epsilon;
  cert.phi0 = -cert.z0;

  const SpiralOde ode{epsilon, cert.z0};
  const double t_cap = 1.0 / (2.0 * epsilon);
  const double target = 1.0 / 6.0;

  std::vector<double> all_t{0.0};
  std::vector<double> all_r{0.0};
  cert.rdot_min = ode.rate(0.0, 0.0);
  double t = 0.0, r = 0.0;
  bool crossed = false;
  while (t < t_cap) {
    const double h = std::min(dt, t_cap - t);
    const double r_next = ode.rk4_step(t, r, h);
    if (r_next >= target) {
      // One-sided refinement: land with r(t0) in [1/6, 1/6 + 1e-9].
      double lo = 0.0, hi = h;
      for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (lo + hi);
        if (ode.rk4_step(t, r, m) >= target) {
          hi = m;
        } else {
          lo = m;
        }
        if (ode.rk4_step(t, r, hi) - target <= 1e-9) break;
      }
      t += hi;
      r = ode.rk4_step(t - hi, r, hi);
      crossed = true;
      break;
    }
    t += h;
    r = r_next;
    cert.rdot_min = std::min(cert.rdot_min, ode.rate(t, r));
    all_t.push_back(t);
    all_r.push_back(r);
  }
  if (!crossed) {
    throw ConstructionFailedError(
        "spiral_construction: r did not reach 1/6 before t = 1/(2 eps)");
  }
  cert.t0 = t;
  cert.deviation = r;
  all_t.push_back(t);
  all_r.push_back(r);

  // Decimate the profile to at most ~2000 samples plus the crossing point.
  const std::size_t stride = std::max<std::size_t>(1, all_t.size() / 2000);
  for (std::size_t i = 0; i < all_t.size(); ++i) {
    if (i % stride != 0 && i + 1 != all_t.size()) continue;
    cert.ts.push_back(all_t[i]);
    cert.rs.push_back(all_r[i]);
  }

  double sup_u = 0.0;
  for (std::size_t i = 0; i < cert.ts.size(); ++i) {
    const double ti = cert.ts[i];
    const double ri = cert.rs[i];
    const double phi = cert.phi0 - ti;
    cert.path.emplace_back(ri * std::cos(phi), ri * std::sin(phi), cert.z0 + ti);
    const Vec3 u(epsilon * (std::sin(cert.phi0) - std::sin(cert.phi0 - ti)),
                 epsilon * (std::cos(cert.phi0 - ti) - std::cos(cert.phi0)), 0.0);
    cert.U_path.push_back(u);
    sup_u = std::max(sup_u, u.norm());
  }
  cert.sup_U = sup_u;
  cert.ratio = cert.deviation / (2.0 * epsilon);
  cert.ratio_measured = cert.deviation / sup_u;

  if (cert.rdot_min < epsilon / 3.0) {
    throw ConstructionFailedError("spiral_construction: rdot dropped below eps/3");
  }
  if (cert.sup_U > 2.0 * epsilon + 1e-12) {
    throw ConstructionFailedError("spiral_construction: sup||U|| exceeded 2 eps");
  }
  return cert;
}

MatchReport verify_spread_membership(const CylPoint& p, double epsilon, int side) {
  if (side != 1 && side != -1) {
    throw ArgumentError("verify_spread_membership: side must be +1 or -1");
  }
  if (p.r < 0 || p.r > BooksDomain::kRMax + 1e-12) {
    throw DomainError("verify_spread_membership: r must lie in [0, 1/4]");
  }
  const int n_eps = spine_index_n_eps(epsilon);
  const double z_eps = -2.0 * kPi * n_eps;
  if (p.z > z_eps + 1e-9) {
    throw DomainError("verify_spread_membership: z must be <= z_eps");
  }
  // The construction matches points on the spine screw line phi == -z (2 pi).
  if (std::abs(std::remainder(p.phi + p.z, 2.0 * kPi)) > 1e-6 * (1.0 + std::abs(p.z))) {
    throw DomainError("verify_spread_membership: point not on the screw line phi == -z");
  }

  const double a = -p.z;
  const double x0 = p.r;
  const double target = side * x0;

  // g is strictly decreasing and odd with g(-eps/3) >= 1/4 for all levels
  // a >= 2 pi n_eps, so the page offset solving g(y0) = side x0 stays within
  // the eps/3 budget.
  double y0 = 0.0;
  if (x0 > 0) {
    double lo = (side > 0) ? -epsilon / 3.0 : 0.0;
    double hi = (side > 0) ? 0.0 : epsilon / 3.0;
    const double g_lo = g_page(lo, a);
    const double g_hi = g_page(hi, a);
    if (!(g_lo >= target && target >= g_hi)) {
      throw MembershipFailedError(
          "verify_spread_membership: |y0| >= eps/3 (spine index too small)");
    }
    for (int iter = 0; iter < 200; ++iter) {
      const double m = 0.5 * (lo + hi);
      if (g_page(m, a) >= target) {
        lo = m;
      } else {
        hi = m;
      }
    }
    y0 = 0.5 * (lo + hi);
  }

  MatchReport report;
  report.level = a;
  report.y0 = y0;

  // Frame rotated so the spine of level a lies along the x axis; the surface
  // there is Z(x, y) = -a + lncosh(a y)/a + (x^2 + y^2)/(1 + a).
  const double Z = -a + log_cosh(a * y0) / a + (x0 * x0 + y0 * y0) / (1.0 + a);
  const double c = std::cos(p.phi), s = std::sin(p.phi);
  report.matched_point =
      Vec3(x0 * c - y0 * s, x0 * s + y0 * c, Z);
  report.distance = (report.matched_point - p.cartesian()).norm();

  report.v_frame = Vec3(-2.0 * x0 / (1.0 + a), g_page(y0, a), 1.0);
  report.v = Vec3(report.v_frame.x() * c - report.v_frame.y() * s,
                  report.v_frame.x() * s + report.v_frame.y() * c,
                  report.v_frame.z());

  const Vec3 grad = grad_f_at(
      solve_f_core(CylPoint::from_cartesian(report.matched_point), 1e-13),
      report.matched_point);
  report.alpha = grad.z();
  const Vec3 av = report.alpha * report.v;
  report.angle = std::atan2(av.cross(grad).norm(), av.dot(grad));
  return report;
}

// ---------------------------------------------------------------------------
// Kuhn-triangulated interpolant
// ---------------------------------------------------------------------------

namespace {

int divisions(double extent, double h, const char* what) {
  const double q = extent / h;
  const int n = static_cast<int>(std::llround(q));
  if (n < 1 || std::abs(n * h - extent) > 1e-9 * (1.0 + extent)) {
    throw ArgumentError(std::string("PwlInterpolant: grid_h must divide the ") + what);
  }
  return n;
}

}  // namespace

PwlInterpolant::PwlInterpolant(const Slab& slab, double grid_h,
                               const std::function<double(const Vec3&)>& fn)
    : slab_(slab), h_(grid_h) {
  if (grid_h <= 0) throw ArgumentError("PwlInterpolant: grid_h must be positive");
  if (slab.z_hi > -1.0 + 1e-12) throw ArgumentError("PwlInterpolant: slab must satisfy z_hi <= -1");
  if (slab.z_lo >= slab.z_hi) throw ArgumentError("PwlInterpolant: need z_lo < z_hi");

  nx_ = divisions(2.0 * slab.r_max, grid_h, "slab width");
  ny_ = nx_;
  nz_ = divisions(slab.z_hi - slab.z_lo, grid_h, "slab height");
  ox_ = -slab.r_max;
  oy_ = -slab.r_max;
  oz_ = slab.z_lo;

  values_.assign(static_cast<std::size_t>(nx_ + 1) * (ny_ + 1) * (nz_ + 1), kNaN);
  const double r2_max = slab.r_max * slab.r_max + 1e-12;
  for (int k = 0; k <= nz_; ++k) {
    for (int j = 0; j <= ny_; ++j) {
      for (int i = 0; i <= nx_; ++i) {
        const double x = ox_ + i * h_;
        const double y = oy_ + j * h_;
        if (x * x + y * y > r2_max) continue;
        values_[node_index(i, j, k)] = fn(Vec3(x, y, oz_ + k * h_));
      }
    }
  }

  for_each_simplex([](const std::array<Vec3, 4>&, const Vec3&) {});
}

int PwlInterpolant::node_index(int i, int j, int k) const {
  return (k * (ny_ + 1) + j) * (nx_ + 1) + i;
}

namespace {
constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
}

void PwlInterpolant::for_each_simplex(
    const std::function<void(const std::array<Vec3, 4>&, const Vec3&)>& visitor) const {
  long usable = 0, skipped = 0;
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        for (const auto& perm : kPerms) {
          int idx[3] = {i, j, k};
          std::array<Vec3, 4> verts;
          double vals[4];
          bool ok = true;
          for (int m = 0; m <= 3; ++m) {
            const double v = values_[node_index(idx[0], idx[1], idx[2])];
            if (std::isnan(v)) {
              ok = false;
              break;
            }
            vals[m] = v;
            verts[m] = Vec3(ox_ + idx[0] * h_, oy_ + idx[1] * h_, oz_ + idx[2] * h_);
            if (m < 3) ++idx[perm[m]];
          }
          if (!ok) {
            ++skipped;
            continue;
          }
          ++usable;
          Vec3 grad;
          for (int m = 0; m < 3; ++m) grad(perm[m]) = (vals[m + 1] - vals[m]) / h_;
          visitor(verts, grad);
        }
      }
    }
  }
  usable_ = usable;
  skipped_ = skipped;
}

bool PwlInterpolant::locate(const Vec3& p, int perm[3], std::array<int, 4>& nodes,
                            double frac[3]) const {
  const double coords[3] = {(p.x() - ox_) / h_, (p.y() - oy_) / h_, (p.z() - oz_) / h_};
  const int limits[3] = {nx_, ny_, nz_};
  int cell[3];
  for (int d = 0; d < 3; ++d) {
    if (coords[d] < -1e-9 || coords[d] > limits[d] + 1e-9) return false;
    cell[d] = std::clamp(static_cast<int>(std::floor(coords[d])), 0, limits[d] - 1);
    frac[d] = std::clamp(coords[d] - cell[d], 0.0, 1.0);
  }
  perm[0] = 0;
  perm[1] = 1;
  perm[2] = 2;
  std::sort(perm, perm + 3, [&](int a, int b) {
    return frac[a] != frac[b] ? frac[a] > frac[b] : a < b;
  });
  int idx[3] = {cell[0], cell[1], cell[2]};
  for (int m = 0; m <= 3; ++m) {
    nodes[m] = node_index(idx[0], idx[1], idx[2]);
    if (std::isnan(values_[nodes[m]])) return false;
    if (m < 3) ++idx[perm[m]];
  }
  return true;
}

bool PwlInterpolant::covers(const Vec3& p) const {
  int perm[3];
  std::array<int, 4> nodes;
  double frac[3];
  return locate(p, perm, nodes, frac);
}

double PwlInterpolant::value(const Vec3& p) const {
  int perm[3];
  std::array<int, 4> nodes;
  double frac[3];
  if (!locate(p, perm, nodes, frac)) {
    throw DomainError("PwlInterpolant::value: point not covered by a usable simplex");
  }
  double v = values_[nodes[0]];
  for (int m = 0; m < 3; ++m) v += (values_[nodes[m + 1]] - values_[nodes[m]]) * frac[perm[m]];
  return v;
}

Vec3 PwlInterpolant::gradient(const Vec3& p) const {
  int perm[3];
  std::array<int, 4> nodes;
  double frac[3];
  if (!locate(p, perm, nodes, frac)) {
    throw DomainError("PwlInterpolant::gradient: point not covered by a usable simplex");
  }
  Vec3 grad;
  for (int m = 0; m < 3; ++m) grad(perm[m]) = (values_[nodes[m + 1]] - values_[nodes[m]]) / h_;
  return grad;
}

GradientErrorReport pwl_gradient_error(
    const PwlInterpolant& psi, const std::function<Vec3(const Vec3&)>& grad_ref,
    int samples_per_simplex) {
  if (samples_per_simplex < 1 || samples_per_simplex > 5) {
    throw ArgumentError("pwl_gradient_error: samples_per_simplex must be in [1, 5]");
  }
  static const double kWeights[5][4] = {{0.25, 0.25, 0.25, 0.25},
                                        {0.55, 0.21, 0.14, 0.10},
                                        {0.10, 0.55, 0.21, 0.14},
                                        {0.14, 0.10, 0.55, 0.21},
                                        {0.21, 0.14, 0.10, 0.55}};
  GradientErrorReport report;
  report.grid_h = psi.grid_h();
  double total = 0.0;
  psi.for_each_simplex([&](const std::array<Vec3, 4>& verts, const Vec3& grad) {
    for (int s = 0; s < samples_per_simplex; ++s) {
      Vec3 p = Vec3::Zero();
      for (int m = 0; m < 4; ++m) p += kWeights[s][m] * verts[m];
      const double err = (grad - grad_ref(p)).norm();
      report.sup_error = std::max(report.sup_error, err);
      total += err;
      ++report.samples;
    }
  });
  report.skipped_simplices = psi.skipped_simplices();
  report.mean_error = report.samples > 0 ? total / report.samples : 0.0;
  return report;
}

PwlInterpolantResult pwl_interpolant(const Slab& slab, double grid_h,
                                     int samples_per_simplex) {
  PwlInterpolant psi(slab, grid_h, [](const Vec3& p) {
    return solve_f(CylPoint::from_cartesian(p), 1e-12);
  });
  GradientErrorReport report = pwl_gradient_error(
      psi,
      [](const Vec3& p) { return grad_f(CylPoint::from_cartesian(p), 1e-12); },
      samples_per_simplex);
  return PwlInterpolantResult{std::move(psi), std::move(report)};
}

}  // namespace sensflow
