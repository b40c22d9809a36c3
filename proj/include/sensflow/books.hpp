#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

using Vec3 = Eigen::Vector3d;

// Cylindrical point (r, phi, z); Cartesian (r cos phi, r sin phi, z).
struct CylPoint {
  double r = 0.0;
  double phi = 0.0;
  double z = 0.0;

  Vec3 cartesian() const;
  static CylPoint from_cartesian(const Vec3& p);
};

// The half cylinder Omega = {r <= 1/4, z <= -1} and its restriction
// Omega_zeta = {r <= 1/6, z < zeta}.
struct BooksDomain {
  static constexpr double kRMax = 0.25;
  static constexpr double kZMax = -1.0;
  static constexpr double kRCap = 1.0 / 6.0;

  static bool contains(const CylPoint& p);
  static bool contains_restricted(const CylPoint& p, double zeta);
};

// log(cosh(u)) computed without overflow for large |u|.
double log_cosh(double u);

// h(f, r, phi, z) = f + z - log(cosh(f r sin(f - phi)))/f - r^2/(1 + f).
// Strictly increasing in f on Omega, h(1, .) <= 0 and h -> +inf as f -> inf,
// so the level function f below is well defined.
double books_h(double f, double r, double phi, double z);

// The unique f >= 1 with |h(f, p)| <= tol, by bracketing and bisection.
double solve_f(const CylPoint& p, double tol = 1e-12);

// z-coordinate of the level surface f = a:
//   z(r, phi) = -a + log(cosh(a r sin(a - phi)))/a + r^2/(1 + a).
double level_surface_z(double a, double r, double phi);

// Cartesian gradient of f at p, by implicit differentiation of h expressed in
// Cartesian coordinates (regular across the axis r = 0).
Vec3 grad_f(const CylPoint& p, double tol = 1e-12);

// Midpoint quasi-convexity check on the level surface f = a: samples pairs on
// the level, asserts f(midpoint) <= a + tol and strict decrease for separated
// pairs.
struct QuasiconvexityReport {
  int pairs = 0;
  int failures = 0;
  double worst_excess = 0.0;      // max over pairs of f(mid) - a (should be <= tol)
  double min_strict_margin = 0.0; // min over separated pairs of a - f(mid)
  bool pass = false;
};

QuasiconvexityReport quasiconvexity_probe(double a, int pairs,
                                          std::uint64_t seed = 1);

// Smallest n with g_n(-eps/3) >= 1/4, where
//   g_n(y) = -tanh(2 pi n y) - 2 y / (1 + 2 pi n),
// then n_eps = max(n, ceil(1/eps)). Levels a >= 2 pi n_eps admit matched
// spread points within eps of the construction's screw line.
int spine_index_n_eps(double epsilon);

// All quantities of the diverging-spiral construction for one epsilon:
// z0 = z_eps + zeta - 2/eps; the radial profile solves
//   rdot = eps - 2 r / (1 - z0 - t), r(0) = 0,
// and t0 is the first time r reaches 1/6. The path is
//   p(t) = (r(t), phi0 - t, z0 + t), phi0 = -z0,
// traversing the spine screw line phi == -z, with radial perturbation
// u(t) = eps rhat whose cumulative integral stays below 2 eps in norm.
//
// `ratio` is the certified sensitivity lower bound deviation / (2 eps); the
// grid supremum of ||U|| and the corresponding measured ratio are reported
// alongside. The time reparametrization onto the original field is not
// computed: sup-based ratios are invariant under it.
struct SpiralCertificate {
  double epsilon = 0.0;
  double zeta = 0.0;
  int n_eps = 0;
  double z_eps = 0.0;
  double z0 = 0.0;
  double phi0 = 0.0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> ts;    // decimated sample times in [0, t0]
  std::vector<double> rs;    // r(ts)
  std::vector<Vec3> path;    // p(ts), Cartesian
  std::vector<Vec3> U_path;  // U(ts), Cartesian
  double rdot_min = 0.0;     // min of rdot over [0, t0] (>= eps/3)
  double sup_U = 0.0;        // measured sup ||U|| over the grid
  double deviation = 0.0;    // distance from the axis trajectory at t0 (= r(t0))
  double ratio = 0.0;        // deviation / (2 eps)
  double ratio_measured = 0.0;

  Trajectory to_trajectory() const;
};

SpiralCertificate spiral_construction(double epsilon, double zeta, double dt);

// Witness for the spread-membership lemma at a screw-line point
// p = (r, phi, z) with z <= z_eps: on the level a = -z, in the frame rotated
// by a, solves g(y0) = side * x0 for the page offset y0 (|y0| < eps/3 else
// MembershipFailedError), forms the matched surface point and the scaled
// normal v with unit z-component, and reports the distance ||matched - p||
// and the angle between alpha v and grad f at the matched point (alpha the
// z-component of grad f). side = +1 matches a drift rotating along +phihat,
// side = -1 the page the spiral construction tracks.
struct MatchReport {
  Vec3 matched_point;  // Cartesian
  double distance = 0.0;
  double alpha = 0.0;
  double angle = 0.0;  // radians between alpha v and grad f(matched)
  double y0 = 0.0;
  double level = 0.0;  // a = -z
  Vec3 v;              // global Cartesian scaled normal
  Vec3 v_frame;        // frame components (-2 x0/(1+a), side * x0, 1)
};

MatchReport verify_spread_membership(const CylPoint& p, double epsilon,
                                     int side = +1);

// Axis-aligned slab {z in [z_lo, z_hi], r <= r_max} triangulated with the
// Kuhn subdivision of a cubic grid; node values interpolate `fn`
// (default: the level function f).
struct Slab {
  double z_lo = 0.0;
  double z_hi = 0.0;
  double r_max = BooksDomain::kRMax;
};

class PwlInterpolant {
 public:
  PwlInterpolant(const Slab& slab, double grid_h,
                 const std::function<double(const Vec3&)>& fn);

  double value(const Vec3& p) const;
  Vec3 gradient(const Vec3& p) const;
  bool covers(const Vec3& p) const;

  double grid_h() const { return h_; }
  long usable_simplices() const { return usable_; }
  long skipped_simplices() const { return skipped_; }

  // Calls visitor(vertices[4], gradient) for every usable simplex.
  void for_each_simplex(
      const std::function<void(const std::array<Vec3, 4>&, const Vec3&)>& visitor) const;

 private:
  Slab slab_;
  double h_;
  int nx_, ny_, nz_;  // cell counts
  double ox_, oy_, oz_;
  std::vector<double> values_;  // node values, NaN outside the cylinder
  mutable long usable_ = 0;
  mutable long skipped_ = 0;

  int node_index(int i, int j, int k) const;
  bool locate(const Vec3& p, int perm[3], std::array<int, 4>& nodes,
              double frac[3]) const;
};

struct GradientErrorReport {
  double grid_h = 0.0;
  double sup_error = 0.0;
  double mean_error = 0.0;
  long samples = 0;
  long skipped_simplices = 0;
};

// Sup over sampled interior points of ||grad Psi - grad_ref(p)||.
GradientErrorReport pwl_gradient_error(
    const PwlInterpolant& psi,
    const std::function<Vec3(const Vec3&)>& grad_ref,
    int samples_per_simplex = 1);

// Builds the interpolant of f on the slab and measures its gradient error
// against grad_f.
struct PwlInterpolantResult {
  PwlInterpolant interpolant;
  GradientErrorReport report;
};

PwlInterpolantResult pwl_interpolant(const Slab& slab, double grid_h,
                                     int samples_per_simplex = 1);

}  // namespace sensflow
