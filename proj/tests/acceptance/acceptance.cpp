// Acceptance suite: one line per criterion, every tolerance pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sensflow/books.hpp"
#include "sensflow/discretize.hpp"
#include "sensflow/fpcs.hpp"
#include "sensflow/linear.hpp"
#include "sensflow/spread.hpp"

using namespace sensflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void criterion(int id, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), seconds, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Mat random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  return Mat(Eigen::HouseholderQR<Mat>(G).householderQ());
}

Vec random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  v.normalize();
  return v;
}

Mat rotary_matrix() {
  Mat A(2, 2);
  A << 0, -1, 1, 0;
  return A;
}

// --------------------------------------------------------------------------

bool criterion1_rotary(std::string& detail) {
  const double T = 100.0, grid = 0.01;
  std::vector<double> times;
  const int n = static_cast<int>(std::llround(T / grid));
  for (int i = 0; i <= n; ++i) times.push_back(grid * i);
  Vec x0(2);
  x0 << 1, 0;
  const LinearSystem sys{rotary_matrix()};
  const Trajectory pert = closed_form_trajectory(sys, x0, rotary_signal(), times);
  const Trajectory base = closed_form_trajectory(sys, x0, zero_signal(2), times);

  const double deviation = (pert.states.back() - base.states.back()).norm();
  const double sup_u = 2.0 * std::sin(std::min(T, kPi) / 2.0);  // attained at t = pi
  const double ratio = deviation / sup_u;

  char buf[160];
  std::snprintf(buf, sizeof buf, "deviation=%.9f supU=%.12f ratio=%.9f", deviation,
                sup_u, ratio);
  detail = buf;
  return std::abs(deviation - 100.0) <= 1e-6 && std::abs(sup_u - 2.0) <= 1e-9 &&
         std::abs(ratio - 50.0) <= 1e-6;
}

bool criterion2_sof(std::string& detail) {
  const SofReport rot = classify_sof({rotary_matrix()});
  if (!(rot.is_stable && !rot.is_orbit_free && !rot.is_sof)) {
    detail = "rotation misclassified";
    return false;
  }
  const SofReport zero = classify_sof({Mat::Zero(2, 2)});
  if (!(zero.is_sof && zero.zero_eig_algebraic == 2 && zero.zero_eig_geometric == 2)) {
    detail = "zero matrix misclassified";
    return false;
  }
  Mat J(2, 2);
  J << 0, 1, 0, 0;
  const SofReport jord = classify_sof({J});
  if (!(!jord.is_sof && jord.zero_eig_algebraic == 2 && jord.zero_eig_geometric == 1)) {
    detail = "nilpotent block misclassified";
    return false;
  }

  std::mt19937_64 rng(1001);
  const Mat cases[3] = {rotary_matrix(), Mat::Zero(2, 2), J};
  const bool expected_sof[3] = {false, true, false};
  for (int trial = 0; trial < 100; ++trial) {
    const int c = trial % 3;
    const Mat Q = random_orthogonal(rng, 2);
    const SofReport r = classify_sof({Q * cases[c] * Q.transpose()});
    if (r.is_sof != expected_sof[c]) {
      detail = "similarity perturbation changed the classification";
      return false;
    }
  }
  return true;
}

bool criterion3_symmetric_bound(std::string& detail) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 3;
  const double T = 20.0, dt = 1e-3, bound = n + 1.0;  // Theorem-2 symmetric constant
  double worst = 0.0;
  int run_index = 0;
  for (int sys_i = 0; sys_i < 5; ++sys_i) {
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
    Mat A = -(G * G.transpose());
    A /= std::max(1.0, operator_norm(A));
    const Vec x0 = random_unit(rng, n);
    const Trajectory base =
        integrate_perturbed(linear_field(A), x0, zero_signal(n), T, dt);
    for (int k = 0; k < 20; ++k) {
      const PerturbationSignal U =
          random_piecewise_constant_signal(90000 + run_index++, n, T, 8, 1.0);
      const Trajectory pert = integrate_perturbed(linear_field(A), x0, U, T, dt);
      worst = std::max(worst, sensitivity_ratio(pert, base, U).ratio);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max ratio %.4f over 100 runs (bound %.0f)", worst, bound);
  detail = buf;
  return worst <= bound;
}

bool criterion4_closed_form_vs_euler(std::string& detail) {
  std::mt19937_64 rng(4040);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double T = 10.0, dt = 1e-4;
  double worst = 0.0;
  for (int sys_i = 0; sys_i < 20; ++sys_i) {
    // Normal stable matrices: Q diag-blocks Q' with well-damped spectrum.
    const int n = 4;
    const Mat Q = random_orthogonal(rng, n);
    Mat D = Mat::Zero(n, n);
    const double s1 = -0.8 - 0.4 * unif(rng);
    const double w1 = 0.5 * unif(rng);
    D(0, 0) = D(1, 1) = s1;
    D(0, 1) = w1;
    D(1, 0) = -w1;
    D(2, 2) = -0.8 - 0.4 * unif(rng);
    D(3, 3) = -0.8 - 0.4 * unif(rng);
    const Mat A = Q * D * Q.transpose();
    const Vec x0 = random_unit(rng, n);
    Vec amp(n);
    for (int i = 0; i < n; ++i) amp(i) = 0.1 * (2.0 * unif(rng) - 1.0);
    const PerturbationSignal U = sinusoid_signal(amp, 0.5 + unif(rng));

    const Trajectory euler = integrate_perturbed(linear_field(A), x0, U, T, dt);
    std::vector<double> times;
    for (int i = 0; i <= 1000; ++i) times.push_back(T * i / 1000);
    const Trajectory closed = closed_form_trajectory({A}, x0, U, times);

    double gap = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
      gap = std::max(gap, (euler.states[i * 100] - closed.states[i]).norm());
      scale = std::max(scale, closed.states[i].norm());
    }
    worst = std::max(worst, gap / scale);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative disagreement %.3g (tol 1e-4)", worst);
  detail = buf;
  return worst <= 1e-4;
}

bool criterion5_books_solver(std::string& detail) {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double max_resid = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const CylPoint p{0.25 * std::sqrt(unif(rng)), 2.0 * kPi * unif(rng),
                     -1.0 - 49.0 * unif(rng)};
    const double f = solve_f(p, 1e-12);
    max_resid = std::max(max_resid, std::abs(books_h(f, p.r, p.phi, p.z)));
    if (f < 1.0) {
      detail = "f dropped below 1";
      return false;
    }
  }
  if (max_resid > 1e-10) {
    detail = "solver residual " + std::to_string(max_resid);
    return false;
  }

  double max_level_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double a = 2.0 + 38.0 * unif(rng);
    const double r = 0.25 * unif(rng);
    const double phi = 2.0 * kPi * unif(rng);
    const double z = level_surface_z(a, r, phi);
    max_level_err = std::max(max_level_err, std::abs(solve_f(CylPoint{r, phi, z}, 1e-12) - a));
  }
  if (max_level_err > 1e-8) {
    detail = "level round trip error " + std::to_string(max_level_err);
    return false;
  }

  double max_rel = 0.0;
  const double step = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const CylPoint p{0.24 * std::sqrt(unif(rng)), 2.0 * kPi * unif(rng),
                     -1.1 - 20.0 * unif(rng)};
    const Vec3 g = grad_f(p);
    const Vec3 c = p.cartesian();
    Vec3 fd;
    for (int d = 0; d < 3; ++d) {
      Vec3 hi = c, lo = c;
      hi(d) += step;
      lo(d) -= step;
      fd(d) = (solve_f(CylPoint::from_cartesian(hi), 1e-13) -
               solve_f(CylPoint::from_cartesian(lo), 1e-13)) /
              (2.0 * step);
    }
    max_rel = std::max(max_rel, (g - fd).norm() / g.norm());
  }
  if (max_rel > 1e-5) {
    detail = "gradient FD mismatch " + std::to_string(max_rel);
    return false;
  }

  const QuasiconvexityReport probe = quasiconvexity_probe(8.0, 10000, 8086);
  if (!probe.pass) {
    detail = "quasi-convexity probe failed";
    return false;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "residual %.2g, roundtrip %.2g, grad FD %.2g", max_resid,
                max_level_err, max_rel);
  detail = buf;
  return true;
}

bool criterion6_spiral_sweep(std::string& detail) {
  const double eps_list[3] = {0.1, 0.05, 0.025};
  double ratios[3];
  for (int i = 0; i < 3; ++i) {
    const double eps = eps_list[i];
    const SpiralCertificate cert = spiral_construction(eps, -1.0, 1e-4);
    if (std::abs(cert.deviation - 1.0 / 6.0) > 1e-6) {
      detail = "r(t0) missed 1/6";
      return false;
    }
    if (!(cert.t0 < 1.0 / (2.0 * eps))) {
      detail = "t0 exceeded 1/(2 eps)";
      return false;
    }
    if (!(cert.sup_U <= 2.0 * eps + 1e-12)) {
      detail = "sup U exceeded 2 eps";
      return false;
    }
    if (!(cert.ratio >= 1.0 / (12.0 * eps))) {
      detail = "ratio below 1/(12 eps)";
      return false;
    }
    ratios[i] = cert.ratio;
  }
  const double g1 = ratios[1] / ratios[0];
  const double g2 = ratios[2] / ratios[1];
  char buf[128];
  std::snprintf(buf, sizeof buf, "ratios %.4f %.4f %.4f, growth %.3f %.3f", ratios[0],
                ratios[1], ratios[2], g1, g2);
  detail = buf;
  return g1 >= 1.6 && g1 <= 2.4 && g2 >= 1.6 && g2 <= 2.4;
}

bool criterion7_membership(std::string& detail) {
  const double eps = 0.1;
  const int n_eps = spine_index_n_eps(eps);
  double max_dist = 0.0, max_angle = 0.0;
  for (int j = 0; j < 100; ++j) {
    const double z = -2.0 * kPi * (n_eps + j);
    const double r = 0.24 * ((j * 37) % 100 + 1) / 100.0;
    const MatchReport m = verify_spread_membership(CylPoint{r, 0.0, z}, eps);
    max_dist = std::max(max_dist, m.distance);
    max_angle = std::max(max_angle, m.angle);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max distance %.4g (< %.2g), max angle %.3g rad", max_dist,
                eps, max_angle);
  detail = buf;
  return max_dist < eps && max_angle < 1e-6;
}

bool criterion8_embedding(std::string& detail) {
  std::mt19937_64 rng(808);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_gap_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 3);
    PwlConvexFunction phi;
    phi.dimension = dim;
    const int pieces = 3 + static_cast<int>(rng() % 4);
    for (int i = 0; i < pieces; ++i) {
      PwlPiece piece;
      piece.mu = Vec(dim);
      for (int d = 0; d < dim; ++d) piece.mu(d) = gauss(rng);
      piece.b = 0.3 * gauss(rng);
      phi.pieces.push_back(std::move(piece));
    }
    const int K = 5 + static_cast<int>(rng() % 20);
    std::vector<Vec> V;
    for (int k = 0; k < K; ++k) {
      Vec v(dim);
      for (int d = 0; d < dim; ++d) v(d) = gauss(rng);
      V.push_back(v * unif(rng));
    }
    Vec z0(dim);
    for (int d = 0; d < dim; ++d) z0(d) = 2.0 * gauss(rng);

    const DiscreteTrajectory traj = discrete_trajectory(fpcs_field(phi), z0, V, K);
    const Embedding emb = embed_continuous(traj);

    double max_z = 0.0, max_mu = 0.0, max_v = 0.0, gap = 0.0;
    Vec drift_sum = Vec::Zero(dim);
    for (int k = 0; k <= K; ++k) {
      const Vec xk = z0 + drift_sum + emb.U.evaluate(static_cast<double>(k));
      gap = std::max(gap, (xk - traj.states[k]).norm());
      max_z = std::max(max_z, traj.states[k].norm());
      if (k < K) {
        drift_sum += traj.drifts[k];
        max_mu = std::max(max_mu, traj.drifts[k].norm());
        max_v = std::max(max_v, traj.perturbations[k].norm());
      }
    }
    worst_gap_rel = std::max(worst_gap_rel, gap / (1.0 + max_z));
    if (emb.sup_U > max_mu + max_v + 1e-12) {
      detail = "embedded sup exceeded max||V|| + max||mu||";
      return false;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative integer-time gap %.3g (tol 1e-12)",
                worst_gap_rel);
  detail = buf;
  return worst_gap_rel <= 1e-12;
}

bool criterion9_fpcs_boundedness(std::string& detail) {
  const PwlConvexFunction phi = l1_norm_pwl(2);
  Vec x0(2);
  x0 << 0.8, -0.6;
  const double T = 4.0, dt = 2e-4;
  const double scales[3] = {1.0, 0.1, 0.01};
  double level_ratio[3];
  int seed = 0;
  for (int lev = 0; lev < 3; ++lev) {
    std::vector<PerturbationSignal> family;
    for (int i = 0; i < 20; ++i) {
      family.push_back(
          random_piecewise_constant_signal(7000 + seed++, 2, T, 8, scales[lev]));
    }
    level_ratio[lev] = empirical_sensitivity_constant(phi, family, x0, T, dt).max_ratio;
  }
  double lo = level_ratio[0], hi = level_ratio[0];
  for (double r : level_ratio) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "per-level max ratios %.3f %.3f %.3f (spread x%.2f)",
                level_ratio[0], level_ratio[1], level_ratio[2], hi / lo);
  detail = buf;
  return hi / lo < 2.0;
}

bool criterion10_pwl_convergence(std::string& detail) {
  const Slab slab{-40.0, -38.0, 0.25};
  const PwlInterpolantResult coarse = pwl_interpolant(slab, 0.02);
  const PwlInterpolantResult fine = pwl_interpolant(slab, 0.01);
  const double ratio = coarse.report.sup_error / fine.report.sup_error;
  char buf[128];
  std::snprintf(buf, sizeof buf, "sup errors %.4g -> %.4g, ratio %.3f (window [1.5, 2.5])",
                coarse.report.sup_error, fine.report.sup_error, ratio);
  detail = buf;
  return ratio >= 1.5 && ratio <= 2.5;
}

}  // namespace

int main() {
  criterion(1, "rotary counterexample at T = 100", criterion1_rotary);
  criterion(2, "SOF classification of the canonical matrices", criterion2_sof);
  criterion(3, "symmetric sensitivity bound n + 1", criterion3_symmetric_bound);
  criterion(4, "closed form vs Euler on random stable systems", criterion4_closed_form_vs_euler);
  criterion(5, "books implicit solver suite", criterion5_books_solver);
  criterion(6, "spiral certificate sweep", criterion6_spiral_sweep);
  criterion(7, "spread membership on the screw line", criterion7_membership);
  criterion(8, "discrete embedding exactness", criterion8_embedding);
  criterion(9, "FPCS boundedness signature", criterion9_fpcs_boundedness);
  criterion(10, "PWL interpolant first-order convergence", criterion10_pwl_convergence);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
