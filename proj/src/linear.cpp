#include "sensflow/linear.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sensflow {

double operator_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

Mat matrix_exponential(const Mat& A) { return A.exp(); }

namespace {

using CMat = Eigen::MatrixXcd;

// Geometric multiplicity of lambda: n - rank(A - lambda I) at threshold tol.
int geometric_multiplicity(const Mat& A, std::complex<double> lambda, double tol) {
  const int n = static_cast<int>(A.rows());
  CMat shifted = A.cast<std::complex<double>>();
  for (int i = 0; i < n; ++i) shifted(i, i) -= lambda;
  Eigen::JacobiSVD<CMat> svd(shifted);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  return n - rank;
}

}  // namespace

SofReport classify_sof(const LinearSystem& sys, double tol) {
  if (tol <= 0) throw ArgumentError("classify_sof: tol must be positive");
  if (sys.A.rows() != sys.A.cols()) throw ArgumentError("classify_sof: A must be square");
  if (!sys.A.allFinite()) throw ArgumentError("classify_sof: A must be finite");

  const int n = sys.dimension();
  const double tol_abs = tol * std::max(1.0, operator_norm(sys.A));

  Eigen::EigenSolver<Mat> eig(sys.A);
  if (eig.info() != Eigen::Success) throw NumericError("classify_sof: eigendecomposition failed");

  SofReport report;
  report.tolerance = tol_abs;
  report.eigenvalues.reserve(n);
  for (int i = 0; i < n; ++i) report.eigenvalues.push_back(eig.eigenvalues()(i));

  bool any_unstable = false;
  bool any_imaginary_pair = false;
  std::vector<std::complex<double>> imaginary_reps;
  for (const auto& lam : report.eigenvalues) {
    if (std::abs(lam) <= tol_abs) {
      ++report.zero_eig_algebraic;
    } else if (lam.real() > tol_abs) {
      any_unstable = true;
    } else if (lam.real() >= -tol_abs) {
      // |Re| <= tol, |Im| > tol: a purely imaginary pair, hence a periodic orbit.
      any_imaginary_pair = true;
      bool seen = false;
      for (const auto& rep : imaginary_reps) {
        if (std::abs(rep - lam) <= 2 * tol_abs) seen = true;
      }
      if (!seen) imaginary_reps.push_back(lam);
    }
  }

  report.zero_eig_geometric =
      report.zero_eig_algebraic > 0 ? geometric_multiplicity(sys.A, 0.0, tol_abs) : 0;

  // Stability needs Re <= 0 plus semisimplicity of every eigenvalue on the
  // imaginary axis (defective ones produce polynomial growth).
  bool boundary_semisimple =
      report.zero_eig_algebraic == 0 || report.zero_eig_geometric == report.zero_eig_algebraic;
  for (const auto& rep : imaginary_reps) {
    int alg = 0;
    for (const auto& lam : report.eigenvalues) {
      if (std::abs(lam - rep) <= 2 * tol_abs) ++alg;
    }
    if (geometric_multiplicity(sys.A, rep, tol_abs) < alg) boundary_semisimple = false;
  }

  report.is_stable = !any_unstable && boundary_semisimple;
  report.is_orbit_free = !any_imaginary_pair;
  report.is_sof = report.is_stable && report.is_orbit_free;
  return report;
}

SensitivityConstant sensitivity_constant(const LinearSystem& sys, double tol) {
  const SofReport sof = classify_sof(sys, tol);
  if (!sof.is_sof) {
    throw NotApplicableError("sensitivity_constant: system is not SOF");
  }

  Eigen::EigenSolver<Mat> eig(sys.A);
  if (eig.info() != Eigen::Success) {
    throw NumericError("sensitivity_constant: eigendecomposition failed");
  }
  const CMat P = eig.eigenvectors();  // unit columns
  Eigen::JacobiSVD<CMat> svd(P);
  const double sigma_max = svd.singularValues()(0);
  const double sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  if (sigma_min <= 1e-9 * sigma_max) {
    throw UnsupportedError(
        "sensitivity_constant: A is defective (no closed constant in the "
        "non-diagonalizable case)");
  }

  SensitivityConstant c;
  c.sigma_max = sigma_max;
  c.sigma_min = sigma_min;
  c.eigenvalues = sof.eigenvalues;
  double sum = 0.0;
  for (const auto& lam : sof.eigenvalues) {
    if (std::abs(lam) > sof.tolerance) {
      const double term = std::abs(lam) / std::abs(lam.real());
      c.eigen_terms.push_back(term);
      sum += term;
    } else {
      c.eigen_terms.push_back(0.0);
    }
  }
  c.value = 1.0 + (sigma_max / sigma_min) * sum;
  return c;
}

Trajectory closed_form_trajectory(const LinearSystem& sys, const Vec& x0,
                                  const PerturbationSignal& U,
                                  const std::vector<double>& times, int refine) {
  if (times.empty() || times.front() != 0.0) {
    throw ArgumentError("closed_form_trajectory: times must start at 0");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw ArgumentError("closed_form_trajectory: times must be strictly increasing");
    }
  }
  if (refine < 1) throw ArgumentError("closed_form_trajectory: refine must be >= 1");
  if (x0.size() != sys.dimension()) {
    throw ArgumentError("closed_form_trajectory: x0 has wrong dimension");
  }

  Trajectory traj;
  traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  traj.perturbation_description = U.description;

  // Per-interval operators, cached by step length. For step h and Simpson
  // nodes s_j = j h / (2 refine):
  //   step  = e^{Ah}
  //   wg[j] = w_j A e^{A (h - s_j)}   (composite Simpson weights w_j)
  struct IntervalOps {
    Mat step;
    std::vector<Mat> weighted;  // indexed by node
  };
  std::map<long long, IntervalOps> cache;
  auto ops_for = [&](double h) -> const IntervalOps& {
    const long long key = static_cast<long long>(std::llround(h * 1e15));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    IntervalOps ops;
    const int nodes = 2 * refine + 1;
    const double hs = h / (2.0 * refine);
    const Mat sub = matrix_exponential(sys.A * hs);
    ops.weighted.resize(nodes);
    Mat e_tail = Mat::Identity(sys.dimension(), sys.dimension());  // e^{A (h - s_j)} from j = nodes-1 down
    for (int j = nodes - 1; j >= 0; --j) {
      double w = (j == 0 || j == nodes - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      w *= hs / 3.0;
      ops.weighted[j] = w * (sys.A * e_tail);
      if (j > 0) e_tail = sub * e_tail;
    }
    ops.step = e_tail;  // after the loop e_tail = e^{Ah}
    return cache.emplace(key, std::move(ops)).first->second;
  };

  Vec u_prev = U.evaluate(0.0);
  Vec x = x0 + u_prev;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.drifts.push_back(sys.A * x);
  traj.perturbations.push_back(u_prev);

  for (size_t k = 1; k < times.size(); ++k) {
    const double t0 = times[k - 1];
    const double h = times[k] - t0;
    const IntervalOps& ops = ops_for(h);
    const int nodes = 2 * refine + 1;
    const double hs = h / (2.0 * refine);
    Vec quad = Vec::Zero(sys.dimension());
    Vec u_next;
    for (int j = 0; j < nodes; ++j) {
      const double s = (j == nodes - 1) ? times[k] : t0 + j * hs;
      const Vec uj = (j == 0) ? u_prev : U.evaluate(s);
      quad += ops.weighted[j] * uj;
      if (j == nodes - 1) u_next = uj;
    }
    x = ops.step * (x - u_prev) + u_next + quad;
    if (!x.allFinite()) throw IntegrationDivergedError(t0, std::move(traj));
    traj.times.push_back(times[k]);
    traj.states.push_back(x);
    traj.drifts.push_back(sys.A * x);
    traj.perturbations.push_back(u_next);
    u_prev = u_next;
  }
  return traj;
}

RotaryPair rotary_counterexample(double T, double grid) {
  if (T <= 0) throw ArgumentError("rotary_counterexample: T must be positive");
  if (grid <= 0) throw ArgumentError("rotary_counterexample: grid must be positive");

  RotaryPair pair;
  pair.U = rotary_signal();
  Mat A(2, 2);
  A << 0, -1, 1, 0;

  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(T / grid - 1e-12));
  auto push = [&](Trajectory& traj, double t, bool perturbed) {
    const double radius = perturbed ? t + 1.0 : 1.0;
    Vec x(2);
    x << radius * std::cos(t), radius * std::sin(t);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.drifts.push_back(A * x);
    traj.perturbations.push_back(perturbed ? pair.U.evaluate(t) : Vec::Zero(2));
  };
  pair.unperturbed.dt = grid;
  pair.perturbed.dt = grid;
  pair.perturbed.perturbation_description = pair.U.description;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = (k == n_steps) ? T : grid * static_cast<double>(k);
    push(pair.unperturbed, t, false);
    push(pair.perturbed, t, true);
  }
  return pair;
}

namespace {

// Deviation of the perturbed trajectory started at 0 under perturbation U,
// measured at time T against the x == 0 unperturbed trajectory.
double witness_deviation(const LinearSystem& sys, const PerturbationSignal& U, double T) {
  std::vector<double> times;
  const int n_grid = 256;
  times.reserve(n_grid + 1);
  for (int i = 0; i <= n_grid; ++i) times.push_back(T * i / n_grid);
  times[0] = 0.0;
  const Trajectory traj =
      closed_form_trajectory(sys, Vec::Zero(sys.dimension()), U, times, 4);
  double dev = 0.0;
  for (const Vec& x : traj.states) dev = std::max(dev, x.norm());
  return dev;
}

}  // namespace

NonSofWitness non_sof_witness(const LinearSystem& sys, double M, double tol) {
  const SofReport sof = classify_sof(sys, tol);
  if (sof.is_sof) throw NotApplicableError("non_sof_witness: system is SOF");
  const int n = sys.dimension();

  Eigen::EigenSolver<Mat> eig(sys.A);
  NonSofWitness witness;

  std::vector<PerturbationSignal> candidates;
  bool unstable = false;
  for (int i = 0; i < n; ++i) {
    if (eig.eigenvalues()(i).real() > sof.tolerance) unstable = true;
  }

  if (unstable) {
    // A small constant push along the unstable eigendirections grows like
    // e^{Re(lambda) t}.
    witness.mechanism = "unstable-mode";
    for (int i = 0; i < n; ++i) {
      if (eig.eigenvalues()(i).real() <= sof.tolerance) continue;
      const Vec re = eig.eigenvectors().col(i).real();
      const Vec im = eig.eigenvectors().col(i).imag();
      if (re.norm() > 1e-12) candidates.push_back(constant_signal(re / re.norm()));
      if (im.norm() > 1e-12) candidates.push_back(constant_signal(im / im.norm()));
    }
  } else if (!sof.is_orbit_free) {
    // Periodic orbit: drive it resonantly. For x0 on the orbit,
    // u(t) = e^{At} x0 has bounded integral U(t) = A_sub^{-1}(e^{At} - I) x0
    // while xtilde(t) = (t+1) e^{At} x0 runs away linearly.
    witness.mechanism = "resonant-orbit";
    for (int i = 0; i < n; ++i) {
      const auto lam = eig.eigenvalues()(i);
      if (std::abs(lam.real()) > sof.tolerance || std::abs(lam.imag()) <= sof.tolerance) continue;
      const Eigen::VectorXcd w = eig.eigenvectors().col(i);
      const std::complex<double> ilam(0.0, lam.imag());
      PerturbationSignal u;
      u.evaluate = [w, ilam, n](double t) -> Vec {
        const std::complex<double> factor = (std::exp(ilam * t) - 1.0) / ilam;
        Vec out(n);
        for (int j = 0; j < n; ++j) out(j) = 2.0 * (factor * w(j)).real();
        return out;
      };
      u.description = "resonant orbit drive";
      candidates.push_back(std::move(u));
      break;
    }
  } else {
    // Zero eigenvalue with a nontrivial Jordan chain: constant pushes excite
    // polynomial growth. Probe the coordinate directions.
    witness.mechanism = "defective-zero";
    for (int i = 0; i < n; ++i) {
      candidates.push_back(constant_signal(Vec::Unit(n, i)));
    }
  }

  if (candidates.empty()) throw NumericError("non_sof_witness: no candidate directions");

  for (double T = 4.0; T <= 1e7; T *= 2.0) {
    for (const auto& u : candidates) {
      double dev = 0.0;
      try {
        dev = witness_deviation(sys, u, T);
      } catch (const IntegrationDivergedError&) {
        dev = std::numeric_limits<double>::infinity();
      }
      if (dev > M) {
        witness.U = u;
        witness.time = T;
        witness.deviation = dev;
        double sup = 0.0;
        for (int i = 0; i <= 512; ++i) {
          sup = std::max(sup, u.evaluate(T * i / 512.0).norm());
        }
        witness.sup_U = sup;
        return witness;
      }
    }
  }
  throw NumericError("non_sof_witness: deviation did not exceed M within the horizon cap");
}

}  // namespace sensflow
