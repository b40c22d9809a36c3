#pragma once

#include <complex>
#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

// The system xdot = A x.
struct LinearSystem {
  Mat A;
  int dimension() const { return static_cast<int>(A.rows()); }
};

// Largest singular value.
double operator_norm(const Mat& A);

// exp(A), scaling-and-squaring with Pade approximation (relative accuracy
// ~1e-12 for ||A|| t <= 10).
Mat matrix_exponential(const Mat& A);

// Spectral SOF test. A linear system is stable and orbit-free iff every
// eigenvalue either has negative real part or is zero with matching algebraic
// and geometric multiplicity. `tol` is relative to max(1, ||A||); the report
// records the absolute threshold that was used.
struct SofReport {
  std::vector<std::complex<double>> eigenvalues;
  bool is_stable = false;
  bool is_orbit_free = false;
  bool is_sof = false;
  int zero_eig_algebraic = 0;
  int zero_eig_geometric = 0;
  double tolerance = 0.0;
};

SofReport classify_sof(const LinearSystem& sys, double tol = 1e-9);

// Explicit sensitivity constant for SOF diagonalizable systems:
//   C = 1 + (sigma_max / sigma_min) * sum_i |lambda_i| / |Re lambda_i|,
// sigma_{max,min} the extreme singular values of the (unit-column) eigenvector
// matrix P, the sum over eigenvalues with |lambda_i| > tol. Zero eigenvalues
// contribute nothing: in the proof's decomposition the zero block drops out.
// For symmetric negative-definite A this evaluates to n + 1.
struct SensitivityConstant {
  double value = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  std::vector<double> eigen_terms;  // |lambda_i| / |Re lambda_i|, 0 for zero eigenvalues
};

SensitivityConstant sensitivity_constant(const LinearSystem& sys, double tol = 1e-9);

// Unique perturbed trajectory of the linear system,
//   x(t) = e^{At} x0 + U(t) + A e^{At} \int_0^t e^{-A tau} U(tau) dtau,
// evaluated on `times` (must start at 0, strictly increasing). The integral is
// advanced interval-by-interval through the semigroup identity
//   x(t+h) = e^{Ah} (x(t) - U(t)) + U(t+h) + \int_t^{t+h} A e^{A(t+h-s)} U(s) ds
// with composite Simpson quadrature on `refine` panels per interval, so no
// large e^{-A tau} intermediates ever appear.
Trajectory closed_form_trajectory(const LinearSystem& sys, const Vec& x0,
                                  const PerturbationSignal& U,
                                  const std::vector<double>& times, int refine = 4);

// The stable-but-not-orbit-free counterexample: A = [[0,-1],[1,0]],
// x(t) = (cos t, sin t), xtilde(t) = ((t+1) cos t, (t+1) sin t),
// U(t) = (sin t, 1 - cos t). Emitted analytically on a uniform grid.
struct RotaryPair {
  Trajectory unperturbed;
  Trajectory perturbed;
  PerturbationSignal U;
};

RotaryPair rotary_counterexample(double T, double grid);

// Constructive non-SOF witness: a perturbation with bounded sup||U|| whose
// trajectory deviates from the unperturbed one by more than `M` within finite
// time. Mechanism is "unstable-mode", "resonant-orbit" or "defective-zero".
struct NonSofWitness {
  PerturbationSignal U;
  double sup_U = 0.0;
  double time = 0.0;       // horizon at which the deviation exceeds M
  double deviation = 0.0;  // verified deviation at `time`
  std::string mechanism;
};

NonSofWitness non_sof_witness(const LinearSystem& sys, double M, double tol = 1e-9);

}  // namespace sensflow
