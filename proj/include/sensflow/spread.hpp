#pragma once

#include <cstdint>
#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

// The eps-spread of a base field: drifts at x are convex combinations of base
// drifts gathered from the ball B_eps(x). Approximated by a deterministic
// low-discrepancy probe cloud; convex combinations are formed by the selector
// at integration time.
struct SpreadField {
  VectorField base;
  double epsilon = 0.0;
  int probe_count = 32;
  std::uint64_t seed = 0;
};

// Finite inner approximation of the spread drift set at x. Probes are the
// center plus probe_count Halton points of the eps-ball, deterministic per
// (seed, x). eps = 0 returns base.sample(x) exactly. Probes where the base
// field is undefined are skipped; all probes failing is an error.
std::vector<Vec> spread_sample(const SpreadField& sf, const Vec& x);

// The spread system as a VectorField (dimension and growth from the base).
VectorField as_field(const SpreadField& sf);

// integrate_perturbed drawing drifts from spread_sample.
Trajectory spread_integrate(const SpreadField& sf, const Vec& x0,
                            const PerturbationSignal& U, double T, double dt,
                            const DriftSelector& selector = select_min_norm());

// Non-negative weight on the eps-ball; convolve_field normalizes the weight
// so its quadrature over the ball equals one.
struct Kernel {
  double radius = 0.0;
  std::function<double(const Vec&)> weight;
};

Kernel uniform_kernel(double radius);

// Quadrature mass of the kernel over its ball (product Gauss-Legendre mapped
// to the ball; supported dimensions 1..3).
double kernel_quadrature_mass(const Kernel& kernel, int dimension, int quad_points);

// (F * h)(x) = sum_j w_j xi(y_j) h(x - y_j) over the ball quadrature, with the
// kernel normalized to unit mass; the result lies in the eps-spread of the
// base field.
VectorField convolve_field(const VectorField& base, const Kernel& kernel,
                           int quad_points);

// sup_deviation <= C (2 eps + sup_perturbation) + 3 eps, per report.
struct SpreadBoundCheck {
  bool pass = true;
  std::vector<bool> per_report;
  std::vector<double> slack;  // rhs - lhs
};

SpreadBoundCheck check_spread_bound(double C, double epsilon,
                                    const std::vector<SensitivityReport>& reports);

}  // namespace sensflow
