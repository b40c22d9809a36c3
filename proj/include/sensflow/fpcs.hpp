#pragma once

#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

// Piecewise linear convex potential Phi(x) = max_i (-mu_i' x + b_i), a finite
// max of affine pieces. Convex by construction.
struct PwlPiece {
  Vec mu;
  double b = 0.0;
};

struct PwlConvexFunction {
  int dimension = 0;
  std::vector<PwlPiece> pieces;

  double value(const Vec& x) const;
  double max_mu_norm() const;
  double max_abs_b() const;
};

// Phi = |x| in one dimension: pieces {(-1, 0), (1, 0)}.
PwlConvexFunction abs_value_pwl();
// Phi = ||x||_1 in n dimensions: 2^n sign pieces.
PwlConvexFunction l1_norm_pwl(int dimension);

// A subdifferential query at a point. The negative subdifferential is
//   -dPhi(x) = conv{ mu_i : i active },
// so `generators` lists the mu_i of the pieces within act_tol of the max.
struct SubdifferentialQuery {
  double value = 0.0;
  std::vector<int> active_indices;
  std::vector<Vec> generators;
};

// value = max_i(-mu_i' x + b_i); active set = {i : piece_i >= value - act_tol}.
SubdifferentialQuery evaluate(const PwlConvexFunction& phi, const Vec& x,
                              double act_tol);

// Minimum-norm element of conv{generators}, i.e. the minimal-norm drift of
// the inclusion xdot in -dPhi(x).
Vec min_norm_subgradient(const SubdifferentialQuery& query, double tol = 1e-10);

// Single-valued field x -> min-norm element of -dPhi(x). The activation
// tolerance inflates with the value: act_tol = act_tol_scale * (1 + |value|),
// the Filippov-consistent way to control chattering near faces.
VectorField fpcs_field(const PwlConvexFunction& phi, double act_tol_scale = 1e-9);

// Integrates the unperturbed flow and one perturbed flow per family member,
// and reports the worst sensitivity ratio over the family.
struct FpcsHarnessResult {
  double max_ratio = 0.0;
  std::vector<SensitivityReport> reports;
};

FpcsHarnessResult empirical_sensitivity_constant(
    const PwlConvexFunction& phi, const std::vector<PerturbationSignal>& family,
    const Vec& x0, double T, double dt);

}  // namespace sensflow
