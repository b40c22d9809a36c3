#pragma once

#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

// Slotted-time trajectory
//   z(k+1) = z(0) + sum_{j<=k} mu(j) + V(k),   mu(j) in F(z(j)),
// with V the cumulative discrete perturbation. (The z(0) offset makes the
// recursion consistent with z(1) depending on the initial state; it matches
// the continuous embedding below, which pins xtilde(0) = z(0).)
struct DiscreteTrajectory {
  std::vector<Vec> states;         // z(0..K)
  std::vector<Vec> drifts;         // mu(0..K-1)
  std::vector<Vec> perturbations;  // V(0..K-1)
};

DiscreteTrajectory discrete_trajectory(const VectorField& field, const Vec& z0,
                                       const std::vector<Vec>& V, int K,
                                       const DriftSelector& selector = select_min_norm());

// Exact continuous embedding: xtilde(t) = z(floor(t)) is a perturbed
// trajectory of the same field for the sawtooth perturbation
//   U(t) = V(floor(t) - 1) - (t - floor(t)) mu(floor(t)),  V(-1) = 0,
// so xtilde(k) = z(k) exactly at integer times and, for every t,
// sup ||U|| <= max ||V|| + max ||mu||. sup_U below is the exact supremum
// (interval-wise the max of the endpoint norms).
struct Embedding {
  PerturbationSignal U;
  Trajectory path;  // sampled at integer times 0..K
  double sup_U = 0.0;
};

Embedding embed_continuous(const DiscreteTrajectory& traj);

// ||x(k) - z(k)|| <= C (max_{j<k} ||mu_j|| + max_{j<k} ||V(j)||) for all k,
// where x is a continuous unperturbed trajectory sampled at integer times.
struct DiscreteBoundCheck {
  bool pass = true;
  int first_violation = -1;
  std::vector<double> lhs;
  std::vector<double> rhs;
};

DiscreteBoundCheck check_discrete_bound(double C, const Trajectory& cont_unperturbed,
                                        const DiscreteTrajectory& traj);

}  // namespace sensflow
