#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sensflow/errors.hpp"

namespace sensflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A dynamical system as a set-valued drift map: `sample` returns the finite
// set of admissible drifts at a point (a singleton for single-valued fields).
// When `growth_constant` is set, every sampled drift xi at x is expected to
// satisfy ||xi|| <= gamma (1 + ||x||); see check_growth_bound.
struct VectorField {
  int dimension = 0;
  std::function<std::vector<Vec>(const Vec&)> sample;
  std::optional<double> growth_constant;
};

VectorField linear_field(const Mat& A);
VectorField constant_field(const Vec& v);
VectorField zero_field(int dimension);

// Cumulative perturbation U(t), right-continuous in t. U(0) may be nonzero:
// it is treated as an initial jump and participates in sup-norm estimates.
struct PerturbationSignal {
  std::function<Vec(double)> evaluate;
  std::string description;
  std::optional<double> sup_norm_hint;
};

PerturbationSignal zero_signal(int dimension);
PerturbationSignal constant_signal(const Vec& value);
// U(t) = amplitude * sin(omega t + phase), componentwise same phase.
PerturbationSignal sinusoid_signal(const Vec& amplitude, double omega,
                                   double phase = 0.0);
// Right-continuous step signal: U(t) = values[i] for t in
// [switch_times[i], switch_times[i+1]). switch_times must start at 0 and be
// strictly increasing.
PerturbationSignal piecewise_constant_signal(std::vector<double> switch_times,
                                             std::vector<Vec> values);
// The Fig.-style rotary perturbation U(t) = (sin t, 1 - cos t).
PerturbationSignal rotary_signal();
// Random step signal on [0, T] with `segments` pieces and values scaled so
// the largest piece norm equals sup_norm exactly.
PerturbationSignal random_piecewise_constant_signal(std::uint64_t seed, int dimension,
                                                    double T, int segments,
                                                    double sup_norm);

// Samples U(t + delta) for a ladder of deltas shrinking to zero and checks
// convergence to U(t) at every test point.
bool check_right_continuity(const PerturbationSignal& U,
                            const std::vector<double>& test_points,
                            double tol = 1e-6);

// Time-stamped state sequence with the drift selections that produced it and
// the perturbation sampled on the same grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> drifts;
  std::vector<Vec> perturbations;
  double dt = 0.0;
  std::string perturbation_description;

  std::size_t size() const { return times.size(); }
};

// Resolves a multi-valued drift sample to a single drift. Selectors may form
// convex combinations of the options (the sampled set is a finite inner
// approximation of a convex set).
using DriftSelector =
    std::function<Vec(const Vec& state, const std::vector<Vec>& options)>;

DriftSelector select_first();
// Minimum-norm element of the convex hull of the options ("slow solution").
DriftSelector select_min_norm(double tol = 1e-10);
// Uniform pick among the options, deterministic per (seed, state).
DriftSelector select_random(std::uint64_t seed);
// Maximizes the inner product with a caller-supplied direction field.
DriftSelector select_adversarial(std::function<Vec(const Vec&)> direction);

// Raised when a state goes non-finite; carries the last valid prefix so that
// genuinely diverging runs still produce usable data.
struct IntegrationDivergedError : Error {
  double last_valid_time;
  Trajectory prefix;
  IntegrationDivergedError(double t, Trajectory p)
      : Error("integration diverged at t = " + std::to_string(t)),
        last_valid_time(t),
        prefix(std::move(p)) {}
};

// Explicit Euler for the perturbed differential inclusion:
//   x(t_{k+1}) = x(t_k) + dt xi(t_k) + [U(t_{k+1}) - U(t_k)],
//   xi(t_k) in field.sample(x(t_k)).
// The perturbation is applied as exact increments (U need not be
// differentiable); x(0) = x0 + U(0). First order in dt for single-valued
// Lipschitz fields.
Trajectory integrate_perturbed(const VectorField& field, const Vec& x0,
                               const PerturbationSignal& U, double T, double dt,
                               const DriftSelector& selector = select_min_norm());

// sup_t ||xtilde - x|| / sup_t ||U||, all sups taken over the shared grid.
struct SensitivityReport {
  double sup_deviation = 0.0;
  double sup_perturbation = 0.0;
  double ratio = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
};

SensitivityReport sensitivity_ratio(const Trajectory& perturbed,
                                    const Trajectory& unperturbed,
                                    const PerturbationSignal& U);

struct GrowthReport {
  bool ok = true;
  double worst_ratio = 0.0;  // max ||xi|| / (1 + ||x||) over samples
  Vec worst_state;
  Vec worst_drift;
};

// True iff every sampled drift satisfies ||xi|| <= gamma (1 + ||x||).
GrowthReport check_growth_bound(const VectorField& field, double gamma,
                                const std::vector<Vec>& samples);

}  // namespace sensflow
