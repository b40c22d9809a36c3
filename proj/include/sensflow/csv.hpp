#pragma once

#include <string>
#include <vector>

#include "sensflow/inclusion.hpp"

namespace sensflow {

// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

// Header: t,x_0..x_{n-1},xi_0..xi_{n-1},U_0..U_{n-1}; one row per grid point.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Header: k,z_0..,mu_0..,V_0..; drift and perturbation columns are empty on
// the final row (K states, K-1 steps).
void write_discrete_csv(const std::string& path, const std::vector<Vec>& states,
                        const std::vector<Vec>& drifts,
                        const std::vector<Vec>& perturbations);

}  // namespace sensflow
