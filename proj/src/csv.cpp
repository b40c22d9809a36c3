#include "sensflow/csv.hpp"

#include <cstdio>
#include <fstream>

#include "sensflow/errors.hpp"

namespace sensflow {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void append_vec(std::string& row, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) {
    row += ',';
    row += format_double(v(i));
  }
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_or_throw(path);
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  std::string header = "t";
  for (int i = 0; i < n; ++i) header += ",x_" + std::to_string(i);
  for (int i = 0; i < n; ++i) header += ",xi_" + std::to_string(i);
  for (int i = 0; i < n; ++i) header += ",U_" + std::to_string(i);
  out << header << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::string row = format_double(traj.times[k]);
    append_vec(row, traj.states[k]);
    append_vec(row, traj.drifts[k]);
    append_vec(row, traj.perturbations[k]);
    out << row << '\n';
  }
}

void write_discrete_csv(const std::string& path, const std::vector<Vec>& states,
                        const std::vector<Vec>& drifts,
                        const std::vector<Vec>& perturbations) {
  std::ofstream out = open_or_throw(path);
  const int n = states.empty() ? 0 : static_cast<int>(states[0].size());
  std::string header = "k";
  for (int i = 0; i < n; ++i) header += ",z_" + std::to_string(i);
  for (int i = 0; i < n; ++i) header += ",mu_" + std::to_string(i);
  for (int i = 0; i < n; ++i) header += ",V_" + std::to_string(i);
  out << header << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::string row = std::to_string(k);
    append_vec(row, states[k]);
    if (k < drifts.size()) {
      append_vec(row, drifts[k]);
    } else {
      for (int i = 0; i < n; ++i) row += ',';
    }
    if (k < perturbations.size()) {
      append_vec(row, perturbations[k]);
    } else {
      for (int i = 0; i < n; ++i) row += ',';
    }
    out << row << '\n';
  }
}

}  // namespace sensflow
