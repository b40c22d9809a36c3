#include "sensflow/minnorm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sensflow/errors.hpp"

namespace sensflow {

namespace {

// Minimum-norm point of the affine hull of the columns indexed by `active`:
// minimize ||sum w_i p_i|| subject to sum w_i = 1. KKT system
//   [G  1] [w]   [0]
//   [1' 0] [l] = [1]
// with G the Gram matrix of the active generators.
Eigen::VectorXd affine_min_norm(const std::vector<Vec>& gens,
                                const std::vector<int>& active) {
  const int m = static_cast<int>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double g = gens[active[i]].dot(gens[active[j]]);
      kkt(i, j) = g;
      kkt(j, i) = g;
    }
    kkt(i, m) = 1.0;
    kkt(m, i) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1.0;
  Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  return sol.head(m);
}

}  // namespace

Vec min_norm_point(const std::vector<Vec>& generators, double tol, int max_iter) {
  if (generators.empty()) {
    throw ArgumentError("min_norm_point: empty generator set");
  }
  if (tol <= 0) {
    throw ArgumentError("min_norm_point: tol must be positive");
  }
  const int count = static_cast<int>(generators.size());
  if (count == 1) return generators[0];

  // Scale for the optimality test.
  double scale = 0.0;
  for (const Vec& g : generators) scale = std::max(scale, g.squaredNorm());
  if (scale == 0.0) return Vec::Zero(generators[0].size());

  // Start from the generator of least norm.
  int start = 0;
  double best = generators[0].squaredNorm();
  for (int i = 1; i < count; ++i) {
    const double s = generators[i].squaredNorm();
    if (s < best) {
      best = s;
      start = i;
    }
  }
  std::vector<int> active{start};
  std::vector<double> weights{1.0};
  Vec x = generators[start];

  for (int iter = 0; iter < max_iter; ++iter) {
    // Wolfe optimality test: x is optimal iff min_j <x, p_j> >= <x, x>.
    int entering = -1;
    double min_ip = std::numeric_limits<double>::infinity();
    for (int j = 0; j < count; ++j) {
      const double ip = x.dot(generators[j]);
      if (ip < min_ip) {
        min_ip = ip;
        entering = j;
      }
    }
    if (min_ip >= x.squaredNorm() - tol * scale) break;
    if (std::find(active.begin(), active.end(), entering) == active.end()) {
      active.push_back(entering);
      weights.push_back(0.0);
    }

    // Minor cycle: project onto the affine hull of the active set, stepping
    // back to the simplex boundary whenever a weight would go negative.
    for (int minor = 0; minor < max_iter; ++minor) {
      Eigen::VectorXd v = affine_min_norm(generators, active);
      bool feasible = true;
      for (int i = 0; i < v.size(); ++i) {
        if (v(i) < -1e-12) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        for (size_t i = 0; i < active.size(); ++i) weights[i] = std::max(v(int(i)), 0.0);
        break;
      }
      double theta = 1.0;
      for (size_t i = 0; i < active.size(); ++i) {
        if (v(int(i)) < weights[i]) {
          const double denom = weights[i] - v(int(i));
          if (denom > 0) theta = std::min(theta, weights[i] / denom);
        }
      }
      std::vector<int> next_active;
      std::vector<double> next_weights;
      for (size_t i = 0; i < active.size(); ++i) {
        const double w = (1.0 - theta) * weights[i] + theta * v(int(i));
        if (w > 1e-14) {
          next_active.push_back(active[i]);
          next_weights.push_back(w);
        }
      }
      if (next_active.empty()) {
        // Numerical corner: keep the heaviest generator.
        next_active.push_back(active[0]);
        next_weights.push_back(1.0);
      }
      active = std::move(next_active);
      weights = std::move(next_weights);
    }

    double total = 0.0;
    for (double w : weights) total += w;
    x = Vec::Zero(generators[0].size());
    for (size_t i = 0; i < active.size(); ++i) x += (weights[i] / total) * generators[active[i]];
  }
  return x;
}

double distance_to_hull(const Vec& point, const std::vector<Vec>& generators,
                        double tol) {
  std::vector<Vec> shifted;
  shifted.reserve(generators.size());
  for (const Vec& g : generators) shifted.push_back(g - point);
  return min_norm_point(shifted, tol).norm();
}

}  // namespace sensflow
