#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sensflow {

using Vec = Eigen::VectorXd;

// Minimum-norm point of the convex hull of a finite generator set, computed
// with Wolfe's method. Exact (up to tol) for the small generator sets that
// arise from subdifferential queries and probe clouds.
Vec min_norm_point(const std::vector<Vec>& generators, double tol = 1e-10,
                   int max_iter = 1000);

// Euclidean distance from a point to the convex hull of the generators.
double distance_to_hull(const Vec& point, const std::vector<Vec>& generators,
                        double tol = 1e-10);

}  // namespace sensflow
