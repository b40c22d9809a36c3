#include "sensflow/discretize.hpp"

#include <algorithm>
#include <cmath>

namespace sensflow {

DiscreteTrajectory discrete_trajectory(const VectorField& field, const Vec& z0,
                                       const std::vector<Vec>& V, int K,
                                       const DriftSelector& selector) {
  if (K < 1) throw ArgumentError("discrete_trajectory: K must be >= 1");
  if (static_cast<int>(V.size()) < K) {
    throw ArgumentError("discrete_trajectory: V must provide K entries");
  }
  if (z0.size() != field.dimension) {
    throw ArgumentError("discrete_trajectory: z0 has wrong dimension");
  }

  DiscreteTrajectory traj;
  traj.states.reserve(K + 1);
  traj.drifts.reserve(K);
  traj.perturbations.reserve(K);
  traj.states.push_back(z0);
  Vec drift_sum = Vec::Zero(field.dimension);
  for (int k = 0; k < K; ++k) {
    const Vec& z = traj.states.back();
    std::vector<Vec> options = field.sample(z);
    if (options.empty()) throw FieldUndefinedError("discrete_trajectory: empty drift set");
    const Vec mu = selector(z, options);
    drift_sum += mu;
    traj.drifts.push_back(mu);
    traj.perturbations.push_back(V[k]);
    traj.states.push_back(z0 + drift_sum + V[k]);
  }
  return traj;
}

Embedding embed_continuous(const DiscreteTrajectory& traj) {
  if (traj.states.empty()) throw ArgumentError("embed_continuous: empty trajectory");
  const int K = static_cast<int>(traj.drifts.size());
  const int n = static_cast<int>(traj.states[0].size());

  Embedding emb;
  emb.U.description = "discrete embedding sawtooth";
  if (K == 0) {
    emb.U.evaluate = [n](double) { return Vec::Zero(n); };
    emb.U.sup_norm_hint = 0.0;
    emb.path.times.push_back(0.0);
    emb.path.states.push_back(traj.states[0]);
    emb.path.drifts.push_back(Vec::Zero(n));
    emb.path.perturbations.push_back(Vec::Zero(n));
    return emb;
  }

  std::vector<Vec> V = traj.perturbations;
  std::vector<Vec> mu = traj.drifts;
  emb.U.evaluate = [V, mu, n, K](double t) -> Vec {
    if (t < 0) return Vec::Zero(n);
    if (t >= K) return V[K - 1];  // the embedding lives on [0, K]
    const int m = static_cast<int>(std::floor(t));
    const double s = t - m;
    Vec u = (m >= 1) ? V[m - 1] : Vec::Zero(n);
    u -= s * mu[m];
    return u;
  };

  // sup over [m, m+1) of ||V(m-1) - s mu(m)|| is attained at an endpoint.
  double sup = 0.0;
  for (int m = 0; m < K; ++m) {
    const Vec v_prev = (m >= 1) ? V[m - 1] : Vec::Zero(n);
    sup = std::max(sup, v_prev.norm());
    sup = std::max(sup, (v_prev - mu[m]).norm());
  }
  sup = std::max(sup, V[K - 1].norm());  // U(K) = V(K-1)
  emb.sup_U = sup;
  emb.U.sup_norm_hint = sup;

  emb.path.perturbation_description = emb.U.description;
  for (int k = 0; k <= K; ++k) {
    emb.path.times.push_back(static_cast<double>(k));
    emb.path.states.push_back(traj.states[k]);
    emb.path.drifts.push_back(k < K ? traj.drifts[k] : traj.drifts[K - 1]);
    emb.path.perturbations.push_back(emb.U.evaluate(static_cast<double>(k)));
  }
  return emb;
}

DiscreteBoundCheck check_discrete_bound(double C, const Trajectory& cont_unperturbed,
                                        const DiscreteTrajectory& traj) {
  if (C <= 0) throw ArgumentError("check_discrete_bound: C must be positive");
  const int K = static_cast<int>(traj.drifts.size());

  // Pull integer-time samples out of the continuous trajectory.
  std::vector<const Vec*> x_at_k(K + 1, nullptr);
  for (std::size_t i = 0; i < cont_unperturbed.size(); ++i) {
    const double t = cont_unperturbed.times[i];
    const double rounded = std::round(t);
    if (std::abs(t - rounded) <= 1e-9 && rounded >= 0 && rounded <= K) {
      x_at_k[static_cast<int>(rounded)] = &cont_unperturbed.states[i];
    }
  }
  for (int k = 0; k <= K; ++k) {
    if (x_at_k[k] == nullptr) {
      throw ArgumentError("check_discrete_bound: continuous trajectory misses integer time " +
                          std::to_string(k));
    }
  }

  DiscreteBoundCheck check;
  check.lhs.reserve(K + 1);
  check.rhs.reserve(K + 1);
  double max_mu = 0.0, max_v = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double lhs = (*x_at_k[k] - traj.states[k]).norm();
    const double rhs = C * (max_mu + max_v);
    check.lhs.push_back(lhs);
    check.rhs.push_back(rhs);
    if (lhs > rhs && check.pass) {
      check.pass = false;
      check.first_violation = k;
    }
    if (k < K) {
      max_mu = std::max(max_mu, traj.drifts[k].norm());
      max_v = std::max(max_v, traj.perturbations[k].norm());
    }
  }
  return check;
}

}  // namespace sensflow
