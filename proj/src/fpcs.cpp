#include "sensflow/fpcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sensflow/minnorm.hpp"

namespace sensflow {

double PwlConvexFunction::value(const Vec& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const PwlPiece& p : pieces) best = std::max(best, -p.mu.dot(x) + p.b);
  return best;
}

double PwlConvexFunction::max_mu_norm() const {
  double m = 0.0;
  for (const PwlPiece& p : pieces) m = std::max(m, p.mu.norm());
  return m;
}

double PwlConvexFunction::max_abs_b() const {
  double m = 0.0;
  for (const PwlPiece& p : pieces) m = std::max(m, std::abs(p.b));
  return m;
}

PwlConvexFunction abs_value_pwl() {
  PwlConvexFunction phi;
  phi.dimension = 1;
  Vec minus(1), plus(1);
  minus << -1.0;
  plus << 1.0;
  phi.pieces = {{minus, 0.0}, {plus, 0.0}};
  return phi;
}

PwlConvexFunction l1_norm_pwl(int dimension) {
  if (dimension < 1 || dimension > 20) {
    throw ArgumentError("l1_norm_pwl: dimension out of range");
  }
  PwlConvexFunction phi;
  phi.dimension = dimension;
  const int count = 1 << dimension;
  phi.pieces.reserve(count);
  for (int mask = 0; mask < count; ++mask) {
    Vec mu(dimension);
    for (int i = 0; i < dimension; ++i) mu(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    phi.pieces.push_back({mu, 0.0});
  }
  return phi;
}

SubdifferentialQuery evaluate(const PwlConvexFunction& phi, const Vec& x,
                              double act_tol) {
  if (act_tol < 0) throw ArgumentError("evaluate: act_tol must be non-negative");
  if (phi.pieces.empty()) throw ArgumentError("evaluate: no pieces");
  if (x.size() != phi.dimension) throw ArgumentError("evaluate: x has wrong dimension");

  SubdifferentialQuery q;
  std::vector<double> vals(phi.pieces.size());
  q.value = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < phi.pieces.size(); ++i) {
    vals[i] = -phi.pieces[i].mu.dot(x) + phi.pieces[i].b;
    q.value = std::max(q.value, vals[i]);
  }
  for (size_t i = 0; i < phi.pieces.size(); ++i) {
    if (vals[i] >= q.value - act_tol) {
      q.active_indices.push_back(static_cast<int>(i));
      q.generators.push_back(phi.pieces[i].mu);
    }
  }
  return q;
}

Vec min_norm_subgradient(const SubdifferentialQuery& query, double tol) {
  if (tol <= 0) throw ArgumentError("min_norm_subgradient: tol must be positive");
  return min_norm_point(query.generators, tol);
}

VectorField fpcs_field(const PwlConvexFunction& phi, double act_tol_scale) {
  if (phi.pieces.empty()) throw ArgumentError("fpcs_field: no pieces");
  VectorField f;
  f.dimension = phi.dimension;
  f.sample = [phi, act_tol_scale](const Vec& x) -> std::vector<Vec> {
    const double value = phi.value(x);
    const double act_tol = act_tol_scale * (1.0 + std::abs(value));
    const SubdifferentialQuery q = evaluate(phi, x, act_tol);
    return {min_norm_subgradient(q)};
  };
  f.growth_constant = phi.max_mu_norm() + phi.max_abs_b();
  return f;
}

FpcsHarnessResult empirical_sensitivity_constant(
    const PwlConvexFunction& phi, const std::vector<PerturbationSignal>& family,
    const Vec& x0, double T, double dt) {
  if (family.empty()) {
    throw ArgumentError("empirical_sensitivity_constant: empty perturbation family");
  }
  const VectorField field = fpcs_field(phi);
  const Trajectory base =
      integrate_perturbed(field, x0, zero_signal(phi.dimension), T, dt);

  FpcsHarnessResult result;
  result.reports.reserve(family.size());
  for (const PerturbationSignal& u : family) {
    const Trajectory pert = integrate_perturbed(field, x0, u, T, dt);
    SensitivityReport report = sensitivity_ratio(pert, base, u);
    result.max_ratio = std::max(result.max_ratio, report.ratio);
    result.reports.push_back(report);
  }
  return result;
}

}  // namespace sensflow
