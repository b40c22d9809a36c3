#include "sensflow/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <utility>

#include "sensflow/minnorm.hpp"

namespace sensflow {

VectorField linear_field(const Mat& A) {
  if (A.rows() != A.cols()) throw ArgumentError("linear_field: A must be square");
  VectorField f;
  f.dimension = static_cast<int>(A.rows());
  f.sample = [A](const Vec& x) { return std::vector<Vec>{A * x}; };
  Eigen::JacobiSVD<Mat> svd(A);
  f.growth_constant = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return f;
}

VectorField constant_field(const Vec& v) {
  VectorField f;
  f.dimension = static_cast<int>(v.size());
  f.sample = [v](const Vec&) { return std::vector<Vec>{v}; };
  f.growth_constant = v.norm();
  return f;
}

VectorField zero_field(int dimension) {
  return constant_field(Vec::Zero(dimension));
}

PerturbationSignal zero_signal(int dimension) {
  PerturbationSignal u;
  u.evaluate = [dimension](double) { return Vec::Zero(dimension); };
  u.description = "zero";
  u.sup_norm_hint = 0.0;
  return u;
}

PerturbationSignal constant_signal(const Vec& value) {
  PerturbationSignal u;
  u.evaluate = [value](double) { return value; };
  u.description = "constant";
  u.sup_norm_hint = value.norm();
  return u;
}

PerturbationSignal sinusoid_signal(const Vec& amplitude, double omega, double phase) {
  PerturbationSignal u;
  u.evaluate = [amplitude, omega, phase](double t) -> Vec {
    return amplitude * std::sin(omega * t + phase);
  };
  u.description = "sinusoid";
  u.sup_norm_hint = amplitude.norm();
  return u;
}

PerturbationSignal piecewise_constant_signal(std::vector<double> switch_times,
                                             std::vector<Vec> values) {
  if (switch_times.empty() || switch_times.size() != values.size()) {
    throw ArgumentError("piecewise_constant_signal: need one value per switch time");
  }
  if (switch_times.front() != 0.0) {
    throw ArgumentError("piecewise_constant_signal: first switch time must be 0");
  }
  for (size_t i = 1; i < switch_times.size(); ++i) {
    if (switch_times[i] <= switch_times[i - 1]) {
      throw ArgumentError("piecewise_constant_signal: switch times must increase");
    }
  }
  double sup = 0.0;
  for (const Vec& v : values) sup = std::max(sup, v.norm());
  PerturbationSignal u;
  u.evaluate = [st = std::move(switch_times), vals = std::move(values)](double t) -> Vec {
    auto it = std::upper_bound(st.begin(), st.end(), t);
    const size_t idx = (it == st.begin()) ? 0 : static_cast<size_t>(it - st.begin() - 1);
    return vals[idx];
  };
  u.description = "piecewise-constant";
  u.sup_norm_hint = sup;
  return u;
}

PerturbationSignal rotary_signal() {
  PerturbationSignal u;
  u.evaluate = [](double t) -> Vec {
    Vec v(2);
    v << std::sin(t), 1.0 - std::cos(t);
    return v;
  };
  u.description = "rotary (sin t, 1 - cos t)";
  u.sup_norm_hint = 2.0;
  return u;
}

PerturbationSignal random_piecewise_constant_signal(std::uint64_t seed, int dimension,
                                                    double T, int segments,
                                                    double sup_norm) {
  if (segments < 1) throw ArgumentError("random_piecewise_constant_signal: segments >= 1");
  if (T <= 0) throw ArgumentError("random_piecewise_constant_signal: T must be positive");
  if (sup_norm <= 0) throw ArgumentError("random_piecewise_constant_signal: sup_norm > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> switches{0.0};
  for (int i = 1; i < segments; ++i) switches.push_back(T * unit(rng));
  std::sort(switches.begin(), switches.end());
  switches.erase(std::unique(switches.begin(), switches.end()), switches.end());

  std::vector<Vec> values;
  double max_norm = 0.0;
  for (std::size_t i = 0; i < switches.size(); ++i) {
    Vec v(dimension);
    for (int d = 0; d < dimension; ++d) v(d) = gauss(rng);
    max_norm = std::max(max_norm, v.norm());
    values.push_back(std::move(v));
  }
  for (Vec& v : values) v *= sup_norm / max_norm;
  PerturbationSignal u = piecewise_constant_signal(std::move(switches), std::move(values));
  u.sup_norm_hint = sup_norm;
  return u;
}

bool check_right_continuity(const PerturbationSignal& U,
                            const std::vector<double>& test_points, double tol) {
  for (double t : test_points) {
    const Vec base = U.evaluate(t);
    const double gap = (U.evaluate(t + 1e-9) - base).norm();
    if (gap > tol * (1.0 + base.norm())) return false;
  }
  return true;
}

DriftSelector select_first() {
  return [](const Vec&, const std::vector<Vec>& options) { return options.front(); };
}

DriftSelector select_min_norm(double tol) {
  return [tol](const Vec&, const std::vector<Vec>& options) -> Vec {
    if (options.size() == 1) return options.front();
    return min_norm_point(options, tol);
  };
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash_state(std::uint64_t seed, const Vec& x) {
  std::uint64_t h = splitmix64(seed);
  for (int i = 0; i < x.size(); ++i) {
    std::uint64_t bits;
    const double v = x(i);
    std::memcpy(&bits, &v, sizeof bits);
    h = splitmix64(h ^ bits);
  }
  return h;
}

}  // namespace

DriftSelector select_random(std::uint64_t seed) {
  return [seed](const Vec& x, const std::vector<Vec>& options) -> Vec {
    if (options.size() == 1) return options.front();
    const std::uint64_t h = hash_state(seed, x);
    return options[h % options.size()];
  };
}

DriftSelector select_adversarial(std::function<Vec(const Vec&)> direction) {
  return [dir = std::move(direction)](const Vec& x, const std::vector<Vec>& options) -> Vec {
    if (options.size() == 1) return options.front();
    const Vec d = dir(x);
    size_t best = 0;
    double best_ip = options[0].dot(d);
    for (size_t i = 1; i < options.size(); ++i) {
      const double ip = options[i].dot(d);
      if (ip > best_ip) {
        best_ip = ip;
        best = i;
      }
    }
    return options[best];
  };
}

namespace {

Vec select_drift(const VectorField& field, const DriftSelector& selector, const Vec& x) {
  std::vector<Vec> options = field.sample(x);
  if (options.empty()) throw FieldUndefinedError("field has no drift at the queried point");
  for (const Vec& o : options) {
    if (o.size() != field.dimension) {
      throw FieldUndefinedError("field returned a drift of wrong dimension");
    }
  }
  return selector(x, options);
}

}  // namespace

Trajectory integrate_perturbed(const VectorField& field, const Vec& x0,
                               const PerturbationSignal& U, double T, double dt,
                               const DriftSelector& selector) {
  if (dt <= 0) throw ArgumentError("integrate_perturbed: dt must be positive");
  if (T < 0) throw ArgumentError("integrate_perturbed: T must be non-negative");
  if (x0.size() != field.dimension) {
    throw ArgumentError("integrate_perturbed: x0 has wrong dimension");
  }

  Trajectory traj;
  traj.dt = dt;
  traj.perturbation_description = U.description;

  Vec u_prev = U.evaluate(0.0);
  Vec x = x0 + u_prev;  // U(0) is the initial jump
  double t = 0.0;
  if (!x.allFinite()) throw IntegrationDivergedError(0.0, std::move(traj));

  const std::size_t n_steps =
      static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.drifts.reserve(n_steps + 1);
  traj.perturbations.reserve(n_steps + 1);

  for (std::size_t k = 0;; ++k) {
    const Vec xi = select_drift(field, selector, x);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.drifts.push_back(xi);
    traj.perturbations.push_back(u_prev);
    if (k >= n_steps) break;

    const double t_next = (k + 1 == n_steps) ? T : dt * static_cast<double>(k + 1);
    const double h = t_next - t;
    const Vec u_next = U.evaluate(t_next);
    Vec x_next = x + h * xi + (u_next - u_prev);
    if (!x_next.allFinite()) {
      throw IntegrationDivergedError(t, std::move(traj));
    }
    x = std::move(x_next);
    u_prev = u_next;
    t = t_next;
  }
  return traj;
}

SensitivityReport sensitivity_ratio(const Trajectory& perturbed,
                                    const Trajectory& unperturbed,
                                    const PerturbationSignal& U) {
  if (perturbed.size() != unperturbed.size() || perturbed.size() == 0) {
    throw ArgumentError("sensitivity_ratio: trajectories must share the time grid");
  }
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    if (std::abs(perturbed.times[i] - unperturbed.times[i]) >
        1e-12 * (1.0 + std::abs(perturbed.times[i]))) {
      throw ArgumentError("sensitivity_ratio: trajectories must share the time grid");
    }
  }
  SensitivityReport report;
  report.horizon = perturbed.times.back();
  report.dt = perturbed.dt;
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    report.sup_deviation = std::max(
        report.sup_deviation, (perturbed.states[i] - unperturbed.states[i]).norm());
    report.sup_perturbation =
        std::max(report.sup_perturbation, U.evaluate(perturbed.times[i]).norm());
  }
  if (report.sup_perturbation <= 0.0) {
    throw UndefinedRatioError("sensitivity_ratio: sup||U|| = 0, the bound is vacuous");
  }
  report.ratio = report.sup_deviation / report.sup_perturbation;
  return report;
}

GrowthReport check_growth_bound(const VectorField& field, double gamma,
                                const std::vector<Vec>& samples) {
  if (samples.empty()) throw ArgumentError("check_growth_bound: samples must be non-empty");
  GrowthReport report;
  for (const Vec& x : samples) {
    for (const Vec& xi : field.sample(x)) {
      const double ratio = xi.norm() / (1.0 + x.norm());
      if (ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        report.worst_state = x;
        report.worst_drift = xi;
      }
    }
  }
  report.ok = report.worst_ratio <= gamma;
  return report;
}

}  // namespace sensflow
