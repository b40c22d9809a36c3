#include "sensflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "sensflow/csv.hpp"
#include "sensflow/version.hpp"

namespace sensflow {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::set<std::string>& known_kinds() {
  static const std::set<std::string> kinds{
      "linear-classify", "linear-simulate", "rotary",      "fpcs-sensitivity",
      "books-solve",     "books-grad",      "books-spiral", "books-pwl",
      "spread",          "discretize",      "sweep"};
  return kinds;
}

const Json& require_field(const Json& j, const std::string& name, const std::string& path) {
  if (!j.is_object() || !j.contains(name)) {
    throw ConfigError(path + "." + name, "missing required field " + path + "." + name);
  }
  return j.at(name);
}

double require_number(const Json& j, const std::string& name, const std::string& path) {
  const Json& v = require_field(j, name, path);
  if (!v.is_number()) throw ConfigError(path + "." + name, path + "." + name + " must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const std::string& name, const std::string& path, double dflt) {
  if (!j.is_object() || !j.contains(name)) return dflt;
  const Json& v = j.at(name);
  if (!v.is_number()) throw ConfigError(path + "." + name, path + "." + name + " must be a number");
  return v.get<double>();
}

long integer_or(const Json& j, const std::string& name, const std::string& path, long dflt) {
  if (!j.is_object() || !j.contains(name)) return dflt;
  const Json& v = j.at(name);
  if (!v.is_number_integer()) {
    throw ConfigError(path + "." + name, path + "." + name + " must be an integer");
  }
  return v.get<long>();
}

std::string string_or(const Json& j, const std::string& name, const std::string& path,
                      const std::string& dflt) {
  if (!j.is_object() || !j.contains(name)) return dflt;
  const Json& v = j.at(name);
  if (!v.is_string()) throw ConfigError(path + "." + name, path + "." + name + " must be a string");
  return v.get<std::string>();
}

void check_range(double value, double lo, bool lo_strict, const std::string& path) {
  if (lo_strict ? !(value > lo) : !(value >= lo)) {
    throw ConfigError(path, path + " out of range (needs " + (lo_strict ? ">" : ">=") + " " +
                                std::to_string(lo) + ")");
  }
}

Mat config_matrix(const Json& params, const std::string& name, const std::string& path) {
  try {
    Mat A = matrix_from_json(require_field(params, name, path));
    if (A.rows() != A.cols()) throw ConfigError(path + "." + name, "matrix must be square");
    return A;
  } catch (const ArgumentError& e) {
    throw ConfigError(path + "." + name, e.what());
  }
}

Vec config_vector(const Json& params, const std::string& name, const std::string& path) {
  try {
    return vector_from_json(require_field(params, name, path));
  } catch (const ArgumentError& e) {
    throw ConfigError(path + "." + name, e.what());
  }
}

PerturbationSignal perturbation_from_json(const Json& spec, int dimension,
                                          std::uint64_t seed, double T,
                                          const std::string& path) {
  if (spec.is_null()) return zero_signal(dimension);
  const std::string kind = string_or(spec, "kind", path, "zero");
  if (kind == "zero") return zero_signal(dimension);
  if (kind == "constant") {
    return constant_signal(config_vector(spec, "value", path));
  }
  if (kind == "sinusoid") {
    const Vec amp = config_vector(spec, "amplitude", path);
    const double omega = require_number(spec, "omega", path);
    const double phase = number_or(spec, "phase", path, 0.0);
    return sinusoid_signal(amp, omega, phase);
  }
  if (kind == "rotary") return rotary_signal();
  if (kind == "random-piecewise") {
    const double sup = number_or(spec, "sup_norm", path, 1.0);
    const long segments = integer_or(spec, "segments", path, 8);
    check_range(sup, 0.0, true, path + ".sup_norm");
    check_range(static_cast<double>(segments), 1.0, false, path + ".segments");
    return random_piecewise_constant_signal(seed, dimension, T, static_cast<int>(segments), sup);
  }
  throw ConfigError(path + ".kind", "unknown perturbation kind '" + kind + "'");
}

VectorField field_from_json(const Json& spec, const std::string& path,
                            PwlConvexFunction* phi_out = nullptr) {
  const std::string kind = string_or(spec, "kind", path, "");
  if (kind == "linear") return linear_field(config_matrix(spec, "A", path));
  if (kind == "constant") return constant_field(config_vector(spec, "value", path));
  if (kind == "fpcs") {
    PwlConvexFunction phi;
    if (spec.contains("builtin")) {
      const std::string builtin = spec.at("builtin").get<std::string>();
      if (builtin == "abs") {
        phi = abs_value_pwl();
      } else if (builtin == "l1") {
        const long dim = integer_or(spec, "dimension", path, 2);
        check_range(static_cast<double>(dim), 1.0, false, path + ".dimension");
        phi = l1_norm_pwl(static_cast<int>(dim));
      } else {
        throw ConfigError(path + ".builtin", "unknown builtin '" + builtin + "'");
      }
    } else {
      try {
        phi = pwl_from_json(require_field(spec, "phi", path));
      } catch (const ArgumentError& e) {
        throw ConfigError(path + ".phi", e.what());
      }
    }
    if (phi_out) *phi_out = phi;
    return fpcs_field(phi);
  }
  throw ConfigError(path + ".kind", "unknown field kind '" + kind + "'");
}

DriftSelector selector_from_name(const std::string& name, std::uint64_t seed,
                                 const std::string& path) {
  if (name == "min-norm") return select_min_norm();
  if (name == "first") return select_first();
  if (name == "random") return select_random(seed);
  if (name == "adversarial-outward") {
    return select_adversarial([](const Vec& x) -> Vec {
      const double n = x.norm();
      return n > 0 ? Vec(x / n) : Vec(Vec::Zero(x.size()));
    });
  }
  throw ConfigError(path, "unknown selector '" + name + "'");
}

void write_json_file(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Per-kind runners. Each returns the report and appends output filenames.
// ---------------------------------------------------------------------------

struct RunContext {
  const ExperimentConfig& config;
  fs::path out;
  std::vector<std::string> outputs;

  void write_csv(const std::string& name, const Trajectory& traj) {
    write_trajectory_csv((out / name).string(), traj);
    outputs.push_back(name);
  }
};

Json run_linear_classify(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const Mat A = config_matrix(p, "A", "params");
  const double tol = number_or(p, "tol", "params", 1e-9);
  check_range(tol, 0.0, true, "params.tol");
  const LinearSystem sys{A};
  Json report;
  report["sof"] = to_json(classify_sof(sys, tol));
  try {
    report["constant"] = to_json(sensitivity_constant(sys, tol));
  } catch (const Error& e) {
    report["constant"] = nullptr;
    report["constant_error"] = e.what();
  }
  return report;
}

Json run_linear_simulate(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const Mat A = config_matrix(p, "A", "params");
  const Vec x0 = config_vector(p, "x0", "params");
  const double T = require_number(p, "T", "params");
  const double dt = require_number(p, "dt", "params");
  check_range(T, 0.0, false, "params.T");
  check_range(dt, 0.0, true, "params.dt");
  const long refine = integer_or(p, "refine", "params", 4);
  check_range(static_cast<double>(refine), 1.0, false, "params.refine");
  const std::string method = string_or(p, "method", "params", "both");
  if (method != "euler" && method != "closed-form" && method != "both") {
    throw ConfigError("params.method", "method must be euler, closed-form or both");
  }
  const PerturbationSignal U = perturbation_from_json(
      p.contains("perturbation") ? p.at("perturbation") : Json(), static_cast<int>(A.rows()),
      ctx.config.seed, T, "params.perturbation");

  const LinearSystem sys{A};
  Json report;
  Trajectory euler, closed;
  if (method != "closed-form") {
    euler = integrate_perturbed(linear_field(A), x0, U, T, dt);
    ctx.write_csv("euler.csv", euler);
  }
  if (method != "euler") {
    std::vector<double> times;
    const std::size_t n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    for (std::size_t k = 0; k < n; ++k) times.push_back(dt * static_cast<double>(k));
    times.push_back(T);
    closed = closed_form_trajectory(sys, x0, U, times, static_cast<int>(refine));
    ctx.write_csv("closed_form.csv", closed);
  }
  if (method == "both") {
    double sup_gap = 0.0, sup_norm = 0.0;
    for (std::size_t i = 0; i < euler.size(); ++i) {
      sup_gap = std::max(sup_gap, (euler.states[i] - closed.states[i]).norm());
      sup_norm = std::max(sup_norm, closed.states[i].norm());
    }
    report["sup_disagreement"] = sup_gap;
    report["sup_disagreement_relative"] = sup_norm > 0 ? sup_gap / sup_norm : 0.0;
  }
  report["method"] = method;
  report["horizon"] = T;
  return report;
}

Json run_rotary(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const double T = require_number(p, "T", "params");
  const double grid = number_or(p, "grid", "params", 0.01);
  check_range(T, 0.0, true, "params.T");
  check_range(grid, 0.0, true, "params.grid");

  RotaryPair pair = rotary_counterexample(T, grid);
  ctx.write_csv("unperturbed.csv", pair.unperturbed);
  ctx.write_csv("perturbed.csv", pair.perturbed);

  // The pair is analytic: deviation t peaks at the horizon and
  // sup||U|| = 2 sin(min(T, pi)/2) with the maximum at t = pi.
  const double sup_dev = T;
  const double sup_u = 2.0 * std::sin(std::min(T, kPi) / 2.0);
  Json report;
  report["sup_deviation"] = sup_dev;
  report["sup_perturbation"] = sup_u;
  report["ratio"] = sup_dev / sup_u;
  report["horizon"] = T;
  report["grid"] = grid;
  return report;
}

Json run_fpcs(RunContext& ctx) {
  const Json& p = ctx.config.params;
  PwlConvexFunction phi;
  Json field_spec = p.contains("field") ? p.at("field") : Json{{"kind", "fpcs"}, {"builtin", "l1"}};
  if (!field_spec.contains("kind")) field_spec["kind"] = "fpcs";
  field_from_json(field_spec, "params.field", &phi);

  const Vec x0 = config_vector(p, "x0", "params");
  const double T = require_number(p, "T", "params");
  const double dt = require_number(p, "dt", "params");
  check_range(T, 0.0, true, "params.T");
  check_range(dt, 0.0, true, "params.dt");
  std::vector<double> scales;
  for (const Json& s : require_field(p, "scales", "params")) {
    const double v = s.get<double>();
    check_range(v, 0.0, true, "params.scales[]");
    scales.push_back(v);
  }
  if (scales.empty()) throw ConfigError("params.scales", "scales must be non-empty");
  const long runs = integer_or(p, "runs_per_scale", "params", 20);
  const long segments = integer_or(p, "segments", "params", 8);
  check_range(static_cast<double>(runs), 1.0, false, "params.runs_per_scale");
  check_range(static_cast<double>(segments), 1.0, false, "params.segments");

  const Trajectory base = integrate_perturbed(fpcs_field(phi), x0, zero_signal(phi.dimension), T, dt);
  ctx.write_csv("unperturbed.csv", base);

  Json levels = Json::array();
  double overall_max = 0.0, level_min = std::numeric_limits<double>::infinity(),
         level_max = 0.0;
  for (std::size_t lev = 0; lev < scales.size(); ++lev) {
    std::vector<PerturbationSignal> family;
    for (long i = 0; i < runs; ++i) {
      family.push_back(random_piecewise_constant_signal(
          ctx.config.seed * 10007ull + lev * 1009ull + static_cast<std::uint64_t>(i),
          phi.dimension, T, static_cast<int>(segments), scales[lev]));
    }
    const FpcsHarnessResult result = empirical_sensitivity_constant(phi, family, x0, T, dt);
    Json level{{"scale", scales[lev]}, {"max_ratio", result.max_ratio}};
    Json reports = Json::array();
    for (const SensitivityReport& r : result.reports) reports.push_back(to_json(r));
    level["reports"] = reports;
    levels.push_back(level);
    overall_max = std::max(overall_max, result.max_ratio);
    level_min = std::min(level_min, result.max_ratio);
    level_max = std::max(level_max, result.max_ratio);
  }
  Json report;
  report["levels"] = levels;
  report["max_ratio"] = overall_max;
  report["level_ratio_spread"] = level_min > 0 ? level_max / level_min : 0.0;
  return report;
}

Json run_books_solve(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const double tol = number_or(p, "tol", "params", 1e-12);
  check_range(tol, 0.0, true, "params.tol");

  std::vector<CylPoint> points;
  if (p.contains("points")) {
    for (const Json& q : p.at("points")) {
      if (!q.is_array() || q.size() != 3) {
        throw ConfigError("params.points", "each point must be [r, phi, z]");
      }
      points.push_back(CylPoint{q[0].get<double>(), q[1].get<double>(), q[2].get<double>()});
    }
  } else {
    const long count = integer_or(p, "count", "params", 1000);
    check_range(static_cast<double>(count), 1.0, false, "params.count");
    const double z_span = number_or(p, "z_span", "params", 49.0);
    check_range(z_span, 0.0, true, "params.z_span");
    std::mt19937_64 rng(ctx.config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long i = 0; i < count; ++i) {
      points.push_back(CylPoint{0.25 * std::sqrt(unit(rng)), 2.0 * kPi * unit(rng),
                                -1.0 - z_span * unit(rng)});
    }
  }

  double max_residual = 0.0, min_f = std::numeric_limits<double>::infinity();
  Json per_point = Json::array();
  for (const CylPoint& q : points) {
    const double f = solve_f(q, tol);
    const double resid = std::abs(books_h(f, q.r, q.phi, q.z));
    max_residual = std::max(max_residual, resid);
    min_f = std::min(min_f, f);
    if (p.contains("points")) {
      per_point.push_back(Json{{"r", q.r}, {"phi", q.phi}, {"z", q.z}, {"f", f},
                               {"residual", resid}});
    }
  }
  Json report{{"count", points.size()},
              {"max_residual", max_residual},
              {"min_f", min_f},
              {"all_f_ge_1", min_f >= 1.0}};
  if (!per_point.empty()) report["points"] = per_point;
  return report;
}

Json run_books_grad(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const long count = integer_or(p, "count", "params", 100);
  check_range(static_cast<double>(count), 1.0, false, "params.count");
  const double step = number_or(p, "fd_step", "params", 1e-5);
  check_range(step, 0.0, true, "params.fd_step");
  const double z_span = number_or(p, "z_span", "params", 19.0);

  std::mt19937_64 rng(ctx.config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double max_rel_error = 0.0, max_dfdz = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < count; ++i) {
    // Keep a margin so the central differences stay inside Omega.
    const CylPoint q{0.24 * std::sqrt(unit(rng)), 2.0 * kPi * unit(rng),
                     -1.1 - z_span * unit(rng)};
    const Vec3 g = grad_f(q);
    const Vec3 c = q.cartesian();
    Vec3 fd;
    for (int d = 0; d < 3; ++d) {
      Vec3 hi = c, lo = c;
      hi(d) += step;
      lo(d) -= step;
      fd(d) = (solve_f(CylPoint::from_cartesian(hi), 1e-13) -
               solve_f(CylPoint::from_cartesian(lo), 1e-13)) /
              (2.0 * step);
    }
    max_rel_error = std::max(max_rel_error, (g - fd).norm() / g.norm());
    max_dfdz = std::max(max_dfdz, g.z());
  }
  return Json{{"count", count},
              {"fd_step", step},
              {"max_rel_error", max_rel_error},
              {"max_dfdz", max_dfdz},
              {"dfdz_negative", max_dfdz < 0.0}};
}

Json run_books_spiral(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const double epsilon = require_number(p, "epsilon", "params");
  const double zeta = number_or(p, "zeta", "params", -1.0);
  const double dt = number_or(p, "dt", "params", 1e-4);
  if (!(epsilon > 0 && epsilon <= 0.5)) {
    throw ConfigError("params.epsilon", "epsilon must lie in (0, 1/2]");
  }
  if (!(zeta <= -1.0)) throw ConfigError("params.zeta", "zeta must be <= -1");
  check_range(dt, 0.0, true, "params.dt");

  const SpiralCertificate cert = spiral_construction(epsilon, zeta, dt);
  ctx.write_csv("spiral.csv", cert.to_trajectory());
  Json report = to_json(cert);
  report["invariants"] = Json{
      {"r_t0", Json{{"value", cert.deviation},
                    {"pass", std::abs(cert.deviation - 1.0 / 6.0) <= 1e-6}}},
      {"t0_lt_half_inv_eps", cert.t0 < 1.0 / (2.0 * epsilon)},
      {"sup_U_le_2eps", cert.sup_U <= 2.0 * epsilon + 1e-12},
      {"ratio_ge_bound", cert.ratio >= 1.0 / (12.0 * epsilon) - 1e-12},
      {"rdot_ge_eps_third", cert.rdot_min >= epsilon / 3.0}};
  return report;
}

Json run_books_pwl(RunContext& ctx) {
  const Json& p = ctx.config.params;
  Slab slab;
  slab.z_lo = number_or(p, "z_lo", "params", -40.0);
  slab.z_hi = number_or(p, "z_hi", "params", -38.0);
  if (!(slab.z_lo < slab.z_hi)) throw ConfigError("params.z_lo", "need z_lo < z_hi");
  if (!(slab.z_hi <= -1.0)) throw ConfigError("params.z_hi", "need z_hi <= -1");
  const long samples = integer_or(p, "samples_per_simplex", "params", 1);
  check_range(static_cast<double>(samples), 1.0, false, "params.samples_per_simplex");

  std::vector<double> hs;
  if (p.contains("grid_hs")) {
    for (const Json& h : p.at("grid_hs")) {
      check_range(h.get<double>(), 0.0, true, "params.grid_hs[]");
      hs.push_back(h.get<double>());
    }
  } else {
    const double h = require_number(p, "grid_h", "params");
    check_range(h, 0.0, true, "params.grid_h");
    hs.push_back(h);
  }

  Json reports = Json::array();
  std::vector<double> sups;
  for (double h : hs) {
    const PwlInterpolantResult result = pwl_interpolant(slab, h, static_cast<int>(samples));
    reports.push_back(to_json(result.report));
    sups.push_back(result.report.sup_error);
  }
  Json report{{"z_lo", slab.z_lo}, {"z_hi", slab.z_hi}, {"reports", reports}};
  Json ratios = Json::array();
  for (std::size_t i = 1; i < sups.size(); ++i) {
    ratios.push_back(sups[i] > 0 ? sups[i - 1] / sups[i] : 0.0);
  }
  report["sup_error_ratios"] = ratios;
  return report;
}

Json run_spread(RunContext& ctx) {
  const Json& p = ctx.config.params;
  VectorField base = field_from_json(require_field(p, "base", "params"), "params.base");
  Json convolution_note;
  if (p.contains("convolve")) {
    const Json& conv = p.at("convolve");
    const double radius = require_number(conv, "radius", "params.convolve");
    check_range(radius, 0.0, true, "params.convolve.radius");
    const long quad_points = integer_or(conv, "quad_points", "params.convolve", 8);
    check_range(static_cast<double>(quad_points), 2.0, false, "params.convolve.quad_points");
    base = convolve_field(base, uniform_kernel(radius), static_cast<int>(quad_points));
    convolution_note = Json{{"radius", radius}, {"quad_points", quad_points},
                            {"kernel", "uniform"}};
  }
  const double epsilon = require_number(p, "epsilon", "params");
  check_range(epsilon, 0.0, false, "params.epsilon");
  const long probe_count = integer_or(p, "probe_count", "params", 32);
  check_range(static_cast<double>(probe_count), 1.0, false, "params.probe_count");
  const Vec x0 = config_vector(p, "x0", "params");
  const double T = require_number(p, "T", "params");
  const double dt = require_number(p, "dt", "params");
  check_range(T, 0.0, true, "params.T");
  check_range(dt, 0.0, true, "params.dt");
  const long runs = integer_or(p, "runs", "params", 1);
  check_range(static_cast<double>(runs), 1.0, false, "params.runs");
  const std::string selector_name = string_or(p, "selector", "params", "random");
  const double C = number_or(p, "C", "params", 0.0);

  const bool has_pert = p.contains("perturbation") &&
                        string_or(p.at("perturbation"), "kind", "params.perturbation", "zero") != "zero";

  Json report;
  if (!has_pert) {
    // Pairwise mode: several unperturbed spread runs from the same start;
    // their terminal spread obeys C (2 eps) + 3 eps when the base has
    // strong bounded sensitivity with constant C.
    std::vector<Trajectory> trajs;
    for (long i = 0; i < runs; ++i) {
      SpreadField sf{base, epsilon, static_cast<int>(probe_count),
                     ctx.config.seed + static_cast<std::uint64_t>(i)};
      const DriftSelector sel = selector_from_name(
          selector_name, ctx.config.seed * 31ull + static_cast<std::uint64_t>(i),
          "params.selector");
      trajs.push_back(spread_integrate(sf, x0, zero_signal(base.dimension), T, dt, sel));
      if (i == 0) ctx.write_csv("spread_run0.csv", trajs.back());
    }
    double max_pair = 0.0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      for (std::size_t j = i + 1; j < trajs.size(); ++j) {
        max_pair = std::max(max_pair,
                            (trajs[i].states.back() - trajs[j].states.back()).norm());
      }
    }
    report["mode"] = "pairwise";
    report["max_terminal_spread"] = max_pair;
    if (C > 0) {
      const double bound = C * 2.0 * epsilon + 3.0 * epsilon;
      report["bound"] = bound;
      report["pass"] = max_pair <= bound;
    }
  } else {
    std::vector<SensitivityReport> reports;
    for (long i = 0; i < runs; ++i) {
      const std::uint64_t run_seed = ctx.config.seed + static_cast<std::uint64_t>(i);
      SpreadField sf{base, epsilon, static_cast<int>(probe_count), run_seed};
      const DriftSelector sel =
          selector_from_name(selector_name, run_seed * 31ull, "params.selector");
      const PerturbationSignal U = perturbation_from_json(
          p.at("perturbation"), base.dimension, run_seed, T, "params.perturbation");
      const Trajectory pert = spread_integrate(sf, x0, U, T, dt, sel);
      const Trajectory unpert =
          spread_integrate(sf, x0, zero_signal(base.dimension), T, dt, sel);
      if (i == 0) ctx.write_csv("spread_run0.csv", pert);
      reports.push_back(sensitivity_ratio(pert, unpert, U));
    }
    report["mode"] = "perturbed";
    Json rj = Json::array();
    for (const SensitivityReport& r : reports) rj.push_back(to_json(r));
    report["reports"] = rj;
    if (C > 0) report["bound_check"] = to_json(check_spread_bound(C, epsilon, reports));
  }
  report["epsilon"] = epsilon;
  if (!convolution_note.is_null()) report["convolution"] = convolution_note;
  return report;
}

Json run_discretize(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const VectorField field = field_from_json(require_field(p, "field", "params"), "params.field");
  const Vec z0 = config_vector(p, "z0", "params");
  const long K = integer_or(p, "K", "params", 20);
  check_range(static_cast<double>(K), 1.0, false, "params.K");

  std::vector<Vec> V;
  const Json vspec = p.contains("V") ? p.at("V") : Json{{"kind", "zero"}};
  const std::string vkind = string_or(vspec, "kind", "params.V", "zero");
  if (vkind == "zero") {
    for (long k = 0; k < K; ++k) V.push_back(Vec::Zero(field.dimension));
  } else if (vkind == "random") {
    const double sup = number_or(vspec, "sup_norm", "params.V", 1.0);
    check_range(sup, 0.0, true, "params.V.sup_norm");
    std::mt19937_64 rng(ctx.config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double max_norm = 0.0;
    for (long k = 0; k < K; ++k) {
      Vec v(field.dimension);
      for (int d = 0; d < field.dimension; ++d) v(d) = gauss(rng);
      max_norm = std::max(max_norm, v.norm());
      V.push_back(std::move(v));
    }
    for (Vec& v : V) v *= sup / max_norm;
  } else {
    throw ConfigError("params.V.kind", "unknown V kind '" + vkind + "'");
  }

  const DiscreteTrajectory traj =
      discrete_trajectory(field, z0, V, static_cast<int>(K));
  write_discrete_csv((ctx.out / "discrete.csv").string(), traj.states, traj.drifts,
                     traj.perturbations);
  ctx.outputs.push_back("discrete.csv");

  const Embedding emb = embed_continuous(traj);
  ctx.write_csv("embedded.csv", emb.path);

  // Recompute xtilde(k) through the integral identity and compare with z(k).
  double max_gap = 0.0, max_z = 0.0, max_mu = 0.0, max_v = 0.0;
  Vec drift_sum = Vec::Zero(field.dimension);
  for (long k = 0; k <= K; ++k) {
    const Vec xk = traj.states[0] + drift_sum +
                   emb.U.evaluate(static_cast<double>(k));
    max_gap = std::max(max_gap, (xk - traj.states[k]).norm());
    max_z = std::max(max_z, traj.states[k].norm());
    if (k < K) {
      drift_sum += traj.drifts[k];
      max_mu = std::max(max_mu, traj.drifts[k].norm());
      max_v = std::max(max_v, traj.perturbations[k].norm());
    }
  }

  Json report{{"K", K},
              {"embedding_sup_U", emb.sup_U},
              {"embedding_max_gap", max_gap},
              {"embedding_exact", max_gap <= 1e-12 * (1.0 + max_z)},
              {"sup_U_bound_ok", emb.sup_U <= max_mu + max_v + 1e-12}};

  const double C = number_or(p, "C", "params", 0.0);
  if (C > 0) {
    const double cont_dt = number_or(p, "cont_dt", "params", 1e-3);
    check_range(cont_dt, 0.0, true, "params.cont_dt");
    const Trajectory cont = integrate_perturbed(
        field, z0, zero_signal(field.dimension), static_cast<double>(K), cont_dt);
    report["bound_check"] = to_json(check_discrete_bound(C, cont, traj));
  }
  return report;
}

Json run_one(RunContext& ctx);

Json run_sweep(RunContext& ctx) {
  const Json& p = ctx.config.params;
  const std::string parameter = string_or(p, "parameter", "params", "");
  if (parameter.empty()) throw ConfigError("params.parameter", "sweep needs a parameter name");
  const Json& values = require_field(p, "values", "params");
  if (!values.is_array() || values.empty()) {
    throw ConfigError("params.values", "sweep needs a non-empty list of values");
  }
  const Json& base = require_field(p, "base", "params");

  Json merged = Json::array();
  int index = 0;
  for (const Json& v : values) {
    Json sub_doc = base;
    sub_doc["params"][parameter] = v;
    char name[32];
    std::snprintf(name, sizeof name, "point_%03d", index);
    ExperimentConfig sub = parse_config(sub_doc, (ctx.out / name).string());
    if (sub.kind == "sweep") throw ConfigError("params.base.kind", "nested sweeps not supported");
    const Json sub_report = run_experiment(sub);
    merged.push_back(Json{{"value", v}, {"dir", name}, {"report", sub_report}});
    ctx.outputs.push_back(std::string(name) + "/report.json");
    ++index;
  }
  return Json{{"parameter", parameter}, {"points", merged}};
}

Json run_one(RunContext& ctx) {
  const std::string& kind = ctx.config.kind;
  if (kind == "linear-classify") return run_linear_classify(ctx);
  if (kind == "linear-simulate") return run_linear_simulate(ctx);
  if (kind == "rotary") return run_rotary(ctx);
  if (kind == "fpcs-sensitivity") return run_fpcs(ctx);
  if (kind == "books-solve") return run_books_solve(ctx);
  if (kind == "books-grad") return run_books_grad(ctx);
  if (kind == "books-spiral") return run_books_spiral(ctx);
  if (kind == "books-pwl") return run_books_pwl(ctx);
  if (kind == "spread") return run_spread(ctx);
  if (kind == "discretize") return run_discretize(ctx);
  if (kind == "sweep") return run_sweep(ctx);
  throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
}

}  // namespace

bool is_known_kind(const std::string& kind) { return known_kinds().count(kind) > 0; }

ExperimentConfig parse_config(const Json& doc, const std::string& out_dir) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  ExperimentConfig config;
  config.kind = string_or(doc, "kind", "", "");
  if (!is_known_kind(config.kind)) {
    throw ConfigError("kind", "unknown experiment kind '" + config.kind + "'");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw ConfigError("seed", "seed must be an unsigned integer");
    }
    config.seed = doc.at("seed").get<std::uint64_t>();
  }
  config.params = doc.contains("params") ? doc.at("params") : Json::object();
  if (!config.params.is_object()) throw ConfigError("params", "params must be an object");
  config.out_dir = out_dir;
  return config;
}

ExperimentConfig load_config_file(const std::string& path, const std::string& out_dir) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  Json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, out_dir);
}

Json run_experiment(const ExperimentConfig& config) {
  RunContext ctx{config, fs::path(config.out_dir), {}};
  fs::create_directories(ctx.out);
  const Json report = run_one(ctx);
  write_json_file(ctx.out / "report.json", report);
  ctx.outputs.push_back("report.json");

  Json manifest{{"artifact_version", kVersion},
                {"kind", config.kind},
                {"seed", config.seed},
                {"parameters", config.params},
                {"outputs", ctx.outputs}};
  write_json_file(ctx.out / "manifest.json", manifest);
  return report;
}

int run_experiment_guarded(const ExperimentConfig& config) {
  const fs::path out(config.out_dir);
  try {
    run_experiment(config);
    return 0;
  } catch (const ConfigError& e) {
    fs::create_directories(out);
    write_json_file(out / "error.json",
                    Json{{"error", "config"}, {"field", e.field}, {"message", e.what()}});
    return 2;
  } catch (const Error& e) {
    fs::create_directories(out);
    write_json_file(out / "error.json", Json{{"error", "module"}, {"message", e.what()}});
    return 1;
  }
}

}  // namespace sensflow
