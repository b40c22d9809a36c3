#include "sensflow/json_io.hpp"

namespace sensflow {

namespace {

Json complex_json(const std::complex<double>& c) {
  return Json{{"re", c.real()}, {"im", c.imag()}};
}

Json vec_json(const Vec& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Json to_json(const SensitivityReport& report) {
  return Json{{"sup_deviation", report.sup_deviation},
              {"sup_perturbation", report.sup_perturbation},
              {"ratio", report.ratio},
              {"horizon", report.horizon},
              {"dt", report.dt}};
}

Json to_json(const GrowthReport& report) {
  Json j{{"ok", report.ok}, {"worst_ratio", report.worst_ratio}};
  if (report.worst_state.size() > 0) {
    j["worst_state"] = vec_json(report.worst_state);
    j["worst_drift"] = vec_json(report.worst_drift);
  }
  return j;
}

Json to_json(const SofReport& report) {
  Json eigs = Json::array();
  for (const auto& lam : report.eigenvalues) eigs.push_back(complex_json(lam));
  return Json{{"eigenvalues", eigs},
              {"is_stable", report.is_stable},
              {"is_orbit_free", report.is_orbit_free},
              {"is_sof", report.is_sof},
              {"zero_eig_algebraic", report.zero_eig_algebraic},
              {"zero_eig_geometric", report.zero_eig_geometric},
              {"tolerance", report.tolerance}};
}

Json to_json(const SensitivityConstant& c) {
  Json eigs = Json::array();
  for (const auto& lam : c.eigenvalues) eigs.push_back(complex_json(lam));
  return Json{{"value", c.value},
              {"sigma_max", c.sigma_max},
              {"sigma_min", c.sigma_min},
              {"eigenvalues", eigs},
              {"eigen_terms", c.eigen_terms}};
}

Json to_json(const QuasiconvexityReport& report) {
  return Json{{"pairs", report.pairs},
              {"failures", report.failures},
              {"worst_excess", report.worst_excess},
              {"min_strict_margin", report.min_strict_margin},
              {"pass", report.pass}};
}

Json to_json(const SpiralCertificate& cert) {
  Json j{{"epsilon", cert.epsilon},
         {"zeta", cert.zeta},
         {"n_eps", cert.n_eps},
         {"z_eps", cert.z_eps},
         {"z0", cert.z0},
         {"phi0", cert.phi0},
         {"t0", cert.t0},
         {"dt", cert.dt},
         {"rdot_min", cert.rdot_min},
         {"sup_U", cert.sup_U},
         {"deviation", cert.deviation},
         {"ratio", cert.ratio},
         {"ratio_measured", cert.ratio_measured},
         {"ratio_lower_bound", 1.0 / (12.0 * cert.epsilon)},
         {"reparametrization_note",
          "ratio is invariant under the time reparametrization onto the "
          "original field; the certificate reports the auxiliary-field "
          "parametrization"}};
  j["samples"] = Json::array();
  for (std::size_t i = 0; i < cert.ts.size(); ++i) {
    j["samples"].push_back(Json{{"t", cert.ts[i]},
                                {"r", cert.rs[i]},
                                {"p", vec3_json(cert.path[i])},
                                {"U", vec3_json(cert.U_path[i])}});
  }
  return j;
}

Json to_json(const MatchReport& report) {
  return Json{{"matched_point", vec3_json(report.matched_point)},
              {"distance", report.distance},
              {"alpha", report.alpha},
              {"angle", report.angle},
              {"y0", report.y0},
              {"level", report.level},
              {"v", vec3_json(report.v)},
              {"v_frame", vec3_json(report.v_frame)}};
}

Json to_json(const GradientErrorReport& report) {
  return Json{{"grid_h", report.grid_h},
              {"sup_error", report.sup_error},
              {"mean_error", report.mean_error},
              {"samples", report.samples},
              {"skipped_simplices", report.skipped_simplices}};
}

Json to_json(const SpreadBoundCheck& check) {
  return Json{{"pass", check.pass},
              {"per_report", check.per_report},
              {"slack", check.slack}};
}

Json to_json(const DiscreteBoundCheck& check) {
  return Json{{"pass", check.pass},
              {"first_violation", check.first_violation},
              {"lhs", check.lhs},
              {"rhs", check.rhs}};
}

PwlConvexFunction pwl_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dimension") || !j.contains("pieces")) {
    throw ArgumentError("pwl_from_json: need {dimension, pieces}");
  }
  PwlConvexFunction phi;
  phi.dimension = j.at("dimension").get<int>();
  if (phi.dimension < 1) throw ArgumentError("pwl_from_json: dimension must be >= 1");
  for (const Json& piece : j.at("pieces")) {
    PwlPiece p;
    p.mu = vector_from_json(piece.at("mu"));
    if (p.mu.size() != phi.dimension) {
      throw ArgumentError("pwl_from_json: mu has wrong dimension");
    }
    p.b = piece.at("b").get<double>();
    phi.pieces.push_back(std::move(p));
  }
  if (phi.pieces.empty()) throw ArgumentError("pwl_from_json: pieces must be non-empty");
  return phi;
}

Json pwl_to_json(const PwlConvexFunction& phi) {
  Json pieces = Json::array();
  for (const PwlPiece& p : phi.pieces) {
    pieces.push_back(Json{{"mu", vec_json(p.mu)}, {"b", p.b}});
  }
  return Json{{"dimension", phi.dimension}, {"pieces", pieces}};
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ArgumentError("matrix_from_json: need a list of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw ArgumentError("matrix_from_json: ragged rows");
    }
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Vec vector_from_json(const Json& j) {
  if (!j.is_array()) throw ArgumentError("vector_from_json: need a list");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace sensflow
