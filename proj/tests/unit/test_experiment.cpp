#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sensflow/experiment.hpp"

using namespace sensflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sensflow_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  Json j;
  in >> j;
  return j;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("unknown kinds are rejected at parse time") {
  CHECK_THROWS_AS(parse_config(Json{{"kind", "nope"}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::array(), "."), ConfigError);
}

TEST_CASE("range checks carry the offending field path") {
  const fs::path dir = fresh_dir("range");
  const ExperimentConfig config = parse_config(
      Json{{"kind", "rotary"}, {"params", Json{{"T", -5.0}}}}, dir.string());
  try {
    run_experiment(config);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "params.T");
  }
}

TEST_CASE("rotary experiment writes report, CSVs and manifest") {
  const fs::path dir = fresh_dir("rotary");
  const ExperimentConfig config = parse_config(
      Json{{"kind", "rotary"}, {"seed", 1}, {"params", Json{{"T", 100.0}, {"grid", 0.05}}}},
      dir.string());
  const Json report = run_experiment(config);
  CHECK(report.at("ratio").get<double>() == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "unperturbed.csv"));
  CHECK(fs::exists(dir / "perturbed.csv"));
  const Json manifest = read_json(dir / "manifest.json");
  CHECK(manifest.at("kind") == "rotary");
  CHECK(manifest.at("seed") == 1);
}

TEST_CASE("reruns with the same config are byte-identical") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const Json doc{{"kind", "fpcs-sensitivity"},
                 {"seed", 9},
                 {"params", Json{{"x0", Json::array({0.5, -0.25})},
                                 {"T", 1.0},
                                 {"dt", 1e-2},
                                 {"scales", Json::array({0.5, 0.1})},
                                 {"runs_per_scale", 3}}}};
  run_experiment(parse_config(doc, a.string()));
  run_experiment(parse_config(doc, b.string()));
  CHECK(read_file(a / "report.json") == read_file(b / "report.json"));
  CHECK(read_file(a / "unperturbed.csv") == read_file(b / "unperturbed.csv"));
}

TEST_CASE("guarded runner maps config errors to exit code 2 with error.json") {
  const fs::path dir = fresh_dir("guard");
  ExperimentConfig config;
  config.kind = "rotary";
  config.params = Json{{"T", 0.0}};  // violates T > 0
  config.out_dir = dir.string();
  CHECK(run_experiment_guarded(config) == 2);
  const Json err = read_json(dir / "error.json");
  CHECK(err.at("error") == "config");
  CHECK(err.at("field") == "params.T");
}

TEST_CASE("classify experiment reports SOF and the constant") {
  const fs::path dir = fresh_dir("classify");
  const Json doc{{"kind", "linear-classify"},
                 {"params", Json{{"A", Json::array({Json::array({-1.0, 0.0}),
                                                    Json::array({0.0, -2.0})})}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  CHECK(report.at("sof").at("is_sof") == true);
  CHECK(report.at("constant").at("value").get<double>() == doctest::Approx(3.0));
}

TEST_CASE("sweep merges per-point reports") {
  const fs::path dir = fresh_dir("sweep");
  const Json doc{
      {"kind", "sweep"},
      {"params",
       Json{{"parameter", "T"},
            {"values", Json::array({1.0, 2.0})},
            {"base", Json{{"kind", "rotary"}, {"seed", 0},
                          {"params", Json{{"grid", 0.05}}}}}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  REQUIRE(report.at("points").size() == 2);
  CHECK(fs::exists(dir / "point_000" / "report.json"));
  CHECK(fs::exists(dir / "point_001" / "manifest.json"));
  CHECK(report.at("points")[1].at("report").at("horizon").get<double>() ==
        doctest::Approx(2.0));
}

TEST_CASE("simulate experiment compares Euler against the closed form") {
  const fs::path dir = fresh_dir("simulate");
  const Json doc{{"kind", "linear-simulate"},
                 {"params",
                  Json{{"A", Json::array({Json::array({-1.0, 0.5}),
                                          Json::array({-0.5, -1.0})})},
                       {"x0", Json::array({1.0, 0.0})},
                       {"T", 2.0},
                       {"dt", 1e-3},
                       {"perturbation",
                        Json{{"kind", "sinusoid"},
                             {"amplitude", Json::array({0.1, -0.05})},
                             {"omega", 1.0}}}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  CHECK(report.at("sup_disagreement_relative").get<double>() < 1e-2);
  CHECK(fs::exists(dir / "euler.csv"));
  CHECK(fs::exists(dir / "closed_form.csv"));
}

TEST_CASE("books solve experiment reports residuals (and per-point values)") {
  const fs::path dir = fresh_dir("booksolve");
  const Json doc{{"kind", "books-solve"},
                 {"params", Json{{"points", Json::array({Json::array({0.0, 0.0, -5.0}),
                                                         Json::array({0.2, 1.0, -9.0})})}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  CHECK(report.at("max_residual").get<double>() <= 1e-10);
  CHECK(report.at("all_f_ge_1") == true);
  CHECK(report.at("points")[0].at("f").get<double>() == doctest::Approx(5.0));
}

TEST_CASE("books grad experiment validates the analytic gradient") {
  const fs::path dir = fresh_dir("bookgrad");
  const Json doc{{"kind", "books-grad"}, {"seed", 2}, {"params", Json{{"count", 20}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  CHECK(report.at("max_rel_error").get<double>() < 1e-5);
  CHECK(report.at("dfdz_negative") == true);
}

TEST_CASE("books pwl experiment reports error ratios between resolutions") {
  const fs::path dir = fresh_dir("bookpwl");
  const Json doc{{"kind", "books-pwl"},
                 {"params", Json{{"z_lo", -40.0},
                                 {"z_hi", -39.9},
                                 {"grid_hs", Json::array({0.05, 0.025})}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  REQUIRE(report.at("reports").size() == 2);
  const double ratio = report.at("sup_error_ratios")[0].get<double>();
  CHECK(ratio > 1.0);
}

TEST_CASE("spread experiment: pairwise mode and perturbed mode") {
  SUBCASE("pairwise with bound") {
    const fs::path dir = fresh_dir("spread_pair");
    const Json doc{{"kind", "spread"},
                   {"seed", 5},
                   {"params",
                    Json{{"base", Json{{"kind", "fpcs"}, {"builtin", "l1"}, {"dimension", 2}}},
                         {"epsilon", 0.05},
                         {"x0", Json::array({0.7, -0.4})},
                         {"T", 2.0},
                         {"dt", 1e-2},
                         {"runs", 5},
                         {"C", 2.0}}}};
    const Json report = run_experiment(parse_config(doc, dir.string()));
    CHECK(report.at("mode") == "pairwise");
    CHECK(report.at("pass") == true);
  }
  SUBCASE("perturbed with bound check and convolution recorded") {
    const fs::path dir = fresh_dir("spread_pert");
    const Json doc{
        {"kind", "spread"},
        {"seed", 6},
        {"params",
         Json{{"base", Json{{"kind", "linear"},
                            {"A", Json::array({Json::array({-1.0, 0.2}),
                                               Json::array({0.2, -0.8})})}}},
              {"convolve", Json{{"radius", 0.05}, {"quad_points", 6}}},
              {"epsilon", 0.01},
              {"x0", Json::array({1.0, -1.0})},
              {"T", 3.0},
              {"dt", 1e-2},
              {"runs", 3},
              {"C", 3.0},
              {"perturbation",
               Json{{"kind", "random-piecewise"}, {"sup_norm", 1.0}, {"segments", 5}}}}}};
    const Json report = run_experiment(parse_config(doc, dir.string()));
    CHECK(report.at("mode") == "perturbed");
    CHECK(report.at("bound_check").at("pass") == true);
    CHECK(report.at("convolution").at("quad_points") == 6);
  }
}

TEST_CASE("module errors map to exit code 1 with error.json") {
  const fs::path dir = fresh_dir("moderr");
  ExperimentConfig config;
  config.kind = "books-solve";
  // r = 0.3 lies outside Omega: a domain error from the solver, not a
  // config-validation failure.
  config.params = Json{{"points", Json::array({Json::array({0.3, 0.0, -5.0})})}};
  config.out_dir = dir.string();
  CHECK(run_experiment_guarded(config) == 1);
  const Json err = read_json(dir / "error.json");
  CHECK(err.at("error") == "module");
}

TEST_CASE("discretize experiment reports embedding exactness") {
  const fs::path dir = fresh_dir("disc");
  const Json doc{{"kind", "discretize"},
                 {"seed", 4},
                 {"params",
                  Json{{"field", Json{{"kind", "fpcs"}, {"builtin", "l1"}, {"dimension", 2}}},
                       {"z0", Json::array({1.5, -0.5})},
                       {"K", 10},
                       {"V", Json{{"kind", "random"}, {"sup_norm", 0.3}}},
                       {"C", 3.0}}}};
  const Json report = run_experiment(parse_config(doc, dir.string()));
  CHECK(report.at("embedding_exact") == true);
  CHECK(report.at("sup_U_bound_ok") == true);
  CHECK(fs::exists(dir / "discrete.csv"));
}
