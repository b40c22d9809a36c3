#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "sensflow/experiment.hpp"
#include "sensflow/version.hpp"

namespace {

struct SubcommandArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common_flags(CLI::App* app, SubcommandArgs& args) {
  app->add_option("--config", args.config_path, "Path to the experiment config (JSON)")
      ->required();
  app->add_option("--out", args.out_dir, "Output directory");
  args.seed_opt = app->add_option("--seed", args.seed, "Seed override");
}

int run(const SubcommandArgs& args, const std::string& expected_kind) {
  sensflow::ExperimentConfig config;
  try {
    config = sensflow::load_config_file(args.config_path, args.out_dir);
    if (config.kind != expected_kind) {
      throw sensflow::ConfigError(
          "kind", "config kind '" + config.kind + "' does not match the subcommand (expected '" +
                      expected_kind + "')");
    }
  } catch (const sensflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    std::ofstream out(fs::path(args.out_dir) / "error.json");
    out << sensflow::Json{{"error", "config"}, {"field", e.field}, {"message", e.what()}}.dump(2)
        << '\n';
    return 2;
  }
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0) config.seed = args.seed;
  const int code = sensflow::run_experiment_guarded(config);
  if (code != 0) std::fprintf(stderr, "experiment failed (exit %d), see error.json\n", code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensflow: perturbed-trajectory sensitivity experiments"};
  app.set_version_flag("--version", std::string(sensflow::kVersion));
  app.require_subcommand(1);

  struct Entry {
    CLI::App* cmd = nullptr;
    SubcommandArgs args;
    std::string kind;
  };
  std::vector<std::unique_ptr<Entry>> entries;
  auto add = [&entries](CLI::App* parent, const std::string& name, const std::string& kind,
                        const std::string& help) {
    auto entry = std::make_unique<Entry>();
    entry->cmd = parent->add_subcommand(name, help);
    entry->kind = kind;
    add_common_flags(entry->cmd, entry->args);
    entries.push_back(std::move(entry));
  };

  add(&app, "classify", "linear-classify", "SOF classification and sensitivity constant");
  add(&app, "simulate", "linear-simulate", "Integrate a perturbed linear system");
  add(&app, "rotary", "rotary", "Rotary counterexample pair");
  add(&app, "fpcs", "fpcs-sensitivity", "Empirical FPCS sensitivity harness");
  CLI::App* books = app.add_subcommand("books", "Rotating-books counterexample tools");
  books->require_subcommand(1);
  add(books, "solve", "books-solve", "Implicit level-function solver");
  add(books, "grad", "books-grad", "Gradient of the level function vs finite differences");
  add(books, "spiral", "books-spiral", "Diverging-spiral certificate");
  add(books, "pwl", "books-pwl", "Piecewise linear interpolant gradient error");
  add(&app, "spread", "spread", "Spread-system simulation and bound checks");
  add(&app, "discretize", "discretize", "Discrete trajectories and exact embedding");
  add(&app, "sweep", "sweep", "Run an experiment over a parameter list");

  CLI11_PARSE(app, argc, argv);

  for (const auto& entry : entries) {
    if (entry->cmd->parsed()) return run(entry->args, entry->kind);
  }
  return 1;
}
