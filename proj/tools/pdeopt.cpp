// Batch driver for the convergence studies.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdeopt/study.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;

void dump_matrices(const pdeopt::StudyConfig& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<int> levels;
  if (config.sweep == pdeopt::SweepKind::spatial) {
    for (int l = config.level_min; l <= config.level_max; ++l) levels.push_back(l);
  } else {
    levels.push_back(config.fixed_level);
  }
  for (int level : levels) {
    const pdeopt::FemSpace space(pdeopt::example_mesh(config.example, level));
    const std::string suffix = "_L" + std::to_string(level) + ".txt";
    std::ofstream m(std::filesystem::path(dir) / ("mass" + suffix));
    pdeopt::write_triplets(m, space.mass());
    std::ofstream a(std::filesystem::path(dir) / ("stiffness" + suffix));
    pdeopt::write_triplets(a, space.stiffness());
    std::ofstream b(std::filesystem::path(dir) / ("boundary_mass" + suffix));
    pdeopt::write_triplets(b, space.boundary_mass());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic Dirichlet boundary control: convergence studies"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run a convergence study and write its table as CSV");

  // Flags are collected as key/value pairs and applied after the config file.
  std::vector<std::pair<std::string, std::string>> settings;
  auto add = [&](const std::string& flag, const std::string& key, const std::string& help) {
    run->add_option_function<std::string>(
        flag, [&settings, key](const std::string& v) { settings.emplace_back(key, v); }, help);
  };
  std::string config_file, dump_matrix;
  bool quiet = false;
  run->add_option("--config", config_file, "key=value file with the same keys as the flags");
  add("--example", "example", "ex1, ex2 or ex3");
  add("--sweep", "sweep", "spatial or temporal");
  add("--fixed-N", "N", "number of time slabs for a spatial sweep");
  add("--fixed-level", "level", "mesh level for a temporal sweep");
  add("--levels", "levels", "mesh levels, e.g. 1..5");
  add("--Ns", "Ns", "slab counts for a temporal sweep, e.g. 2..512 (doubling)");
  add("--mode", "mode", "full or variational");
  add("--alpha", "alpha", "regularization weight");
  add("--box", "box", "lo,hi or none");
  add("--tol", "tol", "optimizer tolerance");
  add("--max-iter", "max_iter", "optimizer iteration cap");
  add("--reference-level", "reference_level", "mesh level of the reference solution");
  add("--reference-N", "reference_N", "slab count of the reference solution");
  add("--out", "out", "CSV output file");
  add("--dump-mesh", "dump_mesh", "directory receiving the meshes");
  add("--dump-state", "dump_state", "directory receiving the state fields");
  add("--log", "log", "CSV file receiving the optimizer history");
  run->add_option("--dump-matrix", dump_matrix, "directory receiving mass and stiffness triplets");
  run->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  pdeopt::StudyConfig config;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw std::invalid_argument("cannot read config file '" + config_file + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      config = pdeopt::parse_config(buffer.str());
    }
    for (const auto& [key, value] : settings) pdeopt::apply_setting(config, key, value);
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!dump_matrix.empty()) dump_matrices(config, dump_matrix);
    const auto result = pdeopt::run_study(config, quiet ? nullptr : &std::cerr);
    if (config.out.empty()) pdeopt::write_csv(std::cout, result.records);
    return result.all_converged ? 0 : kNotConverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
