#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdeopt/examples.hpp"

namespace pdeopt {

enum class SweepKind { spatial, temporal };

/// Convergence study configuration. Keys accepted by `parse_config` and
/// `apply_setting` are listed in the README.
struct StudyConfig {
  ExampleId example = ExampleId::ex1;
  ControlMode mode = ControlMode::full;
  SweepKind sweep = SweepKind::spatial;
  int fixed_N = 4096;       // spatial sweep
  int fixed_level = 6;      // temporal sweep
  int level_min = 1, level_max = 5;
  std::vector<int> Ns{2, 4, 8, 16, 32, 64, 128, 256, 512};
  double alpha = 1.0;
  std::optional<Box> box;   // default: the example's own box
  double tolerance = 1e-10;
  int max_iterations = 500;
  int reference_level = 0;  // 0: level_max + 2 (spatial) or fixed_level (temporal)
  int reference_N = 0;      // 0: fixed_N (spatial) or 4 * max(Ns) (temporal)
  std::string out;
  std::string dump_mesh;
  std::string dump_state;
  std::string log;

  Box effective_box() const;
  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Sets one key; throws std::invalid_argument naming the key on bad input.
void apply_setting(StudyConfig& config, const std::string& key, const std::string& value);

/// Parses whitespace- or newline-separated `key=value` pairs; `#` starts a comment.
StudyConfig parse_config(const std::string& text);

/// Parses `a..b`, `a,b,c` or `a`.
std::vector<int> parse_int_list(const std::string& key, const std::string& text, bool doubling);

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  bool all_converged = true;
  bool uses_reference = false;
};

/// Runs the sweep; progress lines go to `progress` when non-null.
StudyResult run_study(const StudyConfig& config, std::ostream* progress = nullptr);

/// Builds and solves one configuration (mesh level and N) of an example.
struct SolvedLevel {
  std::shared_ptr<const FemSpace> space;
  Discretization disc;
  OptimizeResult result;
};
SolvedLevel solve_level(const StudyConfig& config, int level, int N,
                        const std::function<void(int, double, double)>& on_iteration = {});

}  // namespace pdeopt
