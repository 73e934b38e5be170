#include "pdeopt/study.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pdeopt {

namespace {

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid value for '" + key + "': '" + text + "'");
  }
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid value for '" + key + "': '" + text + "'");
  }
}

}  // namespace

std::vector<int> parse_int_list(const std::string& key, const std::string& text, bool doubling) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = parse_int(key, text.substr(0, dots));
    const int b = parse_int(key, text.substr(dots + 2));
    if (a > b || a < 1) throw std::invalid_argument("invalid range for '" + key + "': '" + text + "'");
    for (int v = a; v <= b; v = doubling ? 2 * v : v + 1) out.push_back(v);
    if (doubling && out.back() != b) throw std::invalid_argument("range for '" + key + "' must double up to its end");
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  if (out.empty()) throw std::invalid_argument("empty list for '" + key + "'");
  return out;
}

Box StudyConfig::effective_box() const {
  if (box) return *box;
  return make_example(example, alpha).data.box;
}

void StudyConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("invalid value for 'alpha': must be positive");
  if (fixed_N < 1) throw std::invalid_argument("invalid value for 'N': must be >= 1");
  if (fixed_level < 1) throw std::invalid_argument("invalid value for 'level': must be >= 1");
  if (level_min < 1 || level_max < level_min) throw std::invalid_argument("invalid value for 'levels'");
  if (Ns.empty() || *std::min_element(Ns.begin(), Ns.end()) < 1) throw std::invalid_argument("invalid value for 'Ns'");
  if (!(tolerance > 0.0)) throw std::invalid_argument("invalid value for 'tol'");
  if (max_iterations < 0) throw std::invalid_argument("invalid value for 'max_iter'");
  if (box && !(box->lower < box->upper)) throw std::invalid_argument("invalid value for 'box': need lower < upper");
  if (reference_level < 0 || reference_N < 0) throw std::invalid_argument("invalid value for 'reference_level'");
}

void apply_setting(StudyConfig& c, const std::string& key, const std::string& value) {
  if (key == "example") {
    try {
      c.example = parse_example_id(value);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("invalid value for 'example': '" + value + "' (expected ex1, ex2 or ex3)");
    }
  } else if (key == "mode") {
    try {
      c.mode = parse_control_mode(value);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("invalid value for 'mode': '" + value + "' (expected full or variational)");
    }
  } else if (key == "sweep") {
    if (value == "spatial") c.sweep = SweepKind::spatial;
    else if (value == "temporal") c.sweep = SweepKind::temporal;
    else throw std::invalid_argument("invalid value for 'sweep': '" + value + "' (expected spatial or temporal)");
  } else if (key == "N" || key == "fixed-N" || key == "fixed_N") {
    c.fixed_N = parse_int("N", value);
  } else if (key == "level" || key == "fixed-level" || key == "fixed_level") {
    c.fixed_level = parse_int("level", value);
  } else if (key == "levels") {
    const auto l = parse_int_list("levels", value, false);
    c.level_min = *std::min_element(l.begin(), l.end());
    c.level_max = *std::max_element(l.begin(), l.end());
    if (static_cast<int>(l.size()) != c.level_max - c.level_min + 1) {
      throw std::invalid_argument("invalid value for 'levels': must be contiguous");
    }
  } else if (key == "Ns") {
    c.Ns = parse_int_list("Ns", value, true);
  } else if (key == "alpha") {
    c.alpha = parse_double("alpha", value);
  } else if (key == "box") {
    if (value == "none" || value == "unconstrained") {
      c.box = Box{};
    } else {
      const auto comma = value.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("invalid value for 'box': expected lo,hi or none");
      c.box = Box{parse_double("box", value.substr(0, comma)), parse_double("box", value.substr(comma + 1))};
    }
  } else if (key == "tol") {
    c.tolerance = parse_double("tol", value);
  } else if (key == "max_iter" || key == "max-iter") {
    c.max_iterations = parse_int("max_iter", value);
  } else if (key == "reference_level" || key == "reference-level") {
    c.reference_level = parse_int("reference_level", value);
  } else if (key == "reference_N" || key == "reference-N") {
    c.reference_N = parse_int("reference_N", value);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "dump_mesh" || key == "dump-mesh") {
    c.dump_mesh = value;
  } else if (key == "dump_state" || key == "dump-state") {
    c.dump_state = value;
  } else if (key == "log") {
    c.log = value;
  } else {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
}

StudyConfig parse_config(const std::string& text) {
  StudyConfig c;
  std::stringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream words(line);
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("malformed setting '" + word + "' (expected key=value)");
      apply_setting(c, word.substr(0, eq), word.substr(eq + 1));
    }
  }
  c.validate();
  return c;
}

namespace {

bool exact_available(const StudyConfig& c, const ExampleDef& def) {
  if (!def.exact.has_u() || !def.exact.has_y() || !def.exact.has_z()) return false;
  if (!c.box) return true;
  return c.box->lower == def.data.box.lower && c.box->upper == def.data.box.upper;
}

void dump_mesh(const StudyConfig& c, const TriMesh& mesh) {
  if (c.dump_mesh.empty()) return;
  std::filesystem::create_directories(c.dump_mesh);
  std::ofstream out(std::filesystem::path(c.dump_mesh) / ("mesh_L" + std::to_string(mesh.level) + ".txt"));
  write_mesh(out, mesh);
}

void dump_state(const StudyConfig& c, int level, int N, const Matrix& state) {
  if (c.dump_state.empty()) return;
  std::filesystem::create_directories(c.dump_state);
  std::ofstream out(std::filesystem::path(c.dump_state) /
                    ("state_L" + std::to_string(level) + "_N" + std::to_string(N) + ".txt"));
  out << std::setprecision(17);
  for (int s = 0; s < state.cols(); ++s) {
    for (int i = 0; i < state.rows(); ++i) out << i << ' ' << s << ' ' << state(i, s) << '\n';
  }
}

LevelSolution to_level_solution(SolvedLevel&& solved) {
  LevelSolution ls;
  ls.space = solved.space;
  ls.grid = solved.disc.grid;
  ls.state = std::move(solved.result.state.values);
  ls.adjoint = std::move(solved.result.adjoint.values);
  ls.control = std::move(solved.result.control);
  return ls;
}

}  // namespace

SolvedLevel solve_level(const StudyConfig& c, int level, int N, const std::function<void(int, double, double)>& on_it) {
  ExampleDef def = make_example(c.example, c.alpha);
  def.data.box = c.effective_box();
  TriMesh mesh = example_mesh(c.example, level);
  dump_mesh(c, mesh);
  SolvedLevel out;
  out.space = std::make_shared<const FemSpace>(std::move(mesh));
  out.disc = Discretization::make(out.space, TimeGrid(def.data.T, N), def.data);
  OptimizeOptions opt;
  opt.mode = c.mode;
  opt.tolerance = c.tolerance;
  opt.max_iterations = c.max_iterations;
  opt.on_iteration = on_it;
  out.result = optimize(out.disc, opt);
  dump_state(c, level, N, out.result.state.values);
  return out;
}

StudyResult run_study(const StudyConfig& c, std::ostream* progress) {
  c.validate();
  const ExampleDef def = make_example(c.example, c.alpha);
  StudyResult result;
  result.uses_reference = !exact_available(c, def);

  std::ofstream log;
  if (!c.log.empty()) {
    log.open(c.log);
    if (!log) throw std::runtime_error("cannot open log file '" + c.log + "'");
    log << "level,N,iteration,objective,residual\n" << std::setprecision(12);
  }
  auto logger = [&](int level, int N) -> std::function<void(int, double, double)> {
    if (!log.is_open()) return {};
    return [&log, level, N](int it, double J, double r) {
      log << level << ',' << N << ',' << it << ',' << J << ',' << r << '\n';
    };
  };

  struct Case {
    int level, N;
  };
  std::vector<Case> cases;
  if (c.sweep == SweepKind::spatial) {
    for (int l = c.level_min; l <= c.level_max; ++l) cases.push_back({l, c.fixed_N});
  } else {
    for (int n : c.Ns) cases.push_back({c.fixed_level, n});
  }

  std::optional<LevelSolution> reference;
  if (result.uses_reference) {
    int ref_level = c.reference_level, ref_N = c.reference_N;
    if (c.sweep == SweepKind::spatial) {
      if (ref_level == 0) ref_level = c.level_max + 2;
      if (ref_N == 0) ref_N = c.fixed_N;
      if (ref_level <= c.level_max) throw std::invalid_argument("invalid value for 'reference_level': must exceed the levels");
    } else {
      if (ref_level == 0) ref_level = c.fixed_level;
      if (ref_N == 0) ref_N = 4 * *std::max_element(c.Ns.begin(), c.Ns.end());
      for (int n : c.Ns) {
        if (ref_N % n != 0 || ref_N == n) throw std::invalid_argument("invalid value for 'reference_N': must be a proper multiple of every N");
      }
    }
    if (progress) *progress << "reference: level " << ref_level << ", N " << ref_N << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    SolvedLevel solved = solve_level(c, ref_level, ref_N, logger(ref_level, ref_N));
    if (!solved.result.converged) result.all_converged = false;
    if (progress) {
      *progress << "  dof " << solved.space->n_total() << ", iterations " << solved.result.iterations << ", kkt "
                << solved.result.kkt_residual << ", "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s" << std::endl;
    }
    reference = to_level_solution(std::move(solved));
  }

  for (const Case& cs : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    SolvedLevel solved = solve_level(c, cs.level, cs.N, logger(cs.level, cs.N));
    ConvergenceRecord rec;
    const OptimizeResult& res = solved.result;
    if (result.uses_reference) {
      const int dof = solved.space->n_total();
      rec = reference_solution_error(*reference, to_level_solution(std::move(solved)));
      rec.dof = dof;
    } else {
      const FemSpace& space = *solved.space;
      rec.dof = space.n_total();
      rec.err_u = error_L2L2_boundary(space, solved.disc.grid, res.control, def.exact.u);
      rec.err_y = error_L2L2_domain(space, solved.disc.grid, res.state.values, def.exact.y);
      rec.err_z = error_L2L2_domain(space, solved.disc.grid, res.adjoint.values, def.exact.z);
    }
    rec.level = cs.level;
    rec.N = cs.N;
    rec.descriptor = c.sweep == SweepKind::spatial ? rec.dof : cs.N;
    rec.converged = res.converged;
    rec.kkt_residual = res.kkt_residual;
    rec.iterations = res.iterations;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rec.converged) result.all_converged = false;
    if (progress) {
      *progress << "level " << cs.level << " N " << cs.N << ": dof " << rec.dof << ", iterations " << rec.iterations
                << ", kkt " << rec.kkt_residual << ", err_u " << rec.err_u << ", err_y " << rec.err_y << ", err_z "
                << rec.err_z << ", " << rec.seconds << " s" << (rec.converged ? "" : " (not converged)") << std::endl;
    }
    result.records.push_back(rec);
  }
  fill_orders(result.records);

  if (!c.out.empty()) {
    std::ofstream out(c.out);
    if (!out) throw std::runtime_error("cannot open output file '" + c.out + "'");
    write_csv(out, result.records);
  }
  return result;
}

}  // namespace pdeopt
