// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero on a
// failure only with --strict; the report is also written to a file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dense_oracle.hpp"
#include "pdeopt/study.hpp"

using namespace pdeopt;

namespace {

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string fmt_list(const std::vector<std::optional<double>>& v, std::size_t first = 1) {
  std::string s = "[";
  for (std::size_t j = first; j < v.size(); ++j) {
    if (j > first) s += ", ";
    s += v[j] ? fmt(*v[j]) : "-";
  }
  return s + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> column(const StudyResult& r, double ConvergenceRecord::*field) {
  std::vector<double> out;
  for (const auto& rec : r.records) out.push_back(rec.*field);
  return out;
}

std::vector<double> dofs(const StudyResult& r) {
  std::vector<double> out;
  for (const auto& rec : r.records) out.push_back(rec.dof);
  return out;
}

// Collected for the discrete optimality criterion.
struct RunLog {
  std::vector<std::pair<std::string, double>> kkt;
  bool all_converged = true;
  int runs = 0;

  void add(const std::string& label, const StudyResult& r) {
    all_converged = all_converged && r.all_converged;
    for (const auto& rec : r.records) {
      kkt.emplace_back(label + " level " + std::to_string(rec.level) + " N " + std::to_string(rec.N), rec.kkt_residual);
      ++runs;
    }
  }
};

StudyResult study(const std::string& text, RunLog& log, const std::string& label) {
  std::cout << "-- " << label << ": " << text << std::endl;
  const auto t0 = std::chrono::steady_clock::now();
  StudyResult r = run_study(parse_config(text), &std::cout);
  std::cout << "   " << fmt(seconds_since(t0), 3) << " s" << std::endl;
  log.add(label, r);
  return r;
}

Outcome criterion1(RunLog& log) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult r = study("example=ex1 sweep=spatial N=4096 levels=1..5", log, "ex1 spatial");
  const double runtime = seconds_since(t0);
  // Target orders are measured against h ~ DOF^(-1/2).
  const auto ou = eoc_dof(column(r, &ConvergenceRecord::err_u), dofs(r));
  const auto oy = eoc_dof(column(r, &ConvergenceRecord::err_y), dofs(r));
  const double target[] = {1.5762, 1.5360, 1.5173, 1.5054};
  bool pass = ou.size() == 5;
  for (std::size_t j = 1; pass && j < 5; ++j) pass = ou[j] && std::abs(*ou[j] - target[j - 1]) <= 0.15;
  for (std::size_t j = 1; pass && j <= 3; ++j) pass = oy[j] && std::abs(*oy[j] - 2.0) <= 0.25;
  o.pass = pass && r.all_converged;
  o.detail = "control orders " + fmt_list(ou) + " vs [1.5762, 1.536, 1.5173, 1.5054] +-0.15; state orders " +
             fmt_list(oy) + " (levels 2-4 within 2 +-0.25); log2 control orders " +
             fmt_list(eoc(column(r, &ConvergenceRecord::err_u))) + "; runtime " + fmt(runtime, 3) + " s";
  return o;
}

Outcome criterion2(RunLog& log) {
  Outcome o;
  const StudyResult r = study("example=ex1 sweep=temporal level=6 Ns=2..512", log, "ex1 temporal");
  const auto ou = eoc(column(r, &ConvergenceRecord::err_u));
  const auto oy = eoc(column(r, &ConvergenceRecord::err_y));
  const auto oz = eoc(column(r, &ConvergenceRecord::err_z));
  bool state_ok = true, control_ok = true;
  for (std::size_t j = 1; j < r.records.size(); ++j) {
    const int N = r.records[j].N;
    if (N >= 64) {
      state_ok = state_ok && oy[j] && std::abs(*oy[j] - 1.0) <= 0.1 && oz[j] && std::abs(*oz[j] - 1.0) <= 0.1;
    }
    if (N >= 8 && N <= 128) control_ok = control_ok && ou[j] && *ou[j] >= 0.7 && *ou[j] <= 0.95;
  }
  o.pass = state_ok && control_ok && r.all_converged && r.records.size() == 9;
  o.detail = std::string("state/adjoint for N >= 64: ") + (state_ok ? "ok" : "out of band") +
             "; control in [0.7, 0.95] for N = 8..128: " + (control_ok ? "ok" : "out of band") +
             "; orders u " + fmt_list(ou) + ", y " + fmt_list(oy) + ", z " + fmt_list(oz);
  return o;
}

Outcome criterion3(RunLog& log) {
  Outcome o;
  const StudyResult r =
      study("example=ex2 sweep=spatial N=16 levels=1..5 reference_level=7", log, "ex2 reference");
  const auto ou = eoc_dof(column(r, &ConvergenceRecord::err_u), dofs(r));
  const auto oz = eoc_dof(column(r, &ConvergenceRecord::err_z), dofs(r));
  const auto au = average_order(ou, 1, ou.size() - 1);
  const auto az = average_order(oz, 1, oz.size() - 1);
  o.pass = au && az && *au >= 0.35 && *au <= 0.65 && *az >= 1.8 && *az <= 2.2 && r.all_converged;
  o.detail = "control average " + (au ? fmt(*au) : "-") + " in [0.35, 0.65], adjoint average " +
             (az ? fmt(*az) : "-") + " in [1.8, 2.2]; control orders " + fmt_list(ou) + ", adjoint orders " +
             fmt_list(oz) + "; log2 control orders " + fmt_list(eoc(column(r, &ConvergenceRecord::err_u)));
  return o;
}

Outcome criterion4(RunLog& log) {
  Outcome o;
  const StudyResult f = study("example=ex3 mode=full N=4096 levels=1..5", log, "ex3 full");
  const StudyResult v = study("example=ex3 mode=variational N=4096 levels=1..5", log, "ex3 variational");
  double worst = 0.0;
  bool shapes = f.records.size() == 5 && v.records.size() == 5;
  for (std::size_t j = 0; shapes && j < 5; ++j) {
    for (auto field : {&ConvergenceRecord::err_u, &ConvergenceRecord::err_y, &ConvergenceRecord::err_z}) {
      worst = std::max(worst, std::abs(f.records[j].*field - v.records[j].*field) / (f.records[j].*field));
    }
  }
  auto increasing = [](const std::vector<std::optional<double>>& o) {
    bool ok = o.size() == 5;
    for (std::size_t j = 2; ok && j < o.size(); ++j) ok = o[j] && o[j - 1] && *o[j] > *o[j - 1];
    return ok && *o[3] >= 1.2 && *o[4] >= 1.2;
  };
  const auto of = eoc(column(f, &ConvergenceRecord::err_u));
  const auto ov = eoc(column(v, &ConvergenceRecord::err_u));
  o.pass = shapes && worst <= 0.10 && increasing(of) && increasing(ov) && f.all_converged && v.all_converged;
  o.detail = "max relative difference " + fmt(100 * worst, 3) + "% (<= 10%); control orders full " + fmt_list(of) +
             ", variational " + fmt_list(ov) + " (increasing, last two >= 1.2)";
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ExampleDef ex = make_example(ExampleId::ex1);
  auto space = std::make_shared<const FemSpace>(example_mesh(ExampleId::ex1, 2));
  const Discretization disc = Discretization::make(space, TimeGrid(ex.data.T, 8), ex.data);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto random = [&] {
    Matrix m(space->n_boundary(), 8);
    for (int j = 0; j < m.cols(); ++j) {
      for (int i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
    return m;
  };
  const ControlIterate u{random(), Box{}, ControlMode::full};
  const Matrix g = reduced_gradient(disc, u);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix v = random();
    const double eps = 1e-4;
    const double jp = objective(disc, ControlIterate{u.values + eps * v, Box{}, ControlMode::full});
    const double jm = objective(disc, ControlIterate{u.values - eps * v, Box{}, ControlMode::full});
    const double fd = (jp - jm) / (2 * eps);
    const double exact = boundary_inner(*space, disc.grid, g, v);
    worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
  }
  o.pass = worst <= 1e-6 && space->n_total() <= 200;
  o.detail = "max relative error " + fmt(worst, 3) + " over 10 directions (<= 1e-6), " +
             std::to_string(space->n_total()) + " DOF, N = 8, " + fmt(seconds_since(t0), 3) + " s";
  return o;
}

Outcome criterion6(const RunLog& log) {
  Outcome o;
  double worst = 0.0;
  std::string where = "-";
  for (const auto& [label, k] : log.kkt) {
    if (!(k <= worst)) {
      worst = k;
      where = label;
    }
  }
  o.pass = log.runs > 0 && worst <= 1e-9 && log.all_converged;
  o.detail = "largest residual " + fmt(worst, 3) + " (" + where + ") over " + std::to_string(log.runs) +
             " runs (<= 1e-9)" + (log.all_converged ? "" : "; some run did not converge");
  return o;
}

Outcome criterion7() {
  Outcome o;
  double worst = 0.0;
  int cases = 0;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (ExampleId id : {ExampleId::ex1, ExampleId::ex3}) {
    const ExampleDef ex = make_example(id);
    auto space = std::make_shared<const FemSpace>(example_mesh(id, 1));
    if (space->n_total() > 50) continue;
    for (int N = 1; N <= 4; ++N) {
      const Discretization disc = Discretization::make(space, TimeGrid(ex.data.T, N), ex.data);
      Matrix u(space->n_boundary(), N);
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < u.rows(); ++i) u(i, j) = dist(rng);
      }
      const SlabField y = solve_state(*disc.op, disc.loads, u);
      const SlabField z = solve_adjoint(*disc.op, disc.loads, y);
      const Matrix d = discrete_normal_derivative(disc, y, z);
      const auto ref = oracle::solve(disc, u);
      worst = std::max(worst, (oracle::to_vertex(*space, y.values) - ref.state).cwiseAbs().maxCoeff());
      worst = std::max(worst, (oracle::to_vertex(*space, extend_interior(*space, z.values)) - ref.adjoint)
                                  .cwiseAbs()
                                  .maxCoeff());
      worst = std::max(worst, (oracle::to_vertex(*space, d) - ref.normal).cwiseAbs().maxCoeff());
      ++cases;
    }
  }
  o.pass = cases == 8 && worst <= 1e-10;
  o.detail = "max entrywise difference " + fmt(worst, 3) + " over " + std::to_string(cases) +
             " instances (state, adjoint, normal derivative; <= 1e-10)";
  return o;
}

Outcome criterion8() {
  Outcome o;
  // Rough datum: sign jumps across a diagonal of the square and at t = 1/2.
  auto space_part = [](const Point& x) { return x.x + 0.7 * x.y < 0.85 ? 1.0 : -1.0; };
  auto time_part = [](double t) { return t < 0.5 ? 1.0 : -1.0; };
  std::vector<double> ratios;
  for (int level = 1; level <= 4; ++level) {
    auto space = std::make_shared<const FemSpace>(example_mesh(ExampleId::ex1, level));
    const int N = 4 << (2 * (level - 1));
    const TimeGrid grid(1.0, N);
    const SpaceTimeOperator op(space, grid);
    const Vector qs = l2_boundary_project(space_part, *space);
    const auto pt = time_project(time_part, grid);
    Matrix u(space->n_boundary(), N);
    for (int s = 0; s < N; ++s) u.col(s) = pt[s] * qs;
    const SlabField y = solve_state_homogeneous(op, u);
    const double energy = state_energy(*space, grid, y.values);
    const double h = space->mesh().h_max;
    const double datum = boundary_norm(*space, grid, u);
    ratios.push_back(energy / (datum * datum / h));
  }
  bool pass = true;
  // The stability estimate is an upper bound: later ratios must not exceed 3x the first.
  for (double r : ratios) pass = pass && std::isfinite(r) && r <= 3.0 * ratios[0];
  o.pass = pass;
  std::string list;
  for (double r : ratios) list += (list.empty() ? "" : ", ") + fmt(r);
  o.detail = "energy / (h^-1 ||u||^2) on levels 1-4 with N = 4, 16, 64, 256: [" + list + "] (none above 3x the first)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite for the boundary control solver"};
  bool strict = false;
  std::string only;
  std::string report = "acceptance_report.txt";
  app.add_flag("--strict", strict, "Exit with status 1 when any criterion fails");
  app.add_option("--only", only, "Comma-separated criteria to run (default: all)");
  app.add_option("--report", report, "File receiving the PASS/FAIL lines");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  if (!only.empty()) {
    for (int c : parse_int_list("only", only, false)) selected.insert(c);
  }
  auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  const auto t0 = std::chrono::steady_clock::now();
  RunLog log;
  std::vector<Outcome> outcomes;
  auto run = [&](int id, const std::string& name, auto&& fn) {
    if (!wanted(id)) return;
    try {
      Outcome o = fn();
      o.id = id;
      o.name = name;
      outcomes.push_back(o);
    } catch (const std::exception& e) {
      outcomes.push_back(Outcome{id, name, false, std::string("error: ") + e.what()});
    }
  };
  run(1, "smooth example, spatial study", [&] { return criterion1(log); });
  run(2, "smooth example, temporal study", [&] { return criterion2(log); });
  run(3, "corner example, reference-solution study", [&] { return criterion3(log); });
  run(4, "disk example, full vs variational", [&] { return criterion4(log); });
  run(5, "reduced gradient vs central differences", [] { return criterion5(); });
  run(6, "discrete optimality on all benchmark runs", [&] { return criterion6(log); });
  run(7, "dense space-time oracle equivalence", [] { return criterion7(); });
  run(8, "stability with k ~ h^2", [] { return criterion8(); });

  std::ostringstream lines;
  int passed = 0;
  for (const auto& o : outcomes) {
    lines << (o.pass ? "PASS" : "FAIL") << " criterion " << o.id << " (" << o.name << "): " << o.detail << '\n';
    passed += o.pass ? 1 : 0;
  }
  lines << passed << "/" << outcomes.size() << " criteria passed in " << fmt(seconds_since(t0), 4) << " s\n";
  std::cout << "\n" << lines.str() << std::flush;
  if (!report.empty()) std::ofstream(report) << lines.str();
  return strict && passed != static_cast<int>(outcomes.size()) ? 1 : 0;
}
