#include "pdeopt/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdeopt {

const char* to_string(ControlMode mode) { return mode == ControlMode::full ? "full" : "variational"; }

ControlMode parse_control_mode(const std::string& text) {
  if (text == "full") return ControlMode::full;
  if (text == "variational") return ControlMode::variational;
  throw std::invalid_argument("unknown control mode '" + text + "'");
}

std::vector<double> clamp_breakpoints(double a0, double a1, const Box& box) {
  std::vector<double> s{0.0};
  for (double c : {box.lower, box.upper}) {
    if (!std::isfinite(c)) continue;
    if ((a0 - c) * (a1 - c) < 0.0) s.push_back((c - a0) / (a1 - a0));
  }
  if (s.size() == 3 && s[2] < s[1]) std::swap(s[1], s[2]);
  s.push_back(1.0);
  return s;
}

namespace {

struct EdgeView {
  int a, b;
  double length;
};

EdgeView edge_view(const FemSpace& space, int e) {
  const int nb = space.n_boundary();
  return {e, (e + 1) % nb, space.boundary().lengths[e]};
}

std::vector<double> merged_breakpoints(double v0, double v1, const Box& bv, double w0, double w1, const Box& bw) {
  std::vector<double> s = clamp_breakpoints(v0, v1, bv);
  const std::vector<double> t = clamp_breakpoints(w0, w1, bw);
  s.insert(s.end(), t.begin() + 1, t.end() - 1);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

Vector clamped_boundary_load(const FemSpace& space, const Vector& v, const Box& box) {
  const int nb = space.n_boundary();
  if (v.size() != nb) throw std::invalid_argument("clamped_boundary_load: wrong size");
  Vector out = Vector::Zero(nb);
  for (int e = 0; e < nb; ++e) {
    const EdgeView ev = edge_view(space, e);
    const double v0 = v[ev.a], v1 = v[ev.b];
    const auto s = clamp_breakpoints(v0, v1, box);
    for (std::size_t p = 0; p + 1 < s.size(); ++p) {
      const double s0 = s[p], s1 = s[p + 1], sm = 0.5 * (s0 + s1);
      const double len = ev.length * (s1 - s0);
      if (len <= 0.0) continue;
      auto c = [&](double x) { return box.clamp(v0 + x * (v1 - v0)); };
      const double c0 = c(s0), cm = c(sm), c1 = c(s1);
      // Simpson is exact for the quadratic products on each piece.
      out[ev.a] += len / 6.0 * (c0 * (1 - s0) + 4 * cm * (1 - sm) + c1 * (1 - s1));
      out[ev.b] += len / 6.0 * (c0 * s0 + 4 * cm * sm + c1 * s1);
    }
  }
  return out;
}

double clamped_difference_sq(const FemSpace& space, const Vector& v, const Box& box_v, const Vector& w,
                             const Box& box_w) {
  const int nb = space.n_boundary();
  if (v.size() != nb || w.size() != nb) throw std::invalid_argument("clamped_difference_sq: wrong size");
  double acc = 0.0;
  for (int e = 0; e < nb; ++e) {
    const EdgeView ev = edge_view(space, e);
    const double v0 = v[ev.a], v1 = v[ev.b], w0 = w[ev.a], w1 = w[ev.b];
    const auto s = merged_breakpoints(v0, v1, box_v, w0, w1, box_w);
    for (std::size_t p = 0; p + 1 < s.size(); ++p) {
      const double s0 = s[p], s1 = s[p + 1];
      if (s1 <= s0) continue;
      auto diff = [&](double x) { return box_v.clamp(v0 + x * (v1 - v0)) - box_w.clamp(w0 + x * (w1 - w0)); };
      const double e0 = diff(s0), e1 = diff(s1);
      acc += ev.length * (s1 - s0) * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0;
    }
  }
  return acc;
}

double boundary_inner(const FemSpace& space, const TimeGrid& grid, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("boundary_inner: shape mismatch");
  return grid.k() * (a.array() * (space.boundary_mass() * b).array()).sum();
}

double boundary_norm(const FemSpace& space, const TimeGrid& grid, const Matrix& values) {
  return std::sqrt(std::max(0.0, boundary_inner(space, grid, values, values)));
}

Matrix project_box(const Matrix& values, const Box& box) {
  return values.unaryExpr([&box](double v) { return box.clamp(v); });
}

Matrix project_admissible(const FemSpace& space, const Matrix& values, const Box& box) {
  Matrix out = project_box(values, box);
  if (!box.bounded()) return out;
  const int nb = space.n_boundary();
  const auto& len = space.boundary().lengths;
  const double scale = std::max(1.0, std::isfinite(box.upper - box.lower) ? box.upper - box.lower : 1.0);
  for (int s = 0; s < values.cols(); ++s) {
    const auto w = values.col(s);
    auto x = out.col(s);
    if ((x - w).cwiseAbs().maxCoeff() == 0.0) continue;
    // Projected Gauss-Seidel on the cyclic tridiagonal boundary mass matrix.
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double change = 0.0;
      for (int b = 0; b < nb; ++b) {
        const int prev = (b + nb - 1) % nb, next = (b + 1) % nb;
        const double lp = len[prev], ln = len[b];
        const double diag = (lp + ln) / 3.0;
        const double off = lp / 6.0 * (x[prev] - w[prev]) + ln / 6.0 * (x[next] - w[next]);
        const double xb = box.clamp(w[b] - off / diag);
        change = std::max(change, std::abs(xb - x[b]));
        x[b] = xb;
      }
      if (change <= 1e-16 * scale) break;
    }
  }
  return out;
}

Matrix boundary_data(const FemSpace& space, const ControlIterate& control) {
  const Box box = control.pointwise_box();
  if (!box.bounded()) return control.values;
  Matrix out(control.values.rows(), control.values.cols());
  for (int s = 0; s < control.values.cols(); ++s) {
    out.col(s) = space.solve_boundary_mass(clamped_boundary_load(space, control.values.col(s), box));
  }
  return out;
}

namespace {

Matrix normal_derivative_impl(const Discretization& disc, const SlabField& state, const SlabField& adjoint,
                              bool with_target) {
  const FemSpace& space = *disc.space;
  const int ni = space.n_interior(), nb = space.n_boundary(), N = disc.grid.N;
  if (state.rows() != ni + nb || state.slabs() != N || adjoint.rows() != ni || adjoint.slabs() != N) {
    throw std::invalid_argument("discrete_normal_derivative: field shapes do not match");
  }
  const double k = disc.grid.k();
  Matrix d(nb, N);
  Vector r(nb);
  for (int s = 0; s < N; ++s) {
    Vector dz = adjoint.values.col(s);
    if (s + 1 < N) dz -= adjoint.values.col(s + 1);
    r = space.stiffness_bi() * adjoint.values.col(s) + space.mass_bi() * dz / k;
    r -= space.mass_bi() * state.values.col(s).head(ni) + space.mass_bb() * state.values.col(s).tail(nb);
    if (with_target) r += disc.loads.target.col(s).tail(nb);
    d.col(s) = space.solve_boundary_mass(r);
  }
  return d;
}

}  // namespace

Matrix discrete_normal_derivative(const Discretization& disc, const SlabField& state, const SlabField& adjoint) {
  return normal_derivative_impl(disc, state, adjoint, true);
}

Matrix discrete_normal_derivative_homogeneous(const Discretization& disc, const SlabField& state,
                                              const SlabField& adjoint) {
  return normal_derivative_impl(disc, state, adjoint, false);
}

double tracking_term(const Discretization& disc, const SlabField& state) {
  const FemSpace& space = *disc.space;
  const double k = disc.grid.k();
  double acc = 0.0;
  for (int s = 0; s < disc.grid.N; ++s) {
    const auto y = state.values.col(s);
    acc += y.dot(space.mass() * y) - 2.0 * y.dot(disc.loads.target.col(s)) + disc.loads.target_sq[s];
  }
  return 0.5 * k * acc;
}

double regularization_term(const Discretization& disc, const ControlIterate& control) {
  const Box box = control.pointwise_box();
  double sq = 0.0;
  if (!box.bounded()) {
    sq = boundary_inner(*disc.space, disc.grid, control.values, control.values);
  } else {
    const Vector zero = Vector::Zero(disc.space->n_boundary());
    for (int s = 0; s < control.values.cols(); ++s) {
      sq += disc.grid.k() * clamped_difference_sq(*disc.space, control.values.col(s), box, zero, Box{});
    }
  }
  return 0.5 * disc.data.alpha * sq;
}

namespace {

struct Evaluation {
  Matrix boundary;
  SlabField state;
  SlabField adjoint;
  Matrix normal_derivative;
  double objective = 0.0;
};

Evaluation evaluate(const Discretization& disc, const ControlIterate& control) {
  Evaluation ev;
  ev.boundary = boundary_data(*disc.space, control);
  ev.state = solve_state(*disc.op, disc.loads, ev.boundary);
  ev.adjoint = solve_adjoint(*disc.op, disc.loads, ev.state);
  ev.normal_derivative = discrete_normal_derivative(disc, ev.state, ev.adjoint);
  ev.objective = tracking_term(disc, ev.state) + regularization_term(disc, control);
  return ev;
}

void check_control(const Discretization& disc, const ControlIterate& control) {
  if (control.values.rows() != disc.space->n_boundary() || control.values.cols() != disc.grid.N) {
    throw std::invalid_argument("control must be n_boundary x N");
  }
}

}  // namespace

double objective(const Discretization& disc, const ControlIterate& control) {
  check_control(disc, control);
  const Matrix boundary = boundary_data(*disc.space, control);
  const SlabField state = solve_state(*disc.op, disc.loads, boundary);
  return tracking_term(disc, state) + regularization_term(disc, control);
}

Matrix reduced_gradient(const Discretization& disc, const ControlIterate& control) {
  check_control(disc, control);
  const Evaluation ev = evaluate(disc, control);
  return disc.data.alpha * project_box(control.values, control.pointwise_box()) - ev.normal_derivative;
}

Matrix projected_target(const FemSpace& space, const Matrix& normal_derivative, double alpha, const Box& box,
                        ControlMode mode) {
  const Matrix scaled = normal_derivative / alpha;
  if (mode == ControlMode::variational) return scaled;
  return project_admissible(space, scaled, box);
}

namespace {

double residual_between(const Discretization& disc, const ControlIterate& control, const Matrix& target) {
  const Box box = control.pointwise_box();
  if (!box.bounded()) return boundary_norm(*disc.space, disc.grid, control.values - target);
  double sq = 0.0;
  for (int s = 0; s < control.values.cols(); ++s) {
    sq += clamped_difference_sq(*disc.space, control.values.col(s), box, target.col(s), box);
  }
  return std::sqrt(disc.grid.k() * sq);
}

}  // namespace

double kkt_residual(const Discretization& disc, const ControlIterate& control, const Matrix& normal_derivative) {
  const Matrix target =
      projected_target(*disc.space, normal_derivative, disc.data.alpha, control.box, control.mode);
  return residual_between(disc, control, target);
}

namespace {

OptimizeResult finish(const Discretization& disc, ControlIterate control, Evaluation ev, int iterations,
                      std::vector<IterationRecord> history, double tolerance) {
  OptimizeResult res;
  res.kkt_residual = kkt_residual(disc, control, ev.normal_derivative);
  res.converged = res.kkt_residual <= tolerance;
  res.objective = ev.objective;
  res.control = std::move(control);
  res.boundary = std::move(ev.boundary);
  res.state = std::move(ev.state);
  res.adjoint = std::move(ev.adjoint);
  res.normal_derivative = std::move(ev.normal_derivative);
  res.iterations = iterations;
  res.history = std::move(history);
  return res;
}

// Conjugate gradients on the reduced Hessian alpha I + S^* S in the
// sum k (., M_Gamma .) inner product; valid when no bound is active.
OptimizeResult optimize_unconstrained(const Discretization& disc, const OptimizeOptions& opt) {
  const FemSpace& space = *disc.space;
  const TimeGrid& grid = disc.grid;
  const double alpha = disc.data.alpha;
  ControlIterate control{Matrix::Zero(space.n_boundary(), grid.N), disc.data.box, opt.mode};
  std::vector<IterationRecord> history;
  int total = 0;
  Evaluation ev = evaluate(disc, control);
  for (int restart = 0; restart < 4; ++restart) {
    Matrix r = ev.normal_derivative - alpha * control.values;  // minus the gradient
    double rr = boundary_inner(space, grid, r, r);
    double J = ev.objective;
    double res = std::sqrt(rr) / alpha;
    history.push_back({total, J, res, 1.0});
    if (opt.on_iteration) opt.on_iteration(total, J, res);
    if (res <= 0.5 * opt.tolerance) break;
    Matrix p = r;
    while (total < opt.max_iterations) {
      const SlabField yp = solve_state_homogeneous(*disc.op, p);
      const SlabField zp = solve_adjoint_homogeneous(*disc.op, yp);
      const Matrix hp = alpha * p - discrete_normal_derivative_homogeneous(disc, yp, zp);
      const double php = boundary_inner(space, grid, p, hp);
      if (!(php > 0.0)) break;
      const double a = rr / php;
      const double gp = -boundary_inner(space, grid, r, p);
      control.values += a * p;
      J += a * gp + 0.5 * a * a * php;
      r -= a * hp;
      const double rr_new = boundary_inner(space, grid, r, r);
      ++total;
      res = std::sqrt(rr_new) / alpha;
      history.push_back({total, J, res, 1.0});
      if (opt.on_iteration) opt.on_iteration(total, J, res);
      if (res <= 0.5 * opt.tolerance) break;
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    ev = evaluate(disc, control);
    if (kkt_residual(disc, control, ev.normal_derivative) <= opt.tolerance || total >= opt.max_iterations) break;
  }
  return finish(disc, std::move(control), std::move(ev), total, std::move(history), opt.tolerance);
}

}  // namespace

OptimizeResult optimize(const Discretization& disc, const OptimizeOptions& opt) {
  if (opt.tolerance <= 0.0 || opt.max_iterations < 0) throw std::invalid_argument("invalid optimizer options");
  const Box& box = disc.data.box;
  if (!box.bounded() && opt.cg_when_unconstrained) return optimize_unconstrained(disc, opt);

  const FemSpace& space = *disc.space;
  ControlIterate control{Matrix::Constant(space.n_boundary(), disc.grid.N, box.midpoint()), box, opt.mode};
  Evaluation ev = evaluate(disc, control);
  std::vector<IterationRecord> history;
  double theta = opt.initial_damping;
  int it = 0;
  for (;; ++it) {
    const Matrix target = projected_target(space, ev.normal_derivative, disc.data.alpha, box, opt.mode);
    const double res = residual_between(disc, control, target);
    history.push_back({it, ev.objective, res, theta});
    if (opt.on_iteration) opt.on_iteration(it, ev.objective, res);
    if (res <= opt.tolerance || it >= opt.max_iterations) break;
    bool accepted = false;
    while (theta >= 1e-12) {
      ControlIterate trial{control.values + theta * (target - control.values), box, opt.mode};
      Evaluation tev = evaluate(disc, trial);
      if (tev.objective <= ev.objective + 1e-12) {
        control = std::move(trial);
        ev = std::move(tev);
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) break;
  }
  return finish(disc, std::move(control), std::move(ev), it, std::move(history), opt.tolerance);
}

}  // namespace pdeopt
