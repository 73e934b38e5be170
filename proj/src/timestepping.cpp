#include "pdeopt/timestepping.hpp"

#include <algorithm>
#include <stdexcept>

namespace pdeopt {

double Box::midpoint() const {
  if (std::isfinite(lower) && std::isfinite(upper)) return 0.5 * (lower + upper);
  if (std::isfinite(lower)) return std::max(lower, 0.0);
  if (std::isfinite(upper)) return std::min(upper, 0.0);
  return 0.0;
}

void ProblemData::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(box.lower < box.upper)) throw std::invalid_argument("box must satisfy lower < upper");
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (!f || !yd || !y0) throw std::invalid_argument("problem data needs f, yd and y0");
}

DiscreteLoads DiscreteLoads::assemble(const FemSpace& space, const TimeGrid& grid, const ProblemData& data) {
  const int n = space.n_total(), ni = space.n_interior(), N = grid.N;
  const auto& rule = triangle_rule();
  DiscreteLoads out;
  out.source.resize(ni, N);
  out.target.resize(n, N);
  out.target_sq.resize(N);
  out.initial = space.load(data.y0);

  Vector fl(n), yl(n);
  for (int s = 0; s < N; ++s) {
    const auto tg = grid.gauss_nodes(s);
    fl.setZero();
    yl.setZero();
    double sq = 0.0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
      const auto& quad = space.triangle_quadrature(t);
      const auto& d = space.triangle_dofs(t);
      for (int q = 0; q < FemSpace::kQuadPoints; ++q) {
        const Point& x = quad.points[q];
        const double w = quad.weights[q];
        const double fa = 0.5 * (data.f(x, tg[0]) + data.f(x, tg[1]));
        const double ya = 0.5 * (data.yd(x, tg[0]) + data.yd(x, tg[1]));
        sq += w * ya * ya;
        for (int i = 0; i < 3; ++i) {
          fl[d[i]] += w * fa * rule.points[q][i];
          yl[d[i]] += w * ya * rule.points[q][i];
        }
      }
    }
    out.source.col(s) = fl.head(ni);
    out.target.col(s) = yl;
    out.target_sq[s] = sq;
  }
  return out;
}

DiscreteLoads DiscreteLoads::zero(const FemSpace& space, const TimeGrid& grid) {
  DiscreteLoads out;
  out.source = Matrix::Zero(space.n_interior(), grid.N);
  out.initial = Vector::Zero(space.n_total());
  out.target = Matrix::Zero(space.n_total(), grid.N);
  out.target_sq = Vector::Zero(grid.N);
  return out;
}

SpaceTimeOperator::SpaceTimeOperator(std::shared_ptr<const FemSpace> space, TimeGrid grid)
    : space_(std::move(space)), grid_(grid) {
  const double k = grid_.k();
  SparseMatrix system = space_->mass_ii() + k * space_->stiffness_ii();
  system_ = SpdSolver(std::move(system), kStepTolerance);
  coupling_ = space_->mass_ib() + k * space_->stiffness_ib();
}

Discretization Discretization::make(std::shared_ptr<const FemSpace> space, TimeGrid grid, ProblemData data) {
  data.validate();
  if (std::abs(data.T - grid.T) > 1e-14 * data.T) throw std::invalid_argument("time grid does not match final time");
  Discretization d;
  d.space = space;
  d.grid = grid;
  d.op = std::make_shared<const SpaceTimeOperator>(space, grid);
  d.loads = DiscreteLoads::assemble(*space, grid, data);
  d.data = std::move(data);
  return d;
}

namespace {

void check_boundary_shape(const SpaceTimeOperator& op, const Matrix& boundary) {
  if (boundary.rows() != op.space().n_boundary() || boundary.cols() != op.grid().N) {
    throw std::invalid_argument("boundary data must be n_boundary x N");
  }
}

SlabField state_sweep(const SpaceTimeOperator& op, const DiscreteLoads* loads, const Matrix& boundary) {
  check_boundary_shape(op, boundary);
  const FemSpace& space = op.space();
  const int ni = space.n_interior(), nb = space.n_boundary(), N = op.grid().N;
  const double k = op.grid().k();
  SlabField y;
  y.values.resize(ni + nb, N);
  Vector rhs(ni);
  for (int s = 0; s < N; ++s) {
    if (s == 0) {
      rhs = loads ? Vector(loads->initial.head(ni)) : Vector::Zero(ni);
    } else {
      rhs = space.mass_ii() * y.values.col(s - 1).head(ni) + space.mass_ib() * boundary.col(s - 1);
    }
    if (loads) rhs += k * loads->source.col(s);
    rhs -= op.coupling() * boundary.col(s);
    y.values.col(s).head(ni) = op.system().solve(rhs);
    y.values.col(s).tail(nb) = boundary.col(s);
  }
  return y;
}

SlabField adjoint_sweep(const SpaceTimeOperator& op, const DiscreteLoads* loads, const SlabField& state) {
  const FemSpace& space = op.space();
  const int ni = space.n_interior(), nb = space.n_boundary(), N = op.grid().N;
  if (state.rows() != ni + nb || state.slabs() != N) throw std::invalid_argument("state field has wrong shape");
  const double k = op.grid().k();
  SlabField z;
  z.values.resize(ni, N);
  Vector rhs(ni);
  for (int s = N - 1; s >= 0; --s) {
    rhs = space.mass_ii() * state.values.col(s).head(ni) + space.mass_ib() * state.values.col(s).tail(nb);
    if (loads) rhs -= loads->target.col(s).head(ni);
    rhs *= k;
    if (s + 1 < N) rhs += space.mass_ii() * z.values.col(s + 1);
    z.values.col(s) = op.system().solve(rhs);
  }
  return z;
}

}  // namespace

SlabField solve_state(const SpaceTimeOperator& op, const DiscreteLoads& loads, const Matrix& boundary) {
  SlabField y = state_sweep(op, &loads, boundary);
  y.initial = op.space().solve_mass(loads.initial);
  return y;
}

SlabField solve_adjoint(const SpaceTimeOperator& op, const DiscreteLoads& loads, const SlabField& state) {
  return adjoint_sweep(op, &loads, state);
}

SlabField solve_state_homogeneous(const SpaceTimeOperator& op, const Matrix& boundary) {
  SlabField y = state_sweep(op, nullptr, boundary);
  y.initial = Vector::Zero(op.space().n_total());
  return y;
}

SlabField solve_adjoint_homogeneous(const SpaceTimeOperator& op, const SlabField& state) {
  return adjoint_sweep(op, nullptr, state);
}

Matrix extend_interior(const FemSpace& space, const Matrix& interior) {
  if (interior.rows() != space.n_interior()) throw std::invalid_argument("interior field has wrong row count");
  Matrix full = Matrix::Zero(space.n_total(), interior.cols());
  full.topRows(space.n_interior()) = interior;
  return full;
}

double bilinear_A(const FemSpace& space, const TimeGrid& grid, const Matrix& Y, const Matrix& Phi) {
  const int n = space.n_total(), N = grid.N;
  if (Y.rows() != n || Phi.rows() != n || Y.cols() != N || Phi.cols() != N) {
    throw std::invalid_argument("bilinear_A: fields must be n_total x N");
  }
  const double k = grid.k();
  double acc = 0.0;
  for (int s = 0; s < N; ++s) {
    acc += k * Phi.col(s).dot(space.stiffness() * Y.col(s));
    Vector jump = Y.col(s);
    if (s > 0) jump -= Y.col(s - 1);
    acc += Phi.col(s).dot(space.mass() * jump);
  }
  return acc;
}

double state_energy(const FemSpace& space, const TimeGrid& grid, const Matrix& Y) {
  if (Y.rows() != space.n_total() || Y.cols() != grid.N) throw std::invalid_argument("state_energy: bad shape");
  const double k = grid.k();
  double acc = 0.0;
  for (int s = 0; s < grid.N; ++s) {
    Vector jump = Y.col(s);
    if (s > 0) jump -= Y.col(s - 1);
    acc += space.norm_sq(jump);
    acc += k * (space.norm_sq(Y.col(s)) + Y.col(s).dot(space.stiffness() * Y.col(s)));
  }
  acc += space.norm_sq(Y.col(grid.N - 1));
  return acc;
}

}  // namespace pdeopt
