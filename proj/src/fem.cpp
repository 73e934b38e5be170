#include "pdeopt/fem.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

namespace pdeopt {

namespace {

using Triplet = Eigen::Triplet<double>;

struct Blocks {
  SparseMatrix ii, ib, bi, bb;
};

Blocks split(const SparseMatrix& m, int n_interior) {
  const int n = static_cast<int>(m.rows());
  const int nb = n - n_interior;
  std::vector<Triplet> ii, ib, bi, bb;
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      const bool ri = r < n_interior, ci = c < n_interior;
      if (ri && ci) ii.emplace_back(r, c, it.value());
      else if (ri) ib.emplace_back(r, c - n_interior, it.value());
      else if (ci) bi.emplace_back(r - n_interior, c, it.value());
      else bb.emplace_back(r - n_interior, c - n_interior, it.value());
    }
  }
  Blocks b;
  b.ii.resize(n_interior, n_interior);
  b.ib.resize(n_interior, nb);
  b.bi.resize(nb, n_interior);
  b.bb.resize(nb, nb);
  b.ii.setFromTriplets(ii.begin(), ii.end());
  b.ib.setFromTriplets(ib.begin(), ib.end());
  b.bi.setFromTriplets(bi.begin(), bi.end());
  b.bb.setFromTriplets(bb.begin(), bb.end());
  return b;
}

// Gradients of the barycentric coordinates of a triangle.
std::array<Point, 3> barycentric_gradients(const Point& p0, const Point& p1, const Point& p2, double& area) {
  area = 0.5 * cross(p1 - p0, p2 - p0);
  if (!(area > 0.0)) throw std::invalid_argument("degenerate or inverted triangle in assembly");
  const double s = 1.0 / (2.0 * area);
  return {Point{(p1.y - p2.y) * s, (p2.x - p1.x) * s}, Point{(p2.y - p0.y) * s, (p0.x - p2.x) * s},
          Point{(p0.y - p1.y) * s, (p1.x - p0.x) * s}};
}

}  // namespace

const TriangleRule& triangle_rule() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 4;
    const double a1 = 0.44594849091596488631832925388305, w1 = 0.22338158967801146569500700843312;
    const double a2 = 0.09157621350977074345957146340220, w2 = 0.10995174365532186763832632490021;
    r.points = {{1 - 2 * a1, a1, a1}, {a1, 1 - 2 * a1, a1}, {a1, a1, 1 - 2 * a1},
                {1 - 2 * a2, a2, a2}, {a2, 1 - 2 * a2, a2}, {a2, a2, 1 - 2 * a2}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

const LineRule& edge_rule() {
  static const LineRule rule = [] {
    LineRule r;
    r.degree = 5;
    const double d = 0.5 * std::sqrt(0.6);
    r.points = {0.5 - d, 0.5, 0.5 + d};
    r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    return r;
  }();
  return rule;
}

const LineRule& time_rule() {
  static const LineRule rule = [] {
    LineRule r;
    r.degree = 3;
    const double d = 0.5 / std::sqrt(3.0);
    r.points = {0.5 - d, 0.5 + d};
    r.weights = {0.5, 0.5};
    return r;
  }();
  return rule;
}

DofMap DofMap::build(const TriMesh& mesh, const BoundaryGraph& boundary) {
  DofMap d;
  d.n_total = mesh.n_vertices();
  d.n_boundary = boundary.size();
  d.n_interior = d.n_total - d.n_boundary;
  d.to_solver.assign(d.n_total, -1);
  for (int b = 0; b < d.n_boundary; ++b) d.to_solver[boundary.cycle[b]] = d.n_interior + b;
  int next = 0;
  for (int v = 0; v < d.n_total; ++v) {
    if (d.to_solver[v] < 0) d.to_solver[v] = next++;
  }
  d.to_global.assign(d.n_total, -1);
  for (int v = 0; v < d.n_total; ++v) d.to_global[d.to_solver[v]] = v;
  return d;
}

SparseMatrix assemble_mass(const TriMesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(dofs.to_solver[tri[i]], dofs.to_solver[tri[j]], area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseMatrix m(dofs.n_total, dofs.n_total);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    double area = 0.0;
    const auto grad = barycentric_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(dofs.to_solver[tri[i]], dofs.to_solver[tri[j]], area * dot(grad[i], grad[j]));
      }
    }
  }
  SparseMatrix a(dofs.n_total, dofs.n_total);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const DofMap& dofs, const BoundaryGraph& boundary) {
  std::vector<Triplet> trip;
  const int nb = dofs.n_boundary;
  for (int e = 0; e < boundary.size(); ++e) {
    const int a = dofs.to_solver[boundary.edges[e][0]] - dofs.n_interior;
    const int b = dofs.to_solver[boundary.edges[e][1]] - dofs.n_interior;
    const double len = norm(mesh.vertices[boundary.edges[e][1]] - mesh.vertices[boundary.edges[e][0]]);
    trip.emplace_back(a, a, len / 3.0);
    trip.emplace_back(b, b, len / 3.0);
    trip.emplace_back(a, b, len / 6.0);
    trip.emplace_back(b, a, len / 6.0);
  }
  SparseMatrix m(nb, nb);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SolverError::SolverError(const std::string& what, double residual)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << what << " (relative residual " << std::scientific << std::setprecision(3) << residual << ")";
        return os.str();
      }()),
      residual(residual) {}

SpdSolver::SpdSolver(SparseMatrix matrix, double tolerance) : matrix_(std::move(matrix)), tolerance_(tolerance) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("SpdSolver: matrix is not square");
  llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
  llt_->compute(matrix_);
  direct_ = llt_->info() == Eigen::Success;
  if (!direct_) llt_.reset();
}

Vector SpdSolver::solve(const Vector& rhs) const {
  if (rhs.size() != matrix_.rows()) throw std::invalid_argument("SpdSolver: right-hand side has wrong size");
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return Vector::Zero(rhs.size());
  Vector x;
  if (direct_) {
    x = llt_->solve(rhs);
    Vector r = rhs - matrix_ * x;
    double rel = r.norm() / bnorm;
    for (int step = 0; step < 3 && rel > tolerance_; ++step) {
      x += llt_->solve(r);
      r = rhs - matrix_ * x;
      rel = r.norm() / bnorm;
    }
    if (!(rel <= tolerance_)) throw SolverError("sparse Cholesky solve did not reach tolerance", rel);
    return x;
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tolerance_);
  cg.setMaxIterations(std::max<int>(1000, 10 * static_cast<int>(matrix_.rows())));
  cg.compute(matrix_);
  x = cg.solve(rhs);
  const double rel = (rhs - matrix_ * x).norm() / bnorm;
  if (!(rel <= tolerance_)) {
    throw SolverError("matrix is not SPD: Cholesky failed and CG did not converge", rel);
  }
  return x;
}

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs) { return SpdSolver(matrix).solve(rhs); }

FemSpace::FemSpace(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  boundary_ = boundary_trace(*mesh_);
  dofs_ = DofMap::build(*mesh_, boundary_);
  mass_ = assemble_mass(*mesh_, dofs_);
  stiffness_ = assemble_stiffness(*mesh_, dofs_);
  boundary_mass_ = assemble_boundary_mass(*mesh_, dofs_, boundary_);
  Blocks m = split(mass_, dofs_.n_interior);
  Blocks a = split(stiffness_, dofs_.n_interior);
  m_ii_ = std::move(m.ii);
  m_ib_ = std::move(m.ib);
  m_bi_ = std::move(m.bi);
  m_bb_ = std::move(m.bb);
  a_ii_ = std::move(a.ii);
  a_ib_ = std::move(a.ib);
  a_bi_ = std::move(a.bi);

  const auto& rule = triangle_rule();
  tri_quad_.resize(mesh_->triangles.size());
  tri_dofs_.resize(mesh_->triangles.size());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const auto& tri = mesh_->triangles[t];
    const double area = mesh_->triangle_area(t);
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& l = rule.points[q];
      tri_quad_[t].points[q] = l[0] * mesh_->vertices[tri[0]] + l[1] * mesh_->vertices[tri[1]] +
                               l[2] * mesh_->vertices[tri[2]];
      tri_quad_[t].weights[q] = area * rule.weights[q];
    }
    for (int i = 0; i < 3; ++i) tri_dofs_[t][i] = dofs_.to_solver[tri[i]];
  }
  mass_solver_ = SpdSolver(mass_);
  boundary_mass_solver_ = SpdSolver(boundary_mass_);
}

Vector FemSpace::load(const SpaceFunction& g) const {
  Vector b = Vector::Zero(n_total());
  const auto& rule = triangle_rule();
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const auto& quad = tri_quad_[t];
    const auto& d = tri_dofs_[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const double v = quad.weights[q] * g(quad.points[q]);
      for (int i = 0; i < 3; ++i) b[d[i]] += v * rule.points[q][i];
    }
  }
  return b;
}

Vector FemSpace::boundary_load(const SpaceFunction& g) const {
  const int nb = n_boundary();
  Vector b = Vector::Zero(nb);
  const auto& rule = edge_rule();
  for (int e = 0; e < nb; ++e) {
    const Point pa = mesh_->vertices[boundary_.edges[e][0]];
    const Point pb = mesh_->vertices[boundary_.edges[e][1]];
    const double len = boundary_.lengths[e];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const double v = len * rule.weights[q] * g((1.0 - s) * pa + s * pb);
      b[e] += v * (1.0 - s);
      b[(e + 1) % nb] += v * s;
    }
  }
  return b;
}

double FemSpace::evaluate(const Vector& field, int t, const std::array<double, 3>& bary) const {
  const auto& d = tri_dofs_[t];
  return bary[0] * field[d[0]] + bary[1] * field[d[1]] + bary[2] * field[d[2]];
}

std::vector<double> FemSpace::to_vertex_order(const Vector& solver_vec) const {
  std::vector<double> out(n_total());
  for (int v = 0; v < n_total(); ++v) out[v] = solver_vec[dofs_.to_solver[v]];
  return out;
}

Vector FemSpace::from_vertex_order(std::span<const double> vertex_vec) const {
  Vector out(n_total());
  for (int v = 0; v < n_total(); ++v) out[dofs_.to_solver[v]] = vertex_vec[v];
  return out;
}

Vector l2_boundary_project(const SpaceFunction& g, const FemSpace& space) {
  return space.solve_boundary_mass(space.boundary_load(g));
}

Vector l2_interior_project(const SpaceFunction& y0, const FemSpace& space) { return space.solve_mass(space.load(y0)); }

Vector ritz_project(const std::function<Point(const Point&)>& gradient, const FemSpace& space) {
  const TriMesh& mesh = space.mesh();
  const int ni = space.n_interior();
  Vector b = Vector::Zero(ni);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    double area = 0.0;
    const auto grad = barycentric_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], area);
    const auto& quad = space.triangle_quadrature(t);
    Point mean{};
    for (int q = 0; q < FemSpace::kQuadPoints; ++q) mean = mean + quad.weights[q] * gradient(quad.points[q]);
    for (int i = 0; i < 3; ++i) {
      const int d = space.triangle_dofs(t)[i];
      if (d < ni) b[d] += dot(mean, grad[i]);
    }
  }
  return solve_spd(space.stiffness_ii(), b);
}

std::vector<double> time_project(const std::function<double(double)>& w, const TimeGrid& grid) {
  std::vector<double> out(grid.N);
  const auto& rule = time_rule();
  for (int s = 0; s < grid.N; ++s) {
    double acc = 0.0;
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      acc += rule.weights[g] * w(grid.t(s) + rule.points[g] * grid.k());
    }
    out[s] = acc;
  }
  return out;
}

void write_triplets(std::ostream& out, const SparseMatrix& matrix) {
  const auto old = out.precision(17);
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(old);
}

}  // namespace pdeopt
