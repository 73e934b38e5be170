#pragma once

#include <array>
#include <functional>
#include <memory>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pdeopt/mesh.hpp"
#include "pdeopt/time_grid.hpp"

namespace pdeopt {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using SpaceFunction = std::function<double(const Point&)>;
using SpaceTimeFunction = std::function<double(const Point&, double)>;

struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual);
  double residual;
};

// ---------------------------------------------------------------------------
// Quadrature

/// Rule on the reference triangle in barycentric coordinates; weights sum to 1
/// so that integrals are `area * sum(w_q f(x_q))`.
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

const TriangleRule& triangle_rule();  // 6 points, exact for degree 4
const LineRule& edge_rule();          // Gauss-Legendre, 3 points, degree 5
const LineRule& time_rule();          // Gauss-Legendre, 2 points, degree 3

// ---------------------------------------------------------------------------
// Degrees of freedom

/// P1 degree-of-freedom layout. The solver ordering places interior vertices
/// first (ascending vertex index) and boundary vertices last, in the order of
/// the counter-clockwise boundary cycle.
struct DofMap {
  int n_total = 0;
  int n_interior = 0;
  int n_boundary = 0;
  std::vector<int> to_solver;  // global vertex -> solver index
  std::vector<int> to_global;  // solver index -> global vertex

  static DofMap build(const TriMesh& mesh, const BoundaryGraph& boundary);
  bool is_boundary_vertex(int v) const { return to_solver[v] >= n_interior; }
};

SparseMatrix assemble_mass(const TriMesh& mesh, const DofMap& dofs);
SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofMap& dofs);
/// Boundary mass over the boundary block (indices local to the block).
SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const DofMap& dofs, const BoundaryGraph& boundary);

// ---------------------------------------------------------------------------
// Linear solver

/// SPD solve with a cached sparse Cholesky factorization. Falls back to
/// conjugate gradients when the factorization fails; every solve is checked
/// against the relative residual `tolerance` (default 1e-12), with up to three
/// steps of iterative refinement.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(SparseMatrix matrix, double tolerance = kTolerance);

  Vector solve(const Vector& rhs) const;
  bool direct() const { return direct_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  double tolerance() const { return tolerance_; }

  static constexpr double kTolerance = 1e-12;

 private:
  SparseMatrix matrix_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
  bool direct_ = false;
  double tolerance_ = kTolerance;
};

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs);

// ---------------------------------------------------------------------------
// Finite element space

/// Mesh-level P1 machinery: DOF layout, assembled operators and their blocks,
/// load vectors and the spatial projections. Immutable after construction.
class FemSpace {
 public:
  explicit FemSpace(std::shared_ptr<const TriMesh> mesh);
  explicit FemSpace(TriMesh mesh) : FemSpace(std::make_shared<const TriMesh>(std::move(mesh))) {}

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const BoundaryGraph& boundary() const { return boundary_; }
  int n_total() const { return dofs_.n_total; }
  int n_interior() const { return dofs_.n_interior; }
  int n_boundary() const { return dofs_.n_boundary; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& boundary_mass() const { return boundary_mass_; }

  // Blocks in solver ordering: I = interior rows/cols, B = boundary.
  const SparseMatrix& mass_ii() const { return m_ii_; }
  const SparseMatrix& mass_ib() const { return m_ib_; }
  const SparseMatrix& mass_bi() const { return m_bi_; }
  const SparseMatrix& mass_bb() const { return m_bb_; }
  const SparseMatrix& stiffness_ii() const { return a_ii_; }
  const SparseMatrix& stiffness_ib() const { return a_ib_; }
  const SparseMatrix& stiffness_bi() const { return a_bi_; }

  /// Solver-ordered vertex coordinates.
  const Point& dof_point(int dof) const { return mesh_->vertices[dofs_.to_global[dof]]; }

  /// Physical quadrature points of triangle t (degree-4 rule) and weights
  /// already scaled by the triangle area.
  static constexpr int kQuadPoints = 6;
  struct TriangleQuadrature {
    std::array<Point, kQuadPoints> points;
    std::array<double, kQuadPoints> weights;
  };
  const TriangleQuadrature& triangle_quadrature(int t) const { return tri_quad_[t]; }
  /// Triangle vertex DOFs (solver ordering).
  const std::array<int, 3>& triangle_dofs(int t) const { return tri_dofs_[t]; }

  /// \f$ \int_\Omega g \varphi_i \f$ for every DOF (solver ordering).
  Vector load(const SpaceFunction& g) const;
  /// \f$ \int_\Gamma g \varphi_b \f$ over the boundary block.
  Vector boundary_load(const SpaceFunction& g) const;

  Vector solve_mass(const Vector& rhs) const { return mass_solver_.solve(rhs); }
  Vector solve_boundary_mass(const Vector& rhs) const { return boundary_mass_solver_.solve(rhs); }

  /// Squared L2(Gamma) norm of a boundary-block vector.
  double boundary_norm_sq(const Vector& v) const { return v.dot(boundary_mass_ * v); }
  /// Squared L2(Omega) norm of a full vector.
  double norm_sq(const Vector& v) const { return v.dot(mass_ * v); }

  /// Value at a point given in barycentric coordinates of triangle t.
  double evaluate(const Vector& field, int t, const std::array<double, 3>& bary) const;

  /// Scatter / gather between solver ordering and global vertex numbering.
  std::vector<double> to_vertex_order(const Vector& solver_vec) const;
  Vector from_vertex_order(std::span<const double> vertex_vec) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  BoundaryGraph boundary_;
  DofMap dofs_;
  SparseMatrix mass_, stiffness_, boundary_mass_;
  SparseMatrix m_ii_, m_ib_, m_bi_, m_bb_, a_ii_, a_ib_, a_bi_;
  std::vector<TriangleQuadrature> tri_quad_;
  std::vector<std::array<int, 3>> tri_dofs_;
  SpdSolver mass_solver_;
  SpdSolver boundary_mass_solver_;
};

// ---------------------------------------------------------------------------
// Projections

/// Q_h: L2(Gamma)-orthogonal projection onto the boundary trace space.
Vector l2_boundary_project(const SpaceFunction& g, const FemSpace& space);

/// L2(Omega)-orthogonal projection onto the full P1 space.
Vector l2_interior_project(const SpaceFunction& y0, const FemSpace& space);

/// Ritz projection R_h onto V_h^0 (interior block) of a function vanishing on
/// the boundary, given its gradient.
Vector ritz_project(const std::function<Point(const Point&)>& gradient, const FemSpace& space);

/// P_k: slab averages computed with the two-point Gauss rule.
std::vector<double> time_project(const std::function<double(double)>& w, const TimeGrid& grid);

/// Writes `i j value` triplets (0-based, solver ordering).
void write_triplets(std::ostream& out, const SparseMatrix& matrix);

}  // namespace pdeopt
