#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pdeopt/control.hpp"

namespace pdeopt {

/// Closed-form solution of a test problem; empty members are unavailable.
struct ExactSolution {
  SpaceTimeFunction u;
  SpaceTimeFunction y;
  SpaceTimeFunction z;

  bool has_u() const { return static_cast<bool>(u); }
  bool has_y() const { return static_cast<bool>(y); }
  bool has_z() const { return static_cast<bool>(z); }
};

/// L2(0,T; L2(Omega)) distance between a slab field and a function. The field
/// may hold all DOFs or only the interior block (boundary values then zero).
double error_L2L2_domain(const FemSpace& space, const TimeGrid& grid, const Matrix& field,
                         const SpaceTimeFunction& exact);

/// L2(0,T; L2(Gamma)) distance between a boundary control and a function; the
/// clamped representation of variational controls is integrated piecewise
/// between its kinks.
double error_L2L2_boundary(const FemSpace& space, const TimeGrid& grid, const ControlIterate& control,
                           const SpaceTimeFunction& exact);

/// log2(e_{j-1} / e_j); the first entry and entries with non-positive errors are absent.
std::vector<std::optional<double>> eoc(std::span<const double> errors);

/// Orders against the mesh size estimate h ~ DOF^(-1/dimension):
/// dimension * log(e_{j-1} / e_j) / log(n_j / n_{j-1}). Equals `eoc` when
/// the DOF count grows by exactly 2^dimension per level.
std::vector<std::optional<double>> eoc_dof(std::span<const double> errors, std::span<const double> dofs,
                                           int dimension = 2);

/// Mean of the present orders with index in [first, last].
std::optional<double> average_order(std::span<const std::optional<double>> orders, std::size_t first,
                                    std::size_t last);

struct ConvergenceRecord {
  int level = 0;      // refinement level (spatial) or index (temporal)
  long descriptor = 0;  // DOF count (spatial sweep) or N (temporal sweep)
  int dof = 0;
  int N = 0;
  double err_u = 0.0, err_y = 0.0, err_z = 0.0;
  std::optional<double> order_u, order_y, order_z;
  bool converged = true;
  double kkt_residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

/// Fills the order columns from consecutive records.
void fill_orders(std::vector<ConvergenceRecord>& records);

/// CSV with header `level,err_u,order_u,err_y,order_y,err_z,order_z`; the level
/// column carries the descriptor, numbers use 12 significant digits and absent
/// orders are empty.
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);

/// Converged discrete solution on one level.
struct LevelSolution {
  std::shared_ptr<const FemSpace> space;
  TimeGrid grid;
  Matrix state;    // n_total x N
  Matrix adjoint;  // n_interior x N
  ControlIterate control;
};

/// Errors of `coarse` measured against `fine` after exact transfer: nodal
/// prolongation through the refinement hierarchy and slab nesting in time.
/// Throws std::invalid_argument when the levels are not nested.
ConvergenceRecord reference_solution_error(const LevelSolution& fine, const LevelSolution& coarse);

}  // namespace pdeopt
