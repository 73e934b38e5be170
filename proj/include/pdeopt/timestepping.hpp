#pragma once

#include <limits>
#include <memory>

#include <Eigen/Dense>

#include "pdeopt/fem.hpp"

namespace pdeopt {

using Matrix = Eigen::MatrixXd;

/// Admissible interval [lower, upper]; infinite bounds mean unconstrained.
struct Box {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool bounded() const { return std::isfinite(lower) || std::isfinite(upper); }
  double clamp(double v) const { return v < lower ? lower : (v > upper ? upper : v); }
  double midpoint() const;
};

struct ProblemData {
  SpaceTimeFunction f;
  SpaceTimeFunction yd;
  SpaceFunction y0;
  double alpha = 1.0;
  Box box;
  double T = 1.0;

  /// Throws std::invalid_argument on alpha <= 0, a badly ordered box or missing functions.
  void validate() const;
};

/// Piecewise constant in time field: column s holds the coefficients on slab s.
/// State fields carry all DOFs (solver ordering), adjoint fields only the
/// interior block.
struct SlabField {
  Matrix values;
  Vector initial;  // state only: L2 projection of y0, never used by the sweep

  int slabs() const { return static_cast<int>(values.cols()); }
  int rows() const { return static_cast<int>(values.rows()); }
};

/// Slab-averaged data loads for one (mesh, time grid, problem) triple.
struct DiscreteLoads {
  Matrix source;       // n_interior x N, (P_k f, phi_i)
  Vector initial;      // n_total, (y0, phi_i)
  Matrix target;       // n_total x N, (P_k y_d, phi_i)
  Vector target_sq;    // N, ||P_k y_d||^2 on each slab

  static DiscreteLoads assemble(const FemSpace& space, const TimeGrid& grid, const ProblemData& data);
  /// Zero data of matching shape (homogeneous sweeps).
  static DiscreteLoads zero(const FemSpace& space, const TimeGrid& grid);
};

/// Time-stepping operator for a fixed mesh and step: caches the factorization
/// of M_II + k A_II and the interior/boundary coupling.
class SpaceTimeOperator {
 public:
  SpaceTimeOperator(std::shared_ptr<const FemSpace> space, TimeGrid grid);

  /// Relative residual required of every slab solve.
  static constexpr double kStepTolerance = 1e-10;

  const FemSpace& space() const { return *space_; }
  std::shared_ptr<const FemSpace> space_ptr() const { return space_; }
  const TimeGrid& grid() const { return grid_; }
  const SpdSolver& system() const { return system_; }
  const SparseMatrix& coupling() const { return coupling_; }  // M_IB + k A_IB

 private:
  std::shared_ptr<const FemSpace> space_;
  TimeGrid grid_;
  SpdSolver system_;
  SparseMatrix coupling_;
};

/// Everything needed to evaluate the discrete control problem on one level.
struct Discretization {
  std::shared_ptr<const FemSpace> space;
  TimeGrid grid;
  ProblemData data;
  std::shared_ptr<const SpaceTimeOperator> op;
  DiscreteLoads loads;

  static Discretization make(std::shared_ptr<const FemSpace> space, TimeGrid grid, ProblemData data);
};

/// Forward sweep. `boundary` holds the projected Dirichlet data, one column
/// per slab over the boundary block; it is copied verbatim into the state.
SlabField solve_state(const SpaceTimeOperator& op, const DiscreteLoads& loads, const Matrix& boundary);

/// Backward sweep for the adjoint with Z^{N+1} = 0 and zero boundary values.
SlabField solve_adjoint(const SpaceTimeOperator& op, const DiscreteLoads& loads, const SlabField& state);

/// Same sweeps with f = 0, y0 = 0 and y_d = 0.
SlabField solve_state_homogeneous(const SpaceTimeOperator& op, const Matrix& boundary);
SlabField solve_adjoint_homogeneous(const SpaceTimeOperator& op, const SlabField& state);

/// Embeds an interior-block field into the full DOF range (zero boundary).
Matrix extend_interior(const FemSpace& space, const Matrix& interior);

/// A(Y, Phi) = sum k a(Y^n, Phi^n) + sum_{n>=2} (Y^n - Y^{n-1}, Phi^n) + (Y^1, Phi^1)
/// with both fields given over all DOFs (n_total x N).
double bilinear_A(const FemSpace& space, const TimeGrid& grid, const Matrix& Y, const Matrix& Phi);

/// Energy quantity sum ||Y^i - Y^{i-1}||^2 + k ||Y^i||_1^2 + ||Y^N||^2 with Y^0 = 0 and
/// ||.||_1 the full H1 norm.
double state_energy(const FemSpace& space, const TimeGrid& grid, const Matrix& Y);

}  // namespace pdeopt
