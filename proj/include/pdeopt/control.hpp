#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pdeopt/timestepping.hpp"

namespace pdeopt {

enum class ControlMode { full, variational };

const char* to_string(ControlMode mode);
ControlMode parse_control_mode(const std::string& text);

/// Boundary control, one column per slab over the boundary block.
///
/// In full mode `values` are the nodal coefficients of the control itself.
/// In variational mode `values` are the nodal coefficients of the piecewise
/// linear preimage v; the control is the pointwise clamp of v to the box,
/// which has kinks inside boundary edges.
struct ControlIterate {
  Matrix values;
  Box box;
  ControlMode mode = ControlMode::full;

  /// Box applied pointwise when evaluating the represented function.
  Box pointwise_box() const { return mode == ControlMode::variational ? box : Box{}; }
};

// ---------------------------------------------------------------------------
// Kink-aware boundary integration

/// Splits [0, 1] at the points where the linear function a0 + s (a1 - a0)
/// crosses a finite bound of the box. Returns sorted breakpoints including 0 and 1.
std::vector<double> clamp_breakpoints(double a0, double a1, const Box& box);

/// (clamp(v), phi_b)_Gamma for one slab, exact for the clamped piecewise linear v.
Vector clamped_boundary_load(const FemSpace& space, const Vector& v, const Box& box);

/// ||clamp_a(v) - clamp_b(w)||^2_{L2(Gamma)} for one slab, exact.
double clamped_difference_sq(const FemSpace& space, const Vector& v, const Box& box_v, const Vector& w,
                             const Box& box_w);

/// Discrete L2(0,T; L2(Gamma)) norm of a boundary slab field.
double boundary_norm(const FemSpace& space, const TimeGrid& grid, const Matrix& values);
/// Inner product sum_s k a_s^T M_Gamma b_s.
double boundary_inner(const FemSpace& space, const TimeGrid& grid, const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Operators

/// Entrywise clamp to the box (identity for an infinite box).
Matrix project_box(const Matrix& values, const Box& box);

/// L2(Gamma)-orthogonal projection of each slab onto the piecewise linear
/// functions with nodal values in the box.
Matrix project_admissible(const FemSpace& space, const Matrix& values, const Box& box);

/// Projected Dirichlet data Q(U) entering the state equation.
Matrix boundary_data(const FemSpace& space, const ControlIterate& control);

/// Discrete normal derivative of the adjoint, one column per slab.
Matrix discrete_normal_derivative(const Discretization& disc, const SlabField& state, const SlabField& adjoint);

/// Discrete normal derivative for homogeneous data (y_d = 0), used for
/// Hessian products.
Matrix discrete_normal_derivative_homogeneous(const Discretization& disc, const SlabField& state,
                                              const SlabField& adjoint);

/// Tracking part of the objective, sum k/2 ||Y^i - P_k y_d||^2.
double tracking_term(const Discretization& disc, const SlabField& state);
/// Regularization part, sum k alpha/2 ||U^i||^2_Gamma (kink-aware in variational mode).
double regularization_term(const Discretization& disc, const ControlIterate& control);

double objective(const Discretization& disc, const ControlIterate& control);

/// alpha U - d(U), the Riesz representative of the derivative in the
/// sum k (., M_Gamma .) inner product. For variational controls the nodal
/// values of the clamped control are used.
Matrix reduced_gradient(const Discretization& disc, const ControlIterate& control);

/// Admissible target P((1/alpha) d) in the representation of `mode`.
Matrix projected_target(const FemSpace& space, const Matrix& normal_derivative, double alpha, const Box& box,
                        ControlMode mode);

/// ||U - P((1/alpha) d)|| in L2(0,T; L2(Gamma)).
double kkt_residual(const Discretization& disc, const ControlIterate& control, const Matrix& normal_derivative);

// ---------------------------------------------------------------------------
// Optimizer

struct OptimizeOptions {
  ControlMode mode = ControlMode::full;
  double tolerance = 1e-10;
  int max_iterations = 500;
  double initial_damping = 1.0;
  /// Use conjugate gradients on the reduced Hessian when the box is infinite.
  bool cg_when_unconstrained = true;
  std::function<void(int iteration, double objective, double residual)> on_iteration;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
  double damping = 1.0;
};

struct OptimizeResult {
  ControlIterate control;
  Matrix boundary;  // Q(U)
  SlabField state;
  SlabField adjoint;
  Matrix normal_derivative;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

OptimizeResult optimize(const Discretization& disc, const OptimizeOptions& options = {});

}  // namespace pdeopt
