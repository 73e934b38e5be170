#pragma once

// Brute-force dense reference for small problems: operators assembled with an
// independent quadrature and the space-time systems built column by column from
// the bilinear form. Everything is in global vertex numbering.

#include <vector>

#include <Eigen/Dense>

#include "pdeopt/control.hpp"

namespace oracle {

using Dense = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct DenseOps {
  Dense M, A, Mg;  // Mg: boundary mass, zero outside boundary rows/cols
  std::vector<int> interior, boundary;
  std::vector<bool> on_boundary;
};

inline DenseOps assemble(const pdeopt::TriMesh& mesh) {
  const int n = mesh.n_vertices();
  DenseOps ops;
  ops.M = Dense::Zero(n, n);
  ops.A = Dense::Zero(n, n);
  ops.Mg = Dense::Zero(n, n);
  ops.on_boundary.assign(n, false);
  for (const auto& e : mesh.boundary_edges) ops.on_boundary[e.a] = ops.on_boundary[e.b] = true;
  for (int v = 0; v < n; ++v) (ops.on_boundary[v] ? ops.boundary : ops.interior).push_back(v);

  for (const auto& t : mesh.triangles) {
    Eigen::Matrix3d P;
    for (int i = 0; i < 3; ++i) P.row(i) << 1.0, mesh.vertices[t[i]].x, mesh.vertices[t[i]].y;
    const double area = 0.5 * std::abs(P.determinant());
    const Eigen::Matrix3d C = P.inverse();  // column i: coefficients of hat i
    // Edge-midpoint rule, exact for quadratics.
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector3d lam = Eigen::Vector3d::Zero();
      lam[m] = 0.5;
      lam[(m + 1) % 3] = 0.5;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) ops.M(t[i], t[j]) += area / 3.0 * lam[i] * lam[j];
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ops.A(t[i], t[j]) += area * (C(1, i) * C(1, j) + C(2, i) * C(2, j));
      }
    }
  }
  for (const auto& e : mesh.boundary_edges) {
    const double len = pdeopt::norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
    // Simpson on (1-s, s) products.
    const double s[3] = {0.0, 0.5, 1.0}, w[3] = {1.0 / 6, 4.0 / 6, 1.0 / 6};
    const int id[2] = {e.a, e.b};
    for (int q = 0; q < 3; ++q) {
      const double phi[2] = {1 - s[q], s[q]};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) ops.Mg(id[i], id[j]) += len * w[q] * phi[i] * phi[j];
      }
    }
  }
  return ops;
}

/// Entries A(Y, e_j on slab i) of the space-time bilinear form for all tests.
inline Dense form_action_trial(const DenseOps& ops, double k, const Dense& Y) {
  const int N = static_cast<int>(Y.cols());
  Dense out(Y.rows(), N);
  for (int i = 0; i < N; ++i) {
    Vec jump = Y.col(i);
    if (i > 0) jump -= Y.col(i - 1);
    out.col(i) = k * ops.A * Y.col(i) + ops.M * jump;
  }
  return out;
}

/// A(Y, Phi) for full fields.
inline double form(const DenseOps& ops, double k, const Dense& Y, const Dense& Phi) {
  return (form_action_trial(ops, k, Y).array() * Phi.array()).sum();
}

struct SpaceTimeSolution {
  Dense state;    // n x N, vertex numbering
  Dense adjoint;  // n x N, zero on boundary
  Dense normal;   // n x N, only boundary rows meaningful
};

/// Solves the fully discrete state, adjoint and normal-derivative systems as
/// single dense linear systems. `source`, `initial`, `target` are loads in
/// vertex numbering (n x N, n, n x N); `boundary` holds Dirichlet values.
inline SpaceTimeSolution solve(const DenseOps& ops, double k, const Dense& source, const Vec& initial,
                               const Dense& target, const Dense& boundary) {
  const int n = static_cast<int>(ops.M.rows());
  const int N = static_cast<int>(boundary.cols());
  const int ni = static_cast<int>(ops.interior.size());
  const int nu = ni * N;
  auto idx = [ni](int j, int s) { return s * ni + j; };

  // K(test, trial) = A(e_trial, e_test) over interior trial/test pairs.
  Dense K(nu, nu);
  for (int s = 0; s < N; ++s) {
    for (int j = 0; j < ni; ++j) {
      Dense e = Dense::Zero(n, N);
      e(ops.interior[j], s) = 1.0;
      const Dense act = form_action_trial(ops, k, e);
      for (int s2 = 0; s2 < N; ++s2) {
        for (int j2 = 0; j2 < ni; ++j2) K(idx(j2, s2), idx(j, s)) = act(ops.interior[j2], s2);
      }
    }
  }

  // State: A(Y, Phi) = (f, Phi) + (y0, Phi^1) with Y = boundary on the boundary.
  Dense yb = Dense::Zero(n, N);
  for (int v : ops.boundary) yb.row(v) = boundary.row(v);
  const Dense act_b = form_action_trial(ops, k, yb);
  Vec rhs(nu);
  for (int s = 0; s < N; ++s) {
    for (int j = 0; j < ni; ++j) {
      const int v = ops.interior[j];
      rhs[idx(j, s)] = k * source(v, s) + (s == 0 ? initial[v] : 0.0) - act_b(v, s);
    }
  }
  const Vec yi = K.fullPivLu().solve(rhs);
  SpaceTimeSolution out;
  out.state = yb;
  for (int s = 0; s < N; ++s) {
    for (int j = 0; j < ni; ++j) out.state(ops.interior[j], s) = yi[idx(j, s)];
  }

  // Adjoint: A(Phi, Z) = sum_i k (Y^i - y_d, Phi^i) for interior Phi.
  Vec arhs(nu);
  for (int s = 0; s < N; ++s) {
    const Vec my = ops.M * out.state.col(s);
    for (int j = 0; j < ni; ++j) {
      const int v = ops.interior[j];
      arhs[idx(j, s)] = k * (my[v] - target(v, s));
    }
  }
  const Vec zi = K.transpose().fullPivLu().solve(arhs);
  out.adjoint = Dense::Zero(n, N);
  for (int s = 0; s < N; ++s) {
    for (int j = 0; j < ni; ++j) out.adjoint(ops.interior[j], s) = zi[idx(j, s)];
  }

  // Normal derivative: k (Mg d^i)_b = A(Phi_b^i, Z) - k (Y^i - y_d, phi_b).
  const int nb = static_cast<int>(ops.boundary.size());
  Dense mgbb(nb, nb);
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b) mgbb(a, b) = ops.Mg(ops.boundary[a], ops.boundary[b]);
  }
  out.normal = Dense::Zero(n, N);
  for (int s = 0; s < N; ++s) {
    const Vec my = ops.M * out.state.col(s);
    Vec r(nb);
    for (int a = 0; a < nb; ++a) {
      const int v = ops.boundary[a];
      Dense e = Dense::Zero(n, N);
      e(v, s) = 1.0;
      r[a] = form(ops, k, e, out.adjoint) - k * (my[v] - target(v, s));
    }
    const Vec d = mgbb.fullPivLu().solve(r / k);
    for (int a = 0; a < nb; ++a) out.normal(ops.boundary[a], s) = d[a];
  }
  return out;
}

/// Converts a solver-ordered field (rows = all DOFs or the boundary block) to vertex numbering.
inline Dense to_vertex(const pdeopt::FemSpace& space, const Dense& field) {
  const int n = space.n_total();
  Dense out = Dense::Zero(n, field.cols());
  const int offset = field.rows() == space.n_boundary() ? space.n_interior() : 0;
  for (int r = 0; r < field.rows(); ++r) out.row(space.dofs().to_global[r + offset]) = field.row(r);
  return out;
}

/// Oracle solution for a discretization and boundary values (boundary block, nb x N).
inline SpaceTimeSolution solve(const pdeopt::Discretization& disc, const Dense& boundary) {
  const auto& space = *disc.space;
  const DenseOps ops = assemble(space.mesh());
  const Dense source = to_vertex(space, pdeopt::extend_interior(space, disc.loads.source));
  const Vec initial = to_vertex(space, Dense(disc.loads.initial)).col(0);
  const Dense target = to_vertex(space, disc.loads.target);
  return solve(ops, disc.grid.k(), source, initial, target, to_vertex(space, boundary));
}

}  // namespace oracle
