#include "pdeopt/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace pdeopt {

double error_L2L2_domain(const FemSpace& space, const TimeGrid& grid, const Matrix& field,
                         const SpaceTimeFunction& exact) {
  const int n = space.n_total(), ni = space.n_interior();
  if ((field.rows() != n && field.rows() != ni) || field.cols() != grid.N) {
    throw std::invalid_argument("error_L2L2_domain: field shape does not match space and grid");
  }
  const bool interior_only = field.rows() == ni && ni != n;
  const auto& rule = triangle_rule();
  const auto& trule = time_rule();
  const double k = grid.k();
  double acc = 0.0;
  for (int s = 0; s < grid.N; ++s) {
    const auto tg = grid.gauss_nodes(s);
    const auto col = field.col(s);
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
      const auto& quad = space.triangle_quadrature(t);
      const auto& d = space.triangle_dofs(t);
      double c[3];
      for (int i = 0; i < 3; ++i) c[i] = (interior_only && d[i] >= ni) ? 0.0 : col[d[i]];
      for (int q = 0; q < FemSpace::kQuadPoints; ++q) {
        const auto& l = rule.points[q];
        const double vh = l[0] * c[0] + l[1] * c[1] + l[2] * c[2];
        for (int g = 0; g < 2; ++g) {
          const double e = exact(quad.points[q], tg[g]) - vh;
          acc += k * trule.weights[g] * quad.weights[q] * e * e;
        }
      }
    }
  }
  return std::sqrt(acc);
}

double error_L2L2_boundary(const FemSpace& space, const TimeGrid& grid, const ControlIterate& control,
                           const SpaceTimeFunction& exact) {
  const int nb = space.n_boundary();
  if (control.values.rows() != nb || control.values.cols() != grid.N) {
    throw std::invalid_argument("error_L2L2_boundary: control shape does not match space and grid");
  }
  const Box box = control.pointwise_box();
  const auto& erule = edge_rule();
  const auto& trule = time_rule();
  const double k = grid.k();
  const TriMesh& mesh = space.mesh();
  double acc = 0.0;
  for (int s = 0; s < grid.N; ++s) {
    const auto tg = grid.gauss_nodes(s);
    const auto v = control.values.col(s);
    for (int e = 0; e < nb; ++e) {
      const int a = e, b = (e + 1) % nb;
      const Point pa = mesh.vertices[space.boundary().edges[e][0]];
      const Point pb = mesh.vertices[space.boundary().edges[e][1]];
      const double len = space.boundary().lengths[e];
      const auto pieces = clamp_breakpoints(v[a], v[b], box);
      for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
        const double s0 = pieces[p], s1 = pieces[p + 1];
        if (s1 <= s0) continue;
        for (std::size_t q = 0; q < erule.points.size(); ++q) {
          const double sq = s0 + erule.points[q] * (s1 - s0);
          const Point x = (1.0 - sq) * pa + sq * pb;
          const double uh = box.clamp(v[a] + sq * (v[b] - v[a]));
          for (int g = 0; g < 2; ++g) {
            const double diff = exact(x, tg[g]) - uh;
            acc += k * trule.weights[g] * len * (s1 - s0) * erule.weights[q] * diff * diff;
          }
        }
      }
    }
  }
  return std::sqrt(acc);
}

std::vector<std::optional<double>> eoc(std::span<const double> errors) {
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t j = 1; j < errors.size(); ++j) {
    if (errors[j - 1] > 0.0 && errors[j] > 0.0 && std::isfinite(errors[j - 1]) && std::isfinite(errors[j])) {
      out[j] = std::log2(errors[j - 1] / errors[j]);
    }
  }
  return out;
}

std::vector<std::optional<double>> eoc_dof(std::span<const double> errors, std::span<const double> dofs,
                                           int dimension) {
  if (dofs.size() != errors.size()) throw std::invalid_argument("eoc_dof: errors and dofs differ in length");
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t j = 1; j < errors.size(); ++j) {
    const bool valid = errors[j - 1] > 0.0 && errors[j] > 0.0 && std::isfinite(errors[j - 1]) &&
                       std::isfinite(errors[j]) && dofs[j] > dofs[j - 1] && dofs[j - 1] > 0.0;
    if (valid) out[j] = dimension * std::log(errors[j - 1] / errors[j]) / std::log(dofs[j] / dofs[j - 1]);
  }
  return out;
}

std::optional<double> average_order(std::span<const std::optional<double>> orders, std::size_t first,
                                    std::size_t last) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t j = first; j <= last && j < orders.size(); ++j) {
    if (orders[j]) {
      sum += *orders[j];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

void fill_orders(std::vector<ConvergenceRecord>& records) {
  std::vector<double> u, y, z;
  for (const auto& r : records) {
    u.push_back(r.err_u);
    y.push_back(r.err_y);
    z.push_back(r.err_z);
  }
  const auto ou = eoc(u), oy = eoc(y), oz = eoc(z);
  for (std::size_t j = 0; j < records.size(); ++j) {
    records[j].order_u = ou[j];
    records[j].order_y = oy[j];
    records[j].order_z = oz[j];
  }
}

void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  const auto old_precision = out.precision(12);
  const auto old_flags = out.flags();
  out.unsetf(std::ios::floatfield);
  auto opt = [&out](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << "level,err_u,order_u,err_y,order_y,err_z,order_z\n";
  for (const auto& r : records) {
    out << r.descriptor << ',' << r.err_u << ',';
    opt(r.order_u);
    out << ',' << r.err_y << ',';
    opt(r.order_y);
    out << ',' << r.err_z << ',';
    opt(r.order_z);
    out << '\n';
  }
  out.precision(old_precision);
  out.flags(old_flags);
}

namespace {

// Chain of meshes from the coarse mesh up to the fine one.
std::vector<TriMesh> hierarchy(const TriMesh& coarse, const TriMesh& fine) {
  std::vector<TriMesh> chain;
  TriMesh current = coarse;
  while (current.n_vertices() < fine.n_vertices()) {
    current = refine_uniform(current);
    chain.push_back(current);
    if (chain.size() > 12) break;
  }
  if (current.n_vertices() != fine.n_vertices() || current.n_triangles() != fine.n_triangles()) {
    throw std::invalid_argument("reference_solution_error: meshes are not nested");
  }
  for (int v = 0; v < fine.n_vertices(); ++v) {
    if (norm(current.vertices[v] - fine.vertices[v]) > 1e-12) {
      throw std::invalid_argument("reference_solution_error: meshes are not nested");
    }
  }
  return chain;
}

Vector transfer(const FemSpace& coarse, const FemSpace& fine, const std::vector<TriMesh>& chain, const Vector& c) {
  std::vector<double> values = coarse.to_vertex_order(c);
  for (const auto& m : chain) values = prolongate(m, values);
  return fine.from_vertex_order(values);
}

}  // namespace

ConvergenceRecord reference_solution_error(const LevelSolution& fine, const LevelSolution& coarse) {
  const FemSpace& fs = *fine.space;
  const FemSpace& cs = *coarse.space;
  if (fine.grid.N % coarse.grid.N != 0 || std::abs(fine.grid.T - coarse.grid.T) > 1e-14) {
    throw std::invalid_argument("reference_solution_error: time grids are not nested");
  }
  if (coarse.control.mode != fine.control.mode) {
    throw std::invalid_argument("reference_solution_error: control modes differ");
  }
  const auto chain = hierarchy(cs.mesh(), fs.mesh());
  const int ratio = fine.grid.N / coarse.grid.N;
  const double k = fine.grid.k();
  const int ni_c = cs.n_interior(), ni_f = fs.n_interior(), nb_f = fs.n_boundary();
  const Box box = coarse.control.pointwise_box();

  double eu = 0.0, ey = 0.0, ez = 0.0;
  Vector yc, zc, uc;
  for (int s = 0; s < fine.grid.N; ++s) {
    const int sc = s / ratio;
    if (s % ratio == 0) {
      yc = transfer(cs, fs, chain, coarse.state.col(sc));
      Vector zfull = Vector::Zero(cs.n_total());
      zfull.head(ni_c) = coarse.adjoint.col(sc);
      zc = transfer(cs, fs, chain, zfull).head(ni_f);
      Vector ufull = Vector::Zero(cs.n_total());
      ufull.tail(cs.n_boundary()) = coarse.control.values.col(sc);
      uc = transfer(cs, fs, chain, ufull).tail(nb_f);
    }
    const Vector dy = yc - fine.state.col(s);
    ey += k * fs.norm_sq(dy);
    const Vector dz = zc - fine.adjoint.col(s);
    ez += k * dz.dot(fs.mass_ii() * dz);
    if (box.bounded()) {
      eu += k * clamped_difference_sq(fs, uc, box, fine.control.values.col(s), box);
    } else {
      const Vector du = uc - fine.control.values.col(s);
      eu += k * fs.boundary_norm_sq(du);
    }
  }
  ConvergenceRecord r;
  r.dof = cs.n_total();
  r.N = coarse.grid.N;
  r.level = cs.mesh().level;
  r.descriptor = r.dof;
  r.err_u = std::sqrt(eu);
  r.err_y = std::sqrt(ey);
  r.err_z = std::sqrt(ez);
  return r;
}

}  // namespace pdeopt
