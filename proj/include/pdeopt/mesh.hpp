#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

namespace pdeopt {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

enum class DomainKind { unit_square, blunt_polygon, inscribed_circle };

/// Geometry description of a computational domain.
///
/// Polygon kinds carry their vertex list in counter-clockwise order. The
/// blunt polygon default is a convex hexagon with a 150 degree corner at the
/// origin; any other convex polygon may be supplied through `polygon()`.
struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;
  std::vector<Point> vertices;
  int segments = 16;

  static DomainSpec unit_square();
  static DomainSpec blunt_polygon();
  static DomainSpec polygon(std::vector<Point> vertices);
  static DomainSpec inscribed_circle(int segments);
};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int marker = 0;
};

/// Conforming triangulation with its boundary edges and refinement history.
///
/// `parents[v]` names the two vertices whose edge midpoint created `v` in the
/// last refinement (both entries equal `v` for vertices inherited from the
/// coarser mesh). Vertices `0 .. n_coarse_vertices-1` keep their coarse index.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  double h_max = 0.0;
  int level = 0;
  DomainKind kind = DomainKind::unit_square;
  std::vector<std::array<int, 2>> parents;
  int n_coarse_vertices = 0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  double area() const;
  double h_min() const;
  int n_edges() const;
};

/// Ordered boundary cycle (counter-clockwise) of a simply connected mesh.
struct BoundaryGraph {
  std::vector<int> cycle;                  // vertex indices, cycle[i] -> cycle[i+1]
  std::vector<std::array<int, 2>> edges;  // (cycle[i], cycle[i+1 mod n])
  std::vector<double> lengths;
  double total_length = 0.0;

  int size() const { return static_cast<int>(cycle.size()); }
};

TriMesh build_initial_mesh(const DomainSpec& spec);

/// Structured square grid with `cells` cells per side. Cells listed in
/// `centered_cells` (as {column, row}) receive a centre vertex and are split
/// into four triangles; all other cells are split along one diagonal.
TriMesh structured_square_mesh(int cells, std::span<const std::array<int, 2>> centered_cells = {});

TriMesh refine_uniform(const TriMesh& mesh);
TriMesh refine_uniform(const TriMesh& mesh, int times);

BoundaryGraph boundary_trace(const TriMesh& mesh);

/// Checks orientation, conformity and boundary consistency; throws
/// std::runtime_error describing the first violation.
void validate_mesh(const TriMesh& mesh);

/// Interior angles (radians) of a polygon given in counter-clockwise order.
std::vector<double> interior_angles(std::span<const Point> polygon);

void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);

/// Interpolates nodal values (global vertex numbering) from the coarse mesh
/// onto the mesh produced by one uniform refinement, using its parent table.
std::vector<double> prolongate(const TriMesh& fine, std::span<const double> coarse_values);

}  // namespace pdeopt
