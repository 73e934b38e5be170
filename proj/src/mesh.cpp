#include "pdeopt/mesh.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace pdeopt {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double polygon_area(std::span<const Point> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * s;
}

void check_convex(std::span<const Point> poly) {
  if (poly.size() < 3) {
    throw std::invalid_argument("polygon needs at least 3 vertices");
  }
  if (polygon_area(poly) <= 0.0) {
    throw std::invalid_argument("polygon vertices must be counter-clockwise");
  }
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p0 = poly[(i + poly.size() - 1) % poly.size()];
    const Point& p1 = poly[i];
    const Point& p2 = poly[(i + 1) % poly.size()];
    if (cross(p1 - p0, p2 - p1) <= 0.0) {
      std::ostringstream msg;
      msg << "polygon is not strictly convex at vertex " << i << " (" << p1.x << ", " << p1.y << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

void finalize(TriMesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, norm(mesh.vertices[t[(e + 1) % 3]] - mesh.vertices[t[e]]));
    }
  }
  mesh.h_max = h;
  if (mesh.parents.size() != mesh.vertices.size()) {
    mesh.parents.resize(mesh.vertices.size());
    for (int v = 0; v < mesh.n_vertices(); ++v) mesh.parents[v] = {v, v};
    mesh.n_coarse_vertices = mesh.n_vertices();
  }
}

TriMesh fan_mesh(std::span<const Point> poly, DomainKind kind, int marker_stride) {
  TriMesh mesh;
  mesh.kind = kind;
  const int n = static_cast<int>(poly.size());
  mesh.vertices.assign(poly.begin(), poly.end());
  Point c{};
  for (const auto& p : poly) c = c + p;
  mesh.vertices.push_back((1.0 / n) * c);
  for (int i = 0; i < n; ++i) {
    mesh.triangles.push_back({n, i, (i + 1) % n});
    mesh.boundary_edges.push_back({i, (i + 1) % n, marker_stride ? i : 0});
  }
  finalize(mesh);
  return mesh;
}

// Centre vertex, a ring of n/2 vertices at radius 1/2 and n boundary vertices.
TriMesh ring_disk_mesh(int n) {
  TriMesh mesh;
  mesh.kind = DomainKind::inscribed_circle;
  const int m = n / 2;
  const double dphi = 2.0 * std::numbers::pi / n;
  mesh.vertices.push_back({0.0, 0.0});
  for (int j = 0; j < m; ++j) {
    mesh.vertices.push_back({0.5 * std::cos(2 * j * dphi), 0.5 * std::sin(2 * j * dphi)});
  }
  for (int j = 0; j < n; ++j) {
    mesh.vertices.push_back({std::cos(j * dphi), std::sin(j * dphi)});
  }
  auto ring = [m](int j) { return 1 + (j % m); };
  auto bnd = [m, n](int j) { return 1 + m + (j % n); };
  for (int j = 0; j < m; ++j) {
    mesh.triangles.push_back({0, ring(j), ring(j + 1)});
    mesh.triangles.push_back({ring(j), bnd(2 * j), bnd(2 * j + 1)});
    mesh.triangles.push_back({ring(j), bnd(2 * j + 1), ring(j + 1)});
    mesh.triangles.push_back({ring(j + 1), bnd(2 * j + 1), bnd(2 * j + 2)});
  }
  for (int j = 0; j < n; ++j) {
    mesh.boundary_edges.push_back({bnd(j), bnd(j + 1), 0});
  }
  finalize(mesh);
  return mesh;
}

}  // namespace

DomainSpec DomainSpec::unit_square() {
  DomainSpec s;
  s.kind = DomainKind::unit_square;
  s.vertices = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  return s;
}

DomainSpec DomainSpec::blunt_polygon() {
  // Exterior turning angles 30 deg at the origin and 66 deg elsewhere, symmetric
  // about the bisector of the origin corner: interior angles 150 deg and 5 x 114 deg.
  DomainSpec s;
  s.kind = DomainKind::blunt_polygon;
  s.vertices = {{0.0, 0.0},
                {1.0, 0.0},
                {1.4067366430758002, 0.91354545764260087},
                {0.51126510634345368, 1.908067353010874},
                {-0.76149694051678507, 1.4945218953682735},
                {-0.86602540378443837, 0.50000000000000011}};
  return s;
}

DomainSpec DomainSpec::polygon(std::vector<Point> vertices) {
  DomainSpec s;
  s.kind = DomainKind::blunt_polygon;
  s.vertices = std::move(vertices);
  return s;
}

DomainSpec DomainSpec::inscribed_circle(int segments) {
  DomainSpec s;
  s.kind = DomainKind::inscribed_circle;
  s.segments = segments;
  return s;
}

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double TriMesh::area() const {
  double s = 0.0;
  for (int t = 0; t < n_triangles(); ++t) s += triangle_area(t);
  return s;
}

double TriMesh::h_min() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      h = std::min(h, norm(vertices[t[(e + 1) % 3]] - vertices[t[e]]));
    }
  }
  return h;
}

int TriMesh::n_edges() const {
  // Euler characteristic 1 for a simply connected triangulation.
  return n_vertices() + n_triangles() - 1;
}

TriMesh build_initial_mesh(const DomainSpec& spec) {
  switch (spec.kind) {
    case DomainKind::unit_square:
      return structured_square_mesh(1);
    case DomainKind::blunt_polygon:
      check_convex(spec.vertices);
      return fan_mesh(spec.vertices, DomainKind::blunt_polygon, 1);
    case DomainKind::inscribed_circle: {
      if (spec.segments < 3) {
        throw std::invalid_argument("inscribed_circle needs at least 3 segments");
      }
      if (spec.segments >= 8 && spec.segments % 2 == 0) {
        return ring_disk_mesh(spec.segments);
      }
      std::vector<Point> poly;
      for (int j = 0; j < spec.segments; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / spec.segments;
        poly.push_back({std::cos(phi), std::sin(phi)});
      }
      TriMesh mesh = fan_mesh(poly, DomainKind::inscribed_circle, 0);
      mesh.vertices.back() = {0.0, 0.0};
      return mesh;
    }
  }
  throw std::invalid_argument("unknown domain kind");
}

TriMesh structured_square_mesh(int cells, std::span<const std::array<int, 2>> centered_cells) {
  if (cells < 1) throw std::invalid_argument("structured_square_mesh: cells must be >= 1");
  TriMesh mesh;
  mesh.kind = DomainKind::unit_square;
  const int n = cells;
  const double h = 1.0 / n;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * h, j * h});
  }
  std::vector<int> centre(n * n, -1);
  for (const auto& c : centered_cells) {
    if (c[0] < 0 || c[0] >= n || c[1] < 0 || c[1] >= n) {
      throw std::invalid_argument("structured_square_mesh: centred cell out of range");
    }
    int& slot = centre[c[1] * n + c[0]];
    if (slot < 0) {
      slot = mesh.n_vertices();
      mesh.vertices.push_back({(c[0] + 0.5) * h, (c[1] + 0.5) * h});
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      const int c = centre[j * n + i];
      if (c >= 0) {
        mesh.triangles.push_back({v00, v10, c});
        mesh.triangles.push_back({v10, v11, c});
        mesh.triangles.push_back({v11, v01, c});
        mesh.triangles.push_back({v01, v00, c});
      } else {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      }
    }
  }
  for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), 0});
  for (int j = 0; j < n; ++j) mesh.boundary_edges.push_back({id(n, j), id(n, j + 1), 1});
  for (int i = n; i > 0; --i) mesh.boundary_edges.push_back({id(i, n), id(i - 1, n), 2});
  for (int j = n; j > 0; --j) mesh.boundary_edges.push_back({id(0, j), id(0, j - 1), 3});
  finalize(mesh);
  return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh fine;
  fine.kind = mesh.kind;
  fine.level = mesh.level + 1;
  fine.vertices = mesh.vertices;
  fine.n_coarse_vertices = mesh.n_vertices();
  fine.parents.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.n_vertices(); ++v) fine.parents[v] = {v, v};

  std::map<EdgeKey, bool> is_boundary;
  for (const auto& e : mesh.boundary_edges) is_boundary[edge_key(e.a, e.b)] = true;

  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    const EdgeKey key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Point p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    if (mesh.kind == DomainKind::inscribed_circle && is_boundary.count(key)) {
      p = (1.0 / norm(p)) * p;
    }
    const int id = static_cast<int>(fine.vertices.size());
    fine.vertices.push_back(p);
    fine.parents.push_back({key.first, key.second});
    midpoint.emplace(key, id);
    return id;
  };

  fine.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    fine.triangles.push_back({a, ab, ca});
    fine.triangles.push_back({ab, b, bc});
    fine.triangles.push_back({ca, bc, c});
    fine.triangles.push_back({ab, bc, ca});
  }
  fine.boundary_edges.reserve(2 * mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint.at(edge_key(e.a, e.b));
    fine.boundary_edges.push_back({e.a, m, e.marker});
    fine.boundary_edges.push_back({m, e.b, e.marker});
  }
  finalize(fine);
  return fine;
}

TriMesh refine_uniform(const TriMesh& mesh, int times) {
  TriMesh m = mesh;
  for (int i = 0; i < times; ++i) m = refine_uniform(m);
  return m;
}

BoundaryGraph boundary_trace(const TriMesh& mesh) {
  if (mesh.boundary_edges.empty()) throw std::runtime_error("boundary_trace: mesh has no boundary edges");
  std::map<int, std::vector<int>> adj;
  for (const auto& e : mesh.boundary_edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (const auto& [v, nb] : adj) {
    if (nb.size() != 2) {
      throw std::runtime_error("boundary_trace: boundary vertex " + std::to_string(v) +
                               " does not have exactly two boundary neighbours");
    }
  }
  BoundaryGraph g;
  const int start = adj.begin()->first;
  int prev = -1, cur = start;
  do {
    g.cycle.push_back(cur);
    const auto& nb = adj[cur];
    const int next = (nb[0] != prev) ? nb[0] : nb[1];
    prev = cur;
    cur = next;
  } while (cur != start && g.cycle.size() <= adj.size());
  if (g.cycle.size() != adj.size()) {
    throw std::runtime_error("boundary_trace: boundary is disconnected (" + std::to_string(g.cycle.size()) + " of " +
                             std::to_string(adj.size()) + " vertices reachable)");
  }
  std::vector<Point> poly;
  for (int v : g.cycle) poly.push_back(mesh.vertices[v]);
  if (polygon_area(poly) < 0.0) std::reverse(g.cycle.begin() + 1, g.cycle.end());

  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    const int a = g.cycle[i], b = g.cycle[(i + 1) % n];
    g.edges.push_back({a, b});
    g.lengths.push_back(norm(mesh.vertices[b] - mesh.vertices[a]));
    g.total_length += g.lengths.back();
  }
  return g;
}

void validate_mesh(const TriMesh& mesh) {
  const int nv = mesh.n_vertices();
  std::map<EdgeKey, int> count;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw std::runtime_error("triangle " + std::to_string(t) + " references invalid vertex");
    }
    if (!(mesh.triangle_area(t) > 0.0)) {
      throw std::runtime_error("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    for (int e = 0; e < 3; ++e) ++count[edge_key(tri[e], tri[(e + 1) % 3])];
  }
  std::map<EdgeKey, int> boundary;
  for (const auto& e : mesh.boundary_edges) ++boundary[edge_key(e.a, e.b)];
  for (const auto& [key, c] : count) {
    if (c > 2) throw std::runtime_error("edge shared by more than two triangles");
    const bool marked = boundary.count(key) > 0;
    if ((c == 1) != marked) {
      throw std::runtime_error("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                               ") boundary marking inconsistent with triangle adjacency");
    }
  }
  for (const auto& [key, c] : boundary) {
    if (c != 1 || !count.count(key)) throw std::runtime_error("boundary edge list has duplicates or stray edges");
  }
  // Boundary edges must lie on the domain boundary; a hanging vertex would
  // produce a single-triangle edge in the interior.
  if (mesh.kind == DomainKind::inscribed_circle) {
    for (const auto& e : mesh.boundary_edges) {
      for (int v : {e.a, e.b}) {
        if (std::abs(norm(mesh.vertices[v]) - 1.0) > 1e-12) {
          throw std::runtime_error("circle boundary vertex off the unit circle");
        }
      }
    }
  } else {
    const BoundaryGraph g = boundary_trace(mesh);
    const double tol = 1e-12;
    // The hull of the boundary cycle must be the cycle itself (convex domain).
    for (int i = 0; i < g.size(); ++i) {
      const Point a = mesh.vertices[g.edges[i][0]], b = mesh.vertices[g.edges[i][1]];
      const Point c = mesh.vertices[g.edges[(i + 1) % g.size()][1]];
      if (cross(b - a, c - b) < -tol) throw std::runtime_error("boundary cycle is not convex");
    }
  }
}

std::vector<double> interior_angles(std::span<const Point> poly) {
  std::vector<double> angles;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[(i + n - 1) % n] - poly[i];
    const Point b = poly[(i + 1) % n] - poly[i];
    angles.push_back(std::atan2(cross(b, a), dot(a, b)));
  }
  return angles;
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << mesh.n_vertices() << ' ' << mesh.n_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
  const auto old = out.precision(17);
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << '\n';
  out.precision(old);
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) out << e.a << ' ' << e.b << ' ' << e.marker << '\n';
}

TriMesh read_mesh(std::istream& in) {
  long nv = 0, nt = 0, nb = 0;
  if (!(in >> nv >> nt >> nb) || nv < 3 || nt < 1 || nb < 3) {
    throw std::runtime_error("read_mesh: malformed header, expected `nv nt nb`");
  }
  TriMesh mesh;
  mesh.kind = DomainKind::blunt_polygon;
  mesh.vertices.resize(nv);
  for (auto& p : mesh.vertices) {
    if (!(in >> p.x >> p.y)) throw std::runtime_error("read_mesh: truncated vertex block");
  }
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw std::runtime_error("read_mesh: truncated triangle block");
  }
  mesh.boundary_edges.resize(nb);
  for (auto& e : mesh.boundary_edges) {
    if (!(in >> e.a >> e.b >> e.marker)) throw std::runtime_error("read_mesh: truncated boundary block");
  }
  bool on_circle = true;
  for (const auto& e : mesh.boundary_edges) {
    on_circle = on_circle && std::abs(norm(mesh.vertices[e.a]) - 1.0) < 1e-12;
  }
  if (on_circle) mesh.kind = DomainKind::inscribed_circle;
  finalize(mesh);
  return mesh;
}

std::vector<double> prolongate(const TriMesh& fine, std::span<const double> coarse_values) {
  if (static_cast<int>(coarse_values.size()) != fine.n_coarse_vertices) {
    throw std::invalid_argument("prolongate: coarse vector does not match the parent mesh");
  }
  std::vector<double> out(fine.n_vertices());
  for (int v = 0; v < fine.n_vertices(); ++v) {
    const auto& p = fine.parents[v];
    out[v] = 0.5 * (coarse_values[p[0]] + coarse_values[p[1]]);
  }
  return out;
}

}  // namespace pdeopt
