#include "pdeopt/examples.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdeopt {

namespace {

constexpr double pi = std::numbers::pi;

// ex1 building blocks.
double w1(const Point& x) { return x.x * (1 - x.x) + x.y * (1 - x.y); }
double p1(const Point& x) { return x.x * x.y * (1 - x.x) * (1 - x.y); }

// ex2: the singular factor is evaluated slightly inside the domain at the corner.
Point ex2_regularized(const Point& x) {
  if (x.x != 0.0 || x.y != 0.0) return x;
  static const Point bisector = [] {
    const auto v = DomainSpec::blunt_polygon().vertices;
    const Point a = v[1] - v[0], b = v.back() - v[0];
    const Point d = (1.0 / norm(a)) * a + (1.0 / norm(b)) * b;
    return (1.0 / norm(d)) * d;
  }();
  return 1e-12 * bisector;
}
double ex2_g(const Point& x) {
  const Point p = ex2_regularized(x);
  return std::pow(p.x * p.x + p.y * p.y, -1.0 / 3.0);
}

// ex3 in Cartesian form with s = sin^3(pi t).
double ex3_s(double t) { return std::pow(std::sin(pi * t), 3); }
double ex3_ds(double t) { return 3 * pi * std::pow(std::sin(pi * t), 2) * std::cos(pi * t); }

}  // namespace

const char* to_string(ExampleId id) {
  switch (id) {
    case ExampleId::ex1: return "ex1";
    case ExampleId::ex2: return "ex2";
    case ExampleId::ex3: return "ex3";
  }
  return "?";
}

ExampleId parse_example_id(const std::string& text) {
  if (text == "ex1") return ExampleId::ex1;
  if (text == "ex2") return ExampleId::ex2;
  if (text == "ex3") return ExampleId::ex3;
  throw std::invalid_argument("unknown example '" + text + "'");
}

ExampleValues evaluate_example_data(ExampleId id, const Point& x, double t, double alpha) {
  ExampleValues v;
  switch (id) {
    case ExampleId::ex1: {
      const double w = w1(x), p = p1(x), s = std::sin(pi * t), c = std::cos(pi * t);
      v.f = -4.0 / alpha * s - pi / alpha * w * c;
      v.yd = -(2.0 + 1.0 / alpha) * w * s + pi * p * c;
      v.has_exact = true;
      v.u = -w * s / alpha;
      v.y = v.u;
      v.z = p * s;
      break;
    }
    case ExampleId::ex2: {
      v.f = 1.0;
      const double g = ex2_g(x);
      v.yd = t < 0.5 ? t * t * g : -t * t * g;
      break;
    }
    case ExampleId::ex3: {
      const double r = norm(x), xp = std::max(0.0, x.x);
      const double s = ex3_s(t), ds = ex3_ds(t);
      const double cube = xp * xp * xp;
      v.f = cube * ds - 6.0 * xp * s;
      v.y = cube * s;
      // Delta(x1^3 (r - 1)) = 6 x1 r + 7 x1^3 / r - 6 x1.
      const double lap = r > 0.0 ? 6 * x.x * r + 7 * x.x * x.x * x.x / r - 6 * x.x : 0.0;
      v.yd = v.y + x.x * x.x * x.x * (r - 1) * ds + lap * s;
      v.has_exact = true;
      const double c = r > 0.0 ? x.x / r : 0.0;
      v.u = std::max(0.0, c * c * c) * s;
      v.z = x.x * x.x * x.x * (r - 1) * s;
      break;
    }
  }
  return v;
}

ExampleDef make_example(ExampleId id, double alpha) {
  ExampleDef def;
  def.id = id;
  ProblemData& d = def.data;
  d.alpha = alpha;
  d.T = 1.0;
  d.y0 = [](const Point&) { return 0.0; };
  switch (id) {
    case ExampleId::ex1:
      def.domain = DomainSpec::unit_square();
      def.description = "unit square, smooth unconstrained solution";
      d.f = [alpha](const Point& x, double t) { return -4.0 / alpha * std::sin(pi * t) - pi / alpha * w1(x) * std::cos(pi * t); };
      d.yd = [alpha](const Point& x, double t) {
        return -(2.0 + 1.0 / alpha) * w1(x) * std::sin(pi * t) + pi * p1(x) * std::cos(pi * t);
      };
      def.exact.u = [alpha](const Point& x, double t) { return -w1(x) * std::sin(pi * t) / alpha; };
      def.exact.y = def.exact.u;
      def.exact.z = [](const Point& x, double t) { return p1(x) * std::sin(pi * t); };
      break;
    case ExampleId::ex2:
      def.domain = DomainSpec::blunt_polygon();
      def.description = "convex hexagon with a 150 degree corner, singular target";
      d.f = [](const Point&, double) { return 1.0; };
      d.yd = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex2, x, t).yd; };
      break;
    case ExampleId::ex3:
      def.domain = DomainSpec::inscribed_circle(16);
      def.description = "unit disk, box [0, 1]";
      d.box = Box{0.0, 1.0};
      d.f = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex3, x, t).f; };
      d.yd = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex3, x, t).yd; };
      if (alpha == 1.0) {
        def.exact.u = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex3, x, t).u; };
        def.exact.y = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex3, x, t).y; };
        def.exact.z = [](const Point& x, double t) { return evaluate_example_data(ExampleId::ex3, x, t).z; };
      }
      break;
  }
  return def;
}

TriMesh example_mesh(ExampleId id, int level) {
  if (level < 1) throw std::invalid_argument("example_mesh: level must be >= 1");
  TriMesh base;
  switch (id) {
    case ExampleId::ex1: {
      static const std::array<std::array<int, 2>, 6> centred{{{1, 1}, {2, 1}, {1, 2}, {2, 2}, {0, 0}, {3, 3}}};
      base = structured_square_mesh(4, centred);
      break;
    }
    case ExampleId::ex2:
      base = refine_uniform(build_initial_mesh(DomainSpec::blunt_polygon()), 2);
      break;
    case ExampleId::ex3:
      base = build_initial_mesh(DomainSpec::inscribed_circle(16));
      break;
  }
  base.level = 1;
  base.parents.clear();
  base.n_coarse_vertices = base.n_vertices();
  base.parents.resize(base.vertices.size());
  for (int v = 0; v < base.n_vertices(); ++v) base.parents[v] = {v, v};
  TriMesh mesh = refine_uniform(base, level - 1);
  mesh.level = level;
  return mesh;
}

}  // namespace pdeopt
