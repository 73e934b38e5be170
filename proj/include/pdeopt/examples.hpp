#pragma once

#include <string>

#include "pdeopt/analysis.hpp"

namespace pdeopt {

enum class ExampleId { ex1, ex2, ex3 };

const char* to_string(ExampleId id);
/// Throws std::invalid_argument for unknown ids.
ExampleId parse_example_id(const std::string& text);

/// Benchmark problem: domain, data, default box and exact solution if known.
struct ExampleDef {
  ExampleId id = ExampleId::ex1;
  DomainSpec domain;
  ProblemData data;
  ExactSolution exact;
  std::string description;
};

/// ex1: unit square, smooth unconstrained solution (alpha enters the data).
/// ex2: blunt hexagon with a 150 degree corner at the origin, singular target,
///      no exact solution, y0 = 0.
/// ex3: unit disk, box [0, 1], exact solution with an active lower bound.
ExampleDef make_example(ExampleId id, double alpha = 1.0);

/// Study mesh on refinement level `level` >= 1. Level 1 has 31 (ex1), 61 (ex2)
/// and 25 (ex3) vertices; each further level refines uniformly once.
TriMesh example_mesh(ExampleId id, int level);

struct ExampleValues {
  double f = 0.0;
  double yd = 0.0;
  bool has_exact = false;
  double u = 0.0, y = 0.0, z = 0.0;
};

ExampleValues evaluate_example_data(ExampleId id, const Point& x, double t, double alpha = 1.0);

}  // namespace pdeopt
