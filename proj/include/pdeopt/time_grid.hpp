#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pdeopt {

/// Equidistant partition 0 = t_0 < ... < t_N = T with slabs I_i = (t_{i-1}, t_i].
/// Slabs are addressed 0-based throughout the code: slab s covers (t_s, t_{s+1}].
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double final_time, int slabs) : T(final_time), N(slabs) {
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
      throw std::invalid_argument("TimeGrid: final time must be positive");
    }
    if (slabs < 1) throw std::invalid_argument("TimeGrid: need N >= 1, got " + std::to_string(slabs));
  }

  double k() const { return T / N; }
  double t(int i) const { return i == N ? T : i * k(); }

  /// Two-point Gauss nodes inside slab s.
  std::array<double, 2> gauss_nodes(int s) const {
    constexpr double offset = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2
    return {t(s) + offset * k(), t(s) + (1.0 - offset) * k()};
  }
};

}  // namespace pdeopt
