#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace akf {

/**
 * Truncated periodic phase-space box [-L_x, L_x)^{dim_x} x [-L_v, L_v)^{dim_v}.
 *
 * Lattice nodes sit at (i - n/2) * h with h = 2L/n, so the origin is a node
 * and the lattice is symmetric under w -> -w modulo the period. Phase-space
 * arrays are row-major with the x axes outermost, so the velocity block of
 * one spatial cell is contiguous.
 */
struct GridSpec {
  int dim_x = 1;
  int dim_v = 1;
  int n_x = 256;
  int n_v = 256;
  double half_width_x = 8.0;
  double half_width_v = 8.0;

  /// Throws ParameterError unless dims are 1/2, sizes are powers of two
  /// >= 8 and half widths are positive.
  void validate() const;

  double h_x() const { return 2.0 * half_width_x / n_x; }
  double h_v() const { return 2.0 * half_width_v / n_v; }

  std::size_t x_cells() const;
  std::size_t v_cells() const;
  std::size_t phase_cells() const { return x_cells() * v_cells(); }

  double cell_volume_x() const;
  double cell_volume_v() const;
  double cell_volume_phase() const { return cell_volume_x() * cell_volume_v(); }

  double box_volume_x() const;
  double box_volume_v() const;
  double box_volume_phase() const { return box_volume_x() * box_volume_v(); }

  /// Total number of phase-space dimensions (the heat kernel's n).
  int phase_dims() const { return dim_x + dim_v; }

  double coord_x(int i) const { return (i - n_x / 2) * h_x(); }
  double coord_v(int i) const { return (i - n_v / 2) * h_v(); }

  /// Per-axis indices of a flat spatial / velocity index (unused axes are 0).
  std::array<int, 2> x_index(std::size_t ix) const;
  std::array<int, 2> v_index(std::size_t iv) const;

  std::array<double, 2> x_point(std::size_t ix) const;
  std::array<double, 2> v_point(std::size_t iv) const;

  /// Euclidean norm of the velocity node.
  double speed(std::size_t iv) const;

  std::string describe() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws ShapeError when the grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* context);

}  // namespace akf
