#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "akf/grid.hpp"

namespace akf {

/// Relative size of spectral round-off negatives that are silently clamped.
inline constexpr double kClampRelative = 1e-12;

/// Sentinel for the max norm in lq_norm.
inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

enum class FieldRole { density, c, c_hat, c_inf, p_tilde, j, m, a, alpha_of_c, generic };

std::string_view role_name(FieldRole role);

/// Density sample p(t, x, v) on the full phase-space lattice.
class PhaseField {
 public:
  PhaseField(GridSpec grid, std::vector<double> values, double time = 0.0);

  static PhaseField zeros(const GridSpec& grid, double time = 0.0);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  double cell_volume() const { return grid_.cell_volume_phase(); }

  /// Velocity block of one spatial cell.
  std::span<const double> velocity_block(std::size_t ix) const {
    return std::span<const double>(values_).subspan(ix * grid_.v_cells(), grid_.v_cells());
  }

  PhaseField with_time(double time) const { return PhaseField(grid_, values_, time); }
  std::vector<double> take_values() && { return std::move(values_); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double time_ = 0.0;
};

/// Scalar field on the spatial lattice (c, c_hat, p_tilde, j, m, a, ...).
class SpatialField {
 public:
  SpatialField(GridSpec grid, std::vector<double> values, double time = 0.0,
               FieldRole role = FieldRole::generic);

  static SpatialField zeros(const GridSpec& grid, double time = 0.0,
                            FieldRole role = FieldRole::generic);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  FieldRole role() const { return role_; }
  double cell_volume() const { return grid_.cell_volume_x(); }

  SpatialField with_time(double time) const { return SpatialField(grid_, values_, time, role_); }
  SpatialField with_role(FieldRole role) const { return SpatialField(grid_, values_, time_, role); }
  std::vector<double> take_values() && { return std::move(values_); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double time_ = 0.0;
  FieldRole role_ = FieldRole::generic;
};

/// Throws FiniteError naming the first non-finite flat index.
void require_finite(std::span<const double> values, std::string_view what);

/// Sum of values times cell volume. Rejects non-finite data.
double integrate(std::span<const double> values, double cell_volume);
double integrate_phase(const PhaseField& field);
double integrate_spatial(const SpatialField& field);

/// Discrete L^q norm with cell-volume weights; q = kInfNorm gives max |value|.
double lq_norm(std::span<const double> values, double cell_volume, double q);
double lq_norm(const PhaseField& field, double q);
double lq_norm(const SpatialField& field, double q);

double max_abs(std::span<const double> values);

/**
 * Clamps round-off negatives of a field that is nonnegative in exact
 * arithmetic. Values below -kClampRelative * max|values| raise SignError;
 * anything between that threshold and zero becomes zero.
 */
void clamp_nonnegative(std::span<double> values, std::string_view what);

/// Mirror image for fields that are nonpositive in exact arithmetic; the
/// threshold is relative to `scale`.
void clamp_nonpositive(std::span<double> values, double scale, std::string_view what);

}  // namespace akf
