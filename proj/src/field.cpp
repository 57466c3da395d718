#include "akf/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "akf/errors.hpp"

namespace akf {

std::string_view role_name(FieldRole role) {
  switch (role) {
    case FieldRole::density: return "p";
    case FieldRole::c: return "c";
    case FieldRole::c_hat: return "c_hat";
    case FieldRole::c_inf: return "c_inf";
    case FieldRole::p_tilde: return "p_tilde";
    case FieldRole::j: return "j";
    case FieldRole::m: return "m";
    case FieldRole::a: return "a";
    case FieldRole::alpha_of_c: return "alpha_of_c";
    case FieldRole::generic: return "generic";
  }
  return "generic";
}

PhaseField::PhaseField(GridSpec grid, std::vector<double> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.phase_cells())
    throw ShapeError("PhaseField: expected " + std::to_string(grid_.phase_cells()) +
                     " values, got " + std::to_string(values_.size()));
}

PhaseField PhaseField::zeros(const GridSpec& grid, double time) {
  return PhaseField(grid, std::vector<double>(grid.phase_cells(), 0.0), time);
}

SpatialField::SpatialField(GridSpec grid, std::vector<double> values, double time, FieldRole role)
    : grid_(grid), values_(std::move(values)), time_(time), role_(role) {
  if (values_.size() != grid_.x_cells())
    throw ShapeError("SpatialField: expected " + std::to_string(grid_.x_cells()) +
                     " values, got " + std::to_string(values_.size()));
}

SpatialField SpatialField::zeros(const GridSpec& grid, double time, FieldRole role) {
  return SpatialField(grid, std::vector<double>(grid.x_cells(), 0.0), time, role);
}

void require_finite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw FiniteError(std::string(what) + ": non-finite value at flat index " +
                        std::to_string(i));
  }
}

double integrate(std::span<const double> values, double cell_volume) {
  require_finite(values, "integrate");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * cell_volume;
}

double integrate_phase(const PhaseField& field) {
  return integrate(field.values(), field.cell_volume());
}

double integrate_spatial(const SpatialField& field) {
  return integrate(field.values(), field.cell_volume());
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double lq_norm(std::span<const double> values, double cell_volume, double q) {
  if (std::isnan(q) || q < 1.0) throw ParameterError("lq_norm: q must be >= 1 or infinity");
  if (std::isinf(q)) return max_abs(values);
  if (q == 1.0) {
    double sum = 0.0;
    for (double v : values) sum += std::abs(v);
    return sum * cell_volume;
  }
  if (q == 2.0) {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum * cell_volume);
  }
  // Scale by the max to keep pow() in range for large q.
  const double scale = max_abs(values);
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v) / scale, q);
  return scale * std::pow(sum * cell_volume, 1.0 / q);
}

double lq_norm(const PhaseField& field, double q) {
  return lq_norm(field.values(), field.cell_volume(), q);
}

double lq_norm(const SpatialField& field, double q) {
  return lq_norm(field.values(), field.cell_volume(), q);
}

void clamp_nonnegative(std::span<double> values, std::string_view what) {
  const double threshold = kClampRelative * max_abs(values);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double& v = values[i];
    if (v >= 0.0) continue;
    if (!std::isfinite(v))
      throw FiniteError(std::string(what) + ": non-finite value at flat index " +
                        std::to_string(i));
    if (v < -threshold)
    {
      char buf[96];
      std::snprintf(buf, sizeof buf, ": value %.3e (max %.3e) at flat index %zu", v, max_abs(values), i);
      throw SignError(std::string(what) + buf + " is below the round-off clamp");
    }
    v = 0.0;
  }
}

void clamp_nonpositive(std::span<double> values, double scale, std::string_view what) {
  const double threshold = kClampRelative * scale;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double& v = values[i];
    if (v <= 0.0) continue;
    if (v > threshold)
      throw SignError(std::string(what) + ": value " + std::to_string(v / std::max(max_abs(values), 1e-300)) + " (relative)" +
                      " at flat index " + std::to_string(i) + " should be nonpositive");
    v = 0.0;
  }
}

}  // namespace akf
