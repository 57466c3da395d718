#pragma once

#include <filesystem>
#include <variant>

#include "akf/field.hpp"

namespace akf {

/*
 * Binary snapshot layout (little-endian):
 *
 *   char[4]  magic "AKF1"
 *   int64    dim_x, dim_v, n_x, n_v
 *   float64  L_x, L_v, time_tag
 *   float64  payload[...]   row-major, x axes outermost
 *
 * The payload holds either a phase-space field (n_x^dim_x * n_v^dim_v values)
 * or a spatial field (n_x^dim_x values); readers tell them apart by length.
 */

void write_snapshot(const std::filesystem::path& path, const PhaseField& field);
void write_snapshot(const std::filesystem::path& path, const SpatialField& field);

using Snapshot = std::variant<PhaseField, SpatialField>;

/// Throws ConfigError on a bad magic, truncated payload or invalid grid.
Snapshot read_snapshot(const std::filesystem::path& path);

/// One row per lattice point: coordinates then value.
void write_csv(const std::filesystem::path& path, const PhaseField& field);
void write_csv(const std::filesystem::path& path, const SpatialField& field);

}  // namespace akf
