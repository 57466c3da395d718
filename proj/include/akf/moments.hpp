#pragma once

#include <array>
#include <vector>

#include "akf/field.hpp"
#include "akf/linear.hpp"

namespace akf {

/// Integral of p over velocity: the spatial density.
SpatialField velocity_marginal(const PhaseField& p);

/// Integral of |v| p over velocity (Euclidean speed of the lattice node).
SpatialField speed_moment(const PhaseField& p);

/// Integral of |v|^2 p over velocity.
SpatialField second_moment(const PhaseField& p);

/// Components of the vector flux, integral of v p over velocity (dim_v entries).
std::vector<SpatialField> flux_vector(const PhaseField& p);

/// Euclidean norm of the vector flux per spatial cell.
SpatialField flux_magnitude(const PhaseField& p);

struct MomentSet {
  SpatialField p_tilde;
  SpatialField j;
  SpatialField m;
  double time = 0.0;
};

/// All three moments in one pass over p.
MomentSet compute_moments(const PhaseField& p);

/**
 * Trapezoidal running integral a(t_n) = history + sum of dt/2 (g_i + g_{i+1})
 * over a series sampled every dt. Result times match the input; a(t_0) equals
 * `history` (zero when null). Throws ConfigError when consecutive samples are
 * not dt apart.
 */
std::vector<SpatialField> accumulate_time_integral(const std::vector<SpatialField>& series, double dt,
                                                   const SpatialField* history = nullptr);

}  // namespace akf
