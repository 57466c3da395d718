#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "akf/field.hpp"
#include "akf/spectral.hpp"

namespace akf {

/// Which lattice a HeatPlan acts on and along which axes it diffuses.
enum class HeatDomain {
  phase,         ///< full (x, v) Laplacian on phase-space fields
  spatial,       ///< x Laplacian on spatial fields
  phase_x_only,  ///< x Laplacian applied to every velocity slice of a phase field
};

/**
 * Exact heat flow e^{tau D Laplacian} on the periodic box, applied by
 * Fourier multipliers exp(-D |k|^2 tau).
 *
 * The multiplier of the zero mode is exactly 1. Multipliers are cached per
 * tau (a handful of entries), so repeated steps with a fixed timetable pay
 * for the exponentials once. Instances are safe to share across threads.
 */
class HeatPlan {
 public:
  HeatPlan(const GridSpec& grid, double diffusivity, HeatDomain domain = HeatDomain::phase);

  const GridSpec& grid() const { return grid_; }
  double diffusivity() const { return diffusivity_; }
  HeatDomain domain() const { return domain_; }
  std::size_t size() const { return fft_.real_size(); }
  int diffusing_dims() const;

  std::span<const double> wavenumber_sq() const { return k2_; }
  std::shared_ptr<const std::vector<double>> multipliers(double tau) const;

  /// out = G(tau) * in. `in` and `out` may alias.
  void apply(std::span<const double> in, std::span<double> out, double tau) const;

  /// Spectral Laplacian (times the diffusivity) of `in`.
  std::vector<double> diffusion_term(std::span<const double> in) const;

  /// Cell-volume weighted sum of |grad f|^2 over the diffusing axes.
  double gradient_norm_sq(std::span<const double> in) const;

 private:
  double cell_volume() const;

  GridSpec grid_;
  double diffusivity_;
  HeatDomain domain_;
  RealFft fft_;
  std::vector<double> k2_;
  std::vector<double> parseval_;
  mutable std::mutex cache_mutex_;
  mutable std::vector<std::pair<double, std::shared_ptr<const std::vector<double>>>> cache_;
};

/// G(tau) * field. tau = 0 returns the field unchanged.
PhaseField heat_step(const PhaseField& field, double tau, const HeatPlan& plan);
SpatialField heat_step(const SpatialField& field, double tau, const HeatPlan& plan);

/// Gaussian velocity profile rho_eps(v) = (pi eps)^{-N/2} exp(-|v - v0|^2 / eps).
struct VelocityProfile {
  std::vector<double> values;  ///< one entry per velocity node
  double epsilon = 0.0;
  std::array<double, 2> v0{};
  double peak = 0.0;           ///< analytic sup norm (pi eps)^{-N/2}
  double lattice_max = 0.0;
  double discrete_mass = 0.0;  ///< sum(values) * h_v^N
};

/**
 * Samples rho_eps on the velocity lattice (N = dim_v). Throws ParameterError
 * for eps <= 0 or v0 outside the box, ResolutionError when fewer than 4
 * cells per axis lie within sqrt(eps) of v0.
 */
VelocityProfile gaussian_rho(const GridSpec& grid, double epsilon, std::array<double, 2> v0);

/**
 * Smallest C with ||G(tau) * delta||_inf <= C tau^{-n/2} ||delta||_1 over the
 * given sample times, n being the number of diffusing dimensions. Used as
 * the fitted constant in the L^1 -> L^inf smoothing property.
 */
double fit_smoothing_constant(const HeatPlan& plan, std::span<const double> taus);

}  // namespace akf
