#pragma once

#include <functional>
#include <vector>

#include "akf/field.hpp"
#include "akf/linear.hpp"
#include "akf/picard.hpp"

// Brute-force references used to cross-check the solver. None of them call
// the solver's stepping code.
namespace akf::oracles {

/// Full phase-space array of a(t, x, v) or f(t, x, v) at time t.
using PhaseFunction = std::function<std::vector<double>(double t)>;

/**
 * Forward Euler with the second-order central Laplacian (periodic wrap) for
 * dt p - sigma Lap p + a p = f. Throws OracleFailure unless
 * fine_dt <= 0.9 h^2 / (2 sigma n_dims) with h the smallest spacing.
 * Saved times must be multiples of fine_dt; empty functions mean zero.
 */
Trajectory fd_reference(const PhaseField& p0, const PhaseFunction& coefficient, const PhaseFunction& source,
                        double sigma, double fine_dt, const std::vector<double>& save_times);

/**
 * Trapezoid quadrature of the Duhamel formula
 *   p(t) = G(t) p0 + int_0^t G(t - s) (f - a p)(s) ds,
 * accumulated recursively in Fourier space; the implicit endpoint term is
 * solved pointwise. Saved times must be multiples of dt.
 */
Trajectory duhamel_reference(const PhaseField& p0, const PhaseFunction& coefficient, const PhaseFunction& source,
                             double sigma, double dt, const std::vector<double>& save_times);

struct VolterraOptions {
  int steps = 1000;       ///< quadrature steps on [0, t]
  double tol = 1e-10;     ///< relative sup-norm change between sweeps
  int max_sweeps = 100;
  bool keep_sweeps = false;
  double gamma = 0.0;     ///< envelope exponent; 0 selects 1 / (8 sigma)
};

struct VolterraResult {
  PhaseField gamma_field;           ///< Gamma(t, . ; 0, source)
  PhaseField heat_kernel;           ///< G(t) * delta on the same lattice
  int sweeps = 0;
  std::vector<double> changes;      ///< relative change per sweep
  std::vector<PhaseField> iterates; ///< value at t before the first and after each sweep
  double fit_c = 0.0;               ///< smallest C of the Gaussian envelope
  double fit_gamma = 0.0;
};

/**
 * Fundamental solution of dt u - sigma Lap u + a u = 0 with a unit-mass
 * single-cell source, from sweeps of the Volterra equation
 *   Gamma = G delta - int_0^t G(t - s) (a Gamma)(s) ds.
 * Fits C with Gamma <= C e^{Ct} t^{-n/2} e^{-gamma |z - z0|^2 / t} at all
 * cells (minimum-image distance). Throws OracleFailure if the sweeps do not
 * converge, ParameterError for grids wider than 32 points per axis.
 */
VolterraResult volterra_fundamental(const PhaseFunction& coefficient, double sigma, const GridSpec& grid, double t,
                                    std::size_t source_index, const VolterraOptions& options = {});

/// Smallest C >= 0 with C e^{C t} >= r.
double lambert_rate(double r, double t);

/// max over frames of ||a - b||_inf divided by max over frames of ||a||_inf.
double max_relative_deviation(const Trajectory& a, const Trajectory& b);
double max_relative_deviation(const SpatialSeries& a, const SpatialSeries& b);

/// Runs the pure driver from two seeds and returns the deviation of p.
double uniqueness_probe_pure(const PhaseField& p0, const SourceTrack& source, const ModelParams& params,
                             const Schedule& schedule, const InitialGuess& seed_a, const InitialGuess& seed_b,
                             double tol);

/// Runs the coupled driver from two seeds; max of the p and c deviations.
double uniqueness_probe_coupled(const PhaseField& p0, const SpatialField& c0, const ModelParams& params,
                                const Schedule& schedule, const InitialGuess& seed_a, const InitialGuess& seed_b,
                                double tol);

}  // namespace akf::oracles
