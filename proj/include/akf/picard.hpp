#pragma once

#include <array>
#include <vector>

#include "akf/budget.hpp"
#include "akf/field.hpp"
#include "akf/heat.hpp"
#include "akf/linear.hpp"

namespace akf {

struct ModelParams {
  double sigma = 0.1;   ///< diffusivity of p in (x, v)
  double d = 0.2;       ///< diffusivity of c
  double gamma = 1.0;   ///< death rate per unit of accumulated density
  double eta = 1.0;     ///< consumption rate of c
  double alpha1 = 1.0;  ///< saturation level of the activation rate
  double c_R = 1.0;     ///< half-saturation concentration
  double epsilon = 0.5; ///< squared width of the velocity profile
  std::array<double, 2> v0{1.0, 0.0};
  double k_inf = 1.0;   ///< far-field concentration
  bool use_vector_j = false;

  /// Throws ParameterError for nonpositive diffusivities, c_R or epsilon and
  /// for negative rates. Zero gamma, eta or alpha1 switch the term off.
  void validate() const;

  /// Analytic sup norm of the velocity profile, (pi eps)^{-dim_v/2}.
  double rho_sup(int dim_v) const;
};

/// alpha(c) = alpha1 (c/c_R) / (1 + c/c_R).
double alpha_of_c(double c, double alpha1, double c_R);
SpatialField alpha_of_c(const SpatialField& c, double alpha1, double c_R);

/// One Strang step of dt c - d Lap c = -eta j c with j frozen over the step.
SpatialField advance_c(const SpatialField& c, const SpatialField& j, const HeatPlan& plan, double eta,
                       double dt);

/**
 * The same step written for c_hat = c - c_inf, where c_inf is the exact heat
 * flow of c0: the sink becomes c_hat <- (c_hat + c_inf) e^{-eta j dt/2} - c_inf,
 * which keeps c_hat nonpositive. `c_inf_now` and `c_inf_next` are the
 * background at the two ends of the step; `scale` sets the clamp threshold.
 */
SpatialField advance_c_far_field(const SpatialField& c_hat, const SpatialField& c_inf_now,
                                 const SpatialField& c_inf_next, const SpatialField& j,
                                 const HeatPlan& plan, double eta, double dt, double scale);

/// First iterate of the fixed point.
struct InitialGuess {
  enum class Kind {
    standard,          ///< heat flow (pure driver) or zero (coupled driver)
    zero,
    heat_flow,
    scaled_heat_flow,  ///< heat flow times `scale`
  };
  Kind kind = Kind::standard;
  double scale = 1.0;
};

struct PicardOptions {
  int k_max = 20;
  double tol = 1e-8;
  InitialGuess seed;
  /// Split [0, T] into slabs of length min(T, 0.5 / sqrt(gamma M)).
  bool use_slabs = true;
  /// How often a slab that fails to converge may be halved and retried.
  int max_halvings = 4;
  bool strict = true;
  /// Record the per-node budget of the accepted iterate (one extra solve
  /// per slab).
  bool record_budget = true;
};

struct SlabDiagnostics {
  double t_start = 0.0;
  double t_end = 0.0;
  int iterations = 0;  ///< index k of the accepted iterate
  bool converged = false;
  int halvings = 0;
  /// Entry i belongs to iterate k = i + 2.
  std::vector<double> delta;
  std::vector<double> delta_p;
  std::vector<double> delta_c;
  /// Worst relative slack of iterate k = i + 2 against the comparison
  /// majorant, min over saved times and cells of (majorant - p_k)/||majorant||.
  std::vector<double> comparison_slack;
};

struct IterationDiagnostics {
  std::vector<SlabDiagnostics> slabs;
  bool converged = false;
  /// Deltas strictly decreasing from k = 3 on, in every slab.
  bool monotone = true;
  double slab_bound = 0.0;  ///< the density bound M used for the slab length
  double slab_length = 0.0;
  int max_iterations() const;
  std::vector<double> slab_boundaries() const;
};

struct PureResult {
  Trajectory p;
  /// Stitched first iterates (heat flow with the history coefficient), the
  /// majorant of every later iterate.
  Trajectory first_iterate;
  SpatialSeries a;  ///< running integral of the marginal at saved times
  BudgetRecord budget;
  IterationDiagnostics diagnostics;
};

struct CoupledResult {
  Trajectory p;
  SpatialSeries c;
  SpatialSeries c_hat;
  SpatialSeries c_inf;
  SpatialSeries a;
  BudgetRecord budget;
  IterationDiagnostics diagnostics;
  VelocityProfile rho;
};

/**
 * Iteration for  dt p - sigma Lap p + gamma a(p) p = f,  a(p) = time integral
 * of the marginal: p_k solves the linear problem with a frozen at a(p_{k-1}).
 * Non-convergence is reported in the diagnostics, not thrown.
 */
PureResult picard_pure(const PhaseField& p0, const SourceTrack& source, const ModelParams& params,
                       const Schedule& schedule, const PicardOptions& options = {});

/**
 * Coupled iteration: from (c_{k-1}, a_{k-1}) solve for p_k with coefficient
 * gamma a_{k-1} - alpha(c_{k-1}) rho(v), then j_k, then c_k. c is evolved as
 * c_inf + c_hat. The standard seed is p_1 = 0.
 */
CoupledResult picard_coupled(const PhaseField& p0, const SpatialField& c0, const ModelParams& params,
                             const Schedule& schedule, const PicardOptions& options = {});

/// e^{rate t} G(t) * p0 at the given times: majorant of the coupled iterates.
Trajectory growth_majorant(const PhaseField& p0, const HeatPlan& plan, double rate,
                           const std::vector<double>& times);

/// Smallest value of (majorant - p) / ||majorant||_inf over all frames.
double comparison_slack(const Trajectory& p, const Trajectory& majorant);

}  // namespace akf
