#pragma once

#include <functional>
#include <string>
#include <vector>

#include "akf/budget.hpp"
#include "akf/linear.hpp"
#include "akf/moments.hpp"
#include "akf/picard.hpp"

namespace akf {

/**
 * Outcome of one invariant over a trajectory. Slack values are (bound -
 * observed) divided by the bound's magnitude, one per saved time; the check
 * passes iff worst_slack >= -tolerance.
 */
struct BoundCheck {
  std::string name;
  std::string anchor;
  std::vector<double> times;
  std::vector<double> slack;
  double worst_slack = 0.0;
  double worst_time = 0.0;
  long worst_cell = -1;  ///< flat lattice index, -1 for scalar quantities
  double tolerance = 0.0;
  bool pass = true;
};

struct CheckInfo {
  std::string name;
  std::string anchor;
  std::string summary;
};

/// Every check name the harness can produce, with a short description.
const std::vector<CheckInfo>& check_catalog();
const CheckInfo* find_check(const std::string& name);

inline constexpr double kPositivityTol = 1e-12;
inline constexpr double kComparisonTol = 1e-10;
inline constexpr double kSpeedBoundTol = 1e-10;
inline constexpr double kCBoundsTol = 1e-12;
inline constexpr double kGronwallFloor = 1e-8;
inline constexpr double kCalibratedFloor = 1e-10;

/// min value >= -tol * max |value| at every saved time.
BoundCheck check_positivity(const Trajectory& p, double tol = kPositivityTol);
BoundCheck check_positivity(const SpatialSeries& f, const std::string& name, double tol = kPositivityTol);

/// solution <= majorant cellwise, slack relative to ||majorant||_inf.
BoundCheck check_comparison(const Trajectory& p, const Trajectory& majorant, double tol = kComparisonTol);

/// ||p(t)||_q <= ||p(0)||_q e^{rate t}.
BoundCheck check_gronwall(const Trajectory& p, double rate, double q, double tol);
BoundCheck check_gronwall(const SpatialSeries& f, const std::string& family, double rate, double q, double tol);

/**
 * Envelope of the second moment valid for any nonnegative data:
 * ||m(t)||_q <= e^{rate t} (||m0||_q + creation t ||p_tilde0||_q), with
 * creation = 2 sigma dim_v.
 */
BoundCheck check_second_moment_envelope(const SpatialSeries& m, const SpatialSeries& p_tilde, double rate,
                                        double creation, double q, double tol);

/**
 * ||p(t)||^2 + 2 sigma int ||grad p||^2 - ||p0||^2 - 2 int int gain p <= tol,
 * relative to max ||p||^2, with trapezoid time integrals over every node.
 */
BoundCheck check_energy(const BudgetRecord& budget, double sigma, double tol);

/// Left side minus right side of the energy balance at every node (no
/// normalization); zero up to quadrature error for pure heat flow.
std::vector<double> energy_defect(const BudgetRecord& budget, double sigma);

/// j <= R p_tilde + m / R for every R in the list; R <= 0 means the
/// cellwise optimum sqrt(m / p_tilde).
BoundCheck check_speed_bound(const std::vector<MomentSet>& moments, const std::vector<double>& radii,
                             double tol = kSpeedBoundTol);

/// 0 <= c <= ||c0||_inf and c_hat <= 0, relative to ||c0||_inf.
BoundCheck check_c_bounds(const SpatialSeries& c, const SpatialSeries& c_hat, double c0_sup,
                          double tol = kCBoundsTol);

/// ||u(t)||_q <= ||u(0)||_q + t max_s ||f(s)||_q for the heat upper solution.
BoundCheck check_heat_lq(const Trajectory& u, double source_sup_q, double q, double tol);

enum class MomentEquation { p_tilde, m };

/**
 * Residual of the moment equation integrated by the trapezoid rule over each
 * step: dt y - sigma Lap_x y + coefficient y - creation - gain, where the
 * creation term is 2 sigma dim_v p_tilde for y = m and zero for y = p_tilde.
 * Slack is -max |residual| / max |y|.
 */
BoundCheck check_moment_residual(const BudgetRecord& budget, double sigma, MomentEquation which, double tol);

/// Deltas strictly decreasing from k = 3 on, slack (d_{k-1} - d_k) / d_{k-1}.
BoundCheck check_picard_contraction(const IterationDiagnostics& diag);
/// Every slab's accepted delta below tol, slack (tol - delta) / tol.
BoundCheck check_picard_convergence(const IterationDiagnostics& diag, double tol);

/// Moments of every frame of a trajectory.
std::vector<MomentSet> moment_series(const Trajectory& p);
SpatialSeries moment_component(const std::vector<MomentSet>& moments, FieldRole role);

/**
 * Richardson calibration of a scheme-dependent tolerance:
 * floor + safety |Q(2dt) - Q(dt)| / 3, i.e. C dt^2 with C fitted from two
 * resolutions.
 */
inline constexpr double kCalibrationSafety = 4.0;
double calibrated_tolerance(double floor, double q_dt, double q_2dt);

/// Runs the jobs concurrently and returns the checks in the input order.
std::vector<BoundCheck> run_checks(const std::vector<std::function<BoundCheck()>>& jobs);

/// Compact one-line rendering: "PASS name worst_slack=... tol=...".
std::string describe(const BoundCheck& check);

}  // namespace akf
