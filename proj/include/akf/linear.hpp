#pragma once

#include <functional>
#include <span>
#include <vector>

#include "akf/field.hpp"
#include "akf/heat.hpp"

namespace akf {

/// Uniform time axis 0 = t_0 < t_1 < ... < t_N = t_end with t_n = n * dt.
struct Schedule {
  double t_end = 1.0;
  double dt = 1e-3;
  int save_stride = 1;

  /// Throws ConfigError unless dt > 0, save_stride >= 1 and t_end / dt is
  /// an integer up to a few ulps.
  void validate() const;
  int steps() const;
  double time_at(int step) const { return step * dt; }
  /// Step 0, every save_stride-th step and the final step are saved.
  bool is_save(int step) const { return step % save_stride == 0 || step == steps(); }
};

/// Time-stamped frames together with their global step indices.
template <typename Field>
struct Series {
  std::vector<Field> frames;
  std::vector<int> steps;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const Field& operator[](std::size_t i) const { return frames[i]; }
  const Field& back() const { return frames.back(); }
  double time(std::size_t i) const { return frames[i].time(); }
  void push(Field f, int step) {
    frames.push_back(std::move(f));
    steps.push_back(step);
  }
};

using Trajectory = Series<PhaseField>;
using SpatialSeries = Series<SpatialField>;

/**
 * Reaction coefficient of the linear problem, sampled at schedule nodes:
 *
 *   a(t_n, x, v) = additive_n(x) + scale_n(x) * profile(v)
 *
 * Each track holds either a single sample (constant in time) or one sample
 * per node of the solve window. An empty additive track means zero; an empty
 * profile disables the separable part. In strict mode the additive part must
 * be nonnegative; the separable part may have either sign.
 */
struct CoefficientTrack {
  std::vector<SpatialField> additive;
  std::vector<SpatialField> scale;
  std::vector<double> profile;

  static CoefficientTrack constant(SpatialField a);
};

/// Source f(t, x, v): empty (zero), one constant sample, or one per node.
struct SourceTrack {
  std::vector<PhaseField> samples;

  static SourceTrack constant(PhaseField f);
};

struct SolveOptions {
  /// Positivity enforcement: nonnegative data required, round-off negatives
  /// clamped, larger negatives raise SignError.
  bool strict = true;
  /// Global step range to integrate over; last = -1 means the final step.
  /// p0 must carry the time of `first_step`.
  int first_step = 0;
  int last_step = -1;
  /// Called with (local node, field) at every node of the window, including
  /// the initial one.
  std::function<void(int, const PhaseField&)> observer;
};

/**
 * One Strang step of dt p - sigma Lap p + a p = f with the coefficient frozen
 * over the step:
 *   p <- e^{-a dt/2} p + dt/2 f;  p <- G(dt) p;  p <- e^{-a dt/2} (p + dt/2 f).
 * `f` may be null (zero source).
 */
PhaseField advance_linear(const PhaseField& p, const SpatialField& a, const PhaseField* f,
                          const HeatPlan& plan, double dt, bool strict = true);

/**
 * Integrates the linear problem over the schedule (or the window given in
 * options). The coefficient used on a step is the average of its two node
 * samples; the source enters the leading half with the sample at the step
 * start and the trailing half with the one at the step end. Returns the saved frames, always including both window ends.
 */
Trajectory solve_linear(const PhaseField& p0, const CoefficientTrack& coeff, const SourceTrack& source,
                        const HeatPlan& plan, const Schedule& schedule, const SolveOptions& options = {});

/// Solution of the heat problem with the same data and a = 0; dominates
/// solve_linear output whenever a >= 0 and f >= 0.
Trajectory heat_upper_solution(const PhaseField& p0, const SourceTrack& source, const HeatPlan& plan,
                               const Schedule& schedule, const SolveOptions& options = {});

}  // namespace akf
