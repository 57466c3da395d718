#include "akf/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "akf/errors.hpp"

namespace akf {

void Schedule::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("schedule: dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("schedule: t_end must be positive");
  if (save_stride < 1) throw ConfigError("schedule: save_stride must be >= 1");
  const double ratio = t_end / dt;
  if (std::abs(ratio - std::round(ratio)) > 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ratio))
    throw ConfigError("schedule: t_end is not an integer multiple of dt");
  if (ratio > 1e8) throw ConfigError("schedule: more than 1e8 steps");
}

int Schedule::steps() const { return static_cast<int>(std::llround(t_end / dt)); }

CoefficientTrack CoefficientTrack::constant(SpatialField a) {
  CoefficientTrack t;
  t.additive.push_back(std::move(a));
  return t;
}

SourceTrack SourceTrack::constant(PhaseField f) {
  SourceTrack s;
  s.samples.push_back(std::move(f));
  return s;
}

namespace {

// Average of the two node samples bracketing step n, or the single sample.
template <typename Field>
void step_average(const std::vector<Field>& track, int n, std::vector<double>& out) {
  const auto& lo = track.size() == 1 ? track[0] : track[n];
  const auto& hi = track.size() == 1 ? track[0] : track[n + 1];
  out.resize(lo.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (lo[i] + hi[i]);
}

template <typename Field>
void check_track(const std::vector<Field>& track, std::size_t nodes, const GridSpec& g, const char* what) {
  if (track.empty() || track.size() == 1) {
    if (track.size() == 1) require_same_grid(track[0].grid(), g, what);
    return;
  }
  if (track.size() < nodes)
    throw ConfigError(std::string(what) + ": track has " + std::to_string(track.size()) +
                      " samples, schedule window needs " + std::to_string(nodes));
  for (std::size_t n = 0; n < track.size(); ++n) {
    require_same_grid(track[n].grid(), g, what);
    if (n > 0 && !(track[n].time() > track[n - 1].time()))
      throw ConfigError(std::string(what) + ": sample times must increase");
  }
}

void require_nonnegative(std::span<const double> v, const char* what) {
  const double floor = -kClampRelative * max_abs(v);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < floor)
      throw SignError(std::string(what) + " is negative at cell " + std::to_string(i));
}

class StrangStepper {
 public:
  StrangStepper(const HeatPlan& plan, bool strict) : plan_(plan), strict_(strict) {}

  // p holds the state and is updated in place.
  // The source is split over the two reaction halves, f_lead entering after
  // the leading damping and f_trail before the trailing one. The two halves
  // are adjoint, so the step stays second order with a source.
  void step(std::vector<double>& p, std::span<const double> additive, std::span<const double> scale,
            std::span<const double> profile, std::span<const double> f_lead, std::span<const double> f_trail,
            double dt) {
    const GridSpec& g = plan_.grid();
    const std::size_t nx = g.x_cells();
    const std::size_t nv = g.v_cells();
    const bool separable = !scale.empty() && !profile.empty();
    if (strict_ && !additive.empty()) require_nonnegative(additive, "reaction coefficient");

    factor_.resize(separable ? p.size() : nx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double base = additive.empty() ? 0.0 : additive[ix];
      if (separable) {
        for (std::size_t iv = 0; iv < nv; ++iv)
          factor_[ix * nv + iv] = std::exp(-(base + scale[ix] * profile[iv]) * 0.5 * dt);
      } else {
        factor_[ix] = std::exp(-base * 0.5 * dt);
      }
    }
    auto damp = [&](std::vector<double>& u) {
      if (separable) {
        for (std::size_t i = 0; i < u.size(); ++i) u[i] *= factor_[i];
      } else if (!additive.empty()) {
        for (std::size_t ix = 0; ix < nx; ++ix)
          for (std::size_t iv = 0; iv < nv; ++iv) u[ix * nv + iv] *= factor_[ix];
      }
    };

    const double half = 0.5 * dt;
    damp(p);
    if (!f_lead.empty())
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += half * f_lead[i];
    plan_.apply(p, p, dt);
    if (!f_trail.empty())
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += half * f_trail[i];
    damp(p);
    require_finite(p, "linear step");
    if (strict_) clamp_nonnegative(p, "linear step");
  }

 private:
  const HeatPlan& plan_;
  bool strict_;
  std::vector<double> factor_;
};

}  // namespace

PhaseField advance_linear(const PhaseField& p, const SpatialField& a, const PhaseField* f,
                          const HeatPlan& plan, double dt, bool strict) {
  if (!(dt > 0.0)) throw ParameterError("advance_linear: dt must be positive");
  if (plan.domain() != HeatDomain::phase) throw ShapeError("advance_linear: needs a phase-space plan");
  require_same_grid(p.grid(), plan.grid(), "advance_linear");
  require_same_grid(a.grid(), plan.grid(), "advance_linear");
  if (f) require_same_grid(f->grid(), plan.grid(), "advance_linear");
  std::vector<double> u(p.values().begin(), p.values().end());
  if (strict) {
    clamp_nonnegative(u, "initial density");
    if (f) require_nonnegative(f->values(), "source");
  }
  StrangStepper stepper(plan, strict);
  const auto fs = f ? f->values() : std::span<const double>{};
  stepper.step(u, a.values(), {}, {}, fs, fs, dt);
  return PhaseField(p.grid(), std::move(u), p.time() + dt);
}

Trajectory solve_linear(const PhaseField& p0, const CoefficientTrack& coeff, const SourceTrack& source,
                        const HeatPlan& plan, const Schedule& schedule, const SolveOptions& options) {
  schedule.validate();
  if (plan.domain() != HeatDomain::phase) throw ShapeError("solve_linear: needs a phase-space plan");
  const GridSpec& g = plan.grid();
  require_same_grid(p0.grid(), g, "solve_linear");
  const int first = options.first_step;
  const int last = options.last_step < 0 ? schedule.steps() : options.last_step;
  if (first < 0 || last > schedule.steps() || last < first)
    throw ConfigError("solve_linear: step window outside the schedule");
  const double t0 = schedule.time_at(first);
  if (std::abs(p0.time() - t0) > 1e-9 * std::max(1.0, std::abs(t0)))
    throw ConfigError("solve_linear: initial field time does not match the window start");

  const std::size_t nodes = static_cast<std::size_t>(last - first) + 1;
  check_track(coeff.additive, nodes, g, "coefficient");
  check_track(coeff.scale, nodes, g, "coefficient scale");
  check_track(source.samples, nodes, g, "source");
  if (!coeff.scale.empty() && coeff.profile.size() != g.v_cells())
    throw ShapeError("solve_linear: velocity profile length does not match the grid");

  std::vector<double> u(p0.values().begin(), p0.values().end());
  if (options.strict) {
    clamp_nonnegative(u, "initial density");
    for (const auto& f : source.samples) require_nonnegative(f.values(), "source");
  }

  Trajectory out;
  StrangStepper stepper(plan, options.strict);
  std::vector<double> add, scale;
  auto emit = [&](int local) {
    const int step = first + local;
    const bool save = schedule.is_save(step) || local == 0 || step == last;
    if (!save && !options.observer) return;
    PhaseField frame(g, u, schedule.time_at(step));
    if (options.observer) options.observer(local, frame);
    if (save) out.push(std::move(frame), step);
  };

  emit(0);
  for (int local = 0; local < last - first; ++local) {
    if (!coeff.additive.empty()) step_average(coeff.additive, local, add);
    if (!coeff.scale.empty()) step_average(coeff.scale, local, scale);
    std::span<const double> f_lead, f_trail;
    if (!source.samples.empty()) {
      const bool single = source.samples.size() == 1;
      f_lead = source.samples[single ? 0 : local].values();
      f_trail = source.samples[single ? 0 : local + 1].values();
    }
    stepper.step(u, coeff.additive.empty() ? std::span<const double>{} : std::span<const double>(add),
                 coeff.scale.empty() ? std::span<const double>{} : std::span<const double>(scale),
                 coeff.profile, f_lead, f_trail, schedule.dt);
    emit(local + 1);
  }
  return out;
}

Trajectory heat_upper_solution(const PhaseField& p0, const SourceTrack& source, const HeatPlan& plan,
                               const Schedule& schedule, const SolveOptions& options) {
  return solve_linear(p0, CoefficientTrack{}, source, plan, schedule, options);
}

}  // namespace akf
