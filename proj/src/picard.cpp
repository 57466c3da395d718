#include "akf/picard.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <numbers>

#include "akf/errors.hpp"
#include "akf/moments.hpp"

namespace akf {

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be positive");
  };
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be nonnegative");
  };
  positive(sigma, "sigma");
  positive(d, "d");
  positive(c_R, "c_R");
  positive(epsilon, "epsilon");
  nonnegative(gamma, "gamma");
  nonnegative(eta, "eta");
  nonnegative(alpha1, "alpha1");
  nonnegative(k_inf, "k_inf");
  if (!std::isfinite(v0[0]) || !std::isfinite(v0[1])) throw ParameterError("v0 must be finite");
}

double ModelParams::rho_sup(int dim_v) const { return std::pow(std::numbers::pi * epsilon, -0.5 * dim_v); }

double alpha_of_c(double c, double alpha1, double c_R) {
  if (c < 0.0) throw SignError("alpha_of_c: negative concentration");
  const double r = c / c_R;
  return alpha1 * r / (1.0 + r);
}

SpatialField alpha_of_c(const SpatialField& c, double alpha1, double c_R) {
  std::vector<double> v(c.values().begin(), c.values().end());
  clamp_nonnegative(v, "concentration");
  for (double& x : v) x = alpha_of_c(x, alpha1, c_R);
  return SpatialField(c.grid(), std::move(v), c.time(), FieldRole::alpha_of_c);
}

namespace {

void check_spatial_plan(const HeatPlan& plan, const SpatialField& f, const char* what) {
  if (plan.domain() != HeatDomain::spatial) throw ShapeError(std::string(what) + ": needs a spatial plan");
  require_same_grid(f.grid(), plan.grid(), what);
}

std::vector<double> sink_factor(const SpatialField& j, double eta, double dt) {
  std::vector<double> j_vals(j.values().begin(), j.values().end());
  clamp_nonnegative(j_vals, "speed moment");
  for (double& x : j_vals) x = std::exp(-eta * x * 0.5 * dt);
  return j_vals;
}

}  // namespace

SpatialField advance_c(const SpatialField& c, const SpatialField& j, const HeatPlan& plan, double eta,
                       double dt) {
  check_spatial_plan(plan, c, "advance_c");
  require_same_grid(j.grid(), c.grid(), "advance_c");
  if (!(dt > 0.0)) throw ParameterError("advance_c: dt must be positive");
  const auto factor = sink_factor(j, eta, dt);
  std::vector<double> u(c.values().begin(), c.values().end());
  clamp_nonnegative(u, "concentration");
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= factor[i];
  plan.apply(u, u, dt);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= factor[i];
  clamp_nonnegative(u, "concentration");
  return SpatialField(c.grid(), std::move(u), c.time() + dt, FieldRole::c);
}

SpatialField advance_c_far_field(const SpatialField& c_hat, const SpatialField& c_inf_now,
                                 const SpatialField& c_inf_next, const SpatialField& j,
                                 const HeatPlan& plan, double eta, double dt, double scale) {
  check_spatial_plan(plan, c_hat, "advance_c_far_field");
  require_same_grid(j.grid(), c_hat.grid(), "advance_c_far_field");
  if (!(dt > 0.0)) throw ParameterError("advance_c_far_field: dt must be positive");
  const auto factor = sink_factor(j, eta, dt);
  std::vector<double> u(c_hat.values().begin(), c_hat.values().end());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (u[i] + c_inf_now[i]) * factor[i] - c_inf_now[i];
  plan.apply(u, u, dt);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (u[i] + c_inf_next[i]) * factor[i] - c_inf_next[i];
  clamp_nonpositive(u, scale, "far-field correction");
  return SpatialField(c_hat.grid(), std::move(u), c_hat.time() + dt, FieldRole::c_hat);
}

int IterationDiagnostics::max_iterations() const {
  int k = 0;
  for (const auto& s : slabs) k = std::max(k, s.iterations);
  return k;
}

std::vector<double> IterationDiagnostics::slab_boundaries() const {
  std::vector<double> b;
  for (const auto& s : slabs) {
    if (b.empty()) b.push_back(s.t_start);
    b.push_back(s.t_end);
  }
  return b;
}

Trajectory growth_majorant(const PhaseField& p0, const HeatPlan& plan, double rate,
                           const std::vector<double>& times) {
  Trajectory out;
  std::vector<double> u(p0.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double tau = times[i] - p0.time();
    plan.apply(p0.values(), u, tau);
    const double grow = std::exp(rate * tau);
    for (double& x : u) x *= grow;
    out.push(PhaseField(p0.grid(), u, times[i]), static_cast<int>(i));
  }
  return out;
}

double comparison_slack(const Trajectory& p, const Trajectory& majorant) {
  if (p.size() != majorant.size()) throw ConfigError("comparison: trajectories have different lengths");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (std::abs(p.time(n) - majorant.time(n)) > 1e-9 * std::max(1.0, std::abs(p.time(n))))
      throw ConfigError("comparison: time grids differ");
    const double scale = max_abs(majorant[n].values());
    const double denom = scale > 0.0 ? scale : 1.0;
    for (std::size_t i = 0; i < p[n].size(); ++i) worst = std::min(worst, (majorant[n][i] - p[n][i]) / denom);
  }
  return p.empty() ? 0.0 : worst;
}

namespace {

using TrajPtr = std::shared_ptr<const Trajectory>;

double relative_change(const std::vector<std::span<const double>>& now,
                       const std::vector<std::span<const double>>& before) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < now.size(); ++n) {
    for (std::size_t i = 0; i < now[n].size(); ++i) {
      num = std::max(num, std::abs(now[n][i] - before[n][i]));
      den = std::max({den, std::abs(now[n][i]), std::abs(before[n][i])});
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

double trajectory_change(const Trajectory& now, const Trajectory& before) {
  std::vector<std::span<const double>> a, b;
  for (std::size_t n = 0; n < now.size(); ++n) {
    a.push_back(now[n].values());
    b.push_back(before[n].values());
  }
  return relative_change(a, b);
}

void validate_options(const PicardOptions& o) {
  if (o.k_max < 2) throw ParameterError("picard: k_max must be >= 2");
  if (!(o.tol > 0.0)) throw ParameterError("picard: tol must be positive");
  if (o.max_halvings < 0) throw ParameterError("picard: max_halvings must be >= 0");
  if (o.seed.kind == InitialGuess::Kind::scaled_heat_flow && !(o.seed.scale >= 0.0))
    throw ParameterError("picard: seed scale must be nonnegative");
}

int slab_steps(const ModelParams& params, double bound, const Schedule& schedule, bool enabled) {
  const int n = schedule.steps();
  const double rate = params.gamma * bound;
  if (!enabled || !(rate > 0.0)) return n;
  const double length = std::min(schedule.t_end, 0.5 / std::sqrt(rate));
  const int steps = static_cast<int>(std::floor(length / schedule.dt * (1.0 + 1e-12)));
  return std::clamp(steps, 1, n);
}

Trajectory scaled(const Trajectory& t, double s) {
  Trajectory out;
  for (std::size_t n = 0; n < t.size(); ++n) {
    std::vector<double> v(t[n].values().begin(), t[n].values().end());
    for (double& x : v) x *= s;
    out.push(PhaseField(t[n].grid(), std::move(v), t.time(n)), t.steps[n]);
  }
  return out;
}

Trajectory zeros_like(const Trajectory& t) { return scaled(t, 0.0); }

std::vector<SpatialField> scaled(const std::vector<SpatialField>& fs, double s) {
  std::vector<SpatialField> out;
  for (const auto& f : fs) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (double& x : v) x *= s;
    out.emplace_back(f.grid(), std::move(v), f.time(), f.role());
  }
  return out;
}

SourceTrack slice(const SourceTrack& s, int first, int last) {
  if (s.samples.size() <= 1) return s;
  SourceTrack out;
  out.samples.assign(s.samples.begin() + first, s.samples.begin() + last + 1);
  return out;
}

// Appends the frames of a slab whose global step is a save node of the
// schedule and which are not already present.
void stitch(Trajectory& dst, const Trajectory& src, const Schedule& schedule) {
  for (std::size_t n = 0; n < src.size(); ++n) {
    const int step = src.steps[n];
    if (!schedule.is_save(step)) continue;
    if (!dst.empty() && dst.steps.back() >= step) continue;
    dst.push(src[n], step);
  }
}

void stitch_nodes(SpatialSeries& dst, const std::vector<SpatialField>& nodes, int first, const Schedule& schedule) {
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const int step = first + static_cast<int>(n);
    if (!schedule.is_save(step)) continue;
    if (!dst.empty() && dst.steps.back() >= step) continue;
    dst.push(nodes[n], step);
  }
}

std::vector<SpatialField> scaled_role(const std::vector<SpatialField>& fs, double s, FieldRole role) {
  auto out = scaled(fs, s);
  for (auto& f : out) f = f.with_role(role);
  return out;
}

bool strictly_decreasing_from_third(const std::vector<double>& delta) {
  // delta[i] belongs to k = i + 2; compare k >= 4 against k - 1 >= 3.
  for (std::size_t i = 2; i < delta.size(); ++i)
    if (!(delta[i] < delta[i - 1])) return false;
  return true;
}

struct PureIterate {
  std::shared_ptr<Trajectory> p;
  std::vector<SpatialField> p_tilde;
};

struct PureSlab {
  Trajectory p;
  Trajectory first;
  std::vector<SpatialField> a_nodes;  // unscaled running integral
  BudgetRecord budget;
  SlabDiagnostics diag;
};

PureSlab pure_slab(const PhaseField& start, const SpatialField& history, const SourceTrack& source,
                   const HeatPlan& plan, const ModelParams& params, const Schedule& schedule, int first,
                   int last, const PicardOptions& options) {
  const SourceTrack src = slice(source, first, last);
  const bool has_history = max_abs(history.values()) > 0.0;

  auto run = [&](const CoefficientTrack& coeff) {
    PureIterate it;
    SolveOptions so;
    so.strict = options.strict;
    so.first_step = first;
    so.last_step = last;
    so.observer = [&](int, const PhaseField& f) { it.p_tilde.push_back(velocity_marginal(f)); };
    it.p = std::make_shared<Trajectory>(solve_linear(start, coeff, src, plan, schedule, so));
    return it;
  };
  auto coefficient_from = [&](const std::vector<SpatialField>& p_tilde) {
    CoefficientTrack c;
    c.additive = scaled_role(accumulate_time_integral(p_tilde, schedule.dt, &history), params.gamma, FieldRole::a);
    return c;
  };

  CoefficientTrack history_coeff;
  if (has_history)
    history_coeff = CoefficientTrack::constant(scaled_role({history}, params.gamma, FieldRole::a)[0]);
  PureIterate first_iter = run(history_coeff);
  TrajPtr majorant = first_iter.p;

  PureIterate prev;
  switch (options.seed.kind) {
    case InitialGuess::Kind::standard:
    case InitialGuess::Kind::heat_flow:
      prev = first_iter;
      break;
    case InitialGuess::Kind::zero:
      prev.p = std::make_shared<Trajectory>(zeros_like(*first_iter.p));
      prev.p_tilde = scaled(first_iter.p_tilde, 0.0);
      break;
    case InitialGuess::Kind::scaled_heat_flow:
      prev.p = std::make_shared<Trajectory>(scaled(*first_iter.p, options.seed.scale));
      prev.p_tilde = scaled(first_iter.p_tilde, options.seed.scale);
      break;
  }

  PureSlab out;
  out.diag.t_start = schedule.time_at(first);
  out.diag.t_end = schedule.time_at(last);
  std::vector<std::future<double>> slacks;
  CoefficientTrack used = history_coeff;
  for (int k = 2; k <= options.k_max; ++k) {
    CoefficientTrack coeff = coefficient_from(prev.p_tilde);
    PureIterate cur = run(coeff);
    const double delta = trajectory_change(*cur.p, *prev.p);
    TrajPtr cur_p = cur.p;
    slacks.push_back(std::async(std::launch::async, [cur_p, majorant] { return comparison_slack(*cur_p, *majorant); }));
    out.diag.delta.push_back(delta);
    out.diag.delta_p.push_back(delta);
    out.diag.iterations = k;
    prev = std::move(cur);
    used = std::move(coeff);
    if (delta <= options.tol) {
      out.diag.converged = true;
      break;
    }
  }
  for (auto& f : slacks) out.diag.comparison_slack.push_back(f.get());

  out.a_nodes = accumulate_time_integral(prev.p_tilde, schedule.dt, &history);
  out.p = *prev.p;
  out.first = *first_iter.p;

  if (options.record_budget) {
    BudgetRecorder rec(plan);
    SolveOptions so;
    so.strict = options.strict;
    so.first_step = first;
    so.last_step = last;
    so.observer = [&](int n, const PhaseField& f) {
      const SpatialField* a = used.additive.empty() ? nullptr
                              : used.additive.size() == 1 ? &used.additive[0] : &used.additive[n];
      const PhaseField* s = src.samples.empty() ? nullptr
                            : src.samples.size() == 1 ? &src.samples[0] : &src.samples[n];
      rec.record(f, a, s, nullptr, {});
    };
    solve_linear(start, used, src, plan, schedule, so);
    out.budget = rec.take();
  }
  return out;
}

template <typename SlabFn, typename AcceptFn>
IterationDiagnostics run_slabs(const Schedule& schedule, int slab_len, const PicardOptions& options, SlabFn&& slab,
                               AcceptFn&& accept) {
  IterationDiagnostics diag;
  diag.converged = true;
  const int n = schedule.steps();
  int start = 0;
  while (start < n) {
    int len = std::min(slab_len, n - start);
    int halvings = 0;
    auto outcome = slab(start, start + len);
    while (!outcome.diag.converged && len > 1 && halvings < options.max_halvings) {
      len = (len + 1) / 2;
      ++halvings;
      outcome = slab(start, start + len);
    }
    outcome.diag.halvings = halvings;
    diag.converged = diag.converged && outcome.diag.converged;
    diag.monotone = diag.monotone && strictly_decreasing_from_third(outcome.diag.delta);
    diag.slabs.push_back(outcome.diag);
    accept(std::move(outcome), start, start + len);
    start += len;
  }
  return diag;
}

}  // namespace

PureResult picard_pure(const PhaseField& p0, const SourceTrack& source, const ModelParams& params,
                       const Schedule& schedule, const PicardOptions& options) {
  params.validate();
  schedule.validate();
  validate_options(options);
  if (p0.time() != 0.0) throw ConfigError("picard_pure: initial field must be at t = 0");
  const GridSpec& g = p0.grid();
  const HeatPlan plan(g, params.sigma);

  // Data-only bound on the marginal of every iterate, so the slab rule does
  // not depend on the seed.
  double source_bound = 0.0;
  for (const auto& f : source.samples) source_bound = std::max(source_bound, max_abs(velocity_marginal(f).values()));
  const double bound = max_abs(velocity_marginal(p0).values()) + schedule.t_end * source_bound;
  const int len = slab_steps(params, bound, schedule, options.use_slabs);

  PureResult result;
  PhaseField state = p0;
  SpatialField history = SpatialField::zeros(g, 0.0, FieldRole::a);
  result.diagnostics = run_slabs(
      schedule, len, options,
      [&](int first, int last) {
        return pure_slab(state, history, source, plan, params, schedule, first, last, options);
      },
      [&](PureSlab&& s, int first, int) {
        stitch(result.p, s.p, schedule);
        stitch(result.first_iterate, s.first, schedule);
        stitch_nodes(result.a, s.a_nodes, first, schedule);
        result.budget.append(std::move(s.budget));
        state = s.p.back();
        history = s.a_nodes.back();
      });
  result.diagnostics.slab_bound = bound;
  result.diagnostics.slab_length = len * schedule.dt;
  return result;
}

namespace {

struct CoupledIterate {
  std::shared_ptr<Trajectory> p;
  std::vector<SpatialField> p_tilde;
  std::vector<SpatialField> j;
  std::vector<SpatialField> c;
  std::vector<SpatialField> c_hat;
};

struct CoupledSlab {
  Trajectory p;
  std::vector<SpatialField> c, c_hat, a_nodes;
  BudgetRecord budget;
  SlabDiagnostics diag;
};

struct CoupledContext {
  const ModelParams& params;
  const Schedule& schedule;
  const PicardOptions& options;
  const HeatPlan& p_plan;
  const HeatPlan& c_plan;
  const VelocityProfile& rho;
  const std::vector<SpatialField>& c_inf;  // every global node
  const PhaseField& p0;
  double c_scale;
  double growth_rate;
};

CoupledSlab coupled_slab(const CoupledContext& ctx, const PhaseField& start, const SpatialField& c_hat_start,
                         const SpatialField& history, int first, int last) {
  const ModelParams& params = ctx.params;
  const Schedule& schedule = ctx.schedule;
  const GridSpec& g = start.grid();
  const int nodes = last - first + 1;

  auto solve_c = [&](CoupledIterate& it) {
    it.c.clear();
    it.c_hat.clear();
    SpatialField chat = c_hat_start;
    auto push = [&](const SpatialField& ch, int n) {
      std::vector<double> c(ch.size());
      const auto& bg = ctx.c_inf[first + n];
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = bg[i] + ch[i];
      clamp_nonnegative(c, "concentration");
      it.c.emplace_back(g, std::move(c), ch.time(), FieldRole::c);
      it.c_hat.push_back(ch);
    };
    push(chat, 0);
    std::vector<double> jbar(g.x_cells());
    for (int n = 0; n < nodes - 1; ++n) {
      for (std::size_t i = 0; i < jbar.size(); ++i) jbar[i] = 0.5 * (it.j[n][i] + it.j[n + 1][i]);
      chat = advance_c_far_field(chat, ctx.c_inf[first + n], ctx.c_inf[first + n + 1],
                                 SpatialField(g, jbar, chat.time(), FieldRole::j), ctx.c_plan, params.eta,
                                 schedule.dt, ctx.c_scale);
      push(chat.with_time(schedule.time_at(first + n + 1)), n + 1);
    }
  };

  auto observe = [&](CoupledIterate& it) {
    return [&it, &params](int, const PhaseField& f) {
      it.p_tilde.push_back(velocity_marginal(f));
      it.j.push_back(params.use_vector_j ? flux_magnitude(f) : speed_moment(f));
    };
  };

  SolveOptions base;
  base.strict = ctx.options.strict;
  base.first_step = first;
  base.last_step = last;

  auto coefficient_from = [&](const CoupledIterate& prev) {
    CoefficientTrack c;
    const auto a = accumulate_time_integral(prev.p_tilde, schedule.dt, &history);
    c.additive = scaled_role(a, params.gamma, FieldRole::a);
    for (const auto& cn : prev.c) c.scale.push_back(scaled_role({alpha_of_c(cn, params.alpha1, params.c_R)}, -1.0, FieldRole::alpha_of_c)[0]);
    c.profile = ctx.rho.values;
    return c;
  };

  // Seed.
  CoupledIterate prev;
  {
    SolveOptions so = base;
    so.observer = observe(prev);
    Trajectory heat = heat_upper_solution(start, SourceTrack{}, ctx.p_plan, schedule, so);
    double s = 1.0;
    switch (ctx.options.seed.kind) {
      case InitialGuess::Kind::standard:
      case InitialGuess::Kind::zero:
        s = 0.0;
        break;
      case InitialGuess::Kind::heat_flow:
        s = 1.0;
        break;
      case InitialGuess::Kind::scaled_heat_flow:
        s = ctx.options.seed.scale;
        break;
    }
    prev.p = std::make_shared<Trajectory>(scaled(heat, s));
    prev.p_tilde = scaled(prev.p_tilde, s);
    prev.j = scaled(prev.j, s);
    solve_c(prev);
  }

  std::vector<double> save_times;
  for (std::size_t n = 0; n < prev.p->size(); ++n) save_times.push_back(prev.p->time(n));
  auto majorant = std::make_shared<const Trajectory>(growth_majorant(ctx.p0, ctx.p_plan, ctx.growth_rate, save_times));

  auto c_at_saves = [&](const CoupledIterate& it) {
    std::vector<std::span<const double>> out;
    for (int step : it.p->steps) out.push_back(it.c[step - first].values());
    return out;
  };

  CoupledSlab out;
  out.diag.t_start = schedule.time_at(first);
  out.diag.t_end = schedule.time_at(last);
  std::vector<std::future<double>> slacks;
  CoefficientTrack used;
  for (int k = 2; k <= ctx.options.k_max; ++k) {
    CoefficientTrack coeff = coefficient_from(prev);
    CoupledIterate cur;
    SolveOptions so = base;
    so.observer = observe(cur);
    cur.p = std::make_shared<Trajectory>(solve_linear(start, coeff, SourceTrack{}, ctx.p_plan, schedule, so));
    solve_c(cur);
    const double dp = trajectory_change(*cur.p, *prev.p);
    const double dc = relative_change(c_at_saves(cur), c_at_saves(prev));
    TrajPtr cur_p = cur.p;
    slacks.push_back(std::async(std::launch::async, [cur_p, majorant] { return comparison_slack(*cur_p, *majorant); }));
    out.diag.delta_p.push_back(dp);
    out.diag.delta_c.push_back(dc);
    out.diag.delta.push_back(std::max(dp, dc));
    out.diag.iterations = k;
    prev = std::move(cur);
    used = std::move(coeff);
    if (std::max(dp, dc) <= ctx.options.tol) {
      out.diag.converged = true;
      break;
    }
  }
  for (auto& f : slacks) out.diag.comparison_slack.push_back(f.get());

  out.a_nodes = accumulate_time_integral(prev.p_tilde, schedule.dt, &history);
  out.p = *prev.p;
  out.c = std::move(prev.c);
  out.c_hat = std::move(prev.c_hat);

  if (ctx.options.record_budget) {
    BudgetRecorder rec(ctx.p_plan);
    std::vector<SpatialField> activation;
    for (const auto& s : used.scale) activation.push_back(scaled_role({s}, -1.0, FieldRole::alpha_of_c)[0]);
    SolveOptions so = base;
    so.observer = [&](int n, const PhaseField& f) {
      rec.record(f, &used.additive[n], nullptr, &activation[n], used.profile);
    };
    solve_linear(start, used, SourceTrack{}, ctx.p_plan, schedule, so);
    out.budget = rec.take();
  }
  return out;
}

}  // namespace

CoupledResult picard_coupled(const PhaseField& p0, const SpatialField& c0, const ModelParams& params,
                             const Schedule& schedule, const PicardOptions& options) {
  params.validate();
  schedule.validate();
  validate_options(options);
  if (p0.time() != 0.0 || c0.time() != 0.0) throw ConfigError("picard_coupled: initial data must be at t = 0");
  const GridSpec& g = p0.grid();
  require_same_grid(c0.grid(), g, "picard_coupled");
  require_finite(c0.values(), "c0");
  const double c_floor = -kClampRelative * max_abs(c0.values());
  for (std::size_t i = 0; i < c0.size(); ++i)
    if (c0[i] < c_floor) throw ConfigError("picard_coupled: c0 is negative at cell " + std::to_string(i));

  const HeatPlan p_plan(g, params.sigma);
  const HeatPlan c_plan(g, params.d, HeatDomain::spatial);

  CoupledResult result;
  result.rho = gaussian_rho(g, params.epsilon, params.v0);
  const double growth_rate = params.alpha1 * params.rho_sup(g.dim_v);

  std::vector<SpatialField> c_inf;
  c_inf.reserve(schedule.steps() + 1);
  for (int n = 0; n <= schedule.steps(); ++n) {
    std::vector<double> u(c0.size());
    c_plan.apply(c0.values(), u, schedule.time_at(n));
    c_inf.emplace_back(g, std::move(u), schedule.time_at(n), FieldRole::c_inf);
  }

  const double bound = max_abs(velocity_marginal(p0).values()) * std::exp(growth_rate * schedule.t_end);
  const int len = slab_steps(params, bound, schedule, options.use_slabs);

  const CoupledContext ctx{params, schedule, options, p_plan, c_plan, result.rho, c_inf, p0,
                           std::max(max_abs(c0.values()), std::numeric_limits<double>::min()), growth_rate};

  PhaseField state = p0;
  SpatialField c_hat = SpatialField::zeros(g, 0.0, FieldRole::c_hat);
  SpatialField history = SpatialField::zeros(g, 0.0, FieldRole::a);
  result.diagnostics = run_slabs(
      schedule, len, options,
      [&](int first, int last) { return coupled_slab(ctx, state, c_hat, history, first, last); },
      [&](CoupledSlab&& s, int first, int) {
        stitch(result.p, s.p, schedule);
        stitch_nodes(result.c, s.c, first, schedule);
        stitch_nodes(result.c_hat, s.c_hat, first, schedule);
        stitch_nodes(result.a, s.a_nodes, first, schedule);
        result.budget.append(std::move(s.budget));
        state = s.p.back();
        c_hat = s.c_hat.back();
        history = s.a_nodes.back();
      });
  for (int step : result.c.steps) result.c_inf.push(c_inf[step], step);
  result.diagnostics.slab_bound = bound;
  result.diagnostics.slab_length = len * schedule.dt;
  return result;
}

}  // namespace akf
