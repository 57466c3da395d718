// Acceptance suite: one PASS/FAIL line per property, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "akf/errors.hpp"
#include "akf/harness.hpp"
#include "akf/heat.hpp"
#include "akf/linear.hpp"
#include "akf/moments.hpp"
#include "akf/oracles.hpp"
#include "akf/picard.hpp"
#include "akf/runner.hpp"
#include "akf/scenario.hpp"

using namespace akf;

namespace {

// Pinned tolerances.
constexpr double kMassTol = 1e-12;
constexpr double kSemigroupTol = 1e-10;
constexpr double kGaussianTol = 1e-8;
constexpr double kOrderTarget = 2.0;
constexpr double kOrderBand = 0.3;
constexpr double kUniquenessTol = 1e-7;
constexpr double kVolterraTol = 1e-8;
constexpr double kSwitchOffTol = 1e-12;
constexpr double kSwitchOffPicardTol = 1e-13;
constexpr int kLipschitzPairs = 100000;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void note(Verdict& v, const std::string& what, bool ok) {
  v.pass = v.pass && ok;
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += what + (ok ? "" : " [fail]");
}

double rel_sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d / std::max(max_abs(a), 1e-300);
}

PhaseField with_value(const PhaseField& f, std::size_t cell, double value) {
  std::vector<double> v(f.values().begin(), f.values().end());
  v[cell] = value;
  return PhaseField(f.grid(), std::move(v), f.time());
}

SpatialField with_value(const SpatialField& f, std::size_t cell, double value) {
  std::vector<double> v(f.values().begin(), f.values().end());
  v[cell] = value;
  return SpatialField(f.grid(), std::move(v), f.time(), f.role());
}

// ---------------------------------------------------------------------------
// Shipped scenarios, run once through the same path as the CLI.

struct ShippedRun {
  Scenario scenario;
  RunOutcome outcome;
};

const std::map<std::string, ShippedRun>& shipped_runs() {
  static const std::map<std::string, ShippedRun> runs = [] {
    std::map<std::string, ShippedRun> out;
    for (const auto& name : shipped_scenarios()) {
      ShippedRun r;
      r.scenario = load_scenario(resolve_scenario(name));
      r.outcome = run_scenario(r.scenario, RunOptions{});
      out.emplace(name, std::move(r));
    }
    return out;
  }();
  return runs;
}

// Every shipped check whose name satisfies `select` must pass; returns the
// count inspected so an empty selection is visible.
Verdict shipped_checks(const std::function<bool(const std::string&)>& select) {
  Verdict v;
  for (const auto& [name, run] : shipped_runs()) {
    int seen = 0;
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& c : run.outcome.checks) {
      if (!select(c.name)) continue;
      ++seen;
      worst = std::min(worst, c.worst_slack);
      if (!c.pass) {
        ok = false;
        std::fprintf(stderr, "  %s: %s\n", name.c_str(), describe(c).c_str());
      }
    }
    if (seen == 0) continue;
    note(v, name + " " + std::to_string(seen) + " checks, worst " + fmt("%.2e", worst + 0.0), ok);
  }
  if (v.detail.empty()) note(v, "no shipped scenario runs these checks", false);
  return v;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

// ---------------------------------------------------------------------------

GridSpec grid_1x1(int n, double half_width) {
  GridSpec g;
  g.dim_x = 1;
  g.dim_v = 1;
  g.n_x = n;
  g.n_v = n;
  g.half_width_x = half_width;
  g.half_width_v = half_width;
  return g;
}

PhaseField bump(const GridSpec& g, double var_x, double var_v, double cx = 0.0, double cv = 0.0) {
  Recipe r;
  r.shape = Recipe::Shape::gaussian_bump;
  r.variance_x = var_x;
  r.variance_v = var_v;
  r.center_x = {cx, 0.0};
  r.center_v = {cv, 0.0};
  return build_phase(r, g);
}

Verdict heat_exactness() {
  Verdict v;
  const GridSpec g = grid_1x1(256, 8.0);
  const double sigma = 0.1;
  const HeatPlan plan(g, sigma);
  const PhaseField p0 = bump(g, 1.0, 1.25);

  const PhaseField p1 = heat_step(p0, 1.0, plan);
  const double m0 = integrate_phase(p0);
  const double mass = std::abs(integrate_phase(p1) - m0) / m0;
  note(v, "mass " + fmt("%.1e", mass), mass <= kMassTol);

  const PhaseField split = heat_step(heat_step(p0, 0.3, plan), 0.7, plan);
  const double semigroup = rel_sup_diff(p1.values(), split.values());
  note(v, "semigroup " + fmt("%.1e", semigroup), semigroup <= kSemigroupTol);

  // A Gaussian stays Gaussian with each variance grown by 2 sigma t.
  const PhaseField exact = bump(g, 1.0 + 2.0 * sigma, 1.25 + 2.0 * sigma);
  const double gauss = rel_sup_diff(exact.values(), p1.values());
  note(v, "gaussian " + fmt("%.1e", gauss), gauss <= kGaussianTol);
  return v;
}

// ---------------------------------------------------------------------------
// Linear solver accuracy against the brute-force references.

struct LinearProblem {
  GridSpec grid;
  double sigma = 0.1;
  PhaseField p0;
  CoefficientTrack coeff;
  SourceTrack source;
  oracles::PhaseFunction coeff_fn;
  oracles::PhaseFunction source_fn;
};

LinearProblem make_problem(int n, double half_width) {
  const GridSpec g = grid_1x1(n, half_width);
  LinearProblem lp{g, 0.1, bump(g, 1.0, 1.0, -0.5, 0.5), {}, {}, {}, {}};
  std::vector<double> add(g.x_cells()), scale(g.x_cells(), 0.5), profile(g.v_cells());
  for (std::size_t ix = 0; ix < add.size(); ++ix) {
    const double x = g.x_point(ix)[0];
    add[ix] = 0.5 * (1.0 + std::cos(std::numbers::pi * x / half_width));
  }
  for (std::size_t iv = 0; iv < profile.size(); ++iv) {
    const double s = std::sin(std::numbers::pi * g.v_point(iv)[0] / half_width);
    profile[iv] = s * s;
  }
  lp.coeff.additive.emplace_back(g, add, 0.0, FieldRole::a);
  lp.coeff.scale.emplace_back(g, scale, 0.0, FieldRole::generic);
  lp.coeff.profile = profile;
  PhaseField f = bump(g, 1.0, 0.5, 1.0, -0.5);
  std::vector<double> fv(f.values().begin(), f.values().end());
  for (double& x : fv) x *= 0.3;
  lp.source = SourceTrack::constant(PhaseField(g, fv, 0.0));

  std::vector<double> full(g.phase_cells());
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix)
    for (std::size_t iv = 0; iv < g.v_cells(); ++iv)
      full[ix * g.v_cells() + iv] = add[ix] + scale[ix] * profile[iv];
  lp.coeff_fn = [full](double) { return full; };
  lp.source_fn = [fv](double) { return fv; };
  return lp;
}

Trajectory solve(const LinearProblem& lp, double t_end, double dt) {
  const HeatPlan plan(lp.grid, lp.sigma);
  Schedule s{t_end, dt, static_cast<int>(std::lround(t_end / dt))};
  return solve_linear(lp.p0, lp.coeff, lp.source, plan, s);
}

Verdict solver_accuracy() {
  Verdict v;
  const double t_end = 0.5;
  {
    const LinearProblem lp = make_problem(32, 4.0);
    const std::vector<double> dts = {0.05, 0.025, 0.0125};
    const Trajectory ref = oracles::duhamel_reference(lp.p0, lp.coeff_fn, lp.source_fn, lp.sigma,
                                                      dts.back() / 16.0, {t_end});
    std::vector<double> err;
    for (double dt : dts) err.push_back(rel_sup_diff(ref.back().values(), solve(lp, t_end, dt).back().values()));
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double order = std::log2(err[i - 1] / err[i]);
      note(v, "dt order " + fmt("%.3f", order), std::abs(order - kOrderTarget) <= kOrderBand);
    }
  }
  {
    const std::vector<int> ns = {32, 64, 128};
    std::vector<double> err;
    for (int n : ns) {
      const LinearProblem lp = make_problem(n, 4.0);
      const Trajectory fd =
          oracles::fd_reference(lp.p0, lp.coeff_fn, lp.source_fn, lp.sigma, 5e-5, {t_end});
      err.push_back(rel_sup_diff(solve(lp, t_end, 1e-3).back().values(), fd.back().values()));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double order = std::log2(err[i - 1] / err[i]);
      note(v, "h order " + fmt("%.3f", order), std::abs(order - kOrderTarget) <= kOrderBand);
    }
  }
  return v;
}

// Pure heat flow: the energy balance is an identity, so its defect is pure
// time quadrature and must shrink like dt^2.
Verdict energy_identity() {
  Verdict v;
  const GridSpec g = grid_1x1(64, 8.0);
  const double sigma = 0.1;
  const HeatPlan plan(g, sigma);
  const PhaseField p0 = bump(g, 1.0, 1.0);
  std::vector<double> defect;
  for (double dt : {0.02, 0.01, 0.005}) {
    BudgetRecorder rec(plan);
    SolveOptions o;
    o.observer = [&](int, const PhaseField& p) { rec.record(p, nullptr, nullptr, nullptr, {}); };
    Schedule s{1.0, dt, 1};
    solve_linear(p0, CoefficientTrack{}, SourceTrack{}, plan, s, o);
    const auto e = energy_defect(rec.result(), sigma);
    double worst = 0.0;
    for (double x : e) worst = std::max(worst, std::abs(x));
    defect.push_back(worst / rec.result().l2_sq.front());
  }
  for (std::size_t i = 1; i < defect.size(); ++i) {
    const double order = std::log2(defect[i - 1] / defect[i]);
    note(v, "identity defect " + fmt("%.1e", defect[i]) + " order " + fmt("%.3f", order),
         std::abs(order - kOrderTarget) <= kOrderBand);
  }
  return v;
}

Verdict picard_convergence() {
  Verdict v = shipped_checks([](const std::string& n) { return starts_with(n, "picard_"); });
  for (const auto& [name, run] : shipped_runs()) {
    const int k = run.outcome.diagnostics.max_iterations();
    note(v, name + " k<=" + std::to_string(k), run.outcome.converged && k <= run.scenario.solver.k_max);
  }
  return v;
}

Verdict uniqueness() {
  Verdict v;
  const double tol = 1e-9;
  {
    const Scenario s = load_scenario(resolve_scenario("pure-gaussian"));
    const PhaseField p0 = build_phase(s.p0, s.grid);
    const SourceTrack f = SourceTrack::constant(build_phase(s.f, s.grid));
    const double dev = oracles::uniqueness_probe_pure(p0, f, s.params, s.schedule, {}, {InitialGuess::Kind::zero},
                                                      tol);
    note(v, "pure " + fmt("%.1e", dev), dev < kUniquenessTol);
  }
  {
    const Scenario s = load_scenario(resolve_scenario("coupled-ramp"));
    const PhaseField p0 = build_phase(s.p0, s.grid);
    const SpatialField c0 = build_spatial(s.c0, s.grid, FieldRole::c);
    const double dev = oracles::uniqueness_probe_coupled(p0, c0, s.params, s.schedule, {},
                                                         {InitialGuess::Kind::scaled_heat_flow, 2.0}, tol);
    note(v, "coupled " + fmt("%.1e", dev), dev < kUniquenessTol);
  }
  return v;
}

Verdict volterra() {
  Verdict v;
  const GridSpec g = grid_1x1(32, 2.0);
  const double sigma = 0.1, t = 1.0, a0 = 1.0;
  const std::size_t source = g.phase_cells() / 2 + g.v_cells() / 2;
  {
    const std::vector<double> a(g.phase_cells(), a0);
    oracles::VolterraOptions o;
    o.steps = 4000;
    const auto r = oracles::volterra_fundamental([&a](double) { return a; }, sigma, g, t, source, o);
    std::vector<double> expect(r.heat_kernel.values().begin(), r.heat_kernel.values().end());
    for (double& x : expect) x *= std::exp(-a0 * t);
    const double dev = rel_sup_diff(expect, r.gamma_field.values());
    note(v, "constant " + fmt("%.1e", dev), dev <= kVolterraTol);
  }
  {
    std::vector<double> a(g.phase_cells());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto x = g.x_point(i / g.v_cells())[0];
      const auto w = g.v_point(i % g.v_cells())[0];
      a[i] = 1.0 + std::sin(std::numbers::pi * x / 2.0) * std::cos(std::numbers::pi * w / 2.0);
    }
    const auto r = oracles::volterra_fundamental([&a](double) { return a; }, sigma, g, t, source);
    const auto gam = r.gamma_field.values();
    const auto heat = r.heat_kernel.values();
    const double scale = max_abs(heat);
    bool positive = true, below = true;
    for (std::size_t i = 0; i < gam.size(); ++i) {
      positive = positive && gam[i] > 0.0;
      below = below && gam[i] <= heat[i] + 1e-12 * scale;
    }
    note(v, "variable 0<Gamma", positive);
    note(v, "Gamma<=G", below);
    note(v, "fit C=" + fmt("%.3g", r.fit_c), std::isfinite(r.fit_c) && r.fit_c > 0.0);
  }
  return v;
}

Verdict lipschitz_alpha() {
  Verdict v;
  std::mt19937_64 rng(20240611);
  std::exponential_distribution<double> conc(0.5);
  const double alpha1 = 1.7, c_R = 0.6;
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < kLipschitzPairs; ++i) {
    const double c1 = conc(rng), c2 = conc(rng);
    const double lhs = std::abs(alpha_of_c(c1, alpha1, c_R) - alpha_of_c(c2, alpha1, c_R));
    const double rhs = alpha1 / c_R * std::abs(c1 - c2);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    if (lhs > rhs) ++violations;
  }
  note(v, std::to_string(violations) + " violations, worst ratio " + fmt("%.4f", worst), violations == 0);
  return v;
}

Verdict switch_off() {
  Verdict v;
  const Scenario s = load_scenario(resolve_scenario("coupled-ramp"));
  ModelParams params = s.params;
  params.alpha1 = 0.0;
  const PhaseField p0 = build_phase(s.p0, s.grid);
  const SpatialField c0 = build_spatial(s.c0, s.grid, FieldRole::c);
  PicardOptions o;
  o.tol = kSwitchOffPicardTol;
  o.k_max = 40;
  o.record_budget = false;
  const auto coupled = picard_coupled(p0, c0, params, s.schedule, o);
  const auto pure = picard_pure(p0, SourceTrack{}, params, s.schedule, o);
  const double dev = oracles::max_relative_deviation(pure.p, coupled.p);
  note(v, "p " + fmt("%.1e", dev), dev <= kSwitchOffTol);
  note(v, "converged", coupled.diagnostics.converged && pure.diagnostics.converged);
  return v;
}

// ---------------------------------------------------------------------------
// Fault injection: corrupt one cell of a correct trajectory and require the
// matching check to fail there.

struct Fixture {
  Scenario s;
  CoupledResult r;
  Trajectory majorant;
  double rate = 0.0;
};

const Fixture& fixture() {
  static const Fixture fx = [] {
    Fixture f;
    f.s = load_scenario(resolve_scenario("coupled-ramp"),
                        {"grid.n_x=64", "grid.n_v=64", "schedule.dt=0.01", "schedule.t_end=0.2",
                         "schedule.save_stride=5", "c0.width=1"});
    const PhaseField p0 = build_phase(f.s.p0, f.s.grid);
    const SpatialField c0 = build_spatial(f.s.c0, f.s.grid, FieldRole::c);
    f.r = picard_coupled(p0, c0, f.s.params, f.s.schedule);
    f.rate = f.s.params.alpha1 * f.s.params.rho_sup(f.s.grid.dim_v);
    std::vector<double> times;
    for (std::size_t n = 0; n < f.r.p.size(); ++n) times.push_back(f.r.p.time(n));
    f.majorant = growth_majorant(p0, HeatPlan(f.s.grid, f.s.params.sigma), f.rate, times);
    return f;
  }();
  return fx;
}

void expect_located(Verdict& v, const BoundCheck& clean, const BoundCheck& bad, const std::string& name,
                    long cell, double time) {
  const bool ok = clean.pass && !bad.pass && bad.name == name && bad.worst_cell == cell &&
                  std::abs(bad.worst_time - time) < 1e-12;
  note(v, name, ok);
  if (!ok) std::fprintf(stderr, "  clean: %s\n  bad:   %s\n", describe(clean).c_str(), describe(bad).c_str());
}

Verdict fault_injection() {
  Verdict v;
  const Fixture& fx = fixture();
  const std::size_t frame = fx.r.p.size() / 2;
  const double t = fx.r.p.time(frame);
  const std::size_t cell = fx.r.p[frame].size() / 3 + 7;
  const std::size_t xcell = fx.r.c[frame].size() / 4 + 3;

  auto corrupt_p = [&](double value) {
    Trajectory p = fx.r.p;
    p.frames[frame] = with_value(p[frame], cell, value);
    return p;
  };
  const double pmax = max_abs(fx.r.p[frame].values());

  expect_located(v, check_positivity(fx.r.p), check_positivity(corrupt_p(-1e-6 * pmax)), "positivity",
                 static_cast<long>(cell), t);

  {
    SpatialSeries c = fx.r.c;
    c.frames[frame] = with_value(c[frame], xcell, -1e-6);
    expect_located(v, check_positivity(fx.r.c, "positivity_c"), check_positivity(c, "positivity_c"),
                   "positivity_c", static_cast<long>(xcell), t);
  }

  expect_located(v, check_comparison(fx.r.p, fx.majorant),
                 check_comparison(corrupt_p(1.5 * max_abs(fx.majorant[frame].values())), fx.majorant),
                 "comparison", static_cast<long>(cell), t);

  expect_located(v, check_gronwall(fx.r.p, fx.rate, kInfNorm, kGronwallFloor),
                 check_gronwall(corrupt_p(10.0 * pmax), fx.rate, kInfNorm, kGronwallFloor), "gronwall_p_linf",
                 static_cast<long>(cell), t);

  {
    BudgetRecord b = fx.r.budget;
    const std::size_t node = b.size() / 2;
    b.l2_sq[node] *= 1.5;
    expect_located(v, check_energy(fx.r.budget, fx.s.params.sigma, kCalibratedFloor * 1e4),
                   check_energy(b, fx.s.params.sigma, kCalibratedFloor * 1e4), "energy", -1, b.times[node]);
  }

  {
    auto moments = moment_series(fx.r.p);
    const std::vector<double> radii = {0.5, 1.0, 2.0, 0.0};
    const auto clean = check_speed_bound(moments, radii);
    const double jmax = max_abs(moments[frame].j.values());
    moments[frame].j = with_value(moments[frame].j, xcell, 10.0 * jmax + 1.0);
    expect_located(v, clean, check_speed_bound(moments, radii), "speed_bound", static_cast<long>(xcell), t);
  }

  {
    const double c0_sup = max_abs(fx.r.c[0].values());
    SpatialSeries c = fx.r.c;
    c.frames[frame] = with_value(c[frame], xcell, 2.0 * c0_sup);
    expect_located(v, check_c_bounds(fx.r.c, fx.r.c_hat, c0_sup), check_c_bounds(c, fx.r.c_hat, c0_sup),
                   "c_bounds", static_cast<long>(xcell), t);
  }
  return v;
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

// An optional argument restricts the run to criteria whose name contains it.
int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {"heat semigroup exactness", heat_exactness},
      {"positivity of p and c",
       [] { return shipped_checks([](const std::string& n) { return starts_with(n, "positivity"); }); }},
      {"comparison with majorant", [] { return shipped_checks([](const std::string& n) { return n == "comparison"; }); }},
      {"gronwall envelopes",
       [] {
         return shipped_checks([](const std::string& n) {
           return starts_with(n, "gronwall_") || starts_with(n, "second_moment_envelope_") ||
                  starts_with(n, "heat_lq_");
         });
       }},
      {"energy inequality",
       [] {
         Verdict v = shipped_checks([](const std::string& n) { return n == "energy"; });
         const Verdict id = energy_identity();
         note(v, id.detail, id.pass);
         return v;
       }},
      {"speed moment bound", [] { return shipped_checks([](const std::string& n) { return n == "speed_bound"; }); }},
      {"concentration bounds", [] { return shipped_checks([](const std::string& n) { return n == "c_bounds"; }); }},
      {"linear solver accuracy", solver_accuracy},
      {"picard convergence", picard_convergence},
      {"uniqueness across seeds", uniqueness},
      {"volterra fundamental solution", volterra},
      {"lipschitz activation", lipschitz_alpha},
      {"coupling switch-off", switch_off},
      {"fault injection", fault_injection},
  };

  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (std::string(c.name).find(filter) == std::string::npos) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %-30s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
