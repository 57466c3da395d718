#include "akf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "akf/errors.hpp"
#include "akf/moments.hpp"
#include "akf/snapshot_io.hpp"
#include "json.hpp"

namespace akf {

namespace {

using json = nlohmann::ordered_json;

struct DriverOutput {
  Trajectory p;
  Trajectory majorant;
  Trajectory heat_upper;
  SpatialSeries a;
  SpatialSeries c, c_hat;
  BudgetRecord budget;
  IterationDiagnostics diagnostics;
  std::vector<MomentSet> moments;
  SpatialSeries p_tilde, m;
  double rate = 0.0;
  double c0_sup = 0.0;
  std::map<double, double> source_sup;  // q -> ||f||_q
};

double parse_q(const std::string& suffix) {
  if (suffix == "l1") return 1.0;
  if (suffix == "l2") return 2.0;
  if (suffix == "linf") return kInfNorm;
  throw ConfigError("unknown norm suffix " + suffix);
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

bool is_calibrated(const std::string& name) {
  return starts_with(name, "gronwall_") || starts_with(name, "second_moment_envelope_") || name == "energy" ||
         starts_with(name, "heat_lq_") || starts_with(name, "moment_residual_");
}

double floor_for(const std::string& name) {
  return starts_with(name, "gronwall_") || starts_with(name, "second_moment_envelope_") ? kGronwallFloor
                                                                                        : kCalibratedFloor;
}

std::vector<std::string> selected_checks(const Scenario& s) { return s.checks.empty() ? default_checks(s) : s.checks; }

PicardOptions picard_options(const Scenario& s) {
  PicardOptions o;
  o.k_max = s.solver.k_max;
  o.tol = s.solver.tol;
  o.use_slabs = s.solver.slabs;
  o.max_halvings = s.solver.max_halvings;
  return o;
}

DriverOutput drive(const Scenario& s) {
  const auto names = selected_checks(s);
  auto wants = [&](const std::string& prefix) {
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return starts_with(n, prefix); });
  };
  DriverOutput out;
  const PhaseField p0 = build_phase(s.p0, s.grid);
  const HeatPlan plan(s.grid, s.params.sigma);
  if (s.driver == Scenario::Driver::pure) {
    SourceTrack source;
    if (s.f.shape != Recipe::Shape::zero) source = SourceTrack::constant(build_phase(s.f, s.grid));
    auto r = picard_pure(p0, source, s.params, s.schedule, picard_options(s));
    out.p = std::move(r.p);
    out.majorant = std::move(r.first_iterate);
    out.a = std::move(r.a);
    out.budget = std::move(r.budget);
    out.diagnostics = std::move(r.diagnostics);
    for (double q : {1.0, 2.0, kInfNorm})
      out.source_sup[q] = source.samples.empty() ? 0.0 : lq_norm(source.samples[0], q);
    if (wants("heat_lq_")) {
      SolveOptions so;
      Trajectory u = heat_upper_solution(p0, source, plan, s.schedule, so);
      // Keep the frames on the schedule's save nodes.
      for (std::size_t n = 0; n < u.size(); ++n)
        if (s.schedule.is_save(u.steps[n])) out.heat_upper.push(u[n], u.steps[n]);
    }
  } else {
    const SpatialField c0 = build_spatial(s.c0, s.grid, FieldRole::c);
    auto r = picard_coupled(p0, c0, s.params, s.schedule, picard_options(s));
    out.rate = s.params.alpha1 * s.params.rho_sup(s.grid.dim_v);
    std::vector<double> times;
    for (std::size_t n = 0; n < r.p.size(); ++n) times.push_back(r.p.time(n));
    out.majorant = growth_majorant(p0, plan, out.rate, times);
    out.p = std::move(r.p);
    out.a = std::move(r.a);
    out.c = std::move(r.c);
    out.c_hat = std::move(r.c_hat);
    out.budget = std::move(r.budget);
    out.diagnostics = std::move(r.diagnostics);
    out.c0_sup = max_abs(c0.values());
  }
  out.moments = moment_series(out.p);
  out.p_tilde = moment_component(out.moments, FieldRole::p_tilde);
  out.m = moment_component(out.moments, FieldRole::m);
  return out;
}

std::function<BoundCheck()> make_job(const std::string& name, const Scenario& s, const DriverOutput& d, double tol) {
  const double sigma = s.params.sigma;
  const double creation = 2.0 * sigma * s.grid.dim_v;
  if (name == "positivity") return [&d] { return check_positivity(d.p); };
  if (name == "positivity_c") return [&d] { return check_positivity(d.c, "positivity_c"); };
  if (name == "comparison") return [&d] { return check_comparison(d.p, d.majorant); };
  if (starts_with(name, "gronwall_p_tilde_")) {
    const double q = parse_q(name.substr(17));
    return [&d, q, tol] { return check_gronwall(d.p_tilde, "p_tilde", d.rate, q, tol); };
  }
  if (starts_with(name, "gronwall_p_")) {
    const double q = parse_q(name.substr(11));
    return [&d, q, tol] { return check_gronwall(d.p, d.rate, q, tol); };
  }
  if (starts_with(name, "gronwall_m_")) {
    const double q = parse_q(name.substr(11));
    return [&d, q, tol, creation] { return check_gronwall(d.m, "m", d.rate + creation, q, tol); };
  }
  if (starts_with(name, "second_moment_envelope_")) {
    const double q = parse_q(name.substr(23));
    return [&d, q, tol, creation] {
      return check_second_moment_envelope(d.m, d.p_tilde, d.rate, creation, q, tol);
    };
  }
  if (name == "energy") return [&d, sigma, tol] { return check_energy(d.budget, sigma, tol); };
  if (name == "speed_bound") return [&d] { return check_speed_bound(d.moments, {0.5, 1.0, 2.0, 0.0}); };
  if (name == "c_bounds") return [&d] { return check_c_bounds(d.c, d.c_hat, d.c0_sup); };
  if (starts_with(name, "heat_lq_")) {
    const double q = parse_q(name.substr(8));
    return [&d, q, tol] { return check_heat_lq(d.heat_upper, d.source_sup.at(q), q, tol); };
  }
  if (name == "moment_residual_p_tilde")
    return [&d, sigma, tol] { return check_moment_residual(d.budget, sigma, MomentEquation::p_tilde, tol); };
  if (name == "moment_residual_m")
    return [&d, sigma, tol] { return check_moment_residual(d.budget, sigma, MomentEquation::m, tol); };
  if (name == "picard_contraction") return [&d] { return check_picard_contraction(d.diagnostics); };
  const double picard_tol = s.solver.tol;
  if (name == "picard_convergence")
    return [&d, picard_tol] { return check_picard_convergence(d.diagnostics, picard_tol); };
  throw ConfigError("unknown check '" + name + "'");
}

std::vector<BoundCheck> evaluate(const Scenario& s, const DriverOutput& d) {
  std::vector<std::function<BoundCheck()>> jobs;
  for (const auto& name : selected_checks(s))
    jobs.push_back(make_job(name, s, d, is_calibrated(name) ? floor_for(name) : 0.0));
  return run_checks(jobs);
}

void write_moments_csv(const std::filesystem::path& path, const DriverOutput& d) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "time,p_tilde_inf,j_inf,m_inf,a_inf,mass\n" << std::setprecision(12);
  for (std::size_t n = 0; n < d.moments.size(); ++n) {
    const auto& ms = d.moments[n];
    const double a_inf = n < d.a.size() ? max_abs(d.a[n].values()) : 0.0;
    os << ms.time << ',' << max_abs(ms.p_tilde.values()) << ',' << max_abs(ms.j.values()) << ','
       << max_abs(ms.m.values()) << ',' << a_inf << ',' << integrate_phase(d.p[n]) << '\n';
  }
}

json check_to_json(const BoundCheck& c) {
  json j;
  j["name"] = c.name;
  j["paper_anchor"] = c.anchor;
  j["worst_slack"] = c.worst_slack;
  j["worst_time"] = c.worst_time;
  j["worst_cell"] = c.worst_cell;
  j["verdict"] = c.pass ? "pass" : "fail";
  j["tolerance"] = c.tolerance;
  return j;
}

json diagnostics_json(const IterationDiagnostics& diag) {
  json j;
  j["converged"] = diag.converged;
  j["monotone"] = diag.monotone;
  j["slab_bound"] = diag.slab_bound;
  j["slab_length"] = diag.slab_length;
  j["slab_boundaries"] = diag.slab_boundaries();
  json slabs = json::array();
  for (const auto& s : diag.slabs) {
    json e;
    e["t_start"] = s.t_start;
    e["t_end"] = s.t_end;
    e["iterations"] = s.iterations;
    e["converged"] = s.converged;
    e["halvings"] = s.halvings;
    e["delta"] = s.delta;
    e["delta_p"] = s.delta_p;
    if (!s.delta_c.empty()) e["delta_c"] = s.delta_c;
    e["comparison_slack"] = s.comparison_slack;
    slabs.push_back(e);
  }
  j["slabs"] = slabs;
  return j;
}

void write_outputs(const std::filesystem::path& dir, const Scenario& s, const DriverOutput& d,
                   const RunOutcome& outcome) {
  std::filesystem::create_directories(dir);
  auto snapshot_name = [](const char* prefix, int step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.akf", prefix, step);
    return std::string(buf);
  };
  for (std::size_t n = 0; n < d.p.size(); ++n) {
    if (!s.snapshots_all && n != 0 && n + 1 != d.p.size()) continue;
    write_snapshot(dir / snapshot_name("p", d.p.steps[n]), d.p[n]);
    if (n < d.c.size()) write_snapshot(dir / snapshot_name("c", d.c.steps[n]), d.c[n]);
  }
  write_moments_csv(dir / "moments.csv", d);

  json root;
  root["scenario"] = s.name;
  root["driver"] = s.driver == Scenario::Driver::pure ? "pure" : "coupled";
  root["grid"] = s.grid.describe();
  root["exit_code"] = outcome.exit_code;
  root["converged"] = outcome.converged;
  if (!outcome.failing_check.empty()) root["failing_check"] = outcome.failing_check;
  root["warnings"] = outcome.warnings;
  root["iterations"] = diagnostics_json(d.diagnostics);
  json checks = json::array();
  for (const auto& c : outcome.checks) checks.push_back(check_to_json(c));
  root["checks"] = checks;
  std::ofstream(dir / "diagnostics.json") << root.dump(2) << '\n';

  std::ofstream sum(dir / "summary.txt");
  sum << describe_scenario(s) << "\n";
  sum << "picard: " << (d.diagnostics.converged ? "converged" : "NOT converged") << ", "
      << d.diagnostics.slabs.size() << " slab(s), max iterate " << d.diagnostics.max_iterations() << "\n";
  for (const auto& sl : d.diagnostics.slabs) {
    sum << "  slab [" << sl.t_start << ", " << sl.t_end << "] k=" << sl.iterations
        << " final delta=" << (sl.delta.empty() ? 0.0 : sl.delta.back()) << "\n";
  }
  for (const auto& w : outcome.warnings) sum << "warning: " << w << "\n";
  sum << "\n";
  for (const auto& c : outcome.checks) sum << describe(c) << "\n";
  sum << "\nexit code " << outcome.exit_code << "\n";
}

}  // namespace

RunOutcome run_scenario(const Scenario& input, const RunOptions& options) {
  Scenario s = input;
  if (options.tol) s.solver.tol = *options.tol;
  validate_scenario(s);

  RunOutcome outcome;
  const PhaseField p0 = build_phase(s.p0, s.grid);
  const double frac = boundary_mass_fraction(p0);
  if (frac > 1e-8) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "initial density has %.2e of its mass within 3 cells of the box boundary", frac);
    outcome.warnings.push_back(buf);
  }

  const DriverOutput d = drive(s);
  outcome.converged = d.diagnostics.converged;
  outcome.diagnostics = d.diagnostics;
  outcome.checks = evaluate(s, d);

  // Richardson calibration of the scheme-dependent tolerances.
  Scenario coarse = s;
  coarse.schedule.dt = 2.0 * s.schedule.dt;
  coarse.schedule.save_stride = std::max(1, s.schedule.save_stride / 2);
  bool can_calibrate = s.solver.calibrate;
  try {
    coarse.schedule.validate();
  } catch (const ConfigError&) {
    can_calibrate = false;
  }
  if (can_calibrate && std::any_of(outcome.checks.begin(), outcome.checks.end(),
                                   [](const BoundCheck& c) { return is_calibrated(c.name); })) {
    const DriverOutput dc = drive(coarse);
    const auto coarse_checks = evaluate(coarse, dc);
    for (std::size_t i = 0; i < outcome.checks.size(); ++i) {
      auto& c = outcome.checks[i];
      if (!is_calibrated(c.name)) continue;
      c.tolerance = calibrated_tolerance(floor_for(c.name), c.worst_slack, coarse_checks[i].worst_slack);
      c.pass = std::isfinite(c.worst_slack) && c.worst_slack >= -c.tolerance;
    }
  }

  if (!outcome.converged) {
    outcome.exit_code = kExitNonConvergence;
  } else {
    for (const auto& c : outcome.checks)
      if (!c.pass) {
        outcome.exit_code = kExitCheckFailure;
        outcome.failing_check = c.name;
        break;
      }
  }

  if (!options.out_dir.empty()) {
    outcome.output = options.out_dir / s.name;
    write_outputs(outcome.output, s, d, outcome);
  }
  return outcome;
}

std::string checks_json(const std::vector<BoundCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(check_to_json(c));
  return arr.dump(2);
}

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResolutionError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

int run_command(const std::vector<std::string>& targets, const std::vector<std::string>& overrides,
                const RunOptions& options, int jobs, std::ostream& out, std::ostream& err) {
  if (targets.empty()) {
    err << "run: no scenario given\n";
    return kExitConfig;
  }
  std::mutex io;
  auto one = [&](const std::string& target) {
    std::ostringstream local_out, local_err;
    const int code = guarded(local_err, [&] {
      const Scenario s = load_scenario(resolve_scenario(target), overrides);
      const RunOutcome r = run_scenario(s, options);
      local_out << s.name << ": ";
      if (r.exit_code == kExitOk) local_out << "ok";
      else if (r.exit_code == kExitNonConvergence) local_out << "picard iteration did not converge";
      else local_out << "check failed: " << r.failing_check;
      local_out << "\n";
      for (const auto& w : r.warnings) local_err << s.name << ": warning: " << w << "\n";
      for (const auto& c : r.checks) local_out << "  " << describe(c) << "\n";
      if (!r.output.empty()) local_out << "  artifacts in " << r.output.string() << "\n";
      if (r.exit_code == kExitCheckFailure) local_err << s.name << ": check failed: " << r.failing_check << "\n";
      return r.exit_code;
    });
    std::lock_guard lock(io);
    out << local_out.str();
    err << local_err.str();
    return code;
  };

  int worst = kExitOk;
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < targets.size(); start += width) {
    std::vector<std::future<int>> batch;
    for (std::size_t i = start; i < std::min(targets.size(), start + width); ++i)
      batch.push_back(std::async(std::launch::async, one, targets[i]));
    for (auto& f : batch) worst = std::max(worst, f.get());
  }
  return worst;
}

int check_command(const std::string& target, const std::vector<std::string>& overrides, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load_scenario(resolve_scenario(target), overrides);
    validate_scenario(s);
    const PhaseField p0 = build_phase(s.p0, s.grid);
    if (s.driver == Scenario::Driver::coupled) build_spatial(s.c0, s.grid, FieldRole::c);
    out << describe_scenario(s);
    const double frac = boundary_mass_fraction(p0);
    if (frac > 1e-8) err << "warning: initial density has " << frac << " of its mass near the box boundary\n";
    out << "configuration ok\n";
    return kExitOk;
  });
}

int list_checks_command(std::ostream& out) {
  for (const auto& c : check_catalog()) out << std::left << std::setw(28) << c.name << " " << c.anchor << "\n";
  return kExitOk;
}

int describe_command(const std::string& name, std::ostream& out, std::ostream& err) {
  if (const CheckInfo* c = find_check(name)) {
    out << c->name << "\n  anchor: " << c->anchor << "\n  " << c->summary << "\n";
    return kExitOk;
  }
  return guarded(err, [&] {
    const Scenario s = load_scenario(resolve_scenario(name));
    out << describe_scenario(s);
    return kExitOk;
  });
}

}  // namespace akf
