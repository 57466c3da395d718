#include "akf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>

#include "akf/errors.hpp"

namespace akf {

namespace {

std::string q_suffix(double q) {
  if (q == 1.0) return "l1";
  if (q == 2.0) return "l2";
  if (std::isinf(q)) return "linf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "l%g", q);
  return buf;
}

std::vector<CheckInfo> build_catalog() {
  std::vector<CheckInfo> c;
  c.push_back({"positivity", "positivity of solutions of the linear problem",
               "min p >= -1e-12 max|p| at every saved time"});
  c.push_back({"positivity_c", "positivity of the concentration",
               "min c >= -1e-12 max|c| at every saved time"});
  c.push_back({"comparison", "comparison principle against the upper solution",
               "p below its majorant (first iterate, or e^{alpha1 |rho| t} heat flow of p0)"});
  for (const char* fam : {"p", "p_tilde", "m"}) {
    for (double q : {1.0, 2.0, kInfNorm}) {
      const std::string name = std::string("gronwall_") + fam + "_" + q_suffix(q);
      std::string anchor = std::string("Gronwall envelope for ") + fam;
      c.push_back({name, anchor, "L^" + q_suffix(q).substr(1) + " norm of " + fam + " below its exponential envelope"});
    }
  }
  for (double q : {1.0, 2.0, kInfNorm})
    c.push_back({"second_moment_envelope_" + q_suffix(q), "affine Gronwall envelope for m",
                 "m below e^{rate t}(||m0|| + 2 sigma dim_v t ||p_tilde0||)"});
  c.push_back({"energy", "energy inequality", "||p||^2 + 2 sigma int ||grad p||^2 <= ||p0||^2 + 2 int int f p"});
  c.push_back({"speed_bound", "speed moment interpolation bound", "j <= R p_tilde + m/R for R in {0.5, 1, 2, optimal}"});
  c.push_back({"c_bounds", "concentration bounds", "0 <= c <= ||c0||_inf and c_hat <= 0"});
  for (double q : {1.0, 2.0, kInfNorm})
    c.push_back({"heat_lq_" + q_suffix(q), "L^q estimate of the heat upper solution",
                 "||u(t)||_q <= ||p0||_q + t max ||f||_q"});
  c.push_back({"moment_residual_p_tilde", "equation satisfied by the velocity marginal",
               "trapezoid residual of the marginal equation"});
  c.push_back({"moment_residual_m", "equation satisfied by the second moment",
               "trapezoid residual of the second-moment equation with creation 2 sigma dim_v p_tilde"});
  c.push_back({"picard_contraction", "fixed-point iteration contracts", "deltas strictly decreasing from k = 3"});
  c.push_back({"picard_convergence", "fixed-point iteration converges", "every slab reaches the tolerance"});
  return c;
}

BoundCheck make(const std::string& name, double tol) {
  BoundCheck b;
  b.name = name;
  const CheckInfo* info = find_check(name);
  b.anchor = info ? info->anchor : "";
  b.tolerance = tol;
  b.worst_slack = std::numeric_limits<double>::infinity();
  return b;
}

void add(BoundCheck& b, double time, double slack, long cell) {
  b.times.push_back(time);
  b.slack.push_back(slack);
  if (slack < b.worst_slack || b.slack.size() == 1) {
    b.worst_slack = slack;
    b.worst_time = time;
    b.worst_cell = cell;
  }
}

BoundCheck& finish(BoundCheck& b) {
  if (b.slack.empty()) b.worst_slack = 0.0;
  b.pass = std::isfinite(b.worst_slack) && b.worst_slack >= -b.tolerance;
  return b;
}

long argmax_abs(std::span<const double> v) {
  long best = 0;
  double m = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > m) {
      m = std::abs(v[i]);
      best = static_cast<long>(i);
    }
  return best;
}

template <typename Field>
BoundCheck positivity_impl(const Series<Field>& s, const std::string& name, double tol) {
  BoundCheck b = make(name, tol);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto v = s[n].values();
    const double scale = max_abs(v);
    // Slack is the most negative normalized value, zero when nonnegative.
    double minr = std::numeric_limits<double>::infinity();
    long minc = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = scale > 0.0 ? v[i] / scale : 0.0;
      if (r < minr) {
        minr = r;
        minc = static_cast<long>(i);
      }
    }
    add(b, s.time(n), v.empty() ? 0.0 : std::min(minr, 0.0), minc);
  }
  return finish(b);
}

template <typename Field>
BoundCheck gronwall_impl(const Series<Field>& s, const std::string& name, double rate, double q, double tol) {
  BoundCheck b = make(name, tol);
  if (s.empty()) return finish(b);
  const double t0 = s.time(0);
  const double base = lq_norm(s[0], q);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double bound = base * std::exp(rate * (s.time(n) - t0));
    const double observed = lq_norm(s[n], q);
    const double slack = bound > 0.0 ? (bound - observed) / bound : -observed;
    add(b, s.time(n), slack, argmax_abs(s[n].values()));
  }
  return finish(b);
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t n = 1; n < y.size(); ++n) out[n] = out[n - 1] + 0.5 * (t[n] - t[n - 1]) * (y[n] + y[n - 1]);
  return out;
}

}  // namespace

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> catalog = build_catalog();
  return catalog;
}

const CheckInfo* find_check(const std::string& name) {
  for (const auto& c : check_catalog())
    if (c.name == name) return &c;
  return nullptr;
}

BoundCheck check_positivity(const Trajectory& p, double tol) { return positivity_impl(p, "positivity", tol); }

BoundCheck check_positivity(const SpatialSeries& f, const std::string& name, double tol) {
  return positivity_impl(f, name, tol);
}

BoundCheck check_comparison(const Trajectory& p, const Trajectory& majorant, double tol) {
  if (p.size() != majorant.size()) throw ConfigError("check_comparison: trajectories have different lengths");
  BoundCheck b = make("comparison", tol);
  for (std::size_t n = 0; n < p.size(); ++n) {
    require_same_grid(p[n].grid(), majorant[n].grid(), "check_comparison");
    if (std::abs(p.time(n) - majorant.time(n)) > 1e-9 * std::max(1.0, std::abs(p.time(n))))
      throw ConfigError("check_comparison: time grids differ at frame " + std::to_string(n));
    const double scale = max_abs(majorant[n].values());
    const double denom = scale > 0.0 ? scale : 1.0;
    double worst = std::numeric_limits<double>::infinity();
    long cell = -1;
    for (std::size_t i = 0; i < p[n].size(); ++i) {
      const double s = (majorant[n][i] - p[n][i]) / denom;
      if (s < worst) {
        worst = s;
        cell = static_cast<long>(i);
      }
    }
    add(b, p.time(n), p[n].size() ? worst : 0.0, cell);
  }
  return finish(b);
}

BoundCheck check_gronwall(const Trajectory& p, double rate, double q, double tol) {
  return gronwall_impl(p, "gronwall_p_" + q_suffix(q), rate, q, tol);
}

BoundCheck check_gronwall(const SpatialSeries& f, const std::string& family, double rate, double q, double tol) {
  return gronwall_impl(f, "gronwall_" + family + "_" + q_suffix(q), rate, q, tol);
}

BoundCheck check_second_moment_envelope(const SpatialSeries& m, const SpatialSeries& p_tilde, double rate,
                                        double creation, double q, double tol) {
  BoundCheck b = make("second_moment_envelope_" + q_suffix(q), tol);
  if (m.empty()) return finish(b);
  if (p_tilde.empty()) throw ConfigError("check_second_moment_envelope: missing marginal");
  const double t0 = m.time(0);
  const double m0 = lq_norm(m[0], q);
  const double pt0 = lq_norm(p_tilde[0], q);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const double t = m.time(n) - t0;
    const double bound = std::exp(rate * t) * (m0 + creation * t * pt0);
    const double observed = lq_norm(m[n], q);
    const double slack = bound > 0.0 ? (bound - observed) / bound : -observed;
    add(b, m.time(n), slack, argmax_abs(m[n].values()));
  }
  return finish(b);
}

std::vector<double> energy_defect(const BudgetRecord& budget, double sigma) {
  const auto diss = cumulative_trapezoid(budget.times, budget.dissipation);
  const auto work = cumulative_trapezoid(budget.times, budget.work);
  std::vector<double> e(budget.size());
  for (std::size_t n = 0; n < e.size(); ++n)
    e[n] = budget.l2_sq[n] + 2.0 * sigma * diss[n] - budget.l2_sq[0] - 2.0 * work[n];
  return e;
}

BoundCheck check_energy(const BudgetRecord& budget, double sigma, double tol) {
  BoundCheck b = make("energy", tol);
  const auto e = energy_defect(budget, sigma);
  double scale = 0.0;
  for (double v : budget.l2_sq) scale = std::max(scale, v);
  const double denom = scale > 0.0 ? scale : 1.0;
  for (std::size_t n = 0; n < e.size(); ++n) add(b, budget.times[n], -e[n] / denom, -1);
  return finish(b);
}

BoundCheck check_speed_bound(const std::vector<MomentSet>& moments, const std::vector<double>& radii, double tol) {
  BoundCheck b = make("speed_bound", tol);
  for (const auto& ms : moments) {
    const std::size_t nx = ms.p_tilde.size();
    double worst = std::numeric_limits<double>::infinity();
    long cell = -1;
    for (double r : radii) {
      std::vector<double> bound(nx);
      for (std::size_t i = 0; i < nx; ++i) {
        const double pt = ms.p_tilde[i], m = ms.m[i];
        bound[i] = r > 0.0 ? r * pt + m / r : 2.0 * std::sqrt(std::max(pt * m, 0.0));
      }
      const double scale = max_abs(bound);
      const double denom = scale > 0.0 ? scale : 1.0;
      for (std::size_t i = 0; i < nx; ++i) {
        const double s = (bound[i] - ms.j[i]) / denom;
        if (s < worst) {
          worst = s;
          cell = static_cast<long>(i);
        }
      }
    }
    add(b, ms.time, nx ? worst : 0.0, cell);
  }
  return finish(b);
}

BoundCheck check_c_bounds(const SpatialSeries& c, const SpatialSeries& c_hat, double c0_sup, double tol) {
  if (c.size() != c_hat.size()) throw ConfigError("check_c_bounds: series have different lengths");
  BoundCheck b = make("c_bounds", tol);
  const double denom = c0_sup > 0.0 ? c0_sup : 1.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    double worst = std::numeric_limits<double>::infinity();
    long cell = -1;
    for (std::size_t i = 0; i < c[n].size(); ++i) {
      const double s = std::min({c[n][i], c0_sup - c[n][i], -c_hat[n][i]}) / denom;
      if (s < worst) {
        worst = s;
        cell = static_cast<long>(i);
      }
    }
    add(b, c.time(n), c[n].size() ? worst : 0.0, cell);
  }
  return finish(b);
}

BoundCheck check_heat_lq(const Trajectory& u, double source_sup_q, double q, double tol) {
  BoundCheck b = make("heat_lq_" + q_suffix(q), tol);
  if (u.empty()) return finish(b);
  const double base = lq_norm(u[0], q);
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double bound = base + (u.time(n) - u.time(0)) * source_sup_q;
    const double observed = lq_norm(u[n], q);
    const double slack = bound > 0.0 ? (bound - observed) / bound : -observed;
    add(b, u.time(n), slack, argmax_abs(u[n].values()));
  }
  return finish(b);
}

BoundCheck check_moment_residual(const BudgetRecord& budget, double sigma, MomentEquation which, double tol) {
  const bool second = which == MomentEquation::m;
  BoundCheck b = make(second ? "moment_residual_m" : "moment_residual_p_tilde", tol);
  if (budget.size() < 2) return finish(b);
  const GridSpec& g = budget.p_tilde[0].grid();
  const HeatPlan lap(g, sigma, HeatDomain::spatial);
  const auto& y = second ? budget.m : budget.p_tilde;
  const auto& gain = second ? budget.gain_m : budget.gain_tilde;
  const double creation = second ? 2.0 * sigma * g.dim_v : 0.0;

  double scale = 0.0;
  for (const auto& f : y) scale = std::max(scale, max_abs(f.values()));
  const double denom = scale > 0.0 ? scale : 1.0;

  auto lap_prev = lap.diffusion_term(y[0].values());
  for (std::size_t n = 0; n + 1 < budget.size(); ++n) {
    auto lap_next = lap.diffusion_term(y[n + 1].values());
    const double dt = budget.times[n + 1] - budget.times[n];
    double worst = 0.0;
    long cell = 0;
    for (std::size_t i = 0; i < y[n].size(); ++i) {
      const double dy = (y[n + 1][i] - y[n][i]) / dt;
      const double diffusion = 0.5 * (lap_prev[i] + lap_next[i]);
      const double damping = 0.5 * (budget.coefficient[n][i] * y[n][i] + budget.coefficient[n + 1][i] * y[n + 1][i]);
      const double created = 0.5 * creation * (budget.p_tilde[n][i] + budget.p_tilde[n + 1][i]);
      const double gained = 0.5 * (gain[n][i] + gain[n + 1][i]);
      const double r = std::abs(dy - diffusion + damping - created - gained);
      if (r > worst) {
        worst = r;
        cell = static_cast<long>(i);
      }
    }
    add(b, budget.times[n + 1], -worst / denom, cell);
    lap_prev = std::move(lap_next);
  }
  return finish(b);
}

BoundCheck check_picard_contraction(const IterationDiagnostics& diag) {
  BoundCheck b = make("picard_contraction", 0.0);
  for (const auto& s : diag.slabs) {
    double worst = std::numeric_limits<double>::infinity();
    long at = -1;
    for (std::size_t i = 2; i < s.delta.size(); ++i) {
      const double prev = s.delta[i - 1];
      const double slack = prev > 0.0 ? (prev - s.delta[i]) / prev : (s.delta[i] > 0.0 ? -1.0 : 0.0);
      if (slack < worst) {
        worst = slack;
        at = static_cast<long>(i + 2);  // iterate index k
      }
    }
    if (at < 0) worst = 1.0;
    add(b, s.t_end, worst, at);
  }
  return finish(b);
}

BoundCheck check_picard_convergence(const IterationDiagnostics& diag, double tol) {
  BoundCheck b = make("picard_convergence", 0.0);
  for (const auto& s : diag.slabs) {
    const double last = s.delta.empty() ? 0.0 : s.delta.back();
    const double slack = s.converged ? (tol - last) / tol : -std::max(1.0, (last - tol) / tol);
    add(b, s.t_end, slack, s.iterations);
  }
  return finish(b);
}

std::vector<MomentSet> moment_series(const Trajectory& p) {
  std::vector<MomentSet> out;
  out.reserve(p.size());
  for (const auto& f : p.frames) out.push_back(compute_moments(f));
  return out;
}

SpatialSeries moment_component(const std::vector<MomentSet>& moments, FieldRole role) {
  SpatialSeries s;
  for (std::size_t n = 0; n < moments.size(); ++n) {
    const auto& ms = moments[n];
    switch (role) {
      case FieldRole::p_tilde: s.push(ms.p_tilde, static_cast<int>(n)); break;
      case FieldRole::j: s.push(ms.j, static_cast<int>(n)); break;
      case FieldRole::m: s.push(ms.m, static_cast<int>(n)); break;
      default: throw ParameterError("moment_component: role is not a moment");
    }
  }
  return s;
}

double calibrated_tolerance(double floor, double q_dt, double q_2dt) {
  const double diff = std::abs(q_2dt - q_dt);
  return floor + kCalibrationSafety * (std::isfinite(diff) ? diff : 0.0) / 3.0;
}

std::vector<BoundCheck> run_checks(const std::vector<std::function<BoundCheck()>>& jobs) {
  std::vector<std::future<BoundCheck>> futures;
  futures.reserve(jobs.size());
  for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, job));
  std::vector<BoundCheck> out;
  out.reserve(jobs.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

std::string describe(const BoundCheck& check) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %-28s worst_slack=% .3e at t=%.4g cell=%ld tol=%.1e", check.pass ? "PASS" : "FAIL",
                check.name.c_str(), check.worst_slack + 0.0, check.worst_time, check.worst_cell, check.tolerance);
  return buf;
}

}  // namespace akf
