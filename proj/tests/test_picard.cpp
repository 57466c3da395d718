#include <cmath>
#include <random>

#include "akf/errors.hpp"
#include "akf/moments.hpp"
#include "akf/oracles.hpp"
#include "akf/picard.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace akf;
using akf::test::bump;
using akf::test::constant_spatial;
using akf::test::grid;
using akf::test::max_diff;

namespace {

const GridSpec kGrid = grid(1, 1, 64, 8.0);
const Schedule kSchedule{0.5, 0.01, 5};

SpatialField ramp_c0(const GridSpec& g) {
  Recipe r;
  r.shape = Recipe::Shape::plateau_ramp;
  r.width = 1.0;
  r.k_inf = 1.0;
  return build_spatial(r, g, FieldRole::c);
}

PhaseField off_center(const GridSpec& g, double mass = 1.0) { return bump(g, 1.0, 1.25, mass, {-2.0, 0}, {0, 0}); }

}  // namespace

TEST_CASE("model parameters") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  for (auto mutate : {+[](ModelParams& m) { m.sigma = 0; }, +[](ModelParams& m) { m.c_R = -1; },
                      +[](ModelParams& m) { m.epsilon = 0; }, +[](ModelParams& m) { m.gamma = -0.1; },
                      +[](ModelParams& m) { m.k_inf = -1; }}) {
    ModelParams bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), ParameterError);
  }
  ModelParams off;
  off.alpha1 = 0;
  off.eta = 0;
  CHECK_NOTHROW(off.validate());
  p.epsilon = 0.5;
  CHECK(p.rho_sup(1) == doctest::Approx(1 / std::sqrt(M_PI * 0.5)));
  CHECK(p.rho_sup(2) == doctest::Approx(1 / (M_PI * 0.5)));
}

TEST_CASE("activation rate") {
  CHECK(alpha_of_c(0.0, 2.0, 0.5) == 0.0);
  CHECK(alpha_of_c(0.5, 2.0, 0.5) == doctest::Approx(1.0));
  CHECK(alpha_of_c(1e12, 2.0, 0.5) < 2.0);
  const GridSpec g = grid(1, 1, 8, 2.0);
  std::vector<double> c = {0, 0.1, 0.5, 1, 2, 5, 10, -1e-16};
  const SpatialField a = alpha_of_c(SpatialField(g, c, 0.0, FieldRole::c), 1.0, 1.0);
  CHECK(a.role() == FieldRole::alpha_of_c);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(a[i] >= a[i - 1] - (i == c.size() - 1 ? 1.0 : 0.0));
  c.back() = -0.1;
  CHECK_THROWS_AS(alpha_of_c(SpatialField(g, c, 0.0, FieldRole::c), 1.0, 1.0), SignError);

  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < 1000; ++i) {
    const double c1 = e(rng), c2 = e(rng);
    CHECK(std::abs(alpha_of_c(c1, 1.5, 0.7) - alpha_of_c(c2, 1.5, 0.7)) <= 1.5 / 0.7 * std::abs(c1 - c2));
  }
}

TEST_CASE("concentration step") {
  const GridSpec g = grid(1, 1, 32, 4.0);
  const HeatPlan plan(g, 0.2, HeatDomain::spatial);
  const SpatialField c = ramp_c0(grid(1, 1, 32, 8.0)).with_time(0.0);
  const SpatialField c4 = build_spatial(Recipe{Recipe::Shape::gaussian_bump}, g, FieldRole::c);
  const double dt = 0.05, eta = 1.3;

  const SpatialField free = advance_c(c4, constant_spatial(g, 0.0, FieldRole::j), plan, eta, dt);
  CHECK(max_diff(free.values(), heat_step(c4, dt, plan).values()) < 1e-15);

  const SpatialField flat = advance_c(constant_spatial(g, 2.0, FieldRole::c), constant_spatial(g, 0.4, FieldRole::j),
                                      plan, eta, dt);
  for (double x : flat.values()) CHECK(x == doctest::Approx(2.0 * std::exp(-eta * 0.4 * dt)).epsilon(1e-14));

  std::vector<double> j(g.x_cells());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = 1.0 + std::sin(g.x_point(i)[0]);
  const SpatialField jj(g, j, 0.0, FieldRole::j);
  const SpatialField out = advance_c(c4, jj, plan, eta, dt);
  const SpatialField heat = heat_step(c4, dt, plan);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] >= 0.0);
    CHECK(out[i] <= heat[i] + 1e-15);
  }
  j[0] = -1.0;
  CHECK_THROWS_AS(advance_c(c4, SpatialField(g, j, 0.0, FieldRole::j), plan, eta, dt), SignError);

  // The far-field form is the same step written for c - heat(c0).
  const SpatialField c_inf_now = heat_step(c4, 0.3, plan);
  const SpatialField c_inf_next = heat_step(c4, 0.3 + dt, plan);
  std::vector<double> hat(g.x_cells());
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] = -0.3 * c_inf_now[i];
  const SpatialField c_hat(g, hat, 0.3, FieldRole::c_hat);
  std::vector<double> full(g.x_cells());
  for (std::size_t i = 0; i < full.size(); ++i) full[i] = c_hat[i] + c_inf_now[i];
  const SpatialField direct = advance_c(SpatialField(g, full, 0.3, FieldRole::c), jj.with_time(0.3), plan, eta, dt);
  const SpatialField split = advance_c_far_field(c_hat, c_inf_now, c_inf_next, jj, plan, eta, dt, 1.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(split[i] + c_inf_next[i] == doctest::Approx(direct[i]).epsilon(1e-12).scale(1.0));
    CHECK(split[i] <= 0.0);
  }
  (void)c;
}

TEST_CASE("pure driver on zero data") {
  const auto r = picard_pure(akf::test::constant_phase(kGrid, 0.0), {}, ModelParams{}, kSchedule);
  CHECK(r.diagnostics.converged);
  CHECK(r.diagnostics.max_iterations() == 2);
  for (const auto& f : r.p.frames) CHECK(max_abs(f.values()) == 0.0);
}

TEST_CASE("pure driver standard run") {
  const PhaseField p0 = bump(kGrid, 1.0, 1.25);
  const SourceTrack f = SourceTrack::constant(bump(kGrid, 1.0, 0.5, 0.2, {0, 0}, {1, 0}));
  ModelParams params;
  const auto r = picard_pure(p0, f, params, kSchedule);
  const auto& d = r.diagnostics;
  CHECK(d.converged);
  CHECK(d.monotone);
  for (const auto& s : d.slabs) {
    REQUIRE(s.delta.size() >= 2);
    CHECK(s.delta.back() <= 1e-8);
    for (std::size_t i = 2; i < s.delta.size(); ++i) CHECK(s.delta[i] < s.delta[i - 1]);
  }
  REQUIRE(r.first_iterate.size() == r.p.size());
  for (std::size_t n = 0; n < r.p.size(); ++n) {
    const double tol = 1e-10 * max_abs(r.first_iterate[n].values());
    for (std::size_t i = 0; i < r.p[n].size(); ++i) {
      CHECK(r.p[n][i] >= 0.0);
      CHECK(r.p[n][i] <= r.first_iterate[n][i] + tol);
    }
  }
  const auto b = d.slab_boundaries();
  CHECK(b.front() == 0.0);
  CHECK(b.back() == doctest::Approx(kSchedule.t_end));
  CHECK(r.budget.size() == static_cast<std::size_t>(kSchedule.steps()) + 1);
}

TEST_CASE("pure driver agrees with a fine explicit reference") {
  const GridSpec g = grid(1, 1, 32, 8.0);
  const PhaseField p0 = bump(g, 2.5, 2.5);
  ModelParams params;
  const Schedule s{0.2, 0.005, 40};
  const auto r = picard_pure(p0, {}, params, s);
  // Reference: forward Euler on the converged history coefficient.
  std::vector<double> a_full(g.phase_cells());
  const auto& a_end = r.a.back();
  (void)a_end;
  const Trajectory fd = oracles::fd_reference(
      p0,
      [&](double t) {
        // Interpolate the saved history linearly; saved frames are dense enough here.
        std::size_t n = 0;
        while (n + 1 < r.a.size() && r.a.time(n + 1) < t) ++n;
        const std::size_t m = std::min(n + 1, r.a.size() - 1);
        const double w = m == n ? 0.0 : (t - r.a.time(n)) / (r.a.time(m) - r.a.time(n));
        for (std::size_t ix = 0; ix < g.x_cells(); ++ix)
          for (std::size_t iv = 0; iv < g.v_cells(); ++iv)
            a_full[ix * g.v_cells() + iv] = params.gamma * ((1 - w) * r.a[n][ix] + w * r.a[m][ix]);
        return a_full;
      },
      {}, params.sigma, 1e-3, {0.2});
  // The spatial error of the explicit scheme dominates at this resolution.
  CHECK(max_diff(fd.back().values(), r.p.back().values()) <= 5e-3 * max_abs(r.p.back().values()));
}

TEST_CASE("small mass stays close to the heat flow") {
  const PhaseField base = bump(kGrid, 1.0, 1.25);
  const HeatPlan plan(kGrid, 0.1);
  ModelParams params;
  std::vector<double> dev;
  for (double mu : {1e-2, 5e-3}) {
    const PhaseField p0 = akf::test::scaled(base, mu);
    const auto r = picard_pure(p0, {}, params, kSchedule);
    const PhaseField heat = heat_step(p0, kSchedule.t_end, plan);
    dev.push_back(max_diff(r.p.back().values(), heat.values()));
  }
  CHECK(dev[0] / dev[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("slabs split long horizons") {
  const PhaseField p0 = bump(kGrid, 1.0, 1.25, 3.0);
  ModelParams params;
  params.gamma = 2.0;
  const auto r = picard_pure(p0, {}, params, kSchedule);
  const auto& d = r.diagnostics;
  CHECK(d.converged);
  CHECK(d.slabs.size() > 1);
  CHECK(d.slab_length < kSchedule.t_end);
  for (double t : d.slab_boundaries()) {
    const double steps = t / kSchedule.dt;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
  PicardOptions whole;
  whole.use_slabs = false;
  whole.k_max = 60;
  const auto w = picard_pure(p0, {}, params, kSchedule, whole);
  CHECK(w.diagnostics.slabs.size() == 1);
  CHECK(w.diagnostics.converged);
  CHECK(max_diff(w.p.back().values(), r.p.back().values()) <= 1e-7 * max_abs(r.p.back().values()));
}

TEST_CASE("coupled driver on zero density") {
  const SpatialField c0 = ramp_c0(kGrid);
  const auto r = picard_coupled(akf::test::constant_phase(kGrid, 0.0), c0, ModelParams{}, kSchedule);
  CHECK(r.diagnostics.converged);
  CHECK(r.diagnostics.max_iterations() == 2);
  const HeatPlan plan(kGrid, ModelParams{}.d, HeatDomain::spatial);
  for (std::size_t n = 0; n < r.c.size(); ++n) {
    CHECK(max_abs(r.p[n].values()) == 0.0);
    CHECK(max_diff(r.c[n].values(), heat_step(c0, r.c.time(n), plan).values()) <= 1e-13);
  }
}

TEST_CASE("coupled driver standard run") {
  const PhaseField p0 = off_center(kGrid);
  const SpatialField c0 = ramp_c0(kGrid);
  ModelParams params;
  const auto r = picard_coupled(p0, c0, params, kSchedule);
  CHECK(r.diagnostics.converged);
  CHECK(r.diagnostics.monotone);
  const double rate = params.alpha1 * params.rho_sup(1);
  const double mass0 = integrate_phase(p0);
  const double c_sup = max_abs(c0.values());
  bool consumed = false;
  for (std::size_t n = 0; n < r.p.size(); ++n) {
    CHECK(integrate_phase(r.p[n]) <= mass0 * std::exp(rate * r.p.time(n)) * (1 + 1e-10));
    for (std::size_t i = 0; i < r.c[n].size(); ++i) {
      CHECK(r.c[n][i] >= 0.0);
      CHECK(r.c[n][i] <= c_sup * (1 + 1e-12));
      CHECK(r.c_hat[n][i] <= 1e-12 * c_sup);
      consumed = consumed || r.c_hat[n][i] < -1e-8;
    }
  }
  CHECK(consumed);
  std::vector<double> times;
  for (std::size_t n = 0; n < r.p.size(); ++n) times.push_back(r.p.time(n));
  const Trajectory maj = growth_majorant(p0, HeatPlan(kGrid, params.sigma), rate, times);
  CHECK(comparison_slack(r.p, maj) >= -1e-10);
  for (const auto& s : r.diagnostics.slabs)
    for (double cs : s.comparison_slack) CHECK(cs >= -1e-10);

  const SpatialField neg = akf::test::constant_spatial(kGrid, -1.0, FieldRole::c);
  CHECK_THROWS_AS(picard_coupled(p0, neg, params, kSchedule), ConfigError);
  CHECK_THROWS_AS(picard_coupled(p0.with_time(0.1), c0, params, kSchedule), ConfigError);
}

TEST_CASE("coupling switch-off reduces to the pure driver") {
  const PhaseField p0 = off_center(kGrid);
  ModelParams params;
  params.alpha1 = 0.0;
  PicardOptions o;
  o.tol = 1e-13;
  o.k_max = 40;
  const auto c = picard_coupled(p0, ramp_c0(kGrid), params, kSchedule, o);
  const auto p = picard_pure(p0, {}, params, kSchedule, o);
  CHECK(c.diagnostics.converged);
  CHECK(p.diagnostics.converged);
  CHECK(oracles::max_relative_deviation(p.p, c.p) <= 1e-12);
}

TEST_CASE("vector flux mode") {
  const GridSpec g = grid(1, 2, 32, 8.0);
  const PhaseField p0 = bump(g, 2.5, 2.5, 1.0, {-1.0, 0}, {0, 0});
  Recipe r;
  r.shape = Recipe::Shape::plateau_ramp;
  r.width = 6.0;
  r.span_x1 = {0.0, 4.0};
  const SpatialField c0 = build_spatial(r, g, FieldRole::c);
  ModelParams params;
  params.epsilon = 2.0;
  params.v0 = {0.0, 0.0};
  const Schedule s{0.2, 0.02, 5};
  const auto scalar = picard_coupled(p0, c0, params, s);
  params.use_vector_j = true;
  const auto vec = picard_coupled(p0, c0, params, s);
  CHECK(scalar.diagnostics.converged);
  CHECK(vec.diagnostics.converged);
  for (std::size_t n = 0; n < vec.p.size(); ++n) {
    const SpatialField j = speed_moment(vec.p[n]);
    const SpatialField mag = flux_magnitude(vec.p[n]);
    for (std::size_t i = 0; i < j.size(); ++i) CHECK(mag[i] <= j[i] * (1 + 1e-12));
    // Less consumption leaves more chemical.
    for (std::size_t i = 0; i < j.size(); ++i) CHECK(vec.c[n][i] >= scalar.c[n][i] - 1e-6);
  }
}
