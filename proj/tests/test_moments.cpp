#include <cmath>
#include <random>

#include "akf/errors.hpp"
#include "akf/heat.hpp"
#include "akf/moments.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace akf;
using akf::test::bump;
using akf::test::grid;
using akf::test::max_diff;

namespace {

PhaseField separable(const GridSpec& g, const std::vector<double>& gx, const std::vector<double>& pv) {
  std::vector<double> v(g.phase_cells());
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix)
    for (std::size_t iv = 0; iv < g.v_cells(); ++iv) v[ix * g.v_cells() + iv] = gx[ix] * pv[iv];
  return PhaseField(g, std::move(v));
}

std::vector<double> x_profile(const GridSpec& g) {
  std::vector<double> gx(g.x_cells());
  for (std::size_t ix = 0; ix < gx.size(); ++ix) gx[ix] = 1.0 + 0.5 * std::sin(g.x_point(ix)[0]);
  return gx;
}

SpatialField scalar_series_entry(const GridSpec& g, double value, double t) {
  return SpatialField(g, std::vector<double>(g.x_cells(), value), t, FieldRole::p_tilde);
}

}  // namespace

TEST_CASE("zero density has zero moments") {
  const GridSpec g = grid(1, 2, 16, 4.0);
  const MomentSet m = compute_moments(akf::test::constant_phase(g, 0.0));
  for (const auto* f : {&m.p_tilde, &m.j, &m.m}) CHECK(max_abs(f->values()) == 0.0);
  CHECK(m.p_tilde.role() == FieldRole::p_tilde);
  CHECK(m.j.role() == FieldRole::j);
  CHECK(m.m.role() == FieldRole::m);
}

TEST_CASE("separable product with the velocity profile") {
  const GridSpec g = grid(1, 1, 64, 6.0);
  const auto rho = gaussian_rho(g, 0.5, {1.0, 0.0});
  const auto gx = x_profile(g);
  const SpatialField pt = velocity_marginal(separable(g, gx, rho.values));
  for (std::size_t ix = 0; ix < gx.size(); ++ix) CHECK(pt[ix] == doctest::Approx(gx[ix] * rho.discrete_mass).epsilon(1e-14));
  CHECK(rho.discrete_mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("single velocity cell") {
  const GridSpec g = grid(1, 2, 16, 4.0);
  const auto gx = x_profile(g);
  const std::size_t star = 3 * g.n_v + 11;
  std::vector<double> pv(g.v_cells(), 0.0);
  pv[star] = 1.0 / g.cell_volume_v();
  const MomentSet m = compute_moments(separable(g, gx, pv));
  const double speed = g.speed(star);
  for (std::size_t ix = 0; ix < gx.size(); ++ix) {
    CHECK(m.p_tilde[ix] == doctest::Approx(gx[ix]).epsilon(1e-14));
    CHECK(m.j[ix] == doctest::Approx(gx[ix] * speed).epsilon(1e-14));
    CHECK(m.m[ix] == doctest::Approx(gx[ix] * speed * speed).epsilon(1e-14));
  }
}

TEST_CASE("second moment of a centered gaussian in two velocity dimensions") {
  const GridSpec g = grid(1, 2, 64, 8.0);
  const double s2 = 0.7;
  const PhaseField p = bump(g, 1.0, s2);
  const MomentSet m = compute_moments(p);
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix)
    CHECK(m.m[ix] == doctest::Approx(m.p_tilde[ix] * 2 * s2).epsilon(1e-8));
}

TEST_CASE("cauchy-schwarz, speed bound and linearity on random densities") {
  const GridSpec g = grid(1, 2, 8, 3.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(g.phase_cells()), b(g.phase_cells());
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    const PhaseField pa(g, a), pb(g, b);
    const MomentSet m = compute_moments(pa);
    for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
      CHECK(m.j[ix] * m.j[ix] <= m.p_tilde[ix] * m.m[ix] * (1 + 1e-10));
      for (double R : {0.5, 1.0, 2.0, std::sqrt(m.m[ix] / m.p_tilde[ix])})
        CHECK(m.j[ix] <= (R * m.p_tilde[ix] + m.m[ix] / R) * (1 + 1e-10));
    }
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * a[i] + 3.0 * b[i];
    const MomentSet mc = compute_moments(PhaseField(g, c));
    const MomentSet mb = compute_moments(pb);
    for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
      CHECK(mc.p_tilde[ix] == doctest::Approx(2 * m.p_tilde[ix] + 3 * mb.p_tilde[ix]).epsilon(1e-13));
      CHECK(mc.j[ix] == doctest::Approx(2 * m.j[ix] + 3 * mb.j[ix]).epsilon(1e-13));
      CHECK(mc.m[ix] == doctest::Approx(2 * m.m[ix] + 3 * mb.m[ix]).epsilon(1e-13));
    }
    const SpatialField mag = flux_magnitude(pa);
    for (std::size_t ix = 0; ix < g.x_cells(); ++ix) CHECK(mag[ix] <= m.j[ix] * (1 + 1e-12));
  }
}

TEST_CASE("vector flux of a velocity-even density vanishes") {
  const GridSpec g = grid(1, 2, 16, 4.0);
  // The node at v = -L has no mirror partner; drop it to make the data even.
  const PhaseField even = bump(g, 1.0, 0.8);
  std::vector<double> v(even.values().begin(), even.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto idx = g.v_index(i % g.v_cells());
    if (idx[0] == 0 || idx[1] == 0) v[i] = 0.0;
  }
  const PhaseField p(g, v);
  const auto flux = flux_vector(p);
  REQUIRE(flux.size() == 2);
  const double scale = max_abs(speed_moment(p).values());
  for (const auto& f : flux) CHECK(max_abs(f.values()) <= 1e-14 * scale);
}

TEST_CASE("time integral by the trapezoid rule") {
  const GridSpec g = grid(1, 1, 8, 2.0);
  const double dt = 0.1;
  std::vector<SpatialField> flat, ramp;
  for (int n = 0; n <= 10; ++n) {
    flat.push_back(scalar_series_entry(g, 2.5, n * dt));
    ramp.push_back(scalar_series_entry(g, n * dt, n * dt));
  }
  const auto a = accumulate_time_integral(flat, dt);
  const auto b = accumulate_time_integral(ramp, dt);
  for (int n = 0; n <= 10; ++n) {
    const double t = n * dt;
    CHECK(a[n][0] == doctest::Approx(2.5 * t).epsilon(1e-14));
    CHECK(b[n][0] == doctest::Approx(t * t / 2).epsilon(1e-14));
    CHECK(a[n].role() == FieldRole::a);
  }
  CHECK(a[0][0] == 0.0);

  const SpatialField history(g, std::vector<double>(g.x_cells(), 1.0), 0.0, FieldRole::a);
  const auto c = accumulate_time_integral(flat, dt, &history);
  CHECK(c[10][0] == doctest::Approx(1.0 + 2.5).epsilon(1e-14));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SpatialField> rnd;
  for (int n = 0; n <= 20; ++n) {
    std::vector<double> v(g.x_cells());
    for (double& x : v) x = u(rng);
    rnd.emplace_back(g, v, n * dt, FieldRole::p_tilde);
  }
  const auto r = accumulate_time_integral(rnd, dt);
  for (std::size_t n = 1; n < r.size(); ++n)
    for (std::size_t i = 0; i < g.x_cells(); ++i) CHECK(r[n][i] >= r[n - 1][i]);

  std::vector<SpatialField> gap = flat;
  gap[4] = gap[4].with_time(0.45);
  CHECK_THROWS_AS(accumulate_time_integral(gap, dt), ConfigError);
}
