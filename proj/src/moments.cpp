#include "akf/moments.hpp"

#include <cmath>

#include "akf/errors.hpp"

namespace akf {

namespace {

template <typename Weight>
SpatialField weighted_marginal(const PhaseField& p, FieldRole role, Weight weight) {
  require_finite(p.values(), "moment input");
  const GridSpec& g = p.grid();
  const std::size_t nv = g.v_cells();
  std::vector<double> w(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) w[iv] = weight(iv) * g.cell_volume_v();
  std::vector<double> out(g.x_cells(), 0.0);
  for (std::size_t ix = 0; ix < out.size(); ++ix) {
    const auto block = p.velocity_block(ix);
    double s = 0.0;
    for (std::size_t iv = 0; iv < nv; ++iv) s += w[iv] * block[iv];
    out[ix] = s;
  }
  return SpatialField(g, std::move(out), p.time(), role);
}

}  // namespace

SpatialField velocity_marginal(const PhaseField& p) {
  return weighted_marginal(p, FieldRole::p_tilde, [](std::size_t) { return 1.0; });
}

SpatialField speed_moment(const PhaseField& p) {
  const GridSpec& g = p.grid();
  return weighted_marginal(p, FieldRole::j, [&](std::size_t iv) { return g.speed(iv); });
}

SpatialField second_moment(const PhaseField& p) {
  const GridSpec& g = p.grid();
  return weighted_marginal(p, FieldRole::m, [&](std::size_t iv) {
    const double s = g.speed(iv);
    return s * s;
  });
}

std::vector<SpatialField> flux_vector(const PhaseField& p) {
  const GridSpec& g = p.grid();
  std::vector<SpatialField> out;
  for (int a = 0; a < g.dim_v; ++a)
    out.push_back(weighted_marginal(p, FieldRole::generic, [&](std::size_t iv) { return g.v_point(iv)[a]; }));
  return out;
}

SpatialField flux_magnitude(const PhaseField& p) {
  const auto comps = flux_vector(p);
  std::vector<double> out(p.grid().x_cells(), 0.0);
  for (std::size_t ix = 0; ix < out.size(); ++ix) {
    double s = 0.0;
    for (const auto& c : comps) s += c[ix] * c[ix];
    out[ix] = std::sqrt(s);
  }
  return SpatialField(p.grid(), std::move(out), p.time(), FieldRole::j);
}

MomentSet compute_moments(const PhaseField& p) {
  require_finite(p.values(), "moment input");
  const GridSpec& g = p.grid();
  const std::size_t nv = g.v_cells();
  const double cv = g.cell_volume_v();
  std::vector<double> speed(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) speed[iv] = g.speed(iv);
  std::vector<double> pt(g.x_cells()), j(g.x_cells()), m(g.x_cells());
  for (std::size_t ix = 0; ix < pt.size(); ++ix) {
    const auto block = p.velocity_block(ix);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      s0 += block[iv];
      s1 += speed[iv] * block[iv];
      s2 += speed[iv] * speed[iv] * block[iv];
    }
    pt[ix] = s0 * cv;
    j[ix] = s1 * cv;
    m[ix] = s2 * cv;
  }
  return MomentSet{SpatialField(g, std::move(pt), p.time(), FieldRole::p_tilde),
                   SpatialField(g, std::move(j), p.time(), FieldRole::j),
                   SpatialField(g, std::move(m), p.time(), FieldRole::m), p.time()};
}

std::vector<SpatialField> accumulate_time_integral(const std::vector<SpatialField>& series, double dt,
                                                   const SpatialField* history) {
  if (!(dt > 0.0)) throw ParameterError("accumulate_time_integral: dt must be positive");
  std::vector<SpatialField> out;
  if (series.empty()) return out;
  const GridSpec& g = series[0].grid();
  for (std::size_t n = 1; n < series.size(); ++n) {
    require_same_grid(series[n].grid(), g, "accumulate_time_integral");
    const double gap = series[n].time() - series[n - 1].time();
    if (std::abs(gap - dt) > 1e-9 * dt)
      throw ConfigError("accumulate_time_integral: samples " + std::to_string(n - 1) + " and " +
                        std::to_string(n) + " are not dt apart");
  }
  std::vector<double> acc(g.x_cells(), 0.0);
  if (history) {
    require_same_grid(history->grid(), g, "accumulate_time_integral");
    acc.assign(history->values().begin(), history->values().end());
  }
  out.reserve(series.size());
  out.emplace_back(g, acc, series[0].time(), FieldRole::a);
  for (std::size_t n = 1; n < series.size(); ++n) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 0.5 * dt * (series[n - 1][i] + series[n][i]);
    out.emplace_back(g, acc, series[n].time(), FieldRole::a);
  }
  return out;
}

}  // namespace akf
