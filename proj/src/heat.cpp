#include "akf/heat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "akf/errors.hpp"

namespace akf {

namespace {

constexpr std::size_t kMultiplierCacheSize = 8;

std::vector<int> shape_for(const GridSpec& g, HeatDomain domain) {
  std::vector<int> shape(g.dim_x, g.n_x);
  if (domain != HeatDomain::spatial) shape.insert(shape.end(), g.dim_v, g.n_v);
  return shape;
}

}  // namespace

HeatPlan::HeatPlan(const GridSpec& grid, double diffusivity, HeatDomain domain)
    : grid_(grid), diffusivity_(diffusivity), domain_(domain), fft_((grid.validate(), shape_for(grid, domain))) {
  if (!(diffusivity > 0.0) || !std::isfinite(diffusivity))
    throw ParameterError("HeatPlan: diffusivity must be positive");
  std::vector<double> widths(grid.dim_x, grid.half_width_x);
  bool active[4] = {true, true, true, true};
  if (domain != HeatDomain::spatial) {
    widths.insert(widths.end(), grid.dim_v, grid.half_width_v);
    if (domain == HeatDomain::phase_x_only)
      for (int a = 0; a < grid.dim_v; ++a) active[grid.dim_x + a] = false;
  }
  k2_ = fft_.wavenumber_sq(widths, std::span<const bool>(active, widths.size()));
  parseval_ = fft_.parseval_weights();
}

int HeatPlan::diffusing_dims() const {
  return domain_ == HeatDomain::phase ? grid_.phase_dims() : grid_.dim_x;
}

double HeatPlan::cell_volume() const {
  return domain_ == HeatDomain::spatial ? grid_.cell_volume_x() : grid_.cell_volume_phase();
}

std::shared_ptr<const std::vector<double>> HeatPlan::multipliers(double tau) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("heat: tau must be >= 0");
  {
    std::lock_guard lock(cache_mutex_);
    for (const auto& [key, mult] : cache_)
      if (key == tau) return mult;
  }
  auto mult = std::make_shared<std::vector<double>>(k2_.size());
  for (std::size_t i = 0; i < k2_.size(); ++i) (*mult)[i] = std::exp(-diffusivity_ * k2_[i] * tau);
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= kMultiplierCacheSize) cache_.erase(cache_.begin());
  cache_.emplace_back(tau, mult);
  return mult;
}

void HeatPlan::apply(std::span<const double> in, std::span<double> out, double tau) const {
  if (in.size() != size() || out.size() != size()) throw ShapeError("heat: field size does not match plan");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("heat: tau must be >= 0");
  if (tau == 0.0) {
    if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  auto mult = multipliers(tau);
  std::vector<std::complex<double>> spectrum(fft_.complex_size());
  fft_.forward(in, spectrum);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= (*mult)[i];
  fft_.inverse(spectrum, out);
}

std::vector<double> HeatPlan::diffusion_term(std::span<const double> in) const {
  if (in.size() != size()) throw ShapeError("heat: field size does not match plan");
  std::vector<std::complex<double>> spectrum(fft_.complex_size());
  fft_.forward(in, spectrum);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= -diffusivity_ * k2_[i];
  std::vector<double> out(size());
  fft_.inverse(spectrum, out);
  return out;
}

double HeatPlan::gradient_norm_sq(std::span<const double> in) const {
  if (in.size() != size()) throw ShapeError("heat: field size does not match plan");
  std::vector<std::complex<double>> spectrum(fft_.complex_size());
  fft_.forward(in, spectrum);
  double sum = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) sum += parseval_[i] * k2_[i] * std::norm(spectrum[i]);
  return sum * cell_volume() / static_cast<double>(size());
}

PhaseField heat_step(const PhaseField& field, double tau, const HeatPlan& plan) {
  require_same_grid(field.grid(), plan.grid(), "heat_step");
  if (plan.domain() == HeatDomain::spatial) throw ShapeError("heat_step: spatial plan used on a phase field");
  std::vector<double> out(field.size());
  plan.apply(field.values(), out, tau);
  return PhaseField(field.grid(), std::move(out), field.time() + tau);
}

SpatialField heat_step(const SpatialField& field, double tau, const HeatPlan& plan) {
  require_same_grid(field.grid(), plan.grid(), "heat_step");
  if (plan.domain() != HeatDomain::spatial) throw ShapeError("heat_step: phase plan used on a spatial field");
  std::vector<double> out(field.size());
  plan.apply(field.values(), out, tau);
  return SpatialField(field.grid(), std::move(out), field.time() + tau, field.role());
}

VelocityProfile gaussian_rho(const GridSpec& grid, double epsilon, std::array<double, 2> v0) {
  grid.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("gaussian_rho: epsilon must be positive");
  for (int a = 0; a < grid.dim_v; ++a) {
    if (!(v0[a] >= -grid.half_width_v && v0[a] < grid.half_width_v))
      throw ParameterError("gaussian_rho: v0 lies outside the velocity box");
  }
  if (grid.dim_v == 1) v0[1] = 0.0;
  const double width = std::sqrt(epsilon);
  for (int a = 0; a < grid.dim_v; ++a) {
    int resolved = 0;
    for (int i = 0; i < grid.n_v; ++i)
      if (std::abs(grid.coord_v(i) - v0[a]) <= width) ++resolved;
    if (resolved < 4)
      throw ResolutionError("gaussian_rho: only " + std::to_string(resolved) +
                            " cells resolve the bump along a velocity axis");
  }

  VelocityProfile rho;
  rho.epsilon = epsilon;
  rho.v0 = v0;
  rho.peak = std::pow(std::numbers::pi * epsilon, -0.5 * grid.dim_v);
  rho.values.resize(grid.v_cells());
  double sum = 0.0;
  for (std::size_t iv = 0; iv < grid.v_cells(); ++iv) {
    const auto v = grid.v_point(iv);
    const double d0 = v[0] - v0[0];
    const double d1 = v[1] - v0[1];
    const double val = rho.peak * std::exp(-(d0 * d0 + d1 * d1) / epsilon);
    rho.values[iv] = val;
    rho.lattice_max = std::max(rho.lattice_max, val);
    sum += val;
  }
  rho.discrete_mass = sum * grid.cell_volume_v();
  return rho;
}

double fit_smoothing_constant(const HeatPlan& plan, std::span<const double> taus) {
  const GridSpec& g = plan.grid();
  const double cell = plan.domain() == HeatDomain::spatial ? g.cell_volume_x() : g.cell_volume_phase();
  std::vector<double> delta(plan.size(), 0.0);
  delta[0] = 1.0 / cell;  // unit mass; the box is translation invariant
  std::vector<double> out(plan.size());
  const double n = plan.diffusing_dims();
  double c = 0.0;
  for (double tau : taus) {
    if (!(tau > 0.0)) throw ParameterError("fit_smoothing_constant: sample times must be positive");
    plan.apply(delta, out, tau);
    c = std::max(c, max_abs(out) * std::pow(tau, 0.5 * n));
  }
  return c;
}

}  // namespace akf
