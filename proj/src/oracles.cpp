#include "akf/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "akf/errors.hpp"
#include "akf/spectral.hpp"

namespace akf::oracles {

namespace {

struct Lattice {
  std::vector<int> shape;
  std::vector<double> spacing;
  std::vector<double> half_width;
  std::vector<std::size_t> stride;
  std::size_t size = 1;

  explicit Lattice(const GridSpec& g) {
    for (int a = 0; a < g.dim_x; ++a) {
      shape.push_back(g.n_x);
      spacing.push_back(g.h_x());
      half_width.push_back(g.half_width_x);
    }
    for (int a = 0; a < g.dim_v; ++a) {
      shape.push_back(g.n_v);
      spacing.push_back(g.h_v());
      half_width.push_back(g.half_width_v);
    }
    stride.assign(shape.size(), 1);
    for (std::size_t a = shape.size(); a-- > 1;) stride[a - 1] = stride[a] * shape[a];
    for (int n : shape) size *= n;
  }

  int coord(std::size_t idx, std::size_t axis) const { return static_cast<int>((idx / stride[axis]) % shape[axis]); }
};

std::vector<double> eval_or_zero(const PhaseFunction& fn, double t, std::size_t n) {
  if (!fn) return std::vector<double>(n, 0.0);
  auto v = fn(t);
  if (v.size() != n) throw ShapeError("oracle: coefficient or source has the wrong length");
  return v;
}

std::vector<int> save_steps(const std::vector<double>& times, double dt) {
  std::vector<int> steps;
  for (double t : times) {
    const double r = t / dt;
    if (t < 0.0 || std::abs(r - std::round(r)) > 1e-6 * std::max(1.0, r))
      throw ParameterError("oracle: save time is not a multiple of the step");
    steps.push_back(static_cast<int>(std::llround(r)));
  }
  if (!std::is_sorted(steps.begin(), steps.end())) throw ParameterError("oracle: save times must be sorted");
  return steps;
}

std::vector<double> heat_multipliers(const RealFft& fft, const Lattice& lat, double sigma, double dt) {
  std::unique_ptr<bool[]> active(new bool[lat.shape.size()]);
  for (std::size_t a = 0; a < lat.shape.size(); ++a) active[a] = true;
  auto k2 = fft.wavenumber_sq(lat.half_width, std::span<const bool>(active.get(), lat.shape.size()));
  for (double& k : k2) k = std::exp(-sigma * k * dt);
  return k2;
}

}  // namespace

Trajectory fd_reference(const PhaseField& p0, const PhaseFunction& coefficient, const PhaseFunction& source,
                        double sigma, double fine_dt, const std::vector<double>& save_times) {
  const GridSpec& g = p0.grid();
  const Lattice lat(g);
  if (!(sigma > 0.0) || !(fine_dt > 0.0)) throw ParameterError("fd_reference: sigma and dt must be positive");
  const double h = *std::min_element(lat.spacing.begin(), lat.spacing.end());
  const double limit = 0.9 * h * h / (2.0 * sigma * static_cast<double>(lat.shape.size()));
  if (fine_dt > limit)
    throw OracleFailure("fd_reference: dt " + std::to_string(fine_dt) + " exceeds the explicit stability limit " +
                        std::to_string(limit));
  const auto steps = save_steps(save_times, fine_dt);

  std::vector<double> u(p0.values().begin(), p0.values().end()), next(u.size());
  Trajectory out;
  std::size_t k = 0;
  int n = 0;
  auto emit = [&] {
    while (k < steps.size() && steps[k] == n) {
      out.push(PhaseField(g, u, n * fine_dt), n);
      ++k;
    }
  };
  emit();
  while (k < steps.size()) {
    const double t = n * fine_dt;
    const auto a = eval_or_zero(coefficient, t, u.size());
    const auto f = eval_or_zero(source, t, u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      double lap = 0.0;
      for (std::size_t ax = 0; ax < lat.shape.size(); ++ax) {
        const int c = lat.coord(i, ax);
        const int nn = lat.shape[ax];
        const long base = static_cast<long>(i) - static_cast<long>(c * lat.stride[ax]);
        const std::size_t up = static_cast<std::size_t>(base + static_cast<long>(((c + 1) % nn) * lat.stride[ax]));
        const std::size_t dn = static_cast<std::size_t>(base + static_cast<long>(((c + nn - 1) % nn) * lat.stride[ax]));
        lap += (u[up] - 2.0 * u[i] + u[dn]) / (lat.spacing[ax] * lat.spacing[ax]);
      }
      next[i] = u[i] + fine_dt * (sigma * lap - a[i] * u[i] + f[i]);
    }
    u.swap(next);
    ++n;
    emit();
  }
  return out;
}

Trajectory duhamel_reference(const PhaseField& p0, const PhaseFunction& coefficient, const PhaseFunction& source,
                             double sigma, double dt, const std::vector<double>& save_times) {
  const GridSpec& g = p0.grid();
  const Lattice lat(g);
  if (!(sigma > 0.0) || !(dt > 0.0)) throw ParameterError("duhamel_reference: sigma and dt must be positive");
  const auto steps = save_steps(save_times, dt);
  const RealFft fft(lat.shape);
  const auto mult = heat_multipliers(fft, lat, sigma, dt);

  std::vector<double> p(p0.values().begin(), p0.values().end());
  std::vector<std::complex<double>> acc(fft.complex_size()), gh(fft.complex_size());
  fft.forward(p, acc);
  auto a = eval_or_zero(coefficient, 0.0, p.size());
  auto f = eval_or_zero(source, 0.0, p.size());
  std::vector<double> gval(p.size()), known(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) gval[i] = f[i] - a[i] * p[i];

  Trajectory out;
  std::size_t k = 0;
  int n = 0;
  auto emit = [&] {
    while (k < steps.size() && steps[k] == n) {
      out.push(PhaseField(g, p, n * dt), n);
      ++k;
    }
  };
  emit();
  while (k < steps.size()) {
    const double weight = n == 0 ? 0.5 * dt : dt;
    fft.forward(gval, gh);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = mult[i] * (acc[i] + weight * gh[i]);
    ++n;
    auto tmp = acc;
    fft.inverse(tmp, known);
    a = eval_or_zero(coefficient, n * dt, p.size());
    f = eval_or_zero(source, n * dt, p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = (known[i] + 0.5 * dt * f[i]) / (1.0 + 0.5 * dt * a[i]);
      gval[i] = f[i] - a[i] * p[i];
    }
    emit();
  }
  return out;
}

double lambert_rate(double r, double t) {
  if (!(r > 0.0)) return 0.0;
  if (!(t > 0.0)) return r;
  double lo = 0.0, hi = r;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid * t) >= r) hi = mid;
    else lo = mid;
  }
  return hi;
}

VolterraResult volterra_fundamental(const PhaseFunction& coefficient, double sigma, const GridSpec& grid, double t,
                                    std::size_t source_index, const VolterraOptions& options) {
  grid.validate();
  if (grid.n_x > 32 || grid.n_v > 32) throw ParameterError("volterra_fundamental: at most 32 points per axis");
  if (!(t > 0.0) || !(sigma > 0.0) || options.steps < 1)
    throw ParameterError("volterra_fundamental: t, sigma and steps must be positive");
  const Lattice lat(grid);
  if (source_index >= lat.size) throw ParameterError("volterra_fundamental: source index outside the lattice");
  const int steps = options.steps;
  const double dt = t / steps;
  const RealFft fft(lat.shape);
  const auto mult = heat_multipliers(fft, lat, sigma, dt);
  const std::size_t cells = lat.size;

  std::vector<std::vector<double>> a(steps + 1);
  for (int n = 0; n <= steps; ++n) a[n] = eval_or_zero(coefficient, n * dt, cells);

  // Free heat propagation of the delta at every node.
  std::vector<std::vector<double>> heat(steps + 1, std::vector<double>(cells));
  {
    std::vector<double> delta(cells, 0.0);
    delta[source_index] = 1.0 / grid.cell_volume_phase();
    std::vector<std::complex<double>> spectrum(fft.complex_size());
    fft.forward(delta, spectrum);
    heat[0] = delta;
    for (int n = 1; n <= steps; ++n) {
      for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= mult[i];
      auto tmp = spectrum;
      fft.inverse(tmp, heat[n]);
    }
  }

  VolterraResult res{PhaseField(grid, heat[steps], t), PhaseField(grid, heat[steps], t), 0, {}, {}, 0.0, 0.0};
  if (options.keep_sweeps) res.iterates.push_back(res.heat_kernel);
  std::vector<std::vector<double>> cur = heat, nxt(steps + 1, std::vector<double>(cells));
  std::vector<std::complex<double>> acc(fft.complex_size()), src(fft.complex_size());
  std::vector<double> prod(cells), mem(cells);
  bool converged = false;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= steps; ++n) {
      if (n > 0) {
        const double w = (n - 1 == 0) ? 0.5 * dt : dt;
        for (std::size_t i = 0; i < cells; ++i) prod[i] = a[n - 1][i] * cur[n - 1][i];
        fft.forward(prod, src);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = mult[i] * (acc[i] + w * src[i]);
        auto tmp = acc;
        fft.inverse(tmp, mem);
      } else {
        std::fill(mem.begin(), mem.end(), 0.0);
      }
      const double end_w = n == 0 ? 0.0 : 0.5 * dt;
      for (std::size_t i = 0; i < cells; ++i) {
        nxt[n][i] = heat[n][i] - mem[i] - end_w * a[n][i] * cur[n][i];
        num = std::max(num, std::abs(nxt[n][i] - cur[n][i]));
        den = std::max(den, std::abs(nxt[n][i]));
      }
    }
    cur.swap(nxt);
    const double change = den > 0.0 ? num / den : 0.0;
    res.changes.push_back(change);
    res.sweeps = sweep;
    if (options.keep_sweeps) res.iterates.emplace_back(grid, cur[steps], t);
    if (change < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw OracleFailure("volterra_fundamental: no convergence within " + std::to_string(options.max_sweeps) +
                        " sweeps");
  res.gamma_field = PhaseField(grid, cur[steps], t);

  // Gaussian envelope fit with minimum-image distances.
  const double gamma = options.gamma > 0.0 ? options.gamma : 1.0 / (8.0 * sigma);
  const double n_dims = static_cast<double>(lat.shape.size());
  double ratio = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double d2 = 0.0;
    for (std::size_t ax = 0; ax < lat.shape.size(); ++ax) {
      int diff = std::abs(lat.coord(i, ax) - lat.coord(source_index, ax));
      diff = std::min(diff, lat.shape[ax] - diff);
      d2 += std::pow(diff * lat.spacing[ax], 2);
    }
    const double env = std::pow(t, -0.5 * n_dims) * std::exp(-gamma * d2 / t);
    ratio = std::max(ratio, cur[steps][i] / env);
  }
  res.fit_gamma = gamma;
  res.fit_c = lambert_rate(ratio, t);
  return res;
}

double max_relative_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw ConfigError("max_relative_deviation: trajectories have different lengths");
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t i = 0; i < a[n].size(); ++i) num = std::max(num, std::abs(a[n][i] - b[n][i]));
    den = std::max(den, max_abs(a[n].values()));
  }
  return den > 0.0 ? num / den : num;
}

double max_relative_deviation(const SpatialSeries& a, const SpatialSeries& b) {
  if (a.size() != b.size()) throw ConfigError("max_relative_deviation: series have different lengths");
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t i = 0; i < a[n].size(); ++i) num = std::max(num, std::abs(a[n][i] - b[n][i]));
    den = std::max(den, max_abs(a[n].values()));
  }
  return den > 0.0 ? num / den : num;
}

double uniqueness_probe_pure(const PhaseField& p0, const SourceTrack& source, const ModelParams& params,
                             const Schedule& schedule, const InitialGuess& seed_a, const InitialGuess& seed_b,
                             double tol) {
  PicardOptions oa;
  oa.tol = tol;
  oa.record_budget = false;
  oa.seed = seed_a;
  PicardOptions ob = oa;
  ob.seed = seed_b;
  const auto ra = picard_pure(p0, source, params, schedule, oa);
  const auto rb = picard_pure(p0, source, params, schedule, ob);
  if (!ra.diagnostics.converged || !rb.diagnostics.converged)
    throw OracleFailure("uniqueness_probe: a seed did not converge");
  return max_relative_deviation(ra.p, rb.p);
}

double uniqueness_probe_coupled(const PhaseField& p0, const SpatialField& c0, const ModelParams& params,
                                const Schedule& schedule, const InitialGuess& seed_a, const InitialGuess& seed_b,
                                double tol) {
  PicardOptions oa;
  oa.tol = tol;
  oa.record_budget = false;
  oa.seed = seed_a;
  PicardOptions ob = oa;
  ob.seed = seed_b;
  const auto ra = picard_coupled(p0, c0, params, schedule, oa);
  const auto rb = picard_coupled(p0, c0, params, schedule, ob);
  if (!ra.diagnostics.converged || !rb.diagnostics.converged)
    throw OracleFailure("uniqueness_probe: a seed did not converge");
  return std::max(max_relative_deviation(ra.p, rb.p), max_relative_deviation(ra.c, rb.c));
}

}  // namespace akf::oracles
