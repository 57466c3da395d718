#include "akf/budget.hpp"

#include <cmath>

#include "akf/errors.hpp"
#include "akf/moments.hpp"

namespace akf {

void BudgetRecord::append(BudgetRecord&& other) {
  std::size_t skip = 0;
  if (!times.empty() && !other.times.empty() &&
      std::abs(other.times.front() - times.back()) <= 1e-12 * std::max(1.0, std::abs(times.back())))
    skip = 1;
  auto move_tail = [skip](auto& dst, auto& src) {
    for (std::size_t i = skip; i < src.size(); ++i) dst.push_back(std::move(src[i]));
  };
  move_tail(times, other.times);
  move_tail(l2_sq, other.l2_sq);
  move_tail(dissipation, other.dissipation);
  move_tail(work, other.work);
  move_tail(p_tilde, other.p_tilde);
  move_tail(m, other.m);
  move_tail(coefficient, other.coefficient);
  move_tail(gain_tilde, other.gain_tilde);
  move_tail(gain_m, other.gain_m);
}

BudgetRecorder::BudgetRecorder(const HeatPlan& phase_plan) : plan_(phase_plan) {
  if (plan_.domain() != HeatDomain::phase) throw ShapeError("BudgetRecorder: needs a phase-space plan");
  const GridSpec& g = plan_.grid();
  speed_sq_.resize(g.v_cells());
  for (std::size_t iv = 0; iv < speed_sq_.size(); ++iv) speed_sq_[iv] = g.speed(iv) * g.speed(iv);
}

void BudgetRecorder::record(const PhaseField& p, const SpatialField* coefficient, const PhaseField* source,
                            const SpatialField* activation, std::span<const double> profile) {
  const GridSpec& g = p.grid();
  const std::size_t nx = g.x_cells();
  const std::size_t nv = g.v_cells();
  const double cv = g.cell_volume_v();
  if (activation && profile.size() != nv) throw ShapeError("BudgetRecorder: profile length");

  std::vector<double> gt(nx, 0.0), gm(nx, 0.0);
  double work = 0.0;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const auto block = p.velocity_block(ix);
    double s0 = 0.0, s2 = 0.0, w = 0.0;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      double gain = 0.0;
      if (source) gain = (*source)[ix * nv + iv];
      else if (activation) gain = (*activation)[ix] * profile[iv] * block[iv];
      s0 += gain;
      s2 += speed_sq_[iv] * gain;
      w += gain * block[iv];
    }
    gt[ix] = s0 * cv;
    gm[ix] = s2 * cv;
    work += w;
  }

  auto moments = compute_moments(p);
  record_.times.push_back(p.time());
  record_.l2_sq.push_back(std::pow(lq_norm(p, 2.0), 2));
  record_.dissipation.push_back(plan_.gradient_norm_sq(p.values()));
  record_.work.push_back(work * g.cell_volume_phase());
  record_.p_tilde.push_back(std::move(moments.p_tilde));
  record_.m.push_back(std::move(moments.m));
  record_.coefficient.push_back(coefficient ? coefficient->with_time(p.time())
                                            : SpatialField::zeros(g, p.time(), FieldRole::a));
  record_.gain_tilde.emplace_back(g, std::move(gt), p.time());
  record_.gain_m.emplace_back(g, std::move(gm), p.time());
}

}  // namespace akf
