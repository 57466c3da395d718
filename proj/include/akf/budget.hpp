#pragma once

#include <span>
#include <vector>

#include "akf/field.hpp"
#include "akf/heat.hpp"

namespace akf {

/**
 * Per-node bookkeeping of one linear solve, collected at every schedule node
 * (not only saved ones) so that time integrals can be formed with the step dt.
 *
 * The solved equation is  dt p - sigma Lap p + coefficient(x) p = gain
 * where gain is either an external source f or the activation term
 * alpha(x) rho(v) p.
 */
struct BudgetRecord {
  std::vector<double> times;
  std::vector<double> l2_sq;        ///< ||p||_2^2
  std::vector<double> dissipation;  ///< ||grad_{x,v} p||_2^2
  std::vector<double> work;         ///< integral of gain * p
  std::vector<SpatialField> p_tilde;
  std::vector<SpatialField> m;
  std::vector<SpatialField> coefficient;  ///< x-only damping coefficient
  std::vector<SpatialField> gain_tilde;   ///< velocity integral of gain
  std::vector<SpatialField> gain_m;       ///< velocity integral of |v|^2 gain

  std::size_t size() const { return times.size(); }
  /// Appends `other`, dropping its first node when it repeats our last one.
  void append(BudgetRecord&& other);
};

class BudgetRecorder {
 public:
  explicit BudgetRecorder(const HeatPlan& phase_plan);

  /// `coefficient` may be null (zero). Exactly one of `source` or
  /// (`activation`, `profile`) describes the gain; both null means zero.
  void record(const PhaseField& p, const SpatialField* coefficient, const PhaseField* source,
              const SpatialField* activation, std::span<const double> profile);

  BudgetRecord& result() { return record_; }
  BudgetRecord take() { return std::move(record_); }

 private:
  const HeatPlan& plan_;
  std::vector<double> speed_sq_;
  BudgetRecord record_;
};

}  // namespace akf
