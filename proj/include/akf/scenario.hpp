#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "akf/field.hpp"
#include "akf/linear.hpp"
#include "akf/picard.hpp"

namespace akf {

/// Analytic initial data. Centers and spans that do not apply to the field's
/// dimension are ignored.
struct Recipe {
  enum class Shape { zero, constant, gaussian_bump, plateau_ramp };
  Shape shape = Shape::zero;
  // gaussian_bump: mass * N(x; center_x, variance_x) * N(v; center_v, variance_v)
  std::array<double, 2> center_x{0.0, 0.0};
  std::array<double, 2> center_v{0.0, 0.0};
  double variance_x = 1.0;
  double variance_v = 1.0;
  double mass = 1.0;
  // plateau_ramp: k_inf on span_x1 (times span_x2 in 2D) with tanh edges
  double k_inf = 1.0;
  double width = 0.5;
  std::array<double, 2> span_x1{2.0, 6.0};
  std::array<double, 2> span_x2{-2.0, 2.0};
  // constant
  double value = 0.0;
};

std::string shape_name(Recipe::Shape shape);

struct SolverSettings {
  int k_max = 20;
  double tol = 1e-8;
  bool slabs = true;
  int max_halvings = 4;
  /// Re-run at 2 dt to calibrate the scheme-dependent tolerances.
  bool calibrate = true;
};

struct Scenario {
  enum class Driver { pure, coupled };
  std::string name = "scenario";
  Driver driver = Driver::pure;
  GridSpec grid;
  ModelParams params;
  Schedule schedule;
  SolverSettings solver;
  Recipe p0;
  Recipe c0;
  Recipe f;
  std::vector<std::string> checks;  ///< empty selects the driver's default set
  bool snapshots_all = false;       ///< write every saved frame, not only the ends
};

/// Raw key/value content of a configuration, keyed by section then key.
struct RawConfig {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections;
};

/// Throws ParseError with the offending line on malformed text, unknown
/// sections or keys, and duplicate keys.
RawConfig parse_config(const std::string& text);

/// "section.key=value"; throws ParseError for unknown keys.
void apply_override(RawConfig& raw, const std::string& assignment);

/// Typed scenario from raw content. Throws ParseError for values that do not
/// parse, ConfigError for inconsistent content.
Scenario build_scenario(const RawConfig& raw);

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Checks everything that can be checked without running: grid, parameters,
/// schedule, recipe placement, check names. Throws ConfigError.
void validate_scenario(const Scenario& s);

/// Check names run when the scenario does not list any.
std::vector<std::string> default_checks(const Scenario& s);

PhaseField build_phase(const Recipe& r, const GridSpec& grid);
SpatialField build_spatial(const Recipe& r, const GridSpec& grid, FieldRole role);

/// Fraction of |mass| within `cells` cells of any boundary of the box.
double boundary_mass_fraction(const PhaseField& p, int cells = 3);

/// Directory holding the shipped scenarios.
std::filesystem::path scenario_dir();
std::vector<std::string> shipped_scenarios();
/// An existing file path, or the name of a shipped scenario. Throws
/// ConfigError when neither.
std::filesystem::path resolve_scenario(const std::string& name_or_path);

/// Multi-line human-readable description.
std::string describe_scenario(const Scenario& s);

}  // namespace akf
