#include "akf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "akf/errors.hpp"
#include "akf/harness.hpp"

#ifndef AKF_SCENARIO_DIR
#define AKF_SCENARIO_DIR "scenarios"
#endif

namespace akf {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario", {"name", "driver", "snapshots"}},
      {"grid", {"dim_x", "dim_v", "n_x", "n_v", "half_width_x", "half_width_v"}},
      {"params", {"sigma", "d", "gamma", "eta", "alpha1", "c_R", "epsilon", "v0", "k_inf", "vector_j"}},
      {"schedule", {"t_end", "dt", "save_stride"}},
      {"solver", {"k_max", "tol", "slabs", "max_halvings", "calibrate"}},
      {"p0", {"shape", "center_x", "center_v", "variance", "variance_x", "variance_v", "mass", "value"}},
      {"f", {"shape", "center_x", "center_v", "variance", "variance_x", "variance_v", "mass", "value"}},
      {"c0", {"shape", "center_x", "variance", "variance_x", "mass", "value", "k_inf", "width", "span_x1",
              "span_x2"}},
      {"checks", {"names"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_known(const std::string& section, const std::string& key, int line) {
  const auto& keys = known_keys();
  const auto it = keys.find(section);
  if (it == keys.end()) throw ParseError("unknown section [" + section + "]", line);
  if (!it->second.count(key)) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const RawConfig::Entry* find(const std::string& section, const std::string& key) const {
    const auto s = raw_.sections.find(section);
    if (s == raw_.sections.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  bool has_section(const std::string& section) const { return raw_.sections.count(section) > 0; }

  void read(const std::string& sec, const std::string& key, double& out) const {
    if (const auto* e = find(sec, key)) out = to_double(*e, sec, key);
  }
  void read(const std::string& sec, const std::string& key, int& out) const {
    if (const auto* e = find(sec, key)) {
      const double v = to_double(*e, sec, key);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError(sec + "." + key + " must be an integer", e->line);
      out = static_cast<int>(v);
    }
  }
  void read(const std::string& sec, const std::string& key, bool& out) const {
    if (const auto* e = find(sec, key)) {
      std::string v = e->value;
      std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
      if (v == "true" || v == "yes" || v == "on" || v == "1") out = true;
      else if (v == "false" || v == "no" || v == "off" || v == "0") out = false;
      else throw ParseError(sec + "." + key + ": expected a boolean, got '" + e->value + "'", e->line);
    }
  }
  void read(const std::string& sec, const std::string& key, std::string& out) const {
    if (const auto* e = find(sec, key)) out = e->value;
  }
  void read(const std::string& sec, const std::string& key, std::array<double, 2>& out) const {
    if (const auto* e = find(sec, key)) {
      const auto list = to_list(*e, sec, key);
      if (list.empty() || list.size() > 2) throw ParseError(sec + "." + key + ": expected 1 or 2 numbers", e->line);
      out = {list[0], list.size() > 1 ? list[1] : 0.0};
    }
  }
  std::vector<std::string> words(const std::string& sec, const std::string& key) const {
    std::vector<std::string> out;
    if (const auto* e = find(sec, key)) {
      std::string v = e->value;
      std::replace(v.begin(), v.end(), ',', ' ');
      std::istringstream is(v);
      for (std::string w; is >> w;) out.push_back(w);
    }
    return out;
  }
  int line(const std::string& sec, const std::string& key) const {
    const auto* e = find(sec, key);
    return e ? e->line : 0;
  }

 private:
  static double to_double(const RawConfig::Entry& e, const std::string& sec, const std::string& key) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(e.value, &used);
    } catch (const std::exception&) {
      throw ParseError(sec + "." + key + ": expected a number, got '" + e.value + "'", e.line);
    }
    if (used != e.value.size() || !std::isfinite(v))
      throw ParseError(sec + "." + key + ": expected a number, got '" + e.value + "'", e.line);
    return v;
  }
  static std::vector<double> to_list(const RawConfig::Entry& e, const std::string& sec, const std::string& key) {
    std::string v = e.value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream is(v);
    std::vector<double> out;
    for (std::string w; is >> w;) out.push_back(to_double(RawConfig::Entry{w, e.line}, sec, key));
    return out;
  }

  const RawConfig& raw_;
};

Recipe read_recipe(const Reader& r, const std::string& sec) {
  Recipe rec;
  std::string shape = "zero";
  r.read(sec, "shape", shape);
  if (shape == "zero") rec.shape = Recipe::Shape::zero;
  else if (shape == "constant") rec.shape = Recipe::Shape::constant;
  else if (shape == "gaussian_bump") rec.shape = Recipe::Shape::gaussian_bump;
  else if (shape == "plateau_ramp" && sec == "c0") rec.shape = Recipe::Shape::plateau_ramp;
  else throw ParseError(sec + ".shape: unknown recipe '" + shape + "'", r.line(sec, "shape"));
  r.read(sec, "center_x", rec.center_x);
  if (sec != "c0") r.read(sec, "center_v", rec.center_v);
  double variance = 0.0;
  if (r.find(sec, "variance")) {
    r.read(sec, "variance", variance);
    rec.variance_x = rec.variance_v = variance;
  }
  r.read(sec, "variance_x", rec.variance_x);
  if (sec != "c0") r.read(sec, "variance_v", rec.variance_v);
  r.read(sec, "mass", rec.mass);
  r.read(sec, "value", rec.value);
  if (sec == "c0") {
    r.read(sec, "k_inf", rec.k_inf);
    r.read(sec, "width", rec.width);
    r.read(sec, "span_x1", rec.span_x1);
    r.read(sec, "span_x2", rec.span_x2);
  }
  return rec;
}

// Recipes are summed over periodic images so the sampled data has no jump
// across the box edge; the spectral heat flow would otherwise ring.
constexpr int kImages = 2;

double gaussian(const std::array<double, 2>& z, const std::array<double, 2>& c, double var, int dim,
                double half_width) {
  double prod = 1.0;
  for (int a = 0; a < dim; ++a) {
    double sum = 0.0;
    for (int m = -kImages; m <= kImages; ++m) {
      const double d = z[a] - c[a] + 2.0 * half_width * m;
      sum += std::exp(-d * d / (2.0 * var));
    }
    prod *= sum / std::sqrt(2.0 * std::numbers::pi * var);
  }
  return prod;
}

double plateau(double x, const std::array<double, 2>& span, double w, double half_width) {
  double sum = 0.0;
  for (int m = -kImages; m <= kImages; ++m) {
    const double y = x + 2.0 * half_width * m;
    sum += 0.5 * (std::tanh((y - span[0]) / w) - std::tanh((y - span[1]) / w));
  }
  return sum;
}

void check_inside(const std::array<double, 2>& c, int dim, double half, const std::string& what) {
  for (int a = 0; a < dim; ++a)
    if (!(c[a] >= -half && c[a] < half)) throw ConfigError(what + " lies outside the box");
}

void validate_recipe(const Recipe& r, const GridSpec& g, bool phase, const std::string& what) {
  switch (r.shape) {
    case Recipe::Shape::zero:
      return;
    case Recipe::Shape::constant:
      if (r.value < 0.0) throw ConfigError(what + ": constant value must be nonnegative");
      return;
    case Recipe::Shape::gaussian_bump:
      if (!(r.variance_x > 0.0) || (phase && !(r.variance_v > 0.0)))
        throw ConfigError(what + ": variances must be positive");
      if (r.mass < 0.0) throw ConfigError(what + ": mass must be nonnegative");
      check_inside(r.center_x, g.dim_x, g.half_width_x, what + ".center_x");
      if (std::sqrt(r.variance_x) < 3.0 * g.h_x()) throw ConfigError(what + ": bump narrower than 3 cells in x");
      if (phase) {
        check_inside(r.center_v, g.dim_v, g.half_width_v, what + ".center_v");
        if (std::sqrt(r.variance_v) < 3.0 * g.h_v()) throw ConfigError(what + ": bump narrower than 3 cells in v");
      }
      return;
    case Recipe::Shape::plateau_ramp:
      if (r.k_inf < 0.0) throw ConfigError(what + ": k_inf must be nonnegative");
      if (r.width < 8.0 * g.h_x()) throw ConfigError(what + ": edge width must span at least 8 cells");
      for (int a = 0; a < g.dim_x; ++a) {
        const auto& span = a == 0 ? r.span_x1 : r.span_x2;
        if (!(span[0] < span[1])) throw ConfigError(what + ": empty plateau span");
        check_inside(span, 2, g.half_width_x, what + ".span");
      }
      return;
  }
}

}  // namespace

std::string shape_name(Recipe::Shape shape) {
  switch (shape) {
    case Recipe::Shape::zero: return "zero";
    case Recipe::Shape::constant: return "constant";
    case Recipe::Shape::gaussian_bump: return "gaussian_bump";
    case Recipe::Shape::plateau_ramp: return "plateau_ramp";
  }
  return "?";
}

RawConfig parse_config(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line;
  std::string section = "scenario";
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", number);
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section)) throw ParseError("unknown section [" + section + "]", number);
      raw.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", number);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", number);
    if (value.empty()) throw ParseError("empty value for '" + key + "'", number);
    check_known(section, key, number);
    auto& sec = raw.sections[section];
    if (sec.count(key)) throw ParseError("duplicate key '" + key + "' in [" + section + "]", number);
    sec[key] = RawConfig::Entry{value, number};
  }
  return raw;
}

void apply_override(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ParseError("override must look like section.key=value: '" + assignment + "'", 0);
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  check_known(section, key, 0);
  if (value.empty()) throw ParseError("override of " + section + "." + key + " has an empty value", 0);
  raw.sections[section][key] = RawConfig::Entry{value, 0};
}

Scenario build_scenario(const RawConfig& raw) {
  const Reader r(raw);
  Scenario s;
  r.read("scenario", "name", s.name);
  std::string driver = "pure";
  r.read("scenario", "driver", driver);
  if (driver == "pure") s.driver = Scenario::Driver::pure;
  else if (driver == "coupled") s.driver = Scenario::Driver::coupled;
  else throw ParseError("scenario.driver must be pure or coupled", r.line("scenario", "driver"));
  std::string snapshots = "ends";
  r.read("scenario", "snapshots", snapshots);
  if (snapshots != "ends" && snapshots != "all")
    throw ParseError("scenario.snapshots must be ends or all", r.line("scenario", "snapshots"));
  s.snapshots_all = snapshots == "all";

  r.read("grid", "dim_x", s.grid.dim_x);
  r.read("grid", "dim_v", s.grid.dim_v);
  r.read("grid", "n_x", s.grid.n_x);
  r.read("grid", "n_v", s.grid.n_v);
  r.read("grid", "half_width_x", s.grid.half_width_x);
  r.read("grid", "half_width_v", s.grid.half_width_v);

  r.read("params", "sigma", s.params.sigma);
  r.read("params", "d", s.params.d);
  r.read("params", "gamma", s.params.gamma);
  r.read("params", "eta", s.params.eta);
  r.read("params", "alpha1", s.params.alpha1);
  r.read("params", "c_R", s.params.c_R);
  r.read("params", "epsilon", s.params.epsilon);
  r.read("params", "v0", s.params.v0);
  r.read("params", "k_inf", s.params.k_inf);
  r.read("params", "vector_j", s.params.use_vector_j);

  r.read("schedule", "t_end", s.schedule.t_end);
  r.read("schedule", "dt", s.schedule.dt);
  r.read("schedule", "save_stride", s.schedule.save_stride);

  r.read("solver", "k_max", s.solver.k_max);
  r.read("solver", "tol", s.solver.tol);
  r.read("solver", "slabs", s.solver.slabs);
  r.read("solver", "max_halvings", s.solver.max_halvings);
  r.read("solver", "calibrate", s.solver.calibrate);

  s.p0 = read_recipe(r, "p0");
  s.f = read_recipe(r, "f");
  s.c0 = read_recipe(r, "c0");
  if (!r.find("c0", "k_inf")) s.c0.k_inf = s.params.k_inf;
  s.checks = r.words("checks", "names");
  for (const auto& c : s.checks)
    if (!find_check(c)) throw ParseError("unknown check '" + c + "'", r.line("checks", "names"));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  RawConfig raw = parse_config(ss.str());
  for (const auto& o : overrides) apply_override(raw, o);
  Scenario s = build_scenario(raw);
  if (!raw.sections.count("scenario") || !raw.sections.at("scenario").count("name")) s.name = path.stem().string();
  return s;
}

void validate_scenario(const Scenario& s) {
  try {
    s.grid.validate();
    s.params.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  s.schedule.validate();
  if (s.solver.k_max < 2) throw ConfigError("solver.k_max must be >= 2");
  if (!(s.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (s.solver.max_halvings < 0) throw ConfigError("solver.max_halvings must be >= 0");
  validate_recipe(s.p0, s.grid, true, "p0");
  validate_recipe(s.f, s.grid, true, "f");
  validate_recipe(s.c0, s.grid, false, "c0");
  if (s.driver == Scenario::Driver::coupled && s.f.shape != Recipe::Shape::zero)
    throw ConfigError("the coupled driver takes no external source [f]");
  if (s.driver == Scenario::Driver::coupled) {
    try {
      gaussian_rho(s.grid, s.params.epsilon, s.params.v0);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& c : s.checks) {
    if (!find_check(c)) throw ConfigError("unknown check '" + c + "'");
    const bool c_check = c == "c_bounds" || c == "positivity_c";
    if (c_check && s.driver != Scenario::Driver::coupled)
      throw ConfigError("check '" + c + "' needs the coupled driver");
    if (c.rfind("heat_lq", 0) == 0 && s.driver != Scenario::Driver::pure)
      throw ConfigError("check '" + c + "' needs the pure driver");
  }
}

std::vector<std::string> default_checks(const Scenario& s) {
  std::vector<std::string> c = {"positivity", "comparison"};
  const bool coupled = s.driver == Scenario::Driver::coupled;
  const bool sourced = s.f.shape != Recipe::Shape::zero;
  for (const char* q : {"l1", "l2", "linf"}) {
    if (!sourced) {
      c.push_back(std::string("gronwall_p_") + q);
      c.push_back(std::string("gronwall_p_tilde_") + q);
      c.push_back(std::string("gronwall_m_") + q);
      c.push_back(std::string("second_moment_envelope_") + q);
    }
    if (!coupled) c.push_back(std::string("heat_lq_") + q);
  }
  c.push_back("energy");
  c.push_back("speed_bound");
  if (coupled) {
    c.push_back("positivity_c");
    c.push_back("c_bounds");
  }
  c.push_back("moment_residual_p_tilde");
  c.push_back("moment_residual_m");
  c.push_back("picard_contraction");
  c.push_back("picard_convergence");
  return c;
}

PhaseField build_phase(const Recipe& r, const GridSpec& g) {
  std::vector<double> v(g.phase_cells(), 0.0);
  const std::size_t nv = g.v_cells();
  switch (r.shape) {
    case Recipe::Shape::zero:
      break;
    case Recipe::Shape::constant:
      std::fill(v.begin(), v.end(), r.value);
      break;
    case Recipe::Shape::gaussian_bump: {
      std::vector<double> gv(nv);
      for (std::size_t iv = 0; iv < nv; ++iv) gv[iv] = gaussian(g.v_point(iv), r.center_v, r.variance_v, g.dim_v, g.half_width_v);
      for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
        const double gx = r.mass * gaussian(g.x_point(ix), r.center_x, r.variance_x, g.dim_x, g.half_width_x);
        for (std::size_t iv = 0; iv < nv; ++iv) v[ix * nv + iv] = gx * gv[iv];
      }
      break;
    }
    case Recipe::Shape::plateau_ramp:
      throw ConfigError("plateau_ramp describes a concentration, not a density");
  }
  return PhaseField(g, std::move(v), 0.0);
}

SpatialField build_spatial(const Recipe& r, const GridSpec& g, FieldRole role) {
  std::vector<double> v(g.x_cells(), 0.0);
  for (std::size_t ix = 0; ix < v.size(); ++ix) {
    const auto x = g.x_point(ix);
    switch (r.shape) {
      case Recipe::Shape::zero:
        break;
      case Recipe::Shape::constant:
        v[ix] = r.value;
        break;
      case Recipe::Shape::gaussian_bump:
        v[ix] = r.mass * gaussian(x, r.center_x, r.variance_x, g.dim_x, g.half_width_x);
        break;
      case Recipe::Shape::plateau_ramp:
        v[ix] = r.k_inf * plateau(x[0], r.span_x1, r.width, g.half_width_x) *
                (g.dim_x == 2 ? plateau(x[1], r.span_x2, r.width, g.half_width_x) : 1.0);
        break;
    }
  }
  return SpatialField(g, std::move(v), 0.0, role);
}

double boundary_mass_fraction(const PhaseField& p, int cells) {
  const GridSpec& g = p.grid();
  auto near = [cells](int i, int n) { return i < cells || i >= n - cells; };
  double edge = 0.0, total = 0.0;
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
    const auto xi = g.x_index(ix);
    bool xnear = false;
    for (int a = 0; a < g.dim_x; ++a) xnear = xnear || near(xi[a], g.n_x);
    for (std::size_t iv = 0; iv < g.v_cells(); ++iv) {
      const auto vi = g.v_index(iv);
      bool vnear = false;
      for (int a = 0; a < g.dim_v; ++a) vnear = vnear || near(vi[a], g.n_v);
      const double m = std::abs(p[ix * g.v_cells() + iv]);
      total += m;
      if (xnear || vnear) edge += m;
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

std::filesystem::path scenario_dir() { return std::filesystem::path(AKF_SCENARIO_DIR); }

std::vector<std::string> shipped_scenarios() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(scenario_dir(), ec))
    if (e.path().extension() == ".cfg") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path resolve_scenario(const std::string& name_or_path) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const auto shipped = scenario_dir() / (name_or_path + ".cfg");
  if (std::filesystem::is_regular_file(shipped)) return shipped;
  throw ConfigError("no scenario file or shipped scenario named '" + name_or_path + "'");
}

std::string describe_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "scenario " << s.name << " (" << (s.driver == Scenario::Driver::pure ? "pure" : "coupled") << " driver)\n";
  os << "  grid      " << s.grid.describe() << "\n";
  os << "  params    sigma=" << s.params.sigma << " d=" << s.params.d << " gamma=" << s.params.gamma
     << " eta=" << s.params.eta << " alpha1=" << s.params.alpha1 << " c_R=" << s.params.c_R
     << " epsilon=" << s.params.epsilon << " v0=(" << s.params.v0[0] << "," << s.params.v0[1] << ")"
     << " k_inf=" << s.params.k_inf << (s.params.use_vector_j ? " vector_j" : "") << "\n";
  os << "  schedule  t_end=" << s.schedule.t_end << " dt=" << s.schedule.dt << " save_stride=" << s.schedule.save_stride
     << "\n";
  os << "  solver    k_max=" << s.solver.k_max << " tol=" << s.solver.tol << " slabs=" << (s.solver.slabs ? "on" : "off")
     << " calibrate=" << (s.solver.calibrate ? "on" : "off") << "\n";
  os << "  p0        " << shape_name(s.p0.shape) << "\n";
  if (s.driver == Scenario::Driver::coupled) os << "  c0        " << shape_name(s.c0.shape) << "\n";
  else os << "  f         " << shape_name(s.f.shape) << "\n";
  os << "  checks:\n";
  for (const auto& name : s.checks.empty() ? default_checks(s) : s.checks) {
    const CheckInfo* info = find_check(name);
    os << "    " << name << "  [" << (info ? info->anchor : "") << "]\n";
  }
  return os.str();
}

}  // namespace akf
