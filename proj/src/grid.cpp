#include "akf/grid.hpp"

#include <cmath>
#include <sstream>

#include "akf/errors.hpp"

namespace akf {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

std::array<int, 2> split(std::size_t flat, int n, int dims) {
  if (dims == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / n), static_cast<int>(flat % n)};
}

}  // namespace

void GridSpec::validate() const {
  if (dim_x < 1 || dim_x > 2 || dim_v < 1 || dim_v > 2)
    throw ParameterError("grid: dim_x and dim_v must be 1 or 2");
  if (n_x < 8 || n_v < 8 || !is_power_of_two(n_x) || !is_power_of_two(n_v))
    throw ParameterError("grid: n_x and n_v must be powers of two >= 8");
  if (!(half_width_x > 0.0) || !(half_width_v > 0.0) ||
      !std::isfinite(half_width_x) || !std::isfinite(half_width_v))
    throw ParameterError("grid: half widths must be positive and finite");
}

std::size_t GridSpec::x_cells() const { return ipow(n_x, dim_x); }
std::size_t GridSpec::v_cells() const { return ipow(n_v, dim_v); }

double GridSpec::cell_volume_x() const { return std::pow(h_x(), dim_x); }
double GridSpec::cell_volume_v() const { return std::pow(h_v(), dim_v); }
double GridSpec::box_volume_x() const { return std::pow(2.0 * half_width_x, dim_x); }
double GridSpec::box_volume_v() const { return std::pow(2.0 * half_width_v, dim_v); }

std::array<int, 2> GridSpec::x_index(std::size_t ix) const { return split(ix, n_x, dim_x); }
std::array<int, 2> GridSpec::v_index(std::size_t iv) const { return split(iv, n_v, dim_v); }

std::array<double, 2> GridSpec::x_point(std::size_t ix) const {
  auto idx = x_index(ix);
  return {coord_x(idx[0]), dim_x == 2 ? coord_x(idx[1]) : 0.0};
}

std::array<double, 2> GridSpec::v_point(std::size_t iv) const {
  auto idx = v_index(iv);
  return {coord_v(idx[0]), dim_v == 2 ? coord_v(idx[1]) : 0.0};
}

double GridSpec::speed(std::size_t iv) const {
  auto v = v_point(iv);
  return std::hypot(v[0], v[1]);
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << dim_x << "+" << dim_v << " grid, n_x=" << n_x << " n_v=" << n_v
     << " L_x=" << half_width_x << " L_v=" << half_width_v;
  return os.str();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* context) {
  if (!(a == b))
    throw ShapeError(std::string(context) + ": grid mismatch (" + a.describe() +
                     " vs " + b.describe() + ")");
}

}  // namespace akf
