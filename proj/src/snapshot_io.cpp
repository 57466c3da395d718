#include "akf/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <vector>

#include "akf/errors.hpp"

namespace akf {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'K', 'F', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 8 + 3 * 8;

template <typename T>
void put_le(std::vector<char>& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.insert(out.end(), bytes, bytes + 8);
}

template <typename T>
T get_le(const char* in) {
  std::uint64_t bits;
  std::memcpy(&bits, in, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

void write_raw(const std::filesystem::path& path, const GridSpec& g, double time,
               std::span<const double> payload) {
  std::vector<char> buf;
  buf.reserve(kHeaderBytes + payload.size() * 8);
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put_le<std::int64_t>(buf, g.dim_x);
  put_le<std::int64_t>(buf, g.dim_v);
  put_le<std::int64_t>(buf, g.n_x);
  put_le<std::int64_t>(buf, g.n_v);
  put_le<double>(buf, g.half_width_x);
  put_le<double>(buf, g.half_width_v);
  put_le<double>(buf, time);
  for (double v : payload) put_le<double>(buf, v);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw ConfigError("short write to " + path.string());
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const PhaseField& field) {
  write_raw(path, field.grid(), field.time(), field.values());
}

void write_snapshot(const std::filesystem::path& path, const SpatialField& field) {
  write_raw(path, field.grid(), field.time(), field.values());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), buf.begin()))
    throw ConfigError(path.string() + ": not an AKF1 snapshot");
  const char* p = buf.data() + 4;
  GridSpec g;
  g.dim_x = static_cast<int>(get_le<std::int64_t>(p));
  g.dim_v = static_cast<int>(get_le<std::int64_t>(p + 8));
  g.n_x = static_cast<int>(get_le<std::int64_t>(p + 16));
  g.n_v = static_cast<int>(get_le<std::int64_t>(p + 24));
  g.half_width_x = get_le<double>(p + 32);
  g.half_width_v = get_le<double>(p + 40);
  const double time = get_le<double>(p + 48);
  try {
    g.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const std::size_t payload_bytes = buf.size() - kHeaderBytes;
  if (payload_bytes % 8 != 0) throw ConfigError(path.string() + ": ragged payload");
  const std::size_t count = payload_bytes / 8;
  if (count != g.phase_cells() && count != g.x_cells())
    throw ConfigError(path.string() + ": payload length matches neither field kind");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_le<double>(buf.data() + kHeaderBytes + 8 * i);
  if (count == g.phase_cells()) return PhaseField(g, std::move(values), time);
  return SpatialField(g, std::move(values), time);
}

void write_csv(const std::filesystem::path& path, const PhaseField& field) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  const GridSpec& g = field.grid();
  os << (g.dim_x == 2 ? "x1,x2," : "x1,") << (g.dim_v == 2 ? "v1,v2," : "v1,") << "value\n";
  os << std::setprecision(17);
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
    const auto x = g.x_point(ix);
    for (std::size_t iv = 0; iv < g.v_cells(); ++iv) {
      const auto v = g.v_point(iv);
      os << x[0] << ',';
      if (g.dim_x == 2) os << x[1] << ',';
      os << v[0] << ',';
      if (g.dim_v == 2) os << v[1] << ',';
      os << field[ix * g.v_cells() + iv] << '\n';
    }
  }
}

void write_csv(const std::filesystem::path& path, const SpatialField& field) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  const GridSpec& g = field.grid();
  os << (g.dim_x == 2 ? "x1,x2," : "x1,") << role_name(field.role()) << "\n";
  os << std::setprecision(17);
  for (std::size_t ix = 0; ix < g.x_cells(); ++ix) {
    const auto x = g.x_point(ix);
    os << x[0] << ',';
    if (g.dim_x == 2) os << x[1] << ',';
    os << field[ix] << '\n';
  }
}

}  // namespace akf
