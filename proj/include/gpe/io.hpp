#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "gpe/field.hpp"

namespace gpe::io {

inline constexpr std::array<char, 4> kFieldMagic{'G', 'P', 'E', 'F'};
inline constexpr std::uint32_t kFieldVersion = 1;

namespace detail {

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("field dump is truncated");
  std::array<unsigned char, sizeof(T)> bits{};
  std::memcpy(bits.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

/// Shortest decimal representation that round-trips.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

/// Writes `contents` to `path` through a temporary file and a rename, so a
/// reader never observes a partially written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Binary field dump: "GPEF", u32 version, u32 d, u32 M, f64 L, then M^d
/// (re, im) f64 pairs in row-major order, all little-endian.
inline std::string encode_field(const WaveField& phi) {
  const GridSpec& g = phi.grid().spec();
  std::string out(kFieldMagic.begin(), kFieldMagic.end());
  detail::put_le<std::uint32_t>(out, kFieldVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points));
  detail::put_le<double>(out, g.half_width);
  out.reserve(out.size() + 16 * phi.size());
  for (const auto& v : phi.values()) {
    detail::put_le<double>(out, v.real());
    detail::put_le<double>(out, v.imag());
  }
  return out;
}

inline WaveField decode_field(const std::string& bytes) {
  if (bytes.size() < 4 || !std::equal(kFieldMagic.begin(), kFieldMagic.end(), bytes.begin()))
    throw Error("not a GPEF field dump");
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kFieldVersion) throw Error("unsupported GPEF version " + std::to_string(version));
  GridSpec spec;
  spec.dim = static_cast<int>(detail::get_le<std::uint32_t>(bytes, pos));
  spec.points = static_cast<int>(detail::get_le<std::uint32_t>(bytes, pos));
  spec.half_width = detail::get_le<double>(bytes, pos);
  WaveField phi(Grid::create(spec));
  for (auto& v : phi.values()) {
    const double re = detail::get_le<double>(bytes, pos);
    const double im = detail::get_le<double>(bytes, pos);
    v = cplx(re, im);
  }
  if (pos != bytes.size()) throw Error("trailing bytes after GPEF payload");
  return phi;
}

inline void write_field(const std::filesystem::path& path, const WaveField& phi) {
  write_atomic(path, encode_field(phi));
}

inline WaveField read_field(const std::filesystem::path& path) { return decode_field(read_file(path)); }

/// One row per node: x[,y[,z]],density.
inline std::string density_csv(const WaveField& phi) {
  const Grid& g = phi.grid();
  static constexpr const char* names[] = {"x", "y", "z"};
  std::string out;
  for (int a = 0; a < g.dim(); ++a) {
    out += names[a];
    out += ',';
  }
  out += "density\n";
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (int a = 0; a < g.dim(); ++a) {
      out += format_double(g.coordinate(a)[i]);
      out += ',';
    }
    out += format_double(std::norm(phi[i]));
    out += '\n';
  }
  return out;
}

}  // namespace gpe::io
