#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string_view>
#include <vector>

#include "fastbasin/error.hpp"
#include "fastbasin/raster.hpp"

namespace fastbasin::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t k = sizeof(T); k-- > 0;) out.push_back(raw[k]);
  } else {
    out.insert(out.end(), raw, raw + sizeof(T));
  }
}

template <class T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (in.size() < pos + sizeof(T)) throw Error(ErrorKind::Io, "truncated header");
  unsigned char raw[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    raw[k] = in[pos + (std::endian::native == std::endian::big ? sizeof(T) - 1 - k : k)];
  }
  pos += sizeof(T);
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

inline void put_magic(std::vector<std::uint8_t>& out, std::string_view magic) {
  out.insert(out.end(), magic.begin(), magic.end());
}

inline void expect_magic(const std::vector<std::uint8_t>& in, std::size_t& pos, std::string_view magic) {
  if (in.size() < pos + magic.size() ||
      std::memcmp(in.data() + pos, magic.data(), magic.size()) != 0) {
    throw Error(ErrorKind::Io, "missing " + std::string(magic) + " header");
  }
  pos += magic.size();
}

inline void put_geometry(std::vector<std::uint8_t>& out, const Grid& g) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny));
  put_le<double>(out, g.window.xmin);
  put_le<double>(out, g.window.ymin);
  put_le<double>(out, g.window.xmax);
  put_le<double>(out, g.window.ymax);
}

inline Grid get_geometry(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  Grid g;
  g.nx = static_cast<int>(get_le<std::uint32_t>(in, pos));
  g.ny = static_cast<int>(get_le<std::uint32_t>(in, pos));
  g.window.xmin = get_le<double>(in, pos);
  g.window.ymin = get_le<double>(in, pos);
  g.window.xmax = get_le<double>(in, pos);
  g.window.ymax = get_le<double>(in, pos);
  g.validate();
  return g;
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace fastbasin::detail
