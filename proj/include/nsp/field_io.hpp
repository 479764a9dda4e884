#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nsp/field.hpp"

namespace nsp::io {

static_assert(std::endian::native == std::endian::little, "field files are little-endian");

/// Binary field file, version 1. All integers u32 LE, all reals f64 LE.
///
///   offset  size  content
///        0     8  magic "NSPFIELD"
///        8     4  version (1)
///       12     4  dim
///       16     4  n (points per axis)
///       20     4  number of components c
///       24     8  box length L
///       32     8  dtype tag "f64le" padded with NUL
///       40  8*c*n^dim  samples, component after component, each row-major
///                      (last axis fastest)
inline constexpr char kMagic[8] = {'N', 'S', 'P', 'F', 'I', 'E', 'L', 'D'};
inline constexpr char kDtype[8] = {'f', '6', '4', 'l', 'e', '\0', '\0', '\0'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 40;

namespace detail {

template <class T>
void put(std::vector<char>& buf, const T& v) {
  const auto* p = reinterpret_cast<const char*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<char>& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

}  // namespace detail

inline std::vector<char> encode(const std::vector<Field>& components) {
  if (components.empty()) throw DomainError("nothing to encode");
  const Grid& g = components.front().grid();
  std::vector<char> buf;
  buf.reserve(kHeaderBytes + components.size() * g.size() * sizeof(double));
  buf.insert(buf.end(), kMagic, kMagic + 8);
  detail::put(buf, kVersion);
  detail::put(buf, static_cast<std::uint32_t>(g.dim()));
  detail::put(buf, static_cast<std::uint32_t>(g.n()));
  detail::put(buf, static_cast<std::uint32_t>(components.size()));
  detail::put(buf, g.length());
  buf.insert(buf.end(), kDtype, kDtype + 8);
  for (const Field& c : components) {
    if (!(c.grid() == g)) throw DomainError("components live on different grids");
    const auto* p = reinterpret_cast<const char*>(c.values().data());
    buf.insert(buf.end(), p, p + c.size() * sizeof(double));
  }
  return buf;
}

inline std::vector<Field> decode(const std::vector<char>& buf) {
  if (buf.size() < kHeaderBytes || std::memcmp(buf.data(), kMagic, 8) != 0)
    throw Error("not a field file (bad magic)");
  if (detail::get<std::uint32_t>(buf, 8) != kVersion) throw Error("unsupported field file version");
  if (std::memcmp(buf.data() + 32, kDtype, 8) != 0) throw Error("unsupported dtype");
  const Grid g(static_cast<int>(detail::get<std::uint32_t>(buf, 12)),
               static_cast<int>(detail::get<std::uint32_t>(buf, 16)), detail::get<double>(buf, 24));
  const auto count = detail::get<std::uint32_t>(buf, 20);
  if (buf.size() != kHeaderBytes + count * g.size() * sizeof(double))
    throw Error("field file payload has the wrong size");
  std::vector<Field> out;
  for (std::uint32_t c = 0; c < count; ++c) {
    std::vector<double> vals(g.size());
    std::memcpy(vals.data(), buf.data() + kHeaderBytes + c * g.size() * sizeof(double),
                g.size() * sizeof(double));
    out.emplace_back(g, std::move(vals));
  }
  return out;
}

inline void write(const std::filesystem::path& path, const std::vector<Field>& components) {
  const auto buf = encode(components);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline std::vector<Field> read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode(buf);
}

}  // namespace nsp::io
