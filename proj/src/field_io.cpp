#include "dkg/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace dkg {

namespace {

constexpr char kMagic[4] = {'D', 'K', 'G', 'A'};

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw DataError("field dump truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::ofstream open_out(const std::filesystem::path& path, const Grid3& g, std::uint8_t kind) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kDumpVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<double>(os, g.length());
  put<std::uint8_t>(os, kind);
  return os;
}

void put_values(std::ostream& os, const std::vector<cplx>& values) {
  for (const auto& v : values) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

void get_values(std::istream& is, std::vector<cplx>& values) {
  for (auto& v : values) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    v = {re, im};
  }
}

}  // namespace

void write_dump(const std::filesystem::path& path, const ScalarField& f) {
  const ScalarField s = to_space(f);
  auto os = open_out(path, s.grid, 0);
  put_values(os, s.values);
  if (!os) throw DataError("write failed: " + path.string());
}

void write_dump(const std::filesystem::path& path, const SpinorField& f) {
  const SpinorField s = to_space(f);
  auto os = open_out(path, s.grid, 1);
  for (const auto& c : s.comp) put_values(os, c);
  if (!os) throw DataError("write failed: " + path.string());
}

DumpedField read_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path.string() + ": not a field dump (bad magic)");
  const auto version = get<std::uint32_t>(is);
  if (version != kDumpVersion) throw DataError(path.string() + ": unsupported dump version " + std::to_string(version));
  const auto n = get<std::uint32_t>(is);
  const auto length = get<double>(is);
  const auto kind = get<std::uint8_t>(is);
  Grid3 g = [&] {
    try {
      return make_grid(static_cast<int>(n), length);
    } catch (const ConfigError& e) {
      throw DataError(path.string() + ": invalid grid in header: " + e.what());
    }
  }();
  if (kind == 0) {
    ScalarField f(g);
    get_values(is, f.values);
    return f;
  }
  if (kind == 1) {
    SpinorField f(g);
    for (auto& c : f.comp) get_values(is, c);
    return f;
  }
  throw DataError(path.string() + ": unknown field kind " + std::to_string(kind));
}

}  // namespace dkg
