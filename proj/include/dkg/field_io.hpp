#pragma once

#include <filesystem>
#include <variant>

#include "dkg/grid.hpp"

namespace dkg {

/// Binary field dump, little-endian:
///   "DKGA" | u32 version (1) | u32 n | f64 L | u8 kind (0 scalar, 1 spinor)
///   | (re, im) f64 pairs, x-fastest, spinor components outermost.
/// Fields are always written in physical space.
inline constexpr std::uint32_t kDumpVersion = 1;

void write_dump(const std::filesystem::path& path, const ScalarField& f);
void write_dump(const std::filesystem::path& path, const SpinorField& f);

using DumpedField = std::variant<ScalarField, SpinorField>;

/// Throws DataError on a bad magic, version, kind or truncated payload.
DumpedField read_dump(const std::filesystem::path& path);

}  // namespace dkg
