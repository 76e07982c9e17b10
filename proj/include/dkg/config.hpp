#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dkg/solver.hpp"

namespace dkg::config {

/// Everything a run reads from its configuration: the solver parameters plus
/// the knobs of the verification subcommands.
struct Settings {
  solver::RunConfig run;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Field dumps every `dump_stride` nodes; 0 dumps only the final node.
  int dump_stride = 0;
  /// Which system gate-report evaluates (1 electron, 2 coupled).
  int system = 1;
  bool random_polarization = false;

  double decay_t_min = 5.0;
  double decay_t_max = 40.0;
  double decay_dt = 0.5;
  double decay_tol = 0.15;

  Vec3 kernel_v{0.5, 0.0, 0.0};
  double kernel_tol = 1e-3;

  std::vector<int> decomp_levels{100, 200, 400};
  double decomp_tol = 1e-4;
};

/// Environment variables DKG_<KEY> (key upper-cased) override file values.
/// A variable spelled with the exact key case wins, so DKG_n sets n and DKG_N
/// sets N.
inline constexpr const char* kEnvPrefix = "DKG_";

/// Keys without a default value.
const std::vector<std::string>& required_keys();
/// Every accepted key, in canonical order.
std::vector<std::string> known_keys();

/// Parses `key = value` lines ('#' starts a comment). Unknown keys, duplicate
/// keys, malformed values and missing required keys raise ConfigError.
Settings parse(const std::string& text, bool apply_env = true);
Settings load(const std::filesystem::path& file, bool apply_env = true);

/// Applies one key; ConfigError for unknown keys or malformed values.
void set(Settings& s, const std::string& key, const std::string& value);

/// Canonical `key = value` text of every key (round-trips through parse).
std::string echo(const Settings& s);
/// Same content as an ordered key -> value map.
std::vector<std::pair<std::string, std::string>> echo_pairs(const Settings& s);

/// Fills u0 polarization from the seed when random_polarization is set.
void apply_seed(Settings& s);

}  // namespace dkg::config
