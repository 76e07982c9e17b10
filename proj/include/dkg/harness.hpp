#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dkg/config.hpp"
#include "dkg/solver.hpp"

namespace dkg::harness {

enum ExitCode : int { ok = 0, failed = 1, bad_input = 2, runtime_failure = 3 };

// -- verification kernels (shared by the CLI and the test suites) -------------

struct KernelCheck {
  Vec3 velocity;
  double sigma = 0.0;    ///< 0: raw lattice symbol; > 0: Gaussian-regularized
  double mismatch = 0.0; ///< relative L2 mismatch on the annulus
  std::size_t points = 0;
};

/// Inverse transform of 1/(<xi>^2 - (xi.v)^2) (times exp(-sigma^2 (|H_v xi|^2 - 1)/2)
/// when sigma > 0) against gamma * Y(L_v x) (or its Gaussian-smoothed closed
/// form), relative L2 over 2 dx <= |x| <= L/4.
KernelCheck check_kernel(const Grid3& grid, const Vec3& v, double sigma = 0.0);

struct DecompositionLevel {
  int steps = 0;
  double dt_quad = 0.0;
  double residual = 0.0;       ///< ||W1 + W2 + W3 - W_direct|| / ||W_direct||
  double order = 0.0;          ///< log2 of the residual ratio to the previous level (0 for the first)
  double imag_residue = 0.0;   ///< of the assembled decomposition
};

/// Decomposition identity at t = T for each step count in `levels`.
std::vector<DecompositionLevel> check_decomposition(const solver::RunConfig& cfg, const std::vector<int>& levels);

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> sup_norms;  ///< ||W2(t)||_inf
};

/// ||W2(t)||_inf for t = 0, dt, ..., t_max with the configured chi, w0, w1, v0.
DecaySeries w2_decay_series(const solver::RunConfig& cfg, double t_max, double dt);

// -- artifacts ----------------------------------------------------------------

/// git blob hash: sha1("blob <size>\0" + content), lowercase hex.
std::string git_blob_hash(const std::string& content);
std::string sha256_file(const std::filesystem::path& file);

/// One value per time node: t, ||u||_{H^s}, ||u||_2, ||u||_inf, ||W||_inf, q.
void write_norm_series(const std::filesystem::path& file, const solver::Trajectory& tr, double s);
void write_sweeps(const std::filesystem::path& file, const std::vector<solver::SweepRecord>& sweeps);
void write_gates(const std::filesystem::path& file, const std::vector<solver::GateReport>& gates);

// -- commands -----------------------------------------------------------------

struct Options {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

const std::vector<std::string>& commands();

/// Runs one subcommand on a config file. The manifest is always written to
/// out_dir/manifest.json (when the directory is writable). Returns the exit code.
int run(const std::string& command, const std::filesystem::path& config_path, const Options& opt);

/// Compares two run directories (or their manifest.json files): per-node norm
/// deltas, report deltas and field distances of dumps present in both.
int compare(const std::filesystem::path& a, const std::filesystem::path& b, const Options& opt);

}  // namespace dkg::harness
