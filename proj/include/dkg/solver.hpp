#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dkg/dirac.hpp"
#include "dkg/grid.hpp"
#include "dkg/kleingordon.hpp"
#include "dkg/norms.hpp"

namespace dkg::solver {

/// Gaussian profile A exp(-|x - c|^2 / (2 w^2)) used for w0, w1.
struct GaussianData {
  double amplitude = 0.0;
  double width = 1.0;
  Vec3 center{};
};

/// Initial spinor A e^{i phase} exp(-|x - c|^2 / (2 w^2)) * polarization.
struct SpinorData {
  double amplitude = 0.0;
  double width = 1.0;
  Vec3 center{};
  std::array<cplx, 4> polarization{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{0.0}};
  double phase = 0.0;
};

enum class PathKind { rest, inertial, oscillating, file };

/// Thresholds of the smallness gate. The hypotheses only require these
/// quantities to be "sufficiently small"; the values are configuration.
struct GateThresholds {
  double chi = 1.0;           ///< ||chi||_{W^{ceil(s)+2,1}}
  double chi_weighted = 1.0;  ///< ||<x>^{3+delta} chi||_inf and of grad chi
  double w0 = 1.0;            ///< ||w0||_{W^{ceil(s)+3,1}}
  double w1 = 1.0;            ///< ||w1||_{W^{ceil(s)+2,1}}
  double u0 = 1.0;            ///< ||u0||_{H^s}
  double potential = 1.0;     ///< smallness proxy of W1
};

struct RunConfig {
  int n = 32;
  double L = 16.0;
  double T = 2.0;
  double dt = 0.02;
  double p = 5.0;
  double s = 1.5;
  double N = 1.75;
  double M = 1.0;
  Vec3 v0{};
  double eps_soft = 0.0;  ///< 0 selects the grid spacing
  double picard_tol = 1e-12;
  int picard_max_iters = 40;
  double q_tol = 1e-12;
  int q_max_iters = 30;
  bool nonlinearity = true;
  bool coupling = true;  ///< W u term on/off
  kg::ChargeProfile chi{kg::ProfileKind::gaussian, 0.001, 1.0};
  double delta = 0.5;
  GaussianData w0;
  GaussianData w1;
  SpinorData u0{0.01, 1.0, {}, {cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{0.0}}, 0.0};
  PathKind path_kind = PathKind::rest;
  Vec3 path_amplitude{};
  double path_omega = 1.0;
  std::string path_file;
  kg::WMode w_mode = kg::WMode::decomposition;
  int quad_substeps = 1;
  bool theorem_compliant = true;
  bool enforce_gates = true;
  double horizon_eta = 0.1;
  GateThresholds thresholds;

  /// Throws ConfigError on any invalid combination.
  void validate() const;
  std::size_t steps() const;  ///< T / dt
  double softening() const;   ///< eps_soft, or dx when eps_soft == 0
  Grid3 grid() const { return make_grid(n, L); }
};

// -- gates --------------------------------------------------------------------

struct GateCheck {
  std::string hypothesis;
  double value = 0.0;
  double threshold = 0.0;
  bool strict = false;  ///< value < threshold instead of <=
  bool passed = false;
  /// threshold / value (infinite when value == 0).
  double margin = 0.0;
};

struct GateReport {
  std::string label;
  std::vector<GateCheck> checks;

  void add(std::string hypothesis, double value, double threshold, bool strict = false);
  bool passed() const;
  const GateCheck* first_failure() const;
  /// Throws GateError naming the first violated hypothesis.
  void require() const;
  /// Smallest margin over all checks.
  double min_margin() const;
};

/// Inputs shared by every run with the same configuration.
struct Setup {
  Grid3 grid;
  kg::ChargeDensity chi;
  kg::KGState kg0;
  SpinorField u0;
};

Setup make_setup(const RunConfig& cfg);
SpinorField make_spinor(const Grid3& grid, const SpinorData& data);
ScalarField make_gaussian(const Grid3& grid, const GaussianData& data);
kg::NucleusPath make_path(const RunConfig& cfg);

/// Small-data hypotheses for a run of the electron system along `path`:
/// path bounds, s-range, and smallness of chi, w0, w1, u0 and of the W1
/// potential proxy.
GateReport system1_gates(const RunConfig& cfg, const Setup& setup, const kg::NucleusPath& path);
/// Coupled system hypotheses: s > 3/2, horizon, chi weighted gradient, plus the
/// data smallness of system1_gates evaluated on the free path v0 t.
GateReport system2_gates(const RunConfig& cfg, const Setup& setup);

// -- Dirac Picard iteration ---------------------------------------------------

struct SweepOptions {
  double dt = 0.02;
  double p = 5.0;
  double s = 1.5;
  bool nonlinearity = true;
  bool coupling = true;
};

/// ||f||_X = sup_t ||f||_{H^s} + ||f||_{L^{p-1}_T L^inf}.
double x_norm(std::span<const SpinorField> series, double s, double p, double dt);

struct SweepResult {
  std::vector<SpinorField> next;
  double distance = 0.0;  ///< ||next - prev||_X
};

/// One Picard sweep of
///   u(t) = S(t) u0 + i int_0^t S(t - tau) (W u + N(u))(tau) dtau,  S(t) = e^{itD},
/// with the trapezoid rule on the time nodes and the previous iterate on the
/// right-hand side. `prev` and `W` hold one field per node.
SweepResult duhamel_sweep_u(const std::vector<SpinorField>& prev, const std::vector<ScalarField>& W,
                            const SpinorField& u0, const SweepOptions& opt);

struct SweepRecord {
  int sweep = 0;
  double distance = 0.0;
  double ratio = 0.0;  ///< distance / previous distance (NaN for the first sweep)
};

struct PicardOutcome {
  std::vector<SpinorField> u;
  std::vector<SweepRecord> sweeps;
  bool converged = false;
};

/// Iterates duhamel_sweep_u from the zero iterate until the X-distance drops
/// below tol * ||u||_X. DivergenceError after three consecutive ratios >= 1 or
/// when max_iters is exhausted.
PicardOutcome picard_solve(const SpinorField& u0, const std::vector<ScalarField>& W, const SweepOptions& opt,
                           double tol, int max_iters);

// -- trajectories -------------------------------------------------------------

struct QIterationRecord {
  int iteration = 0;
  double z_distance = 0.0;   ///< ||q_{k+1} - q_k||_Z
  double c2_distance = 0.0;  ///< ||q_{k+1} - q_k||_{C^2}
  double ratio = 0.0;        ///< z_distance / previous (NaN for the first)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpinorField> u;
  std::vector<ScalarField> W;
  kg::NucleusPath path;
  std::vector<SweepRecord> sweeps;
  std::vector<QIterationRecord> q_iterations;
  norms::NormReport report;
  GateReport gates;
};

/// Fills the standard report: H^s in time, Strichartz L^{p-1}_T L^inf, local
/// smoothing, mass drift, potential proxy, contraction summary.
norms::NormReport trajectory_report(const RunConfig& cfg, const Trajectory& traj, const SpinorField& u0);

/// The electron system along a prescribed path. Refuses (GateError) when
/// cfg.enforce_gates and a hypothesis fails.
Trajectory solve_system1(const RunConfig& cfg, const kg::NucleusPath& path);
Trajectory solve_system1(const RunConfig& cfg, const Setup& setup, const kg::NucleusPath& path);

/// Estimated time-discretization error sup_t ||u_dt - u_{dt/2}||_{H^s} / 3.
double step_doubling_error(const RunConfig& cfg, const kg::NucleusPath& path);

// -- nucleus ------------------------------------------------------------------

/// F = int |u|^2 (x - q) / (|x - q|^2 + eps^2)^{3/2} dx on the grid (box
/// coordinates, no periodic images).
Vec3 hellman_feynman_force(const SpinorField& u, const Vec3& q, double eps_soft);

/// ||q||_inf + ||qddot||_{L^1} of a difference of two paths on the same grid.
double z_distance(const kg::NucleusPath& a, const kg::NucleusPath& b);
/// sup|q| + sup|qdot| + sup|qddot| of the difference.
double c2_distance(const kg::NucleusPath& a, const kg::NucleusPath& b);

/// Membership in B = {||qddot||_{L^1} <= 1/2, ||q||_inf <= 1, q(0) = 0, qdot(0) = v0}.
struct BallReport {
  bool inside = true;
  std::string constraint;
  double time = 0.0;
  double qddot_l1 = 0.0;
  double sup_q = 0.0;
};

BallReport ball_check(const kg::NucleusPath& path, const Vec3& v0);

struct QMapResult {
  kg::NucleusPath next;
  Trajectory electron;  ///< u = Psi_q(u0) along the input path
  std::vector<Vec3> forces;
  BallReport ball;
};

/// One application of the nucleus map: solve the electron system along q_iter, set
/// M qddot = F(u(t), q_iter(t)), integrate twice (trapezoid) from q(0) = 0,
/// qdot(0) = v0. Throws BallViolation when q_iter is outside B.
QMapResult picard_map_q(const kg::NucleusPath& q_iter, const RunConfig& cfg, const Setup& setup);

/// Fixed point of picard_map_q in the Z norm starting from q = v0 t. Refuses
/// when the coupled system gates fail; BallViolation if an iterate leaves B.
Trajectory solve_system2(const RunConfig& cfg);

}  // namespace dkg::solver
