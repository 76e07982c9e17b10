#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "dkg/grid.hpp"

namespace dkg::kg {

// -- charge density ----------------------------------------------------------

enum class ProfileKind { gaussian, bump };

/// Analytic nuclear charge profile chi(x), centered at the origin.
///   gaussian: A exp(-|x|^2 / (2 w^2))
///   bump:     A exp(1 - 1/(1 - |x|^2/w^2)) for |x| < w, 0 outside (peak A).
struct ChargeProfile {
  ProfileKind kind = ProfileKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;

  double operator()(const Vec3& x) const;
};

/// chi sampled on a grid, with its spectrum and the norms that enter the
/// smallness hypotheses. Integer-order W^{k,1} norms stand in for the
/// fractional ones (k = 0 .. max_order).
class ChargeDensity {
 public:
  ChargeDensity(const Grid3& grid, ChargeProfile profile, int max_order = 5, double delta = 0.5);

  const ChargeProfile& profile() const noexcept { return profile_; }
  const Grid3& grid() const noexcept { return sampled_.grid; }
  const ScalarField& sampled() const noexcept { return sampled_; }
  const ScalarField& spectrum() const noexcept { return spectrum_; }
  double delta() const noexcept { return delta_; }

  /// ||chi||_{W^{k,1}} = sum_{|a| <= k} ||d^a chi||_{L^1}; k <= max_order.
  double sobolev_l1(int k) const;
  int max_order() const noexcept { return static_cast<int>(sobolev_l1_.size()) - 1; }
  /// ||<x>^{3+delta} chi||_{L^inf}
  double weighted_sup() const noexcept { return weighted_sup_; }
  /// ||<x>^{3+delta} grad chi||_{L^inf}
  double weighted_grad_sup() const noexcept { return weighted_grad_sup_; }

 private:
  ChargeProfile profile_;
  double delta_;
  ScalarField sampled_;
  ScalarField spectrum_;
  std::vector<double> sobolev_l1_;
  double weighted_sup_ = 0.0;
  double weighted_grad_sup_ = 0.0;
};

// -- nucleus path -------------------------------------------------------------

struct PathState {
  Vec3 q;
  Vec3 qdot;
  Vec3 qddot;
};

/// Nucleus trajectory sampled on the uniform grid t_j = j dt, j = 0..K.
/// Prescribed paths carry an analytic evaluator; solver-produced paths are
/// interpolated (cubic Hermite for q, linear for the derivatives).
class NucleusPath {
 public:
  using Analytic = std::function<PathState(double)>;

  NucleusPath(double dt, std::vector<PathState> samples, double mass = 1.0, Analytic analytic = {});

  /// q = 0 for all t.
  static NucleusPath at_rest(double horizon, double dt, double mass = 1.0);
  /// q = v0 t.
  static NucleusPath inertial(const Vec3& v0, double horizon, double dt, double mass = 1.0);
  /// q = a sin(omega t), so qdot(0) = a omega.
  static NucleusPath oscillating(const Vec3& amplitude, double omega, double horizon, double dt,
                                 double mass = 1.0);
  /// CSV with header t,qx,qy,qz,vx,vy,vz,ax,ay,az and uniform t starting at 0.
  static NucleusPath from_csv(const std::filesystem::path& path, double mass = 1.0);
  void write_csv(const std::filesystem::path& path) const;

  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double horizon() const noexcept { return dt_ * static_cast<double>(samples_.size() - 1); }
  double time(std::size_t j) const noexcept { return dt_ * static_cast<double>(j); }
  const PathState& operator[](std::size_t j) const { return samples_[j]; }
  std::span<const PathState> samples() const noexcept { return samples_; }
  double mass() const noexcept { return mass_; }
  Vec3 v0() const noexcept { return samples_.front().qdot; }
  bool has_analytic() const noexcept { return static_cast<bool>(analytic_); }

  /// State at an arbitrary t in [0, horizon]; RangeError outside.
  PathState state_at(double t) const;

  /// Trapezoid ||qddot||_{L^1(0,T)}.
  double qddot_l1() const;
  double sup_qdot() const;
  double sup_q() const;

 private:
  double dt_;
  std::vector<PathState> samples_;
  double mass_;
  Analytic analytic_;
};

// -- Klein-Gordon data --------------------------------------------------------

struct KGState {
  ScalarField w;
  ScalarField wdot;
};

KGState zero_state(const Grid3& grid);

/// (1/2)(||wdot||^2 + ||H w||^2), H = sqrt(1 - Laplacian).
double kg_energy(const KGState& state);

// -- Lorentz boosts and kernels ----------------------------------------------

/// Throws DomainError unless |v| < 1.
void require_subluminal(const Vec3& v, const char* what);

/// L_v x = (1-|v|^2)^{-1/2} P_v x + P_v^perp x; identity for v = 0.
Vec3 lorentz_map(const Vec3& v, const Vec3& x);
Vec3 lorentz_map_inverse(const Vec3& v, const Vec3& x);

/// (<xi>^2 - (xi.v)^2)^{1/2} = (1 + (1-|v|^2)|P_v xi|^2 + |P_v^perp xi|^2)^{1/2}.
double boosted_bracket(const Vec3& v, const Vec3& xi);

/// Y(x) = e^{-|x|}/(4 pi |x|); DomainError at x = 0.
double kernel_Y(const Vec3& x);
/// Z(x) = e^{-|x|}.
double kernel_Z(const Vec3& x);
/// K_1(|x|)/|x|; DomainError at x = 0.
double kernel_K1(const Vec3& x);
/// Modified Bessel function of the second kind, order 1 (r > 0).
double bessel_k1(double r);

/// (Y * G_sigma)(r) for the unit-mass Gaussian G_sigma whose Fourier symbol is
/// exp(-sigma^2 |xi|^2 / 2). Closed form in erfc; finite at r = 0.
double yukawa_gaussian_smoothed(double r, double sigma);

/// Continuum-normalized inverse transform of a lattice-sampled symbol:
/// K(x) = L^{-3} sum_k m(k) e^{i k.x}, returned on the box-centered grid.
ScalarField kernel_from_symbol(const Grid3& grid, const std::function<double(const Vec3&)>& symbol);

// -- Klein-Gordon propagation and the W decomposition -------------------------

/// Homogeneous flow: w(t) = cos(Ht) w0 + sin(Ht)/H w1, wdot accordingly.
KGState kg_free_step(const KGState& state, double t);

/// W(t) = cos(Ht) w0 + sin(Ht)/H w1 + int_0^t sin(H(t-tau))/H chi(x - q(tau)) dtau
/// with the composite trapezoid rule on nodes tau_m = m dt_quad, evaluated as a
/// literal sum. dt_quad must divide t; t must not exceed the path horizon.
ScalarField kg_duhamel_direct(const ChargeDensity& chi, const NucleusPath& path, const KGState& state0,
                              double t, double dt_quad);

/// W1 = chi_1(qdot(t), x - q(t)):
///   W1^(xi) = e^{-i xi.q} chi^(xi) / (<xi>^2 - (xi.qdot)^2).
ScalarField build_W1(const ChargeDensity& chi, const PathState& state);
ScalarField build_W1(const ChargeDensity& chi, const NucleusPath& path, double t);

/// W2 = homogeneous flow of (w0, w1) minus the boundary term produced at tau = 0
/// by the integration by parts that isolates W1. For a nucleus starting at rest
/// at the origin the boundary term is cos(Ht) H^{-2} chi.
ScalarField build_W2(const ChargeDensity& chi, const KGState& state0, double t,
                     const PathState& initial = {});

/// W3 = -int_0^t (e^{iH(t-tau)} chi_2(tau) - e^{-iH(t-tau)} chi_3(tau)) dtau, with
///   chi_2^ = chi^/(2i<xi>) e^{-i xi.q} (i xi.qddot)/(-i<xi> - i xi.qdot)^2,
///   chi_3^ = chi^/(2i<xi>) e^{-i xi.q} (i xi.qddot)/( i<xi> - i xi.qdot)^2.
/// Trapezoid in tau with step dt_quad (must divide t).
ScalarField build_W3(const ChargeDensity& chi, const NucleusPath& path, double t, double dt_quad);

enum class WMode { decomposition, direct };

/// W at t_j = j dt_out, j = 0..count-1, sweeping the quadrature forward once
/// with `substeps` trapezoid nodes per output interval. Fields are real and in
/// physical space.
std::vector<ScalarField> potential_series(const ChargeDensity& chi, const NucleusPath& path,
                                          const KGState& state0, double dt_out, std::size_t count,
                                          int substeps, WMode mode);

/// Throws UsageError unless t/step is an integer (to 1e-9 relative); returns it.
std::size_t quadrature_steps(double t, double step);

}  // namespace dkg::kg
