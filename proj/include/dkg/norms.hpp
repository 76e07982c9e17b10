#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dkg/grid.hpp"

namespace dkg::norms {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// -- Sobolev-type norms -------------------------------------------------------

/// ||<xi>^s f^||_{L^2}; ParameterError-style ConfigError for s < 0.
double sobolev_norm(const ScalarField& f, double s);
double sobolev_norm(const SpinorField& f, double s);

/// Spectral partial derivative d^a f for a multi-index a = (ax, ay, az).
ScalarField derivative(const ScalarField& f, std::array<int, 3> order);
std::array<ScalarField, 3> gradient(const ScalarField& f);

/// L^r norm over the grid (r = infinity gives the grid max).
double lr_norm(const ScalarField& f, double r);
double lr_norm(const SpinorField& f, double r);

/// Integer-order W^{k,1} norm: sum over |a| <= k of ||d^a f||_{L^1}.
double sobolev_l1_norm(const ScalarField& f, int k);

/// ||<x>^N f||_{L^2}.
double weighted_norm(const ScalarField& f, double N);
double weighted_norm(const SpinorField& f, double N);

enum class WeightSign { positive = 1, negative = -1 };

/// ||<x>^{+-N} H^s f||_{L^2}: the weight is applied after H^s.
double weighted_sobolev(const ScalarField& f, double s, double N, WeightSign sign);
double weighted_sobolev(const SpinorField& f, double s, double N, WeightSign sign);

/// ||<x>^power f||_{L^inf} and ||<x>^power |grad f| ||_{L^inf}.
double weighted_sup(const ScalarField& f, double power);
double weighted_grad_sup(const ScalarField& f, double power);

/// ||f / |x - origin| ||_{L^2} / ||f||_{H^1}. `origin` must not sit on a grid
/// node (DomainError otherwise); the Hardy inequality bounds the ratio by 2.
double hardy_ratio(const ScalarField& f, const Vec3& origin);

/// ||H^s(fg)|| / (||H^s f|| ||g||_inf + ||f||_inf ||H^s g||).
double kato_ponce_ratio(const ScalarField& f, const ScalarField& g, double s);

// -- space-time norms ---------------------------------------------------------

/// Discrete L^p_t L^r_x norm of a uniformly sampled series: the time integral
/// is the rectangle rule sum_j dt ||f_j||^p (so m samples span m dt), p = inf
/// takes the max. UsageError for an empty series.
double strichartz_norm(std::span<const ScalarField> series, double p, double r, double dt);
double strichartz_norm(std::span<const SpinorField> series, double p, double r, double dt);

/// (sum_j dt ||<x>^{-N} H^s u_j||^2)^{1/2}.
double local_smoothing_norm(std::span<const SpinorField> series, double s, double N, double dt);

/// Upper-bound proxy for the potential smallness ||V||_{T,s,N}:
///   sup_t || H_v^s (<x>^{2N} V(t)) ||_{L^inf},
/// with H_v^s the boosted multiplier (<xi>^2 - (xi.v)^2)^{s/2}. |v| <= 1/2.
double smallness_functional(std::span<const ScalarField> series, double s, double N, const Vec3& v);
/// Same with a per-sample boost velocity (e.g. qdot(t_j)).
double smallness_functional(std::span<const ScalarField> series, double s, double N,
                            std::span<const Vec3> velocities);

// -- virial multiplier --------------------------------------------------------

/// Radial multiplier with psi_R(0) = 0 and
///   psi_R'(r) = r/<R>                         r <= R
///             = (R/<R>)(3/2 - R^2/(2 r^2))    r >  R.
/// Closed forms; DomainError for negative r or R.
double psi_R(double r, double R);
double psi_R_prime(double r, double R);
/// Delta psi_R = 3/<R> (r <= R), 3R/(<R> r) (r > R).
double psi_R_laplacian(double r, double R);
/// ||grad psi_R||_inf + ||Delta psi_R||_inf = (3/2)R/<R> + 3/<R>.
double psi_R_norm2(double R);

/// [-Laplacian, psi_R] v = -(div(grad psi_R v) + grad psi_R . grad v), with the
/// divergence and gradient taken spectrally. This form is exactly skew-adjoint
/// on the grid.
SpinorField commutator_laplacian_psi(const SpinorField& v, double R);

/// Theta = 2 Re <[-Lap, psi_R] v, dv/dt> + 2 Re <[-Lap, psi_R] v, i (V~ v)>,
/// with the conjugated potential already applied (Vtilde_v = V~ v).
double virial_theta(const SpinorField& v, const SpinorField& vdot, const SpinorField& vtilde_v, double R);

// -- admissible triples -------------------------------------------------------

enum class TripleKind { schrodinger_nonendpoint, special_infinity, invalid };

struct AdmissibleTriple {
  double p = 0.0;
  double r = 0.0;
  double s = 0.0;
  TripleKind kind = TripleKind::invalid;
  /// Exponent p~ of the special family (p, r, s) = (p~-1, inf, 3/2 - 1/(p~-1)).
  double ptilde = 0.0;
};

AdmissibleTriple classify_triple(double p, double r, double s);
const char* to_string(TripleKind kind);

// -- decay fits ---------------------------------------------------------------

struct DecayFit {
  double exponent = 0.0;   ///< slope of log ||.|| against log(1 + t)
  double intercept = 0.0;
  double std_error = 0.0;  ///< standard error of the slope
  double r_squared = 0.0;
};

/// Least-squares fit on samples with t >= min_time (at least 8 required).
/// DataError for nonpositive norms or too few samples.
DecayFit decay_fit(std::span<const double> times, std::span<const double> sup_norms, double min_time = 5.0);

// -- reports ------------------------------------------------------------------

struct ReportEntry {
  std::string name;
  std::string params;
  double value = 0.0;
};

/// Flat list of named diagnostic values. Entries are finite and nonnegative.
class NormReport {
 public:
  void add(std::string name, std::string params, double value);
  const std::vector<ReportEntry>& entries() const noexcept { return entries_; }
  /// Value of the first entry called `name`; UsageError if absent.
  double value(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// CSV `name,param_string,value`.
  void write_csv(const std::filesystem::path& path) const;
  std::string to_json() const;

 private:
  std::vector<ReportEntry> entries_;
};

}  // namespace dkg::norms
