#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "dkg/error.hpp"
#include "dkg/linalg.hpp"

namespace dkg {

/// Periodic cube [-L/2, L/2)^3 sampled with n points per axis.
///
/// Storage order is x-fastest: flat index = ix + n*(iy + n*iz). Index n/2 on
/// every axis is the box center x = 0. The frequency lattice per axis is
/// {-n/2, ..., n/2-1} * dk; the Nyquist mode -n/2 keeps its negative value.
class Grid3 {
 public:
  Grid3(int n, double box_length);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / n_; }
  double dk() const noexcept { return 2.0 * M_PI / length_; }
  double cell_volume() const noexcept {
    const double h = dx();
    return h * h * h;
  }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }

  double coord(int i) const noexcept { return -0.5 * length_ + i * dx(); }
  int wavenumber(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  double freq(int i) const noexcept { return wavenumber(i) * dk(); }

  std::size_t index(int ix, int iy, int iz) const noexcept {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n_) * (static_cast<std::size_t>(iy) +
                                            static_cast<std::size_t>(n_) * iz);
  }
  std::array<int, 3> unflatten(std::size_t idx) const noexcept {
    const auto n = static_cast<std::size_t>(n_);
    return {static_cast<int>(idx % n), static_cast<int>((idx / n) % n),
            static_cast<int>(idx / (n * n))};
  }
  Vec3 position(std::size_t idx) const noexcept {
    const auto [ix, iy, iz] = unflatten(idx);
    return {coord(ix), coord(iy), coord(iz)};
  }
  Vec3 frequency(std::size_t idx) const noexcept {
    const auto [ix, iy, iz] = unflatten(idx);
    return {freq(ix), freq(iy), freq(iz)};
  }
  std::size_t center_index() const noexcept { return index(n_ / 2, n_ / 2, n_ / 2); }

  friend bool operator==(const Grid3& a, const Grid3& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int n_;
  double length_;
};

/// Validating constructor; throws ConfigError for odd n, n < 4 or L <= 0.
Grid3 make_grid(int n, double box_length);

enum class Representation { space, frequency };
enum class Direction { forward, inverse };

struct ScalarField {
  Grid3 grid;
  Representation rep = Representation::space;
  std::vector<cplx> values;

  explicit ScalarField(const Grid3& g, Representation r = Representation::space)
      : grid(g), rep(r), values(g.size(), cplx{0.0, 0.0}) {}

  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }
};

struct SpinorField {
  Grid3 grid;
  Representation rep = Representation::space;
  std::array<std::vector<cplx>, 4> comp;

  explicit SpinorField(const Grid3& g, Representation r = Representation::space)
      : grid(g), rep(r) {
    for (auto& c : comp) c.assign(g.size(), cplx{0.0, 0.0});
  }

  std::array<cplx, 4> at(std::size_t i) const {
    return {comp[0][i], comp[1][i], comp[2][i], comp[3][i]};
  }
  void set(std::size_t i, const std::array<cplx, 4>& v) {
    for (int c = 0; c < 4; ++c) comp[c][i] = v[c];
  }
};

/// Samples f(x) at every grid node.
template <class F>
ScalarField sample(const Grid3& g, F&& f) {
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.position(i));
  return out;
}

/// Samples a C^4-valued function.
template <class F>
SpinorField sample_spinor(const Grid3& g, F&& f) {
  SpinorField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.set(i, f(g.position(i)));
  return out;
}

// -- transforms -------------------------------------------------------------

/// In-place unitary 3D DFT of one n^3 array (sign -1 forward, +1 inverse).
void fft_inplace(const Grid3& g, std::span<cplx> data, Direction dir);

/// Number of threads handed to the FFT backend (>= 1).
void set_fft_threads(int threads);

ScalarField transform(const ScalarField& f, Direction dir);
SpinorField transform(const SpinorField& f, Direction dir);

template <class Field>
Field to_frequency(const Field& f) {
  return f.rep == Representation::frequency ? f : transform(f, Direction::forward);
}
template <class Field>
Field to_space(const Field& f) {
  return f.rep == Representation::space ? f : transform(f, Direction::inverse);
}

// -- multipliers ------------------------------------------------------------

namespace detail {
[[noreturn]] void throw_nonfinite_multiplier(const Vec3& xi);

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class M>
cplx scalar_symbol(M& m, const Vec3& xi) {
  const cplx v = static_cast<cplx>(m(xi));
  if (!finite(v)) throw_nonfinite_multiplier(xi);
  return v;
}
}  // namespace detail

/// Pointwise multiplication by m(xi) in frequency space. The result comes back
/// in the representation of the input.
template <class M>
ScalarField apply_multiplier(const ScalarField& f, M&& m) {
  ScalarField hat = to_frequency(f);
  for (std::size_t i = 0; i < hat.values.size(); ++i)
    hat.values[i] *= detail::scalar_symbol(m, hat.grid.frequency(i));
  return f.rep == Representation::space ? transform(hat, Direction::inverse) : hat;
}

/// Spinor version: m may return a scalar or a Mat4 acting on C^4.
template <class M>
SpinorField apply_multiplier(const SpinorField& f, M&& m) {
  SpinorField hat = to_frequency(f);
  const Grid3& g = hat.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 xi = g.frequency(i);
    if constexpr (std::is_same_v<std::decay_t<std::invoke_result_t<M&, const Vec3&>>, Mat4>) {
      const Mat4 mat = m(xi);
      for (const auto& row : mat.a)
        for (const auto& e : row)
          if (!detail::finite(e)) detail::throw_nonfinite_multiplier(xi);
      hat.set(i, mat.apply(hat.at(i)));
    } else {
      const cplx s = detail::scalar_symbol(m, xi);
      for (auto& c : hat.comp) c[i] *= s;
    }
  }
  return f.rep == Representation::space ? transform(hat, Direction::inverse) : hat;
}

// -- elementary norms and checks ---------------------------------------------

/// (sum |f|^2 dx^3)^{1/2}; identical in either representation (unitary DFT).
double l2_norm(const ScalarField& f);
double l2_norm(const SpinorField& f);
/// Grid maximum of |f| (|u|_{C^4} for spinors); space representation only.
double linf_norm(const ScalarField& f);
double linf_norm(const SpinorField& f);
/// sum conj(a) b dx^3.
cplx inner(const ScalarField& a, const ScalarField& b);
cplx inner(const SpinorField& a, const SpinorField& b);

/// Largest |Im f| relative to the largest |f| (0 for the zero field).
double imag_residue(const ScalarField& f);

bool all_finite(const ScalarField& f);
bool all_finite(const SpinorField& f);

/// Throws UsageError when the grids differ.
void require_same_grid(const Grid3& a, const Grid3& b, const char* what);

/// Sum of |f|^2 dx^3 over the outer shell of `width` nodes, divided by the
/// total. Monitors periodization of fields that should decay inside the box.
double boundary_mass_fraction(const ScalarField& f, int width = 1);
double boundary_mass_fraction(const SpinorField& f, int width = 1);

/// Frequency vector of every mode, cached per grid size and box length.
const std::vector<Vec3>& frequency_table(const Grid3& g);

/// Circular shift by an integer number of nodes per axis.
ScalarField translate_nodes(const ScalarField& f, int sx, int sy, int sz);

// -- field arithmetic --------------------------------------------------------

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cplx s, const ScalarField& a);
SpinorField operator+(const SpinorField& a, const SpinorField& b);
SpinorField operator-(const SpinorField& a, const SpinorField& b);
SpinorField operator*(cplx s, const SpinorField& a);

/// Pointwise product of a scalar potential with a spinor (space representation).
SpinorField multiply(const ScalarField& w, const SpinorField& u);

/// Real part of every value (imaginary parts dropped).
ScalarField real_part(const ScalarField& f);

}  // namespace dkg
