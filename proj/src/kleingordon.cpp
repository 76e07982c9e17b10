#include "dkg/kleingordon.hpp"

#include <cmath>
#include <sstream>

#include "dkg/norms.hpp"

namespace dkg::kg {

namespace {

constexpr cplx kI{0.0, 1.0};

/// Per-mode data shared by the W builders. Modes on a Nyquist plane get their
/// symbol averaged over the mirrored frequencies so that real fields stay real.
class ModeTable {
 public:
  explicit ModeTable(const Grid3& g) : xi_(frequency_table(g)), omega_(g.size()), mask_(g.size(), 0) {
    const int half = g.n() / 2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      omega_[i] = bracket(xi_[i]);
      const auto idx = g.unflatten(i);
      for (int a = 0; a < 3; ++a)
        if (idx[a] == half) mask_[i] |= static_cast<unsigned char>(1u << a);
    }
  }

  std::size_t size() const { return xi_.size(); }
  const Vec3& xi(std::size_t i) const { return xi_[i]; }
  double omega(std::size_t i) const { return omega_[i]; }

  template <class F>
  cplx symbol(std::size_t i, F&& f) const {
    const unsigned m = mask_[i];
    if (m == 0) return f(xi_[i], omega_[i]);
    cplx acc = 0.0;
    int count = 0;
    for (unsigned flips = 0; flips < 8; ++flips) {
      if ((flips & ~m) != 0) continue;
      Vec3 x = xi_[i];
      for (int a = 0; a < 3; ++a)
        if (flips & (1u << a)) x[a] = -x[a];
      acc += f(x, omega_[i]);
      ++count;
    }
    return acc / static_cast<double>(count);
  }

 private:
  const std::vector<Vec3>& xi_;
  std::vector<double> omega_;
  std::vector<unsigned char> mask_;
};

cplx translation_phase(const Vec3& xi, const Vec3& q) { return std::polar(1.0, -dot(xi, q)); }

/// chi^_2 and chi^_3 (without the outer sign of W3) at one mode.
struct ChiPair {
  cplx plus;
  cplx minus;
};

ChiPair chi23(const Vec3& xi, double w, const PathState& s) {
  const cplx pre = translation_phase(xi, s.q) * (kI * dot(xi, s.qddot)) / (2.0 * kI * w);
  const cplx a_plus = -kI * w - kI * dot(xi, s.qdot);
  const cplx a_minus = kI * w - kI * dot(xi, s.qdot);
  return {pre / (a_plus * a_plus), pre / (a_minus * a_minus)};
}

void check_grid(const ChargeDensity& chi, const KGState& state) {
  require_same_grid(chi.grid(), state.w.grid, "Klein-Gordon initial data");
  require_same_grid(chi.grid(), state.wdot.grid, "Klein-Gordon initial data");
}

ScalarField finish(ScalarField hat) {
  hat.rep = Representation::frequency;
  ScalarField out = transform(hat, Direction::inverse);
  if (!all_finite(out)) throw NumericError("Klein-Gordon field became non-finite");
  return out;
}

}  // namespace

// -- charge density ----------------------------------------------------------

double ChargeProfile::operator()(const Vec3& x) const {
  const double r2 = dot(x, x);
  switch (kind) {
    case ProfileKind::gaussian:
      return amplitude * std::exp(-r2 / (2.0 * width * width));
    case ProfileKind::bump: {
      const double u = r2 / (width * width);
      if (u >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
    }
  }
  return 0.0;
}

ChargeDensity::ChargeDensity(const Grid3& grid, ChargeProfile profile, int max_order, double delta)
    : profile_(profile), delta_(delta), sampled_(grid), spectrum_(grid) {
  if (!(profile.width > 0.0)) throw ConfigError("charge profile width must be positive");
  if (!(profile.amplitude >= 0.0)) throw ConfigError("charge amplitude must be nonnegative");
  if (max_order < 0) throw ConfigError("max_order must be nonnegative");
  sampled_ = sample(grid, [&](const Vec3& x) { return cplx{profile_(x)}; });
  spectrum_ = transform(sampled_, Direction::forward);
  sobolev_l1_.resize(static_cast<std::size_t>(max_order) + 1);
  for (int k = 0; k <= max_order; ++k) sobolev_l1_[k] = norms::sobolev_l1_norm(sampled_, k);
  weighted_sup_ = norms::weighted_sup(sampled_, 3.0 + delta_);
  weighted_grad_sup_ = norms::weighted_grad_sup(sampled_, 3.0 + delta_);
}

double ChargeDensity::sobolev_l1(int k) const {
  if (k < 0 || k > max_order())
    throw UsageError("W^{k,1} norm of chi not cached for k = " + std::to_string(k));
  return sobolev_l1_[static_cast<std::size_t>(k)];
}

// -- Klein-Gordon data --------------------------------------------------------

KGState zero_state(const Grid3& grid) { return {ScalarField(grid), ScalarField(grid)}; }

double kg_energy(const KGState& state) {
  const double wdot = l2_norm(state.wdot);
  const double hw = norms::sobolev_norm(state.w, 1.0);
  return 0.5 * (wdot * wdot + hw * hw);
}

// -- boosts and kernels -------------------------------------------------------

void require_subluminal(const Vec3& v, const char* what) {
  if (!(norm(v) < 1.0)) {
    std::ostringstream os;
    os << what << ": velocity |v| = " << norm(v) << " is not subluminal (|v| < 1 required)";
    throw DomainError(os.str());
  }
}

Vec3 lorentz_map(const Vec3& v, const Vec3& x) {
  require_subluminal(v, "lorentz_map");
  const double vv = dot(v, v);
  if (vv == 0.0) return x;
  const Vec3 par = (dot(v, x) / vv) * v;
  return par / std::sqrt(1.0 - vv) + (x - par);
}

Vec3 lorentz_map_inverse(const Vec3& v, const Vec3& x) {
  require_subluminal(v, "lorentz_map_inverse");
  const double vv = dot(v, v);
  if (vv == 0.0) return x;
  const Vec3 par = (dot(v, x) / vv) * v;
  return std::sqrt(1.0 - vv) * par + (x - par);
}

double boosted_bracket(const Vec3& v, const Vec3& xi) {
  require_subluminal(v, "boosted_bracket");
  const double xv = dot(xi, v);
  return std::sqrt(1.0 + dot(xi, xi) - xv * xv);
}

double kernel_Y(const Vec3& x) {
  const double r = norm(x);
  if (r == 0.0) throw DomainError("kernel_Y is singular at x = 0");
  return std::exp(-r) / (4.0 * M_PI * r);
}

double kernel_Z(const Vec3& x) { return std::exp(-norm(x)); }

double bessel_k1(double r) {
  if (!(r > 0.0)) throw DomainError("bessel_k1 needs r > 0");
  return std::cyl_bessel_k(1.0, r);
}

double kernel_K1(const Vec3& x) {
  const double r = norm(x);
  if (r == 0.0) throw DomainError("kernel_K1 is singular at x = 0");
  return bessel_k1(r) / r;
}

double yukawa_gaussian_smoothed(double r, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("smoothing width must be positive");
  const double s2 = sigma * sigma;
  const double root2s = std::sqrt(2.0) * sigma;
  if (r < 1e-6 * sigma) {
    // r -> 0 limit of the erfc expression.
    const double a = sigma / std::sqrt(2.0);
    return (1.0 / (4.0 * M_PI)) *
           (std::sqrt(2.0 / M_PI) / sigma - std::exp(s2 / 2.0) * std::erfc(a));
  }
  const double plus = std::exp(-r) * std::erfc((s2 - r) / root2s);
  const double minus = std::exp(r) * std::erfc((s2 + r) / root2s);
  return std::exp(s2 / 2.0) * (plus - minus) / (8.0 * M_PI * r);
}

ScalarField kernel_from_symbol(const Grid3& grid, const std::function<double(const Vec3&)>& symbol) {
  ScalarField delta(grid);
  delta.values[grid.center_index()] = 1.0 / grid.cell_volume();
  return real_part(apply_multiplier(delta, [&](const Vec3& xi) { return symbol(xi); }));
}

// -- propagation --------------------------------------------------------------

KGState kg_free_step(const KGState& state, double t) {
  require_same_grid(state.w.grid, state.wdot.grid, "kg_free_step");
  const ScalarField w0 = to_frequency(state.w);
  const ScalarField w1 = to_frequency(state.wdot);
  const auto& xi = frequency_table(w0.grid);
  ScalarField w(w0.grid, Representation::frequency);
  ScalarField wd(w0.grid, Representation::frequency);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double om = bracket(xi[i]);
    const double c = std::cos(om * t);
    const double s = std::sin(om * t);
    w.values[i] = c * w0.values[i] + (s / om) * w1.values[i];
    wd.values[i] = -om * s * w0.values[i] + c * w1.values[i];
  }
  return {finish(std::move(w)), finish(std::move(wd))};
}

std::size_t quadrature_steps(double t, double step) {
  if (!(step > 0.0)) throw UsageError("quadrature step must be positive");
  if (t == 0.0) return 0;
  const double k = t / step;
  const double kr = std::round(k);
  if (kr < 1.0 || std::abs(k - kr) > 1e-9 * kr) {
    std::ostringstream os;
    os << "quadrature step " << step << " does not divide t = " << t;
    throw UsageError(os.str());
  }
  return static_cast<std::size_t>(kr);
}

namespace {
void check_horizon(const NucleusPath& path, double t) {
  if (t > path.horizon() * (1.0 + 1e-12) + 1e-14) {
    std::ostringstream os;
    os << "t = " << t << " lies beyond the nucleus path horizon " << path.horizon();
    throw RangeError(os.str());
  }
  if (t < 0.0) throw RangeError("negative evaluation time");
}

void homogeneous_hat(const ModeTable& modes, const ScalarField& w0, const ScalarField& w1, double t,
                     ScalarField& out) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double om = modes.omega(i);
    out.values[i] = std::cos(om * t) * w0.values[i] + (std::sin(om * t) / om) * w1.values[i];
  }
}
}  // namespace

ScalarField kg_duhamel_direct(const ChargeDensity& chi, const NucleusPath& path, const KGState& state0,
                              double t, double dt_quad) {
  check_grid(chi, state0);
  check_horizon(path, t);
  const std::size_t steps = quadrature_steps(t, dt_quad);
  const ModeTable modes(chi.grid());
  const ScalarField w0 = to_frequency(state0.w);
  const ScalarField w1 = to_frequency(state0.wdot);
  const ScalarField& chat = chi.spectrum();
  ScalarField hat(chi.grid(), Representation::frequency);
  homogeneous_hat(modes, w0, w1, t, hat);
  if (steps == 0) return finish(std::move(hat));
  const double h = t / static_cast<double>(steps);
  for (std::size_t m = 0; m <= steps; ++m) {
    const double tau = h * static_cast<double>(m);
    const double weight = (m == 0 || m == steps) ? 0.5 * h : h;
    const Vec3 q = path.state_at(tau).q;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const cplx src = modes.symbol(i, [&](const Vec3& xi, double om) {
        return std::sin(om * (t - tau)) / om * translation_phase(xi, q);
      });
      hat.values[i] += weight * src * chat.values[i];
    }
  }
  return finish(std::move(hat));
}

ScalarField build_W1(const ChargeDensity& chi, const PathState& state) {
  require_subluminal(state.qdot, "build_W1");
  const ModeTable modes(chi.grid());
  const ScalarField& chat = chi.spectrum();
  ScalarField hat(chi.grid(), Representation::frequency);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const cplx m = modes.symbol(i, [&](const Vec3& xi, double om) {
      const double xv = dot(xi, state.qdot);
      return translation_phase(xi, state.q) / (om * om - xv * xv);
    });
    hat.values[i] = m * chat.values[i];
  }
  return finish(std::move(hat));
}

ScalarField build_W1(const ChargeDensity& chi, const NucleusPath& path, double t) {
  check_horizon(path, t);
  return build_W1(chi, path.state_at(t));
}

namespace {
/// Boundary term at tau = 0 of the integration by parts, per mode:
///   chi^/(2i w) e^{-i xi.q0} (e^{iwt}/a+ - e^{-iwt}/a-), a+- = -+iw - i xi.v0.
cplx boundary_symbol(const Vec3& xi, double om, double t, const PathState& initial) {
  const cplx a_plus = -kI * om - kI * dot(xi, initial.qdot);
  const cplx a_minus = kI * om - kI * dot(xi, initial.qdot);
  const cplx bracket_term = std::polar(1.0, om * t) / a_plus - std::polar(1.0, -om * t) / a_minus;
  return translation_phase(xi, initial.q) * bracket_term / (2.0 * kI * om);
}
}  // namespace

ScalarField build_W2(const ChargeDensity& chi, const KGState& state0, double t, const PathState& initial) {
  check_grid(chi, state0);
  require_subluminal(initial.qdot, "build_W2");
  const ModeTable modes(chi.grid());
  const ScalarField w0 = to_frequency(state0.w);
  const ScalarField w1 = to_frequency(state0.wdot);
  const ScalarField& chat = chi.spectrum();
  ScalarField hat(chi.grid(), Representation::frequency);
  homogeneous_hat(modes, w0, w1, t, hat);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const cplx b = modes.symbol(i, [&](const Vec3& xi, double om) { return boundary_symbol(xi, om, t, initial); });
    hat.values[i] -= b * chat.values[i];
  }
  return finish(std::move(hat));
}

namespace {

/// Trapezoid accumulators A+-(t) = int_0^t e^{+-iw(t-tau)} f+-(tau) dtau,
/// advanced by A(t+h) = e^{+-iwh} A(t) + (h/2)(e^{+-iwh} f(t) + f(t+h)).
class OscillatoryAccumulator {
 public:
  OscillatoryAccumulator(const ModeTable& modes, double h)
      : modes_(modes), h_(h), rot_(modes.size()), plus_(modes.size()), minus_(modes.size()),
        fplus_(modes.size()), fminus_(modes.size()) {
    for (std::size_t i = 0; i < modes.size(); ++i) rot_[i] = std::polar(1.0, modes.omega(i) * h);
  }

  template <class Source>
  void start(Source&& src) {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const auto [fp, fm] = src(i);
      fplus_[i] = fp;
      fminus_[i] = fm;
      plus_[i] = 0.0;
      minus_[i] = 0.0;
    }
  }

  template <class Source>
  void advance(Source&& src) {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const auto [fp, fm] = src(i);
      const cplx r = rot_[i];
      const cplx rc = std::conj(r);
      plus_[i] = r * plus_[i] + 0.5 * h_ * (r * fplus_[i] + fp);
      minus_[i] = rc * minus_[i] + 0.5 * h_ * (rc * fminus_[i] + fm);
      fplus_[i] = fp;
      fminus_[i] = fm;
    }
  }

  const cplx& plus(std::size_t i) const { return plus_[i]; }
  const cplx& minus(std::size_t i) const { return minus_[i]; }

 private:
  const ModeTable& modes_;
  double h_;
  std::vector<cplx> rot_;
  std::vector<cplx> plus_, minus_, fplus_, fminus_;
};

/// Source pair for W3 at one quadrature node (Nyquist-symmetrized).
auto w3_source(const ModeTable& modes, const ScalarField& chat, const PathState& s) {
  return [&modes, &chat, s](std::size_t i) {
    const cplx c = chat.values[i];
    const cplx p = modes.symbol(i, [&](const Vec3& xi, double om) { return chi23(xi, om, s).plus; });
    const cplx m = modes.symbol(i, [&](const Vec3& xi, double om) { return chi23(xi, om, s).minus; });
    return std::pair<cplx, cplx>{p * c, m * c};
  };
}

/// Source pair for the direct Duhamel integral: both signs see chi^ e^{-i xi.q}.
auto direct_source(const ModeTable& modes, const ScalarField& chat, const Vec3& q) {
  return [&modes, &chat, q](std::size_t i) {
    const cplx v = chat.values[i] * modes.symbol(i, [&](const Vec3& xi, double) { return translation_phase(xi, q); });
    return std::pair<cplx, cplx>{v, v};
  };
}

}  // namespace

ScalarField build_W3(const ChargeDensity& chi, const NucleusPath& path, double t, double dt_quad) {
  check_horizon(path, t);
  const std::size_t steps = quadrature_steps(t, dt_quad);
  for (std::size_t m = 0; m <= steps; ++m)
    require_subluminal(path.state_at(steps ? t * m / steps : 0.0).qdot, "build_W3");
  const ModeTable modes(chi.grid());
  ScalarField hat(chi.grid(), Representation::frequency);
  if (steps == 0) return finish(std::move(hat));
  const double h = t / static_cast<double>(steps);
  OscillatoryAccumulator acc(modes, h);
  acc.start(w3_source(modes, chi.spectrum(), path.state_at(0.0)));
  for (std::size_t m = 1; m <= steps; ++m)
    acc.advance(w3_source(modes, chi.spectrum(), path.state_at(h * static_cast<double>(m))));
  for (std::size_t i = 0; i < modes.size(); ++i) hat.values[i] = -(acc.plus(i) - acc.minus(i));
  return finish(std::move(hat));
}

std::vector<ScalarField> potential_series(const ChargeDensity& chi, const NucleusPath& path,
                                          const KGState& state0, double dt_out, std::size_t count,
                                          int substeps, WMode mode) {
  check_grid(chi, state0);
  if (count == 0) return {};
  if (substeps < 1) throw ConfigError("quadrature substeps must be >= 1");
  if (!(dt_out > 0.0)) throw ConfigError("output step must be positive");
  check_horizon(path, dt_out * static_cast<double>(count - 1));
  const Grid3& g = chi.grid();
  const ModeTable modes(g);
  const ScalarField w0 = to_frequency(state0.w);
  const ScalarField w1 = to_frequency(state0.wdot);
  const ScalarField& chat = chi.spectrum();
  const double h = dt_out / substeps;
  const PathState initial = path.state_at(0.0);

  std::vector<ScalarField> out;
  out.reserve(count);
  OscillatoryAccumulator acc(modes, h);
  if (mode == WMode::decomposition)
    acc.start(w3_source(modes, chat, initial));
  else
    acc.start(direct_source(modes, chat, initial.q));

  ScalarField hat(g, Representation::frequency);
  for (std::size_t j = 0; j < count; ++j) {
    const double t = dt_out * static_cast<double>(j);
    if (j > 0) {
      for (int sub = 1; sub <= substeps; ++sub) {
        const double tau = dt_out * static_cast<double>(j - 1) + h * sub;
        const PathState s = path.state_at(tau);
        if (mode == WMode::decomposition)
          acc.advance(w3_source(modes, chat, s));
        else
          acc.advance(direct_source(modes, chat, s.q));
      }
    }
    homogeneous_hat(modes, w0, w1, t, hat);
    if (mode == WMode::decomposition) {
      const PathState now = path.state_at(t);
      require_subluminal(now.qdot, "potential_series");
      for (std::size_t i = 0; i < modes.size(); ++i) {
        const cplx sym = modes.symbol(i, [&](const Vec3& xi, double om) {
          const double xv = dot(xi, now.qdot);
          return translation_phase(xi, now.q) / (om * om - xv * xv) - boundary_symbol(xi, om, t, initial);
        });
        hat.values[i] += sym * chat.values[i] - (acc.plus(i) - acc.minus(i));
      }
    } else {
      for (std::size_t i = 0; i < modes.size(); ++i)
        hat.values[i] += (acc.plus(i) - acc.minus(i)) / (2.0 * kI * modes.omega(i));
    }
    out.push_back(real_part(finish(hat)));
  }
  return out;
}

}  // namespace dkg::kg
