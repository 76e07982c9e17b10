#include "dkg/dirac.hpp"

#include <cmath>
#include <sstream>

namespace dkg::dirac {

namespace {

DiracMatrices build() {
  const cplx i{0.0, 1.0};
  using Pauli = std::array<std::array<cplx, 2>, 2>;
  const std::array<Pauli, 3> sigma = {{
      {{{0.0, 1.0}, {1.0, 0.0}}},
      {{{0.0, -i}, {i, 0.0}}},
      {{{1.0, 0.0}, {0.0, -1.0}}},
  }};
  DiracMatrices m;
  for (int k = 0; k < 3; ++k) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        m.alpha[k](r, c + 2) = sigma[k][r][c];
        m.alpha[k](r + 2, c) = sigma[k][r][c];
      }
  }
  m.beta(0, 0) = 1.0;
  m.beta(1, 1) = 1.0;
  m.beta(2, 2) = -1.0;
  m.beta(3, 3) = -1.0;
  return m;
}

}  // namespace

const DiracMatrices& matrices() {
  static const DiracMatrices m = build();
  return m;
}

double clifford_defect() {
  const auto& m = matrices();
  const Mat4 id = Mat4::identity();
  double worst = 0.0;
  const auto track = [&](const Mat4& d) { worst = std::max(worst, d.max_abs()); };
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      const Mat4 anti = m.alpha[j] * m.alpha[k] + m.alpha[k] * m.alpha[j];
      track(anti - (j == k ? cplx{2.0} * id : Mat4{}));
    }
    track(m.alpha[j] * m.beta + m.beta * m.alpha[j]);
    track(m.alpha[j] - m.alpha[j].adjoint());
  }
  track(m.beta * m.beta - id);
  track(m.beta - m.beta.adjoint());
  return worst;
}

Mat4 dirac_symbol(const Vec3& xi, double mass) {
  const auto& m = matrices();
  return cplx{xi.x} * m.alpha[0] + cplx{xi.y} * m.alpha[1] + cplx{xi.z} * m.alpha[2] +
         cplx{mass} * m.beta;
}

Mat4 propagator_symbol(const Vec3& xi, double t, double mass) {
  const double w = std::sqrt(mass * mass + dot(xi, xi));
  const double c = std::cos(t * w);
  const double s = std::sin(t * w) / w;
  return cplx{c} * Mat4::identity() + cplx{0.0, s} * dirac_symbol(xi, mass);
}

void free_step_hat_inplace(SpinorField& uhat, double t, double mass) {
  if (uhat.rep != Representation::frequency)
    throw UsageError("free_step_hat_inplace needs a frequency-space spinor");
  const Grid3& g = uhat.grid;
  // The symbol has the block form c I + i s (alpha.xi + beta m); expand it to
  // avoid building a Mat4 per mode.
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 xi = g.frequency(i);
    const double w = std::sqrt(mass * mass + dot(xi, xi));
    const double c = std::cos(t * w);
    const cplx is{0.0, std::sin(t * w) / w};
    const cplx u0 = uhat.comp[0][i], u1 = uhat.comp[1][i];
    const cplx u2 = uhat.comp[2][i], u3 = uhat.comp[3][i];
    // (alpha.xi) acts as sigma.xi on the off-diagonal blocks.
    const cplx sp{xi.x, -xi.y};  // xi1 - i xi2
    const cplx sm{xi.x, xi.y};   // xi1 + i xi2
    const cplx d0 = xi.z * u2 + sp * u3 + mass * u0;
    const cplx d1 = sm * u2 - xi.z * u3 + mass * u1;
    const cplx d2 = xi.z * u0 + sp * u1 - mass * u2;
    const cplx d3 = sm * u0 - xi.z * u1 - mass * u3;
    uhat.comp[0][i] = c * u0 + is * d0;
    uhat.comp[1][i] = c * u1 + is * d1;
    uhat.comp[2][i] = c * u2 + is * d2;
    uhat.comp[3][i] = c * u3 + is * d3;
  }
}

SpinorField free_step(const SpinorField& u, double t, double mass) {
  SpinorField hat = to_frequency(u);
  free_step_hat_inplace(hat, t, mass);
  return u.rep == Representation::space ? transform(hat, Direction::inverse) : hat;
}

void require_supported_exponent(double p) {
  if (!(p > 3.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "nonlinearity exponent p = " << p << " is outside the supported range p > 3";
    throw ConfigError(os.str());
  }
}

void covariant_nonlinearity_into(const SpinorField& u, double p, SpinorField& out) {
  require_supported_exponent(p);
  if (u.rep != Representation::space) throw UsageError("covariant_nonlinearity needs a physical-space spinor");
  require_same_grid(u.grid, out.grid, "covariant_nonlinearity");
  out.rep = Representation::space;
  const double e = 0.5 * (p - 1.0);
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const auto v = u.at(i);
    const double b = beta_form(v);
    const double amp = b == 0.0 ? 0.0 : std::pow(std::abs(b), e);
    out.comp[0][i] = amp * v[0];
    out.comp[1][i] = amp * v[1];
    out.comp[2][i] = -amp * v[2];
    out.comp[3][i] = -amp * v[3];
  }
}

SpinorField covariant_nonlinearity(const SpinorField& u, double p) {
  SpinorField out(u.grid);
  covariant_nonlinearity_into(u, p, out);
  return out;
}

}  // namespace dkg::dirac
