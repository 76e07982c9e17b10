#pragma once

#include <array>

#include "dkg/grid.hpp"
#include "dkg/linalg.hpp"

namespace dkg::dirac {

/// Standard (Dirac) representation:
///   beta = diag(I2, -I2),  alpha_k = [[0, sigma_k], [sigma_k, 0]].
struct DiracMatrices {
  std::array<Mat4, 3> alpha;
  Mat4 beta;
};

const DiracMatrices& matrices();

/// Largest entrywise deviation from the Clifford relations
/// {alpha_j, alpha_k} = 2 delta_jk I, {alpha_j, beta} = 0, beta^2 = I, plus
/// hermiticity. Zero for the hard-coded matrices.
double clifford_defect();

/// alpha . xi + beta m, the symbol of -i alpha . grad + beta m.
Mat4 dirac_symbol(const Vec3& xi, double mass = 1.0);

/// exp(i t (alpha . xi + beta m)) = cos(t w) I + i sin(t w)/w (alpha . xi + beta m),
/// w = sqrt(m^2 + |xi|^2). With m = 1 the denominator never drops below 1.
Mat4 propagator_symbol(const Vec3& xi, double t, double mass = 1.0);

/// e^{itD} u, exact in frequency space. Output in the input's representation.
SpinorField free_step(const SpinorField& u, double t, double mass = 1.0);

/// Applies e^{itD} in place to a frequency-space spinor.
void free_step_hat_inplace(SpinorField& uhat, double t, double mass = 1.0);

/// <u, beta u>_{C^4} = |u1|^2 + |u2|^2 - |u3|^2 - |u4|^2.
inline double beta_form(const std::array<cplx, 4>& u) {
  return std::norm(u[0]) + std::norm(u[1]) - std::norm(u[2]) - std::norm(u[3]);
}

/// Pointwise |<u, beta u>|^{(p-1)/2} beta u. Throws ConfigError for p <= 3.
SpinorField covariant_nonlinearity(const SpinorField& u, double p);

/// Same, writing into `out` (space representation, same grid); no allocation.
void covariant_nonlinearity_into(const SpinorField& u, double p, SpinorField& out);

void require_supported_exponent(double p);

}  // namespace dkg::dirac
