#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "dkg/grid.hpp"

namespace testutil {

inline dkg::ScalarField random_scalar(const dkg::Grid3& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  dkg::ScalarField f(g);
  for (auto& v : f.values) v = {d(rng), d(rng)};
  return f;
}

inline dkg::SpinorField random_spinor(const dkg::Grid3& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  dkg::SpinorField f(g);
  for (auto& c : f.comp)
    for (auto& v : c) v = {d(rng), d(rng)};
  return f;
}

/// Smooth random spinor: random coefficients on low modes times a gaussian.
inline dkg::SpinorField smooth_spinor(const dkg::Grid3& g, unsigned seed, double width = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::array<dkg::cplx, 4> a, b;
  for (int c = 0; c < 4; ++c) {
    a[c] = {d(rng), d(rng)};
    b[c] = {d(rng), d(rng)};
  }
  return dkg::sample_spinor(g, [&](const dkg::Vec3& x) {
    const double e = std::exp(-dkg::dot(x, x) / (2 * width * width));
    std::array<dkg::cplx, 4> out;
    for (int c = 0; c < 4; ++c) out[c] = e * (a[c] + b[c] * x.x);
    return out;
  });
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dkg_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double rel_diff(const dkg::ScalarField& a, const dkg::ScalarField& b) {
  return dkg::l2_norm(a - b) / dkg::l2_norm(b);
}
inline double rel_diff(const dkg::SpinorField& a, const dkg::SpinorField& b) {
  return dkg::l2_norm(a - b) / dkg::l2_norm(b);
}

}  // namespace testutil
