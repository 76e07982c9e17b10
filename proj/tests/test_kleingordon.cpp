#include <gtest/gtest.h>

#include <fstream>

#include "dkg/kleingordon.hpp"
#include "dkg/norms.hpp"
#include "helpers.hpp"

using namespace dkg;
using namespace dkg::kg;

namespace {

// K1(x) = int_0^inf exp(-x cosh t) cosh t dt, trapezoid in t (exponentially
// convergent for this integrand).
double k1_integral(double x) {
  const double tmax = std::acosh(60.0 / x + 1.0);
  const int steps = 20000;
  const double h = tmax / steps;
  double acc = 0.5 * std::exp(-x);
  for (int i = 1; i <= steps; ++i) {
    const double t = i * h;
    acc += (i == steps ? 0.5 : 1.0) * std::exp(-x * std::cosh(t)) * std::cosh(t);
  }
  return acc * h;
}

// (Y * f)(r) for radial f: (1/2r) int_0^inf rho f(rho) (e^{-|r-rho|} - e^{-(r+rho)}) drho.
template <class F>
double yukawa_radial(double r, F&& f, double rmax) {
  const int steps = 200000;
  const double h = rmax / steps;
  double acc = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double rho = i * h;
    acc += (i == steps ? 0.5 : 1.0) * rho * f(rho) * (std::exp(-std::abs(r - rho)) - std::exp(-(r + rho)));
  }
  return acc * h / (2.0 * r);
}

ScalarField helmholtz_inverse(const ScalarField& f) {
  return apply_multiplier(f, [](const Vec3& xi) { return 1.0 / (1.0 + dot(xi, xi)); });
}

}  // namespace

TEST(Lorentz, Examples) {
  EXPECT_EQ(lorentz_map({0, 0, 0}, {1, 2, 3}), (Vec3{1, 2, 3}));
  EXPECT_EQ(lorentz_map_inverse({0, 0, 0}, {1, 2, 3}), (Vec3{1, 2, 3}));
  const Vec3 y = lorentz_map({0.5, 0, 0}, {1, 1, 0});
  EXPECT_NEAR(y.x, 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(y.y, 1.0, 1e-15);
  EXPECT_NEAR(y.z, 0.0, 1e-15);
}

TEST(Lorentz, RoundTripRandom) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec3 v{u(rng), u(rng), u(rng)};
    v = (0.95 * std::abs(u(rng)) / std::max(norm(v), 1e-3)) * v;
    const Vec3 x{5 * u(rng), 5 * u(rng), 5 * u(rng)};
    EXPECT_LT(norm(lorentz_map(v, lorentz_map_inverse(v, x)) - x), 1e-13 * (1 + norm(x)));
    EXPECT_LT(norm(lorentz_map_inverse(v, lorentz_map(v, x)) - x), 1e-13 * (1 + norm(x)));
  }
}

TEST(Lorentz, RejectsSuperluminal) {
  EXPECT_THROW(lorentz_map({1, 0, 0}, {1, 0, 0}), DomainError);
  EXPECT_THROW(boosted_bracket({0.6, 0.9, 0}, {1, 0, 0}), DomainError);
}

TEST(BoostedBracket, Examples) {
  EXPECT_DOUBLE_EQ(boosted_bracket({0, 0, 0}, {1, 2, 2}), std::sqrt(10.0));
  EXPECT_NEAR(boosted_bracket({0.5, 0, 0}, {2, 0, 0}), 2.0, 1e-15);
  EXPECT_NEAR(boosted_bracket({0, 0.4, 0}, {1, 0, 3}), bracket(Vec3{1, 0, 3}), 1e-15);
  const Vec3 v{0.1, -0.2, 0.3}, xi{1.5, 0.5, -2};
  EXPECT_NEAR(boosted_bracket(v, xi), std::sqrt(1 + dot(xi, xi) - dot(xi, v) * dot(xi, v)), 1e-14);
}

TEST(Kernels, ClosedForms) {
  for (const Vec3 x : {Vec3{0.1, 0, 0}, Vec3{1, 2, -1}, Vec3{0, 0, 7}}) {
    const double r = norm(x);
    EXPECT_NEAR(kernel_Y(x) * 4 * M_PI * r * std::exp(r), 1.0, 1e-14);
  }
  EXPECT_NEAR(kernel_Z({std::log(2.0), 0, 0}), 0.5, 1e-15);
  EXPECT_THROW(kernel_Y({0, 0, 0}), DomainError);
  EXPECT_THROW(kernel_K1({0, 0, 0}), DomainError);
}

TEST(Kernels, BesselK1AgainstIntegral) {
  for (double x : {1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0}) {
    const double ref = k1_integral(x);
    EXPECT_NEAR(bessel_k1(x) / ref, 1.0, 1e-10) << "x = " << x;
  }
  EXPECT_NEAR(kernel_K1({0, 2, 0}), bessel_k1(2.0) / 2.0, 1e-15);
}

TEST(Kernels, SmoothedYukawaAgainstRadialQuadrature) {
  const double sigma = 0.8;
  const double mass = std::pow(2 * M_PI * sigma * sigma, -1.5);
  auto g = [&](double rho) { return mass * std::exp(-rho * rho / (2 * sigma * sigma)); };
  for (double r : {0.05, 0.5, 1.0, 3.0, 8.0}) {
    const double ref = yukawa_radial(r, g, 12.0);
    EXPECT_NEAR(yukawa_gaussian_smoothed(r, sigma) / ref, 1.0, 1e-7) << "r = " << r;
  }
  EXPECT_TRUE(std::isfinite(yukawa_gaussian_smoothed(0.0, sigma)));
  EXPECT_NEAR(yukawa_gaussian_smoothed(0.0, sigma), yukawa_gaussian_smoothed(1e-6, sigma), 1e-9);
}

TEST(Kernels, GaussianSymbolNormalization) {
  const Grid3 g = make_grid(32, 20.0);
  const double sigma = 1.5;
  const ScalarField k = kernel_from_symbol(g, [&](const Vec3& xi) { return std::exp(-0.5 * sigma * sigma * dot(xi, xi)); });
  const ScalarField ref = sample(g, [&](const Vec3& x) {
    return cplx{std::pow(2 * M_PI * sigma * sigma, -1.5) * std::exp(-dot(x, x) / (2 * sigma * sigma))};
  });
  // periodic images contribute exp(-(L/2)^2 / (2 sigma^2)) ~ 2e-10
  EXPECT_LT(testutil::rel_diff(k, ref), 1e-9);
}

TEST(ChargeDensity, SamplingAndNorms) {
  const Grid3 g = make_grid(24, 16.0);
  const ChargeProfile p{ProfileKind::gaussian, 0.3, 1.0};
  const ChargeDensity chi(g, p);
  for (std::size_t i = 0; i < g.size(); i += 97) {
    EXPECT_NEAR(chi.sampled().values[i].real(), p(g.position(i)), 1e-12);
    EXPECT_GE(chi.sampled().values[i].real(), 0.0);
    EXPECT_EQ(chi.sampled().values[i].imag(), 0.0);
  }
  EXPECT_NEAR(chi.sobolev_l1(0), 0.3 * std::pow(2 * M_PI, 1.5), 1e-8);
  for (int k = 1; k <= chi.max_order(); ++k) EXPECT_GT(chi.sobolev_l1(k), chi.sobolev_l1(k - 1));
  EXPECT_THROW(chi.sobolev_l1(chi.max_order() + 1), UsageError);
  EXPECT_GT(chi.weighted_sup(), 0.3 - 1e-15);
  EXPECT_GT(chi.weighted_grad_sup(), 0.0);
  EXPECT_THROW(ChargeDensity(g, {ProfileKind::gaussian, 1.0, 0.0}), ConfigError);
}

TEST(ChargeDensity, BumpIsCompact) {
  const ChargeProfile b{ProfileKind::bump, 2.0, 1.5};
  EXPECT_DOUBLE_EQ(b({0, 0, 0}), 2.0);
  EXPECT_EQ(b({1.5, 0, 0}), 0.0);
  EXPECT_EQ(b({3, 1, 0}), 0.0);
  EXPECT_GT(b({1.4, 0, 0}), 0.0);
}

TEST(NucleusPath, Factories) {
  const auto rest = NucleusPath::at_rest(2.0, 0.1);
  EXPECT_EQ(rest.size(), 21u);
  EXPECT_EQ(rest.sup_q(), 0.0);
  const auto in = NucleusPath::inertial({0.3, 0, 0}, 2.0, 0.1, 5.0);
  EXPECT_NEAR(in.state_at(1.5).q.x, 0.45, 1e-15);
  EXPECT_EQ(in.v0(), (Vec3{0.3, 0, 0}));
  EXPECT_EQ(in.mass(), 5.0);
  EXPECT_EQ(in.qddot_l1(), 0.0);
  const double a = 0.1, w = 2.0;
  const auto osc = NucleusPath::oscillating({a, 0, 0}, w, M_PI, M_PI / 400);
  EXPECT_NEAR(osc.v0().x, a * w, 1e-15);
  // int_0^pi a w^2 |sin 2t| dt = 2 a w^2
  EXPECT_NEAR(osc.qddot_l1(), 2 * a * w * w, 1e-4);
  EXPECT_NEAR(osc.sup_qdot(), a * w, 1e-15);
  EXPECT_THROW(osc.state_at(4.0), RangeError);
  EXPECT_THROW(osc.state_at(-0.1), RangeError);
  EXPECT_THROW(NucleusPath::at_rest(1.0, 0.3), ConfigError);
}

TEST(NucleusPath, DerivativesMatchFiniteDifferences) {
  const double dt = 0.01;
  const auto p = NucleusPath::oscillating({0.1, 0.05, 0}, 1.3, 2.0, dt);
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    const Vec3 fd = (p[j + 1].q - p[j - 1].q) / (2 * dt);
    const Vec3 fdd = (p[j + 1].q - 2.0 * p[j].q + p[j - 1].q) / (dt * dt);
    EXPECT_LT(norm(fd - p[j].qdot), 1e-5);
    EXPECT_LT(norm(fdd - p[j].qddot), 1e-5);
  }
}

TEST(NucleusPath, CsvRoundTripAndInterpolation) {
  const auto dir = testutil::temp_dir("path_csv");
  const auto p = NucleusPath::oscillating({0.1, 0, 0.02}, 1.0, 1.0, 0.05);
  p.write_csv(dir / "p.csv");
  const auto back = NucleusPath::from_csv(dir / "p.csv", 3.0);
  ASSERT_EQ(back.size(), p.size());
  EXPECT_FALSE(back.has_analytic());
  EXPECT_EQ(back.mass(), 3.0);
  for (std::size_t j = 0; j < p.size(); ++j) EXPECT_EQ(back[j].q, p[j].q);
  // Hermite interpolation between nodes: O(dt^4) for q
  EXPECT_LT(norm(back.state_at(0.525).q - p.state_at(0.525).q), 1e-7);
}

TEST(NucleusPath, CsvRejectsMalformed) {
  const auto dir = testutil::temp_dir("path_bad");
  {
    std::ofstream os(dir / "h.csv");
    os << "t,x,y\n0,0,0\n";
  }
  EXPECT_THROW(NucleusPath::from_csv(dir / "h.csv"), DataError);
  {
    std::ofstream os(dir / "u.csv");
    os << "t,qx,qy,qz,vx,vy,vz,ax,ay,az\n0,0,0,0,0,0,0,0,0,0\n0.1,0,0,0,0,0,0,0,0,0\n0.3,0,0,0,0,0,0,0,0,0\n";
  }
  EXPECT_THROW(NucleusPath::from_csv(dir / "u.csv"), DataError);
}

TEST(KGFree, IdentityEigenmodeAndEnergy) {
  const Grid3 g = make_grid(16, 2 * M_PI);
  const Vec3 k{1, 2, 0};
  KGState s{sample(g, [&](const Vec3& x) { return cplx{std::cos(dot(k, x))}; }), ScalarField(g)};
  EXPECT_LT(testutil::rel_diff(kg_free_step(s, 0.0).w, s.w), 1e-14);
  const double t = 0.83;
  EXPECT_LT(testutil::rel_diff(kg_free_step(s, t).w, std::cos(t * bracket(k)) * s.w), 1e-12);

  KGState r{real_part(testutil::random_scalar(g, 3)), real_part(testutil::random_scalar(g, 4))};
  const double e0 = kg_energy(r);
  for (int i = 0; i < 100; ++i) r = kg_free_step(r, 0.05);
  EXPECT_NEAR(kg_energy(r) / e0, 1.0, 1e-9);
}

TEST(KGDirect, ZeroChargeIsHomogeneous) {
  const Grid3 g = make_grid(16, 10.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 0.0, 1.0}, 1);
  const KGState s{sample(g, [](const Vec3& x) { return cplx{std::exp(-dot(x, x))}; }), ScalarField(g)};
  const auto path = NucleusPath::at_rest(1.0, 0.1);
  EXPECT_LT(testutil::rel_diff(kg_duhamel_direct(chi, path, s, 1.0, 0.1), kg_free_step(s, 1.0).w), 1e-13);
  EXPECT_THROW(kg_duhamel_direct(chi, path, s, 1.5, 0.1), RangeError);
  EXPECT_THROW(kg_duhamel_direct(chi, path, s, 1.0, 0.3), UsageError);
}

TEST(KGDirect, SecondOrderSelfConvergence) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  const auto path = NucleusPath::oscillating({0.1, 0, 0}, 1.5, 2.0, 0.01);
  const KGState s0 = zero_state(g);
  const ScalarField ref = kg_duhamel_direct(chi, path, s0, 2.0, 0.2 / 8);
  const double e1 = l2_norm(kg_duhamel_direct(chi, path, s0, 2.0, 0.2) - ref);
  const double e2 = l2_norm(kg_duhamel_direct(chi, path, s0, 2.0, 0.1) - ref);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(KGDirect, StaticChargeRelaxesToYukawaProfile) {
  const Grid3 g = make_grid(32, 40.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  const auto path = NucleusPath::at_rest(12.0, 0.5);
  const auto series = potential_series(chi, path, zero_state(g), 4.0, 4, 40, WMode::direct);
  const ScalarField stat = helmholtz_inverse(chi.sampled());
  const double r1 = linf_norm(series[1] - stat), r2 = linf_norm(series[2] - stat), r3 = linf_norm(series[3] - stat);
  EXPECT_GT(r1, r2);
  EXPECT_GT(r2, r3);
}

TEST(W1, RestIsHelmholtzInverse) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 0.5, 1.0}, 1);
  const ScalarField w1 = build_W1(chi, PathState{});
  EXPECT_LT(testutil::rel_diff(w1, helmholtz_inverse(chi.sampled())), 1e-13);
  EXPECT_LT(imag_residue(w1), 1e-12);
}

TEST(W1, RestMatchesYukawaConvolution) {
  const Grid3 g = make_grid(32, 24.0);
  const double w = 1.0;
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, w}, 1);
  const ScalarField w1 = real_part(build_W1(chi, PathState{}));
  auto f = [&](double rho) { return std::exp(-rho * rho / (2 * w * w)); };
  double num = 0, den = 0;
  for (int ix = 16; ix < 24; ++ix) {
    const std::size_t i = g.index(ix, 16, 16);
    const double r = norm(g.position(i));
    const double ref = r == 0.0 ? yukawa_radial(1e-7, f, 12.0) : yukawa_radial(r, f, 12.0);
    num += std::pow(w1.values[i].real() - ref, 2);
    den += ref * ref;
  }
  EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(W1, TranslationCovariance) {
  const Grid3 g = make_grid(16, 8.0);  // dx = 0.5
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 0.8}, 1);
  const Vec3 v{0.2, -0.1, 0.3};
  const ScalarField base = build_W1(chi, PathState{{}, v, {}});
  const ScalarField moved = build_W1(chi, PathState{{0.5, 1.0, -1.5}, v, {}});
  EXPECT_LT(testutil::rel_diff(moved, translate_nodes(base, 1, 2, -3)), 1e-12);
}

TEST(W1, DenominatorPositiveAndSuperluminalRejected) {
  const Grid3 g = make_grid(16, 8.0);
  const Vec3 v{0.3, 0.3, 0.2};
  double mn = 1e300;
  for (const Vec3& xi : frequency_table(g)) mn = std::min(mn, 1 + dot(xi, xi) - dot(xi, v) * dot(xi, v));
  EXPECT_GT(mn, 0.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  EXPECT_THROW(build_W1(chi, PathState{{}, {1.0, 0, 0}, {}}), DomainError);
}

TEST(W2, InitialValueAndHomogeneousLimit) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 0.5, 1.0}, 1);
  const ScalarField w2 = build_W2(chi, zero_state(g), 0.0);
  EXPECT_LT(testutil::rel_diff(w2, cplx{-1.0} * helmholtz_inverse(chi.sampled())), 1e-13);
  const ChargeDensity none(g, {ProfileKind::gaussian, 0.0, 1.0}, 1);
  const KGState s{sample(g, [](const Vec3& x) { return cplx{std::exp(-dot(x, x))}; }),
                  sample(g, [](const Vec3& x) { return cplx{x.x * std::exp(-dot(x, x))}; })};
  EXPECT_LT(testutil::rel_diff(build_W2(none, s, 1.7), kg_free_step(s, 1.7).w), 1e-13);
  EXPECT_LT(imag_residue(build_W2(chi, s, 2.3, PathState{{}, {0.2, 0.1, 0}, {}})), 1e-10);
}

TEST(W3, InertialPathVanishesAndOutputIsReal) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  const auto inertial = NucleusPath::inertial({0.3, 0.1, 0}, 1.0, 0.05);
  EXPECT_EQ(linf_norm(build_W3(chi, inertial, 1.0, 0.05)), 0.0);
  const auto osc = NucleusPath::oscillating({0.1, 0.05, 0}, 2.0, 1.0, 0.05);
  const ScalarField w3 = build_W3(chi, osc, 1.0, 0.05);
  EXPECT_GT(linf_norm(w3), 0.0);
  EXPECT_LT(imag_residue(w3), 1e-9);
}

TEST(Decomposition, ResidualConvergesAtSecondOrder) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  const auto path = NucleusPath::oscillating({0.07, 0, 0}, M_PI / 2, 2.0, 0.01);
  const KGState s0{sample(g, [](const Vec3& x) { return cplx{0.1 * std::exp(-dot(x, x))}; }), ScalarField(g)};
  const ScalarField w12 = build_W1(chi, path, 2.0) + build_W2(chi, s0, 2.0, path.state_at(0.0));
  std::vector<double> res;
  for (int steps : {50, 100, 200}) {
    const double h = 2.0 / steps;
    const ScalarField dir = kg_duhamel_direct(chi, path, s0, 2.0, h);
    res.push_back(l2_norm(w12 + build_W3(chi, path, 2.0, h) - dir) / l2_norm(dir));
  }
  for (int i = 1; i < 3; ++i) {
    const double order = std::log2(res[i - 1] / res[i]);
    EXPECT_NEAR(order, 2.0, 0.2);
  }
}

TEST(PotentialSeries, MatchesSingleTimeBuilders) {
  const Grid3 g = make_grid(16, 12.0);
  const ChargeDensity chi(g, {ProfileKind::gaussian, 1.0, 1.0}, 1);
  const auto path = NucleusPath::oscillating({0.05, 0.02, 0}, 1.0, 1.0, 0.1);
  const KGState s0 = zero_state(g);
  const auto dec = potential_series(chi, path, s0, 0.25, 5, 2, WMode::decomposition);
  const auto dir = potential_series(chi, path, s0, 0.25, 5, 2, WMode::direct);
  ASSERT_EQ(dec.size(), 5u);
  for (std::size_t j = 1; j < 5; ++j) {
    const double t = 0.25 * j;
    const ScalarField d = build_W1(chi, path, t) + build_W2(chi, s0, t, path.state_at(0.0)) + build_W3(chi, path, t, 0.125);
    EXPECT_LT(l2_norm(dec[j] - real_part(d)) / l2_norm(d), 1e-12);
    const ScalarField k = kg_duhamel_direct(chi, path, s0, t, 0.125);
    EXPECT_LT(l2_norm(dir[j] - real_part(k)) / l2_norm(k), 1e-12);
    EXPECT_EQ(dec[j].rep, Representation::space);
  }
}
