#include <gtest/gtest.h>

#include <fstream>

#include "dkg/dirac.hpp"
#include "dkg/kleingordon.hpp"
#include "dkg/norms.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace dkg;
using namespace dkg::norms;

namespace {
ScalarField gaussian(const Grid3& g, double width, Vec3 c = {}) {
  return sample(g, [&](const Vec3& x) { return cplx{std::exp(-dot(x - c, x - c) / (2 * width * width))}; });
}
double sq(double x) { return x * x; }
}  // namespace

TEST(Sobolev, ZeroOrderAndEigenfunctions) {
  const Grid3 g = make_grid(8, 2 * M_PI);
  const ScalarField f = testutil::random_scalar(g, 1);
  EXPECT_NEAR(sobolev_norm(f, 0.0), l2_norm(f), 1e-12 * l2_norm(f));
  const Vec3 k{1, -3, 2};
  const ScalarField e = sample(g, [&](const Vec3& x) { return std::exp(cplx{0, dot(k, x)}); });
  for (double s : {0.5, 1.0, 2.5}) EXPECT_NEAR(sobolev_norm(e, s) / l2_norm(e), std::pow(bracket(k), s), 1e-12);
  EXPECT_THROW(sobolev_norm(f, -0.5), ConfigError);
  EXPECT_LT(sobolev_norm(f, 1.0), sobolev_norm(f, 1.5));
}

TEST(Sobolev, AgreesWithDerivativeSums) {
  const Grid3 g = make_grid(8, 5.0);
  const ScalarField f = testutil::random_scalar(g, 2);
  const auto grad = gradient(f);
  const double g2 = sq(l2_norm(grad[0])) + sq(l2_norm(grad[1])) + sq(l2_norm(grad[2]));
  EXPECT_NEAR(sq(sobolev_norm(f, 1.0)), sq(l2_norm(f)) + g2, 1e-10 * sq(sobolev_norm(f, 1.0)));
  // ||f||_{H^2}^2 = ||f||^2 + 2||grad f||^2 + ||Lap f||^2
  const ScalarField lap = derivative(f, {2, 0, 0}) + derivative(f, {0, 2, 0}) + derivative(f, {0, 0, 2});
  EXPECT_NEAR(sq(sobolev_norm(f, 2.0)), sq(l2_norm(f)) + 2 * g2 + sq(l2_norm(lap)), 1e-10 * sq(sobolev_norm(f, 2.0)));
}

TEST(Sobolev, SpinorIsComponentSum) {
  const Grid3 g = make_grid(8, 4.0);
  const SpinorField u = testutil::random_spinor(g, 3);
  double acc = 0;
  for (int c = 0; c < 4; ++c) {
    ScalarField f(g);
    f.values = u.comp[c];
    acc += sq(sobolev_norm(f, 1.3));
  }
  EXPECT_NEAR(sobolev_norm(u, 1.3), std::sqrt(acc), 1e-12 * std::sqrt(acc));
}

TEST(LebesgueNorms, L1AndSobolevL1) {
  const Grid3 g = make_grid(32, 16.0);
  const ScalarField f = gaussian(g, 1.0);
  EXPECT_NEAR(lr_norm(f, 1.0), std::pow(2 * M_PI, 1.5), 1e-10);
  EXPECT_NEAR(lr_norm(f, norms::kInf), 1.0, 1e-15);
  EXPECT_NEAR(lr_norm(f, 2.0), l2_norm(f), 1e-13);
  // |d_x f| = |x| f has a kink, so the oracle is the same grid sum rather than 4 pi.
  double kinked = 0;
  for (std::size_t i = 0; i < g.size(); ++i) kinked += std::abs(g.position(i).x) * std::abs(f.values[i]);
  kinked *= g.cell_volume();
  EXPECT_NEAR(kinked, 4 * M_PI, 0.05 * 4 * M_PI);
  EXPECT_NEAR(lr_norm(derivative(f, {1, 0, 0}), 1.0), kinked, 1e-7 * kinked);
  EXPECT_NEAR(sobolev_l1_norm(f, 1), lr_norm(f, 1.0) + 3 * kinked, 1e-7 * kinked);
}

TEST(Weighted, PlainAndNearCenter) {
  const Grid3 g = make_grid(16, 24.0);
  const ScalarField f = gaussian(g, 0.3);
  EXPECT_NEAR(weighted_norm(f, 0.0), l2_norm(f), 1e-14);
  EXPECT_NEAR(weighted_norm(f, -1.75) / l2_norm(f), 1.0, 0.05);
  EXPECT_NEAR(weighted_sobolev(f, 0.0, 0.0, WeightSign::negative), l2_norm(f), 1e-13);
  EXPECT_NEAR(weighted_sobolev(f, 1.0, 0.0, WeightSign::positive), sobolev_norm(f, 1.0), 1e-12);
  const ScalarField off = gaussian(g, 0.5, {5, 0, 0});
  EXPECT_GT(weighted_norm(off, 1.75), 10 * l2_norm(off));
  EXPECT_NEAR(weighted_sup(gaussian(g, 1.0), 0.0), 1.0, 1e-15);
}

TEST(Hardy, GaussianScanBoundedByTwo) {
  const Grid3 g = make_grid(48, 36.0);
  const Vec3 origin{0.5 * g.dx(), 0.5 * g.dx(), 0.5 * g.dx()};
  for (double w : {0.5, 1.0, 2.0, 4.0}) {
    const double c = hardy_ratio(gaussian(g, w), origin);
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, 2.0) << "width " << w;
    RecordProperty("hardy_w" + std::to_string(static_cast<int>(10 * w)), std::to_string(c));
  }
  EXPECT_THROW(hardy_ratio(gaussian(g, 1.0), {0, 0, 0}), DomainError);
}

TEST(KatoPonce, RatioBounded) {
  const Grid3 g = make_grid(16, 12.0);
  for (unsigned seed = 0; seed < 4; ++seed) {
    const SpinorField a = testutil::smooth_spinor(g, seed), b = testutil::smooth_spinor(g, seed + 10, 1.5);
    ScalarField f(g), h(g);
    f.values = a.comp[0];
    h.values = b.comp[1];
    const double r = kato_ponce_ratio(f, h, 1.5);
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 3.0);
  }
}

TEST(Strichartz, SnapshotAndConstantSeries) {
  const Grid3 g = make_grid(8, 4.0);
  const ScalarField f = testutil::random_scalar(g, 4);
  const std::vector<ScalarField> one{f};
  EXPECT_DOUBLE_EQ(strichartz_norm(one, kInf, 3.0, 0.1), lr_norm(f, 3.0));
  const std::vector<ScalarField> series(20, f);
  const double dt = 0.05;
  EXPECT_NEAR(strichartz_norm(series, 4.0, 2.0, dt), std::pow(20 * dt, 0.25) * l2_norm(f), 1e-12 * l2_norm(f));
  EXPECT_THROW(strichartz_norm(std::vector<ScalarField>{}, 2.0, 2.0, dt), UsageError);
}

TEST(Strichartz, FreeDiracQuotientStableAcrossPolarizations) {
  const Grid3 g = make_grid(16, 16.0);
  const double p = 4, r = 3, s = 0.5 + 1 / p - 1 / r;
  ASSERT_EQ(classify_triple(p, r, s).kind, TripleKind::schrodinger_nonendpoint);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> d;
  std::vector<double> q;
  for (int trial = 0; trial < 4; ++trial) {
    std::array<cplx, 4> pol;
    for (auto& c : pol) c = {d(rng), d(rng)};
    const SpinorField u0 = sample_spinor(g, [&](const Vec3& x) {
      const double e = std::exp(-dot(x, x) / 2);
      return std::array<cplx, 4>{e * pol[0], e * pol[1], e * pol[2], e * pol[3]};
    });
    std::vector<SpinorField> series;
    for (int j = 0; j <= 20; ++j) series.push_back(dirac::free_step(u0, 0.1 * j));
    q.push_back(strichartz_norm(series, p, r, 0.1) / sobolev_norm(u0, s));
  }
  const double mean = (q[0] + q[1] + q[2] + q[3]) / 4;
  for (double v : q) EXPECT_NEAR(v / mean, 1.0, 0.2);
}

TEST(LocalSmoothing, ConstantSeries) {
  const Grid3 g = make_grid(8, 6.0);
  const SpinorField u = testutil::smooth_spinor(g, 1);
  const std::vector<SpinorField> series(10, u);
  EXPECT_NEAR(local_smoothing_norm(series, 1.0, 1.75, 0.1),
              std::sqrt(10 * 0.1) * weighted_sobolev(u, 1.0, 1.75, WeightSign::negative), 1e-13);
}

TEST(Smallness, TrivialCasesAndLinearity) {
  const Grid3 g = make_grid(16, 12.0);
  const std::vector<ScalarField> zero(3, ScalarField(g));
  EXPECT_EQ(smallness_functional(zero, 1.5, 1.75, Vec3{}), 0.0);
  const ScalarField a = real_part(testutil::random_scalar(g, 1)), b = real_part(testutil::random_scalar(g, 2));
  const std::vector<ScalarField> v{a, b};
  EXPECT_NEAR(smallness_functional(v, 0.0, 0.0, Vec3{}), std::max(linf_norm(a), linf_norm(b)), 1e-12);
  const kg::ChargeDensity c1(g, {kg::ProfileKind::gaussian, 0.01, 1.0}, 1), c3(g, {kg::ProfileKind::gaussian, 0.03, 1.0}, 1);
  const std::vector<ScalarField> w1{real_part(kg::build_W1(c1, kg::PathState{}))};
  const std::vector<ScalarField> w3{real_part(kg::build_W1(c3, kg::PathState{}))};
  EXPECT_NEAR(smallness_functional(w3, 1.5, 1.75, Vec3{}) / smallness_functional(w1, 1.5, 1.75, Vec3{}), 3.0, 1e-10);
  EXPECT_THROW(smallness_functional(v, 1.0, 1.0, Vec3{0.6, 0, 0}), ConfigError);
  const std::vector<Vec3> vel{{0.1, 0, 0}, {0.55, 0, 0}};
  EXPECT_THROW(smallness_functional(v, 1.0, 1.0, vel), ConfigError);
}

TEST(PsiR, BranchesAndClosedForms) {
  for (double R : {0.1, 1.0, 10.0, 100.0}) {
    const double bR = bracket(R);
    EXPECT_NEAR(psi_R_prime(R, R), R / bR, 1e-12);
    EXPECT_NEAR(psi_R_prime(R * (1 + 1e-13), R), psi_R_prime(R, R), 1e-12);
    EXPECT_NEAR(psi_R(R * (1 + 1e-13), R), psi_R(R, R), 1e-10 * (1 + R));
    EXPECT_NEAR(psi_R_laplacian(0.5 * R, R), 3.0 / bR, 1e-12);
    EXPECT_NEAR(psi_R_laplacian(2.0 * R, R), 1.5 * R / bR / R, 1e-12);
    EXPECT_LE(psi_R_norm2(R), 4.5);
  }
  EXPECT_THROW(psi_R(-1.0, 1.0), DomainError);
  EXPECT_THROW(psi_R_prime(1.0, -1.0), DomainError);
}

TEST(PsiR, ClosedFormsMatchFiniteDifferences) {
  const double R = 2.0;
  for (double r : {0.3, 1.0, 1.7, 2.6, 5.0, 20.0}) {
    const double h = 1e-4 * r;
    const double d1 = (psi_R(r + h, R) - psi_R(r - h, R)) / (2 * h);
    EXPECT_NEAR(d1, psi_R_prime(r, R), 1e-7);
    const double d2 = (psi_R_prime(r + h, R) - psi_R_prime(r - h, R)) / (2 * h);
    EXPECT_NEAR(d2 + 2 * psi_R_prime(r, R) / r, psi_R_laplacian(r, R), 1e-7);
  }
}

TEST(PsiR, SupNormsOnSampleGrid) {
  for (double R : {0.1, 1.0, 10.0, 100.0}) {
    double sup_grad = 0, sup_lap = 0;
    for (int i = 1; i <= 100000; ++i) {
      const double r = 1e-3 * i * std::max(R, 1.0);
      sup_grad = std::max(sup_grad, std::abs(psi_R_prime(r, R)));
      sup_lap = std::max(sup_lap, std::abs(psi_R_laplacian(r, R)));
    }
    EXPECT_LE(sup_grad + sup_lap, psi_R_norm2(R) + 1e-12);
    EXPECT_LE(sup_grad + sup_lap, 4.5);
  }
}

TEST(Commutator, SkewAdjointAndPointwiseForm) {
  const Grid3 g = make_grid(32, 16.0);
  // off-center factor so parity does not force the inner products to vanish
  const SpinorField v = testutil::smooth_spinor(g, 1);
  const SpinorField w = multiply(gaussian(g, 1.5, {1.0, 0.5, -0.3}), testutil::smooth_spinor(g, 2, 2.0));
  const double R = 2.0;
  const cplx a = inner(commutator_laplacian_psi(v, R), w);
  const cplx b = inner(v, commutator_laplacian_psi(w, R));
  EXPECT_GT(std::abs(a), 1e-3);
  EXPECT_LT(std::abs(a + b), 1e-10 * std::abs(a));
  // -(Delta psi) v - 2 grad psi . grad v
  const SpinorField c = commutator_laplacian_psi(v, R);
  double num = 0, den = 0;
  for (int comp = 0; comp < 4; ++comp) {
    ScalarField f(g);
    f.values = v.comp[comp];
    const auto grad = gradient(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.position(i);
      const double r = norm(x);
      if (r == 0.0) continue;
      const Vec3 gp = (psi_R_prime(r, R) / r) * x;
      const cplx ref = -psi_R_laplacian(r, R) * f.values[i] -
                       2.0 * (gp.x * grad[0].values[i] + gp.y * grad[1].values[i] + gp.z * grad[2].values[i]);
      num += std::norm(c.comp[comp][i] - ref);
      den += std::norm(ref);
    }
  }
  EXPECT_LT(std::sqrt(num / den), 1e-2);
}

TEST(Virial, ThetaBoundOnRandomData) {
  const Grid3 g = make_grid(16, 12.0);
  EXPECT_EQ(virial_theta(SpinorField(g), testutil::smooth_spinor(g, 1), testutil::smooth_spinor(g, 2), 1.0), 0.0);
  double worst = 0;
  for (unsigned seed = 0; seed < 6; ++seed) {
    const double R = 0.5 + seed;
    const SpinorField v = testutil::smooth_spinor(g, seed), vd = testutil::smooth_spinor(g, seed + 20),
                      vt = testutil::smooth_spinor(g, seed + 40, 1.5);
    const double theta = virial_theta(v, vd, vt, R);
    const double bound = psi_R_norm2(R) * sobolev_norm(v, 1.0) * (l2_norm(vd) + l2_norm(vt));
    worst = std::max(worst, std::abs(theta) / bound);
  }
  RecordProperty("theta_constant", std::to_string(worst));
  EXPECT_LT(worst, 6.0);
  EXPECT_THROW(virial_theta(SpinorField(g), SpinorField(make_grid(8, 12.0)), SpinorField(g), 1.0), UsageError);
}

TEST(Triples, Classification) {
  const auto a = classify_triple(kInf, 2.0, 0.0);
  EXPECT_EQ(a.kind, TripleKind::schrodinger_nonendpoint);
  const auto b = classify_triple(4.0, kInf, 1.25);
  EXPECT_EQ(b.kind, TripleKind::special_infinity);
  EXPECT_DOUBLE_EQ(b.ptilde, 5.0);
  for (double s : {0.0, 0.5, 1.0}) EXPECT_EQ(classify_triple(2.0, 6.0, s).kind, TripleKind::invalid);
  EXPECT_EQ(classify_triple(4.0, 3.0, 0.5 + 0.25 - 1.0 / 3).kind, TripleKind::schrodinger_nonendpoint);
  EXPECT_EQ(classify_triple(4.0, 3.0, 0.6).kind, TripleKind::invalid);
  EXPECT_STREQ(to_string(TripleKind::special_infinity), "special_infinity");
}

TEST(DecayFit, SyntheticPowerLaws) {
  std::vector<double> t, a, b;
  for (int i = 0; i <= 70; ++i) {
    t.push_back(5.0 + 0.5 * i);
    a.push_back(3.0 * std::pow(1 + t.back(), -1.5));
    b.push_back(0.2 * std::pow(1 + t.back(), -1.0));
  }
  EXPECT_NEAR(decay_fit(t, a).exponent, -1.5, 1e-6);
  EXPECT_NEAR(decay_fit(t, b).exponent, -1.0, 1e-6);
  EXPECT_NEAR(decay_fit(t, a).r_squared, 1.0, 1e-12);
  std::vector<double> bad = a;
  bad[10] = 0.0;
  EXPECT_THROW(decay_fit(t, bad), DataError);
  const std::vector<double> few_t(t.begin(), t.begin() + 5), few_v(a.begin(), a.begin() + 5);
  EXPECT_THROW(decay_fit(few_t, few_v), DataError);
}

TEST(Report, CsvAndJson) {
  NormReport r;
  r.add("sup_Hs", "s=1.5", 0.25);
  r.add("strichartz", "p=4,r=inf", 1.0);
  EXPECT_THROW(r.add("bad", "", -1.0), Error);
  EXPECT_THROW(r.add("bad", "", std::nan("")), Error);
  EXPECT_DOUBLE_EQ(r.value("sup_Hs"), 0.25);
  EXPECT_FALSE(r.contains("bad"));
  EXPECT_THROW(r.value("missing"), UsageError);
  const auto dir = testutil::temp_dir("report");
  r.write_csv(dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::string header, line1, line2;
  std::getline(in, header);
  std::getline(in, line1);
  std::getline(in, line2);
  EXPECT_EQ(header, "name,param_string,value");
  EXPECT_EQ(line1, "sup_Hs,s=1.5,0.25");
  EXPECT_EQ(line2, "strichartz,p=4;r=inf,1");
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j[1]["params"], "p=4,r=inf");
}
