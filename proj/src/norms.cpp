#include "dkg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "dkg/kleingordon.hpp"

namespace dkg::norms {

namespace {

void require_nonnegative_s(double s) {
  if (!(s >= 0.0)) {
    std::ostringstream os;
    os << "Sobolev index s = " << s << " must be nonnegative";
    throw ConfigError(os.str());
  }
}

double weight(const Vec3& x, double power) { return std::pow(1.0 + dot(x, x), 0.5 * power); }

template <class Field>
double sobolev_impl(const Field& f, double s) {
  require_nonnegative_s(s);
  if (s == 0.0) return l2_norm(f);
  const Field hat = to_frequency(f);
  const auto& xi = frequency_table(hat.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double m = std::pow(1.0 + dot(xi[i], xi[i]), s);
    if constexpr (std::is_same_v<Field, ScalarField>) {
      acc += m * std::norm(hat.values[i]);
    } else {
      for (const auto& c : hat.comp) acc += m * std::norm(c[i]);
    }
  }
  return std::sqrt(acc * hat.grid.cell_volume());
}

}  // namespace

double sobolev_norm(const ScalarField& f, double s) { return sobolev_impl(f, s); }
double sobolev_norm(const SpinorField& f, double s) { return sobolev_impl(f, s); }

ScalarField derivative(const ScalarField& f, std::array<int, 3> order) {
  for (int o : order)
    if (o < 0) throw UsageError("derivative order must be nonnegative");
  if (order[0] == 0 && order[1] == 0 && order[2] == 0) return f;
  return apply_multiplier(f, [order](const Vec3& xi) {
    cplx m = 1.0;
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < order[a]; ++k) m *= cplx{0.0, xi[a]};
    return m;
  });
}

std::array<ScalarField, 3> gradient(const ScalarField& f) {
  return {derivative(f, {1, 0, 0}), derivative(f, {0, 1, 0}), derivative(f, {0, 0, 1})};
}

namespace {
template <class PointValue>
double lr_impl(const Grid3& g, double r, PointValue&& pv) {
  if (!(r >= 1.0)) throw UsageError("L^r norm needs r >= 1");
  if (std::isinf(r)) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, pv(i));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += std::pow(pv(i), r);
  return std::pow(acc * g.cell_volume(), 1.0 / r);
}
}  // namespace

double lr_norm(const ScalarField& f, double r) {
  const ScalarField s = to_space(f);
  return lr_impl(s.grid, r, [&](std::size_t i) { return std::abs(s.values[i]); });
}

double lr_norm(const SpinorField& f, double r) {
  const SpinorField s = to_space(f);
  return lr_impl(s.grid, r, [&](std::size_t i) {
    double v = 0.0;
    for (const auto& c : s.comp) v += std::norm(c[i]);
    return std::sqrt(v);
  });
}

double sobolev_l1_norm(const ScalarField& f, int k) {
  if (k < 0) throw UsageError("W^{k,1} order must be nonnegative");
  double total = 0.0;
  for (int a = 0; a <= k; ++a)
    for (int b = 0; a + b <= k; ++b)
      for (int c = 0; a + b + c <= k; ++c) total += lr_norm(derivative(f, {a, b, c}), 1.0);
  return total;
}

double weighted_norm(const ScalarField& f, double N) {
  const ScalarField s = to_space(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double w = weight(s.grid.position(i), N);
    acc += w * w * std::norm(s.values[i]);
  }
  return std::sqrt(acc * s.grid.cell_volume());
}

double weighted_norm(const SpinorField& f, double N) {
  const SpinorField s = to_space(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double w = weight(s.grid.position(i), N);
    for (const auto& c : s.comp) acc += w * w * std::norm(c[i]);
  }
  return std::sqrt(acc * s.grid.cell_volume());
}

namespace {
auto bessel_potential(double s) {
  return [s](const Vec3& xi) { return std::pow(1.0 + dot(xi, xi), 0.5 * s); };
}
}  // namespace

double weighted_sobolev(const ScalarField& f, double s, double N, WeightSign sign) {
  require_nonnegative_s(s);
  return weighted_norm(apply_multiplier(to_space(f), bessel_potential(s)), static_cast<int>(sign) * N);
}

double weighted_sobolev(const SpinorField& f, double s, double N, WeightSign sign) {
  require_nonnegative_s(s);
  return weighted_norm(apply_multiplier(to_space(f), bessel_potential(s)), static_cast<int>(sign) * N);
}

double weighted_sup(const ScalarField& f, double power) {
  const ScalarField s = to_space(f);
  double m = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i)
    m = std::max(m, weight(s.grid.position(i), power) * std::abs(s.values[i]));
  return m;
}

double weighted_grad_sup(const ScalarField& f, double power) {
  const auto grad = gradient(to_space(f));
  const Grid3& g = f.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double mag = std::sqrt(std::norm(grad[0].values[i]) + std::norm(grad[1].values[i]) +
                                 std::norm(grad[2].values[i]));
    m = std::max(m, weight(g.position(i), power) * mag);
  }
  return m;
}

double hardy_ratio(const ScalarField& f, const Vec3& origin) {
  const ScalarField s = to_space(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double r = norm(s.grid.position(i) - origin);
    if (r < 1e-12 * s.grid.dx()) throw DomainError("hardy_ratio: singular point sits on a grid node");
    acc += std::norm(s.values[i]) / (r * r);
  }
  return std::sqrt(acc * s.grid.cell_volume()) / sobolev_norm(s, 1.0);
}

double kato_ponce_ratio(const ScalarField& f, const ScalarField& g, double s) {
  const ScalarField fs = to_space(f);
  const ScalarField gs = to_space(g);
  require_same_grid(fs.grid, gs.grid, "kato_ponce_ratio");
  ScalarField prod = fs;
  for (std::size_t i = 0; i < prod.values.size(); ++i) prod.values[i] *= gs.values[i];
  const double rhs = sobolev_norm(fs, s) * linf_norm(gs) + linf_norm(fs) * sobolev_norm(gs, s);
  return rhs > 0.0 ? sobolev_norm(prod, s) / rhs : 0.0;
}

namespace {
template <class Field>
double strichartz_impl(std::span<const Field> series, double p, double r, double dt) {
  if (series.empty()) throw UsageError("strichartz_norm: empty series");
  if (!(p >= 1.0) || !(r >= 1.0)) throw UsageError("strichartz_norm: p and r must be in [1, inf]");
  if (!(dt > 0.0)) throw UsageError("strichartz_norm: dt must be positive");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& f : series) m = std::max(m, lr_norm(f, r));
    return m;
  }
  double acc = 0.0;
  for (const auto& f : series) acc += dt * std::pow(lr_norm(f, r), p);
  return std::pow(acc, 1.0 / p);
}
}  // namespace

double strichartz_norm(std::span<const ScalarField> series, double p, double r, double dt) {
  return strichartz_impl(series, p, r, dt);
}

double strichartz_norm(std::span<const SpinorField> series, double p, double r, double dt) {
  return strichartz_impl(series, p, r, dt);
}

double local_smoothing_norm(std::span<const SpinorField> series, double s, double N, double dt) {
  if (series.empty()) throw UsageError("local_smoothing_norm: empty series");
  double acc = 0.0;
  for (const auto& u : series) {
    const double v = weighted_sobolev(u, s, N, WeightSign::negative);
    acc += dt * v * v;
  }
  return std::sqrt(acc);
}

namespace {
double smallness_at(const ScalarField& V, double s, double N, const Vec3& v) {
  if (norm(v) > 0.5) {
    std::ostringstream os;
    os << "smallness_functional: boost |v| = " << norm(v) << " exceeds 1/2";
    throw ConfigError(os.str());
  }
  require_nonnegative_s(s);
  ScalarField weighted = to_space(V);
  for (std::size_t i = 0; i < weighted.values.size(); ++i)
    weighted.values[i] *= weight(weighted.grid.position(i), 2.0 * N);
  if (s == 0.0) return linf_norm(weighted);
  return linf_norm(apply_multiplier(weighted, [&](const Vec3& xi) {
    return std::pow(kg::boosted_bracket(v, xi), s);
  }));
}
}  // namespace

double smallness_functional(std::span<const ScalarField> series, double s, double N, const Vec3& v) {
  double m = 0.0;
  for (const auto& V : series) m = std::max(m, smallness_at(V, s, N, v));
  return m;
}

double smallness_functional(std::span<const ScalarField> series, double s, double N,
                            std::span<const Vec3> velocities) {
  if (velocities.size() != series.size())
    throw UsageError("smallness_functional: one velocity per sample required");
  double m = 0.0;
  for (std::size_t j = 0; j < series.size(); ++j) m = std::max(m, smallness_at(series[j], s, N, velocities[j]));
  return m;
}

// -- psi_R --------------------------------------------------------------------

namespace {
void require_radii(double r, double R) {
  if (!(r >= 0.0) || !(R >= 0.0)) throw DomainError("psi_R needs r >= 0 and R >= 0");
}
}  // namespace

double psi_R(double r, double R) {
  require_radii(r, R);
  const double bR = bracket(R);
  if (r <= R) return r * r / (2.0 * bR);
  // int_R^r (R/<R>)(3/2 - R^2/(2 s^2)) ds
  const double outer = (R / bR) * (1.5 * (r - R) + 0.5 * R * R * (1.0 / r - 1.0 / R));
  return R * R / (2.0 * bR) + outer;
}

double psi_R_prime(double r, double R) {
  require_radii(r, R);
  const double bR = bracket(R);
  if (r <= R) return r / bR;
  return (R / bR) * (1.5 - 0.5 * R * R / (r * r));
}

double psi_R_laplacian(double r, double R) {
  require_radii(r, R);
  const double bR = bracket(R);
  if (r <= R) return 3.0 / bR;
  return 3.0 * R / (bR * r);
}

double psi_R_norm2(double R) {
  require_radii(0.0, R);
  const double bR = bracket(R);
  return 1.5 * R / bR + 3.0 / bR;
}

SpinorField commutator_laplacian_psi(const SpinorField& v, double R) {
  if (!(R > 0.0)) throw DomainError("virial radius R must be positive");
  const SpinorField s = to_space(v);
  const Grid3& g = s.grid;
  std::vector<Vec3> grad_psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    const double r = norm(x);
    grad_psi[i] = r > 0.0 ? (psi_R_prime(r, R) / r) * x : Vec3{};
  }
  SpinorField out(g);
  for (int c = 0; c < 4; ++c) {
    ScalarField comp(g);
    comp.values = s.comp[c];
    ScalarField acc(g);
    for (int a = 0; a < 3; ++a) {
      std::array<int, 3> order{0, 0, 0};
      order[a] = 1;
      ScalarField flux = comp;
      for (std::size_t i = 0; i < g.size(); ++i) flux.values[i] *= grad_psi[i][a];
      const ScalarField div_part = derivative(flux, order);
      const ScalarField grad_part = derivative(comp, order);
      for (std::size_t i = 0; i < g.size(); ++i)
        acc.values[i] -= div_part.values[i] + grad_psi[i][a] * grad_part.values[i];
    }
    out.comp[c] = std::move(acc.values);
  }
  return out;
}

double virial_theta(const SpinorField& v, const SpinorField& vdot, const SpinorField& vtilde_v, double R) {
  require_same_grid(v.grid, vdot.grid, "virial_theta");
  require_same_grid(v.grid, vtilde_v.grid, "virial_theta");
  const SpinorField cv = commutator_laplacian_psi(v, R);
  const SpinorField a = to_space(vdot);
  const SpinorField b = cplx{0.0, 1.0} * to_space(vtilde_v);
  return 2.0 * inner(cv, a).real() + 2.0 * inner(cv, b).real();
}

// -- admissible triples -------------------------------------------------------

AdmissibleTriple classify_triple(double p, double r, double s) {
  constexpr double tol = 1e-12;
  AdmissibleTriple t{p, r, s, TripleKind::invalid, 0.0};
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
  const bool p_ok = p > 2.0;
  const bool r_ok = r >= 2.0 && r <= 6.0;
  if (p_ok && r_ok && std::abs(2.0 * inv_p + 3.0 * inv_r - 1.5) <= tol &&
      std::abs(s - (0.5 + inv_p - inv_r)) <= tol) {
    t.kind = TripleKind::schrodinger_nonendpoint;
    return t;
  }
  if (std::isinf(r) && std::isfinite(p) && p + 1.0 > 3.0 && std::abs(s - (1.5 - 1.0 / p)) <= tol) {
    t.kind = TripleKind::special_infinity;
    t.ptilde = p + 1.0;
  }
  return t;
}

const char* to_string(TripleKind kind) {
  switch (kind) {
    case TripleKind::schrodinger_nonendpoint:
      return "schrodinger_nonendpoint";
    case TripleKind::special_infinity:
      return "special_infinity";
    case TripleKind::invalid:
      return "invalid";
  }
  return "invalid";
}

// -- decay fit ----------------------------------------------------------------

DecayFit decay_fit(std::span<const double> times, std::span<const double> sup_norms, double min_time) {
  if (times.size() != sup_norms.size()) throw DataError("decay_fit: times and norms differ in length");
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] < min_time) continue;
    if (!(sup_norms[j] > 0.0)) {
      std::ostringstream os;
      os << "decay_fit: nonpositive norm " << sup_norms[j] << " at t = " << times[j];
      throw DataError(os.str());
    }
    xs.push_back(std::log1p(times[j]));
    ys.push_back(std::log(sup_norms[j]));
  }
  if (xs.size() < 8) throw DataError("decay_fit: need at least 8 samples with t >= min_time");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    mx += xs[j];
    my += ys[j];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxx += (xs[j] - mx) * (xs[j] - mx);
    sxy += (xs[j] - mx) * (ys[j] - my);
    syy += (ys[j] - my) * (ys[j] - my);
  }
  if (!(sxx > 0.0)) throw DataError("decay_fit: sample times are degenerate");
  DecayFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double sse = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double e = ys[j] - (fit.intercept + fit.exponent * xs[j]);
    sse += e * e;
  }
  fit.std_error = std::sqrt(sse / (n - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

// -- reports ------------------------------------------------------------------

void NormReport::add(std::string name, std::string params, double value) {
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os << "report entry " << name << " has invalid value " << value;
    throw NumericError(os.str());
  }
  entries_.push_back({std::move(name), std::move(params), value});
}

double NormReport::value(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.value;
  throw UsageError("no report entry named " + name);
}

bool NormReport::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
}

void NormReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << "name,param_string,value\n" << std::setprecision(17);
  for (const auto& e : entries_) {
    std::string params = e.params;
    std::replace(params.begin(), params.end(), ',', ';');
    os << e.name << ',' << params << ',' << e.value << '\n';
  }
}

std::string NormReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& e : entries_) j.push_back({{"name", e.name}, {"params", e.params}, {"value", e.value}});
  return j.dump(2);
}

}  // namespace dkg::norms
