#include "dkg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dkg::solver {

namespace {
constexpr cplx kI{0.0, 1.0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool divides(double T, double dt) {
  const double k = T / dt;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::round(k));
}

int sobolev_order(double s) { return static_cast<int>(std::ceil(s - 1e-12)) + 2; }
}  // namespace

// -- configuration ------------------------------------------------------------

void RunConfig::validate() const {
  make_grid(n, L);
  if (n > 64) throw ConfigError("n = " + std::to_string(n) + " exceeds the supported maximum 64");
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
  if (!divides(T, dt)) throw ConfigError("dt must divide T");
  if (steps() > 400) throw ConfigError("T/dt = " + std::to_string(steps()) + " exceeds the supported maximum 400");
  dirac::require_supported_exponent(p);
  if (!(s >= 0.0)) throw ConfigError("s must be nonnegative");
  if (!(N > 1.5)) throw ConfigError("N must exceed 3/2");
  if (!(M > 0.0)) throw ConfigError("M must be positive");
  if (!(norm(v0) < 1.0)) throw ConfigError("|v0| must be below 1");
  if (eps_soft < 0.0) throw ConfigError("eps_soft must be nonnegative");
  if (!(picard_tol > 0.0) || picard_max_iters < 1) throw ConfigError("picard_tol > 0 and picard_max_iters >= 1 required");
  if (!(q_tol > 0.0) || q_max_iters < 1) throw ConfigError("q_tol > 0 and q_max_iters >= 1 required");
  if (!(chi.width > 0.0) || !(w0.width > 0.0) || !(w1.width > 0.0) || !(u0.width > 0.0))
    throw ConfigError("profile widths must be positive");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (quad_substeps < 1) throw ConfigError("quad_substeps must be >= 1");
  if (!(horizon_eta > 0.0)) throw ConfigError("horizon_eta must be positive");
  if (path_kind == PathKind::file && path_file.empty()) throw ConfigError("path = file requires path_file");
  double pol = 0.0;
  for (const auto& c : u0.polarization) pol += std::norm(c);
  if (!(pol > 0.0)) throw ConfigError("u0 polarization must be nonzero");
}

std::size_t RunConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

double RunConfig::softening() const { return eps_soft > 0.0 ? eps_soft : L / n; }

// -- gates --------------------------------------------------------------------

void GateReport::add(std::string hypothesis, double value, double threshold, bool strict) {
  GateCheck c;
  c.hypothesis = std::move(hypothesis);
  c.value = value;
  c.threshold = threshold;
  c.strict = strict;
  c.passed = strict ? value < threshold : value <= threshold;
  c.margin = value == 0.0 ? std::numeric_limits<double>::infinity() : threshold / value;
  checks.push_back(std::move(c));
}

bool GateReport::passed() const { return first_failure() == nullptr; }

const GateCheck* GateReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

void GateReport::require() const {
  if (const GateCheck* f = first_failure()) {
    std::ostringstream os;
    os << label << ": hypothesis " << f->hypothesis << " violated (value " << fmt(f->value) << ", threshold "
       << fmt(f->threshold) << ")";
    throw GateError(f->hypothesis, os.str());
  }
}

double GateReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) m = std::min(m, c.margin);
  return m;
}

// -- setup --------------------------------------------------------------------

ScalarField make_gaussian(const Grid3& grid, const GaussianData& d) {
  return sample(grid, [&](const Vec3& x) {
    const Vec3 r = x - d.center;
    return cplx{d.amplitude * std::exp(-dot(r, r) / (2.0 * d.width * d.width)), 0.0};
  });
}

SpinorField make_spinor(const Grid3& grid, const SpinorData& d) {
  double pol = 0.0;
  for (const auto& c : d.polarization) pol += std::norm(c);
  const double scale = pol > 0.0 ? 1.0 / std::sqrt(pol) : 0.0;
  const cplx phase = std::polar(1.0, d.phase);
  return sample_spinor(grid, [&](const Vec3& x) {
    const Vec3 r = x - d.center;
    const cplx a = d.amplitude * std::exp(-dot(r, r) / (2.0 * d.width * d.width)) * scale * phase;
    return std::array<cplx, 4>{a * d.polarization[0], a * d.polarization[1], a * d.polarization[2],
                               a * d.polarization[3]};
  });
}

Setup make_setup(const RunConfig& cfg) {
  cfg.validate();
  const Grid3 g = cfg.grid();
  const int order = std::max(5, sobolev_order(cfg.s) + 1);
  return Setup{g, kg::ChargeDensity(g, cfg.chi, order, cfg.delta),
               kg::KGState{make_gaussian(g, cfg.w0), make_gaussian(g, cfg.w1)}, make_spinor(g, cfg.u0)};
}

kg::NucleusPath make_path(const RunConfig& cfg) {
  switch (cfg.path_kind) {
    case PathKind::rest:
      return kg::NucleusPath::at_rest(cfg.T, cfg.dt, cfg.M);
    case PathKind::inertial:
      return kg::NucleusPath::inertial(cfg.v0, cfg.T, cfg.dt, cfg.M);
    case PathKind::oscillating:
      return kg::NucleusPath::oscillating(cfg.path_amplitude, cfg.path_omega, cfg.T, cfg.dt, cfg.M);
    case PathKind::file: {
      auto p = kg::NucleusPath::from_csv(cfg.path_file, cfg.M);
      if (p.horizon() < cfg.T * (1.0 - 1e-12))
        throw ConfigError("path file covers [0, " + fmt(p.horizon()) + "] but T = " + fmt(cfg.T));
      return p;
    }
  }
  throw ConfigError("unknown path kind");
}

namespace {
void data_gates(GateReport& r, const RunConfig& cfg, const Setup& su) {
  const int k = sobolev_order(cfg.s);
  const auto& th = cfg.thresholds;
  r.add("||chi||_W^{" + std::to_string(k) + ",1} <= eps_chi", su.chi.sobolev_l1(k), th.chi);
  r.add("||<x>^{3+delta} chi||_inf <= eps_chi_weighted", su.chi.weighted_sup(), th.chi_weighted);
  r.add("||w0||_W^{" + std::to_string(k + 1) + ",1} <= eps_w0", norms::sobolev_l1_norm(su.kg0.w, k + 1), th.w0);
  r.add("||w1||_W^{" + std::to_string(k) + ",1} <= eps_w1", norms::sobolev_l1_norm(su.kg0.wdot, k), th.w1);
  r.add("||u0||_H^s <= eps_u0", norms::sobolev_norm(su.u0, cfg.s), th.u0);
}

// Smallness proxy of the W1 potential along the path, at up to 11 times.
void potential_gate(GateReport& r, const RunConfig& cfg, const Setup& su, const kg::NucleusPath& path) {
  const std::size_t K = cfg.steps();
  const std::size_t stride = std::max<std::size_t>(1, K / 10);
  std::vector<ScalarField> series;
  std::vector<Vec3> vel;
  for (std::size_t j = 0; j <= K; j += stride) {
    const auto st = path.state_at(cfg.dt * static_cast<double>(j));
    series.push_back(real_part(kg::build_W1(su.chi, st)));
    vel.push_back(st.qdot);
  }
  r.add("||W1||_{T,s,N} <= eps_V", norms::smallness_functional(series, cfg.s, cfg.N, vel), cfg.thresholds.potential);
}
}  // namespace

GateReport system1_gates(const RunConfig& cfg, const Setup& su, const kg::NucleusPath& path) {
  GateReport r;
  r.label = "electron system";
  const double qdot = path.sup_qdot();
  r.add("sup|qdot| <= 1/2", qdot, 0.5);
  r.add("||qddot||_L1 <= 1/2", path.qddot_l1(), 0.5);
  if (cfg.theorem_compliant) r.add("s >= 3/2 - 1/(p-1)", 1.5 - 1.0 / (cfg.p - 1.0), cfg.s);
  data_gates(r, cfg, su);
  if (qdot <= 0.5) potential_gate(r, cfg, su, path);
  return r;
}

GateReport system2_gates(const RunConfig& cfg, const Setup& su) {
  GateReport r;
  r.label = "coupled system";
  const double v = norm(cfg.v0);
  r.add("sup|qdot| <= 1/2", v, 0.5);
  r.add("s > 3/2", 1.5, cfg.s, true);
  const double limit = cfg.horizon_eta * std::min(std::sqrt(cfg.M), v > 0.0 ? 1.0 / v : norms::kInf);
  r.add("T <= eta*min(sqrt(M),1/|v0|)", cfg.T, limit);
  data_gates(r, cfg, su);
  r.add("||<x>^{3+delta} grad chi||_inf <= eps_chi_weighted", su.chi.weighted_grad_sup(), cfg.thresholds.chi_weighted);
  if (v <= 0.5) potential_gate(r, cfg, su, kg::NucleusPath::inertial(cfg.v0, cfg.T, cfg.dt, cfg.M));
  return r;
}

// -- Dirac Picard iteration ---------------------------------------------------

double x_norm(std::span<const SpinorField> series, double s, double p, double dt) {
  double sup = 0.0;
  for (const auto& f : series) sup = std::max(sup, norms::sobolev_norm(f, s));
  return sup + norms::strichartz_norm(series, p - 1.0, norms::kInf, dt);
}

SweepResult duhamel_sweep_u(const std::vector<SpinorField>& prev, const std::vector<ScalarField>& W,
                            const SpinorField& u0, const SweepOptions& opt) {
  if (prev.empty()) throw UsageError("duhamel_sweep_u: empty iterate");
  const std::size_t count = prev.size();
  if (opt.coupling && W.size() != count) throw UsageError("duhamel_sweep_u: potential series length mismatch");
  const Grid3& g = u0.grid;
  for (const auto& f : prev) require_same_grid(g, f.grid, "duhamel_sweep_u iterate");
  if (opt.coupling)
    for (const auto& f : W) require_same_grid(g, f.grid, "duhamel_sweep_u potential");
  if (opt.nonlinearity) dirac::require_supported_exponent(opt.p);

  const SpinorField u0hat = to_frequency(u0);
  SpinorField acc(g, Representation::frequency);
  SpinorField last(g, Representation::frequency);  // e^{-i t_{j-1} D} f_{j-1}
  SpinorField src(g);
  SpinorField nl(g);
  SweepResult res;
  res.next.reserve(count);
  double sup_hs = 0.0;
  double strich = 0.0;
  const double h = opt.dt;

  for (std::size_t j = 0; j < count; ++j) {
    const double t = h * static_cast<double>(j);
    const SpinorField& up = prev[j];
    if (up.rep != Representation::space) throw UsageError("duhamel_sweep_u: iterate must be in space representation");
    for (auto& c : src.comp) std::fill(c.begin(), c.end(), cplx{0.0, 0.0});
    if (opt.coupling) {
      if (W[j].rep != Representation::space) throw UsageError("duhamel_sweep_u: potential must be in space representation");
      for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) src.comp[c][i] = W[j].values[i] * up.comp[c][i];
    }
    if (opt.nonlinearity) {
      dirac::covariant_nonlinearity_into(up, opt.p, nl);
      for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) src.comp[c][i] += nl.comp[c][i];
    }
    SpinorField cur = transform(src, Direction::forward);
    dirac::free_step_hat_inplace(cur, -t);
    if (j > 0)
      for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) acc.comp[c][i] += 0.5 * h * (last.comp[c][i] + cur.comp[c][i]);
    last = std::move(cur);

    SpinorField uhat(g, Representation::frequency);
    for (int c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) uhat.comp[c][i] = u0hat.comp[c][i] + kI * acc.comp[c][i];
    dirac::free_step_hat_inplace(uhat, t);
    SpinorField u = transform(uhat, Direction::inverse);
    if (!all_finite(u)) {
      std::ostringstream os;
      os << "non-finite value in the Picard sweep at t = " << t << " (node " << j << ")";
      throw DivergenceError(os.str());
    }
    const SpinorField diff = u - up;
    sup_hs = std::max(sup_hs, norms::sobolev_norm(diff, opt.s));
    strich += h * std::pow(linf_norm(diff), opt.p - 1.0);
    res.next.push_back(std::move(u));
  }
  res.distance = sup_hs + std::pow(strich, 1.0 / (opt.p - 1.0));
  return res;
}

PicardOutcome picard_solve(const SpinorField& u0, const std::vector<ScalarField>& W, const SweepOptions& opt,
                           double tol, int max_iters) {
  const std::size_t count = W.empty() ? 0 : W.size();
  if (count == 0) throw UsageError("picard_solve: empty potential series");
  PicardOutcome out;
  out.u.assign(count, SpinorField(u0.grid));
  double previous = kNaN;
  int growing = 0;
  for (int k = 1; k <= max_iters; ++k) {
    SweepResult r = duhamel_sweep_u(out.u, W, u0, opt);
    out.u = std::move(r.next);
    SweepRecord rec{k, r.distance, k == 1 ? kNaN : (previous > 0.0 ? r.distance / previous : kNaN)};
    out.sweeps.push_back(rec);
    if (!std::isfinite(r.distance)) {
      std::ostringstream os;
      os << "Picard distance overflowed at sweep " << k;
      throw DivergenceError(os.str());
    }
    const double size = x_norm(out.u, opt.s, opt.p, opt.dt);
    if (r.distance <= tol * size) {
      out.converged = true;
      return out;
    }
    growing = (std::isfinite(rec.ratio) && rec.ratio >= 1.0) ? growing + 1 : 0;
    if (growing >= 3) {
      std::ostringstream os;
      os << "Picard iteration is not contracting: ratios >= 1 for 3 consecutive sweeps (last " << rec.ratio
         << " at sweep " << k << ")";
      throw DivergenceError(os.str());
    }
    previous = r.distance;
  }
  std::ostringstream os;
  os << "Picard iteration did not reach tolerance " << tol << " within " << max_iters << " sweeps (last distance "
     << previous << ")";
  throw DivergenceError(os.str());
}

// -- trajectories -------------------------------------------------------------

norms::NormReport trajectory_report(const RunConfig& cfg, const Trajectory& tr, const SpinorField& u0) {
  norms::NormReport rep;
  const std::string sp = "s=" + fmt(cfg.s);
  double sup_hs = 0.0;
  double l2_drift = 0.0;
  const double l2_0 = l2_norm(u0);
  for (const auto& u : tr.u) {
    sup_hs = std::max(sup_hs, norms::sobolev_norm(u, cfg.s));
    if (l2_0 > 0.0) l2_drift = std::max(l2_drift, std::abs(l2_norm(u) - l2_0) / l2_0);
  }
  const double hs0 = norms::sobolev_norm(u0, cfg.s);
  rep.add("u0_Hs", sp, hs0);
  rep.add("sup_Hs", sp, sup_hs);
  if (hs0 > 0.0) rep.add("Hs_constant", sp, sup_hs / hs0);
  rep.add("strichartz", "p=" + fmt(cfg.p - 1.0) + ",r=inf", norms::strichartz_norm(tr.u, cfg.p - 1.0, norms::kInf, cfg.dt));
  rep.add("local_smoothing", sp + ",N=" + fmt(cfg.N), norms::local_smoothing_norm(tr.u, cfg.s, cfg.N, cfg.dt));
  rep.add("x_norm", sp + ",p=" + fmt(cfg.p), x_norm(tr.u, cfg.s, cfg.p, cfg.dt));
  rep.add("l2_drift", "relative", l2_drift);
  double w_sup = 0.0;
  for (const auto& w : tr.W) w_sup = std::max(w_sup, linf_norm(w));
  rep.add("sup_W_inf", "", w_sup);
  rep.add("picard_sweeps", "", static_cast<double>(tr.sweeps.size()));
  double rmax = 0.0;
  for (const auto& s : tr.sweeps)
    if (std::isfinite(s.ratio)) rmax = std::max(rmax, s.ratio);
  rep.add("contraction_ratio_max", "", rmax);
  rep.add("qddot_L1", "", tr.path.qddot_l1());
  rep.add("sup_qdot", "", tr.path.sup_qdot());
  rep.add("sup_q", "", tr.path.sup_q());
  if (!tr.q_iterations.empty()) rep.add("q_iterations", "", static_cast<double>(tr.q_iterations.size()));
  return rep;
}

namespace {
SweepOptions sweep_options(const RunConfig& cfg) {
  return SweepOptions{cfg.dt, cfg.p, cfg.s, cfg.nonlinearity, cfg.coupling};
}

std::vector<double> node_times(const RunConfig& cfg) {
  std::vector<double> t(cfg.steps() + 1);
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = cfg.dt * static_cast<double>(j);
  return t;
}

// Electron flow along a path without any gate: W series, then Picard.
Trajectory electron_flow(const RunConfig& cfg, const Setup& su, const kg::NucleusPath& path) {
  Trajectory tr{node_times(cfg), {}, {}, path, {}, {}, {}, {}};
  const std::size_t count = tr.times.size();
  if (cfg.coupling) {
    tr.W = kg::potential_series(su.chi, path, su.kg0, cfg.dt, count, cfg.quad_substeps, cfg.w_mode);
  } else {
    tr.W.assign(count, ScalarField(su.grid));
  }
  auto out = picard_solve(su.u0, tr.W, sweep_options(cfg), cfg.picard_tol, cfg.picard_max_iters);
  tr.u = std::move(out.u);
  tr.sweeps = std::move(out.sweeps);
  return tr;
}
}  // namespace

Trajectory solve_system1(const RunConfig& cfg, const kg::NucleusPath& path) {
  return solve_system1(cfg, make_setup(cfg), path);
}

Trajectory solve_system1(const RunConfig& cfg, const Setup& su, const kg::NucleusPath& path) {
  cfg.validate();
  if (path.horizon() < cfg.T * (1.0 - 1e-12))
    throw ConfigError("nucleus path covers [0, " + fmt(path.horizon()) + "] but T = " + fmt(cfg.T));
  GateReport gates = system1_gates(cfg, su, path);
  if (cfg.enforce_gates) gates.require();
  Trajectory tr = electron_flow(cfg, su, path);
  tr.gates = std::move(gates);
  tr.report = trajectory_report(cfg, tr, su.u0);
  return tr;
}

double step_doubling_error(const RunConfig& cfg, const kg::NucleusPath& path) {
  RunConfig fine = cfg;
  fine.dt = cfg.dt / 2.0;
  const Setup su = make_setup(cfg);
  const Trajectory a = electron_flow(cfg, su, path);
  const Trajectory b = electron_flow(fine, su, path);
  double err = 0.0;
  for (std::size_t j = 0; j < a.u.size(); ++j) err = std::max(err, norms::sobolev_norm(a.u[j] - b.u[2 * j], cfg.s));
  return err / 3.0;
}

// -- nucleus ------------------------------------------------------------------

Vec3 hellman_feynman_force(const SpinorField& u, const Vec3& q, double eps_soft) {
  if (!(eps_soft > 0.0)) throw ConfigError("force softening must be positive");
  const SpinorField s = to_space(u);
  const Grid3& g = s.grid;
  const double e2 = eps_soft * eps_soft;
  Vec3 f{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    double rho = 0.0;
    for (const auto& c : s.comp) rho += std::norm(c[i]);
    if (rho == 0.0) continue;
    const Vec3 d = g.position(i) - q;
    const double r2 = dot(d, d) + e2;
    f += (rho / (r2 * std::sqrt(r2))) * d;
  }
  return g.cell_volume() * f;
}

namespace {
void require_same_sampling(const kg::NucleusPath& a, const kg::NucleusPath& b) {
  if (a.size() != b.size() || std::abs(a.dt() - b.dt()) > 1e-12 * a.dt())
    throw UsageError("paths are sampled on different time grids");
}
}  // namespace

double z_distance(const kg::NucleusPath& a, const kg::NucleusPath& b) {
  require_same_sampling(a, b);
  double sup = 0.0;
  double l1 = 0.0;
  double last = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    sup = std::max(sup, norm(a[j].q - b[j].q));
    const double acc = norm(a[j].qddot - b[j].qddot);
    if (j > 0) l1 += 0.5 * a.dt() * (last + acc);
    last = acc;
  }
  return sup + l1;
}

double c2_distance(const kg::NucleusPath& a, const kg::NucleusPath& b) {
  require_same_sampling(a, b);
  double q = 0.0, v = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    q = std::max(q, norm(a[j].q - b[j].q));
    v = std::max(v, norm(a[j].qdot - b[j].qdot));
    acc = std::max(acc, norm(a[j].qddot - b[j].qddot));
  }
  return q + v + acc;
}

BallReport ball_check(const kg::NucleusPath& path, const Vec3& v0) {
  BallReport r;
  r.qddot_l1 = path.qddot_l1();
  r.sup_q = path.sup_q();
  const double tol = 1e-12;
  if (norm(path[0].q) > tol) {
    r.inside = false;
    r.constraint = "q(0) = 0";
    return r;
  }
  if (norm(path[0].qdot - v0) > tol * std::max(1.0, norm(v0))) {
    r.inside = false;
    r.constraint = "qdot(0) = v0";
    return r;
  }
  double l1 = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (j > 0) l1 += 0.5 * path.dt() * (norm(path[j - 1].qddot) + norm(path[j].qddot));
    if (l1 > 0.5) {
      r.inside = false;
      r.constraint = "||qddot||_L1 <= 1/2";
      r.time = path.time(j);
      return r;
    }
    if (norm(path[j].q) > 1.0) {
      r.inside = false;
      r.constraint = "||q||_inf <= 1";
      r.time = path.time(j);
      return r;
    }
  }
  return r;
}

QMapResult picard_map_q(const kg::NucleusPath& q_iter, const RunConfig& cfg, const Setup& su) {
  cfg.validate();
  const BallReport in = ball_check(q_iter, cfg.v0);
  if (!in.inside)
    throw BallViolation(in.constraint, in.time,
                        "nucleus iterate outside B: " + in.constraint + " fails at t = " + fmt(in.time));
  QMapResult res{q_iter, electron_flow(cfg, su, q_iter), {}, {}};
  const std::size_t count = res.electron.u.size();
  if (q_iter.size() != count) throw UsageError("nucleus iterate must be sampled on the run's time nodes");
  const double eps = cfg.softening();
  std::vector<kg::PathState> s(count);
  res.forces.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    res.forces[j] = hellman_feynman_force(res.electron.u[j], q_iter[j].q, eps);
    s[j].qddot = res.forces[j] / cfg.M;
  }
  s[0].q = Vec3{};
  s[0].qdot = cfg.v0;
  const double h = cfg.dt;
  for (std::size_t j = 1; j < count; ++j) {
    s[j].qdot = s[j - 1].qdot + (0.5 * h) * (s[j - 1].qddot + s[j].qddot);
    s[j].q = s[j - 1].q + (0.5 * h) * (s[j - 1].qdot + s[j].qdot);
  }
  res.next = kg::NucleusPath(h, std::move(s), cfg.M);
  res.ball = ball_check(res.next, cfg.v0);
  res.electron.report = trajectory_report(cfg, res.electron, su.u0);
  return res;
}

Trajectory solve_system2(const RunConfig& cfg) {
  cfg.validate();
  const Setup su = make_setup(cfg);
  GateReport gates = system2_gates(cfg, su);
  if (cfg.enforce_gates) gates.require();

  kg::NucleusPath q = kg::NucleusPath::inertial(cfg.v0, cfg.T, cfg.dt, cfg.M);
  std::vector<QIterationRecord> log;
  double previous = kNaN;
  int growing = 0;
  for (int k = 1; k <= cfg.q_max_iters; ++k) {
    QMapResult m = picard_map_q(q, cfg, su);
    const double z = z_distance(m.next, q);
    QIterationRecord rec{k, z, c2_distance(m.next, q), k == 1 ? kNaN : (previous > 0.0 ? z / previous : kNaN)};
    log.push_back(rec);
    // Tolerance is absolute: the ball B has unit radius in the Z norm.
    if (z <= cfg.q_tol) {
      Trajectory tr = std::move(m.electron);
      tr.path = std::move(m.next);
      if (!m.ball.inside)
        throw BallViolation(m.ball.constraint, m.ball.time,
                            "nucleus fixed point outside B: " + m.ball.constraint + " fails at t = " + fmt(m.ball.time));
      // The electron field belongs to the last input path, which agrees with
      // the fixed point to within q_tol.
      tr.q_iterations = std::move(log);
      tr.gates = std::move(gates);
      tr.report = trajectory_report(cfg, tr, su.u0);
      return tr;
    }
    growing = (std::isfinite(rec.ratio) && rec.ratio >= 1.0) ? growing + 1 : 0;
    if (growing >= 3) {
      std::ostringstream os;
      os << "nucleus iteration is not contracting: ratios >= 1 for 3 consecutive iterations (last " << rec.ratio
         << ")";
      throw DivergenceError(os.str());
    }
    previous = z;
    q = std::move(m.next);
  }
  std::ostringstream os;
  os << "nucleus iteration did not reach tolerance " << cfg.q_tol << " within " << cfg.q_max_iters
     << " iterations (last distance " << previous << ")";
  throw DivergenceError(os.str());
}

}  // namespace dkg::solver
