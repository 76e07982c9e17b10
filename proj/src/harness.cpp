#include "dkg/harness.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "dkg/field_io.hpp"
#include "json.hpp"

namespace dkg::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string hex(const unsigned char* d, unsigned len) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(d[i]);
  return os.str();
}

std::string digest(const EVP_MD* md, const std::string& data) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), out, &len, md, nullptr) != 1) throw Error("digest computation failed");
  return hex(out, len);
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw DataError("cannot open " + file.string() + " for writing");
  return os;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// -- verification kernels -----------------------------------------------------

KernelCheck check_kernel(const Grid3& grid, const Vec3& v, double sigma) {
  kg::require_subluminal(v, "check_kernel");
  const ScalarField K = kg::kernel_from_symbol(grid, [&](const Vec3& xi) {
    const double b = kg::boosted_bracket(v, xi);
    double m = 1.0 / (b * b);
    if (sigma > 0.0) m *= std::exp(-0.5 * sigma * sigma * (b * b - 1.0));
    return m;
  });
  const double gamma = 1.0 / std::sqrt(1.0 - dot(v, v));
  const double rmin = 2.0 * grid.dx();
  const double rmax = grid.length() / 4.0;
  double num2 = 0.0, den2 = 0.0;
  KernelCheck out{v, sigma, 0.0, 0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.position(i);
    const double r = norm(x);
    if (r < rmin || r > rmax) continue;
    const double y = norm(kg::lorentz_map(v, x));
    const double ref = gamma * (sigma > 0.0 ? kg::yukawa_gaussian_smoothed(y, sigma) : std::exp(-y) / (4.0 * M_PI * y));
    const double d = K.values[i].real() - ref;
    num2 += d * d;
    den2 += ref * ref;
    ++out.points;
  }
  if (out.points == 0 || den2 == 0.0) throw ConfigError("kernel annulus contains no grid points");
  out.mismatch = std::sqrt(num2 / den2);
  return out;
}

std::vector<DecompositionLevel> check_decomposition(const solver::RunConfig& cfg, const std::vector<int>& levels) {
  const solver::Setup su = solver::make_setup(cfg);
  const kg::NucleusPath path = solver::make_path(cfg);
  const kg::PathState initial = path.state_at(0.0);
  const ScalarField w12 = kg::build_W1(su.chi, path, cfg.T) + kg::build_W2(su.chi, su.kg0, cfg.T, initial);
  std::vector<DecompositionLevel> out;
  for (int steps : levels) {
    if (steps < 1) throw ConfigError("decomposition step counts must be positive");
    const double h = cfg.T / steps;
    const ScalarField dec = w12 + kg::build_W3(su.chi, path, cfg.T, h);
    const ScalarField dir = kg::kg_duhamel_direct(su.chi, path, su.kg0, cfg.T, h);
    const double base = l2_norm(dir);
    if (!(base > 0.0)) throw DataError("direct Duhamel field vanishes; the decomposition residual is undefined");
    DecompositionLevel lv;
    lv.steps = steps;
    lv.dt_quad = h;
    lv.residual = l2_norm(dec - dir) / base;
    lv.imag_residue = imag_residue(dec);
    if (!out.empty()) {
      const auto& prev = out.back();
      lv.order = std::log(prev.residual / lv.residual) / std::log(prev.dt_quad / h);
    }
    out.push_back(lv);
  }
  return out;
}

DecaySeries w2_decay_series(const solver::RunConfig& cfg, double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max > 0.0)) throw ConfigError("decay series needs positive t_max and dt");
  const solver::Setup su = solver::make_setup(cfg);
  const kg::PathState initial{{}, cfg.v0, {}};
  DecaySeries out;
  const auto count = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = dt * static_cast<double>(j);
    out.times.push_back(t);
    out.sup_norms.push_back(linf_norm(real_part(kg::build_W2(su.chi, su.kg0, t, initial))));
  }
  return out;
}

// -- artifacts ----------------------------------------------------------------

std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return digest(EVP_sha1(), blob);
}

std::string sha256_file(const fs::path& file) { return digest(EVP_sha256(), read_text(file)); }

void write_norm_series(const fs::path& file, const solver::Trajectory& tr, double s) {
  auto os = open_out(file);
  os << "t,Hs,L2,Linf,W_inf,qx,qy,qz\n";
  for (std::size_t j = 0; j < tr.u.size(); ++j) {
    const double w = j < tr.W.size() ? linf_norm(tr.W[j]) : 0.0;
    const Vec3 q = tr.path.state_at(tr.times[j]).q;
    os << num(tr.times[j]) << ',' << num(norms::sobolev_norm(tr.u[j], s)) << ',' << num(l2_norm(tr.u[j])) << ','
       << num(linf_norm(tr.u[j])) << ',' << num(w) << ',' << num(q.x) << ',' << num(q.y) << ',' << num(q.z) << '\n';
  }
}

void write_sweeps(const fs::path& file, const std::vector<solver::SweepRecord>& sweeps) {
  auto os = open_out(file);
  os << "sweep,distance,ratio\n";
  for (const auto& s : sweeps) os << s.sweep << ',' << num(s.distance) << ',' << num(s.ratio) << '\n';
}

void write_gates(const fs::path& file, const std::vector<solver::GateReport>& gates) {
  auto os = open_out(file);
  os << "label,hypothesis,value,threshold,margin,passed\n";
  for (const auto& g : gates)
    for (const auto& c : g.checks)
      os << g.label << ",\"" << c.hypothesis << "\"," << num(c.value) << ',' << num(c.threshold) << ','
         << num(c.margin) << ',' << (c.passed ? "true" : "false") << '\n';
}

// -- manifest -----------------------------------------------------------------

namespace {

class Manifest {
 public:
  Manifest(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {}

  void set_config(const config::Settings& s, const std::string& raw_text) {
    json c = json::object();
    for (const auto& [k, v] : config::echo_pairs(s)) c[k] = v;
    config_ = std::move(c);
    std::string inputs = config::echo(s);
    if (s.run.path_kind == solver::PathKind::file) inputs += read_text(s.run.path_file);
    input_hash_ = git_blob_hash(inputs);
    config_file_hash_ = git_blob_hash(raw_text);
  }
  void set_inputs_hash(const std::string& h) { input_hash_ = h; }

  void add_gates(const solver::GateReport& g) { gates_.push_back(g); }
  const std::vector<solver::GateReport>& gates() const { return gates_; }

  void artifact(const fs::path& relative) { artifacts_.push_back(relative); }
  void result(const std::string& key, json value) { results_[key] = std::move(value); }
  void timing(const std::string& key, double seconds) { timings_[key] = seconds; }
  void message(std::string m) { message_ = std::move(m); }
  const fs::path& dir() const { return dir_; }

  void write(int code) {
    json j;
    j["command"] = command_;
    j["exit_code"] = code;
    j["status"] = code == ExitCode::ok ? "ok" : (code == ExitCode::failed ? "failed" : "error");
    j["message"] = message_;
    j["config"] = config_;
    j["input_hash"] = input_hash_;
    j["config_file_hash"] = config_file_hash_;
    json gl = json::array();
    for (const auto& g : gates_)
      for (const auto& c : g.checks)
        gl.push_back({{"label", g.label},
                      {"hypothesis", c.hypothesis},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"strict", c.strict},
                      {"margin", finite_or_null(c.margin)},
                      {"passed", c.passed}});
    j["gates"] = gl;
    j["results"] = results_;
    j["timings"] = timings_;
    json al = json::array();
    for (const auto& a : artifacts_) {
      const fs::path full = dir_ / a;
      if (!fs::exists(full)) continue;
      al.push_back({{"file", a.generic_string()}, {"size", fs::file_size(full)}, {"sha256", sha256_file(full)}});
    }
    j["artifacts"] = al;
    std::ofstream os(dir_ / "manifest.json");
    if (os) os << j.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string command_;
  json config_ = json::object();
  std::string input_hash_;
  std::string config_file_hash_;
  std::vector<solver::GateReport> gates_;
  std::vector<fs::path> artifacts_;
  json results_ = json::object();
  json timings_ = json::object();
  std::string message_;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_report(Manifest& m, const norms::NormReport& rep) {
  rep.write_csv(m.dir() / "report.csv");
  auto os = open_out(m.dir() / "report.json");
  os << rep.to_json() << '\n';
  m.artifact("report.csv");
  m.artifact("report.json");
}

void dump_fields(Manifest& m, const solver::Trajectory& tr, int stride) {
  fs::create_directories(m.dir() / "fields");
  const std::size_t last = tr.u.size() - 1;
  for (std::size_t j = 0; j <= last; ++j) {
    const bool take = stride > 0 ? (j % static_cast<std::size_t>(stride) == 0 || j == last) : j == last;
    if (!take) continue;
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << j;
    const fs::path u = fs::path("fields") / ("u_" + name.str() + ".dkg");
    const fs::path w = fs::path("fields") / ("W_" + name.str() + ".dkg");
    write_dump(m.dir() / u, tr.u[j]);
    write_dump(m.dir() / w, tr.W[j]);
    m.artifact(u);
    m.artifact(w);
  }
}

void write_trajectory(Manifest& m, const config::Settings& s, const solver::Trajectory& tr) {
  write_norm_series(m.dir() / "norms.csv", tr, s.run.s);
  m.artifact("norms.csv");
  write_sweeps(m.dir() / "sweeps.csv", tr.sweeps);
  m.artifact("sweeps.csv");
  tr.path.write_csv(m.dir() / "path.csv");
  m.artifact("path.csv");
  write_report(m, tr.report);
  dump_fields(m, tr, s.dump_stride);
  m.result("sup_Hs", tr.report.value("sup_Hs"));
  m.result("picard_sweeps", static_cast<int>(tr.sweeps.size()));
  m.result("contraction_ratio_max", tr.report.value("contraction_ratio_max"));
}

int finish_gates(Manifest& m) {
  write_gates(m.dir() / "gates.csv", m.gates());
  m.artifact("gates.csv");
  for (const auto& g : m.gates())
    if (!g.passed()) return ExitCode::failed;
  return ExitCode::ok;
}

int simulate1(Manifest& m, const config::Settings& s) {
  const auto t0 = Clock::now();
  const solver::Setup su = solver::make_setup(s.run);
  const kg::NucleusPath path = solver::make_path(s.run);
  m.add_gates(solver::system1_gates(s.run, su, path));
  finish_gates(m);
  if (s.run.enforce_gates) m.gates().back().require();
  const solver::Trajectory tr = solver::solve_system1(s.run, su, path);
  const double solve = seconds_since(t0);
  m.timing("solve_seconds", solve);
  m.timing("seconds_per_step", solve / static_cast<double>(s.run.steps()));
  write_trajectory(m, s, tr);
  std::cout << "simulate-system1: " << tr.sweeps.size() << " sweeps, sup_t ||u||_H^s = " << tr.report.value("sup_Hs")
            << "\n";
  return ExitCode::ok;
}

int simulate2(Manifest& m, const config::Settings& s) {
  const auto t0 = Clock::now();
  const solver::Setup su = solver::make_setup(s.run);
  m.add_gates(solver::system2_gates(s.run, su));
  finish_gates(m);
  if (s.run.enforce_gates) m.gates().back().require();
  solver::RunConfig cfg = s.run;
  cfg.enforce_gates = false;  // already checked above
  const solver::Trajectory tr = solver::solve_system2(cfg);
  const double solve = seconds_since(t0);
  m.timing("solve_seconds", solve);
  m.timing("seconds_per_step", solve / static_cast<double>(s.run.steps()));
  write_trajectory(m, s, tr);
  auto os = open_out(m.dir() / "q_iterations.csv");
  os << "iteration,z_distance,c2_distance,ratio\n";
  for (const auto& r : tr.q_iterations)
    os << r.iteration << ',' << num(r.z_distance) << ',' << num(r.c2_distance) << ',' << num(r.ratio) << '\n';
  os.close();
  m.artifact("q_iterations.csv");
  m.result("q_iterations", static_cast<int>(tr.q_iterations.size()));
  m.result("sup_q", tr.path.sup_q());
  std::cout << "simulate-system2: " << tr.q_iterations.size() << " nucleus iterations, sup|q| = " << tr.path.sup_q()
            << "\n";
  return ExitCode::ok;
}

int gate_report(Manifest& m, const config::Settings& s) {
  const solver::Setup su = solver::make_setup(s.run);
  if (s.system == 1)
    m.add_gates(solver::system1_gates(s.run, su, solver::make_path(s.run)));
  else
    m.add_gates(solver::system2_gates(s.run, su));
  const int code = finish_gates(m);
  for (const auto& g : m.gates())
    for (const auto& c : g.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << g.label << ": " << c.hypothesis << "  value " << c.value
                << "  threshold " << c.threshold << "  margin " << c.margin << "\n";
  if (const auto* f = m.gates().back().first_failure()) m.message("hypothesis " + f->hypothesis + " violated");
  return code;
}

int verify_decomposition(Manifest& m, const config::Settings& s) {
  const auto levels = check_decomposition(s.run, s.decomp_levels);
  auto os = open_out(m.dir() / "decomposition.csv");
  os << "steps,dt_quad,residual,order,imag_residue\n";
  json rows = json::array();
  for (const auto& l : levels) {
    os << l.steps << ',' << num(l.dt_quad) << ',' << num(l.residual) << ',' << num(l.order) << ','
       << num(l.imag_residue) << '\n';
    rows.push_back({{"steps", l.steps}, {"residual", l.residual}, {"order", l.order}});
    std::cout << "dt_quad = " << l.dt_quad << "  residual " << l.residual << "  order " << l.order << "\n";
  }
  os.close();
  m.artifact("decomposition.csv");
  m.result("levels", rows);
  const auto& last = levels.back();
  const bool pass = last.residual <= s.decomp_tol && last.order >= 1.5 && last.order <= 2.5;
  if (!pass) m.message("decomposition residual or convergence order outside tolerance");
  return pass ? ExitCode::ok : ExitCode::failed;
}

int verify_kernels(Manifest& m, const config::Settings& s) {
  const Grid3 g = s.run.grid();
  struct Row {
    std::string name;
    KernelCheck check;
    bool gating;
  };
  const double sigma = 2.0 * g.dx();
  const std::vector<Row> rows{{"yukawa", check_kernel(g, {}), true},
                              {"boosted_yukawa", check_kernel(g, s.kernel_v), true},
                              {"yukawa_regularized", check_kernel(g, {}, sigma), false},
                              {"boosted_yukawa_regularized", check_kernel(g, s.kernel_v, sigma), false}};
  auto os = open_out(m.dir() / "kernels.csv");
  os << "case,vx,vy,vz,sigma,mismatch,tolerance,passed,gating\n";
  bool pass = true;
  json res = json::array();
  for (const auto& r : rows) {
    const bool ok = r.check.mismatch <= s.kernel_tol;
    if (r.gating) pass = pass && ok;
    os << r.name << ',' << num(r.check.velocity.x) << ',' << num(r.check.velocity.y) << ',' << num(r.check.velocity.z)
       << ',' << num(r.check.sigma) << ',' << num(r.check.mismatch) << ',' << num(s.kernel_tol) << ','
       << (ok ? "true" : "false") << ',' << (r.gating ? "true" : "false") << '\n';
    res.push_back({{"case", r.name}, {"mismatch", r.check.mismatch}, {"passed", ok}, {"gating", r.gating}});
    std::cout << (ok ? "PASS " : "FAIL ") << r.name << (r.gating ? "" : " (informational)") << "  mismatch "
              << r.check.mismatch << "  tolerance " << s.kernel_tol << "\n";
  }
  os.close();
  m.artifact("kernels.csv");
  m.result("kernels", res);
  if (!pass) m.message("kernel mismatch above tolerance");
  return pass ? ExitCode::ok : ExitCode::failed;
}

int decay_fit(Manifest& m, const config::Settings& s) {
  const DecaySeries series = w2_decay_series(s.run, s.decay_t_max, s.decay_dt);
  std::vector<double> t, v;
  for (std::size_t j = 0; j < series.times.size(); ++j)
    if (series.times[j] <= s.decay_t_max + 1e-12) {
      t.push_back(series.times[j]);
      v.push_back(series.sup_norms[j]);
    }
  const norms::DecayFit fit = norms::decay_fit(t, v, s.decay_t_min);
  auto os = open_out(m.dir() / "decay.csv");
  os << "t,W2_inf\n";
  for (std::size_t j = 0; j < t.size(); ++j) os << num(t[j]) << ',' << num(v[j]) << '\n';
  os.close();
  m.artifact("decay.csv");
  m.result("exponent", fit.exponent);
  m.result("std_error", fit.std_error);
  m.result("r_squared", fit.r_squared);
  const bool pass = std::abs(fit.exponent + 1.5) <= s.decay_tol;
  std::cout << "fitted exponent " << fit.exponent << " (+- " << fit.std_error << "), target -1.5 +- " << s.decay_tol
            << (pass ? "  PASS" : "  FAIL") << "\n";
  if (!pass) m.message("decay exponent outside -1.5 +- decay_tol");
  return pass ? ExitCode::ok : ExitCode::failed;
}

int guarded(Manifest& m, const std::function<int()>& body) {
  try {
    return body();
  } catch (const GateError& e) {
    m.message(e.what());
    std::cerr << "refused: " << e.what() << "\n";
    return ExitCode::failed;
  } catch (const BallViolation& e) {
    m.message(e.what());
    std::cerr << "ball violation: " << e.what() << "\n";
    return ExitCode::failed;
  } catch (const DivergenceError& e) {
    m.message(e.what());
    std::cerr << "divergence: " << e.what() << "\n";
    return ExitCode::failed;
  } catch (const ConfigError& e) {
    m.message(e.what());
    std::cerr << "config error: " << e.what() << "\n";
    return ExitCode::bad_input;
  } catch (const UsageError& e) {
    m.message(e.what());
    std::cerr << "usage error: " << e.what() << "\n";
    return ExitCode::bad_input;
  } catch (const std::exception& e) {
    m.message(e.what());
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode::runtime_failure;
  }
}

bool prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"simulate-system1", "simulate-system2", "verify-decomposition",
                                          "verify-kernels",   "decay-fit",        "gate-report"};
  return c;
}

int run(const std::string& command, const fs::path& config_path, const Options& opt) {
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    std::cerr << "usage error: unknown command " << command << "\n";
    return ExitCode::bad_input;
  }
  if (!prepare_dir(opt.out_dir)) return ExitCode::runtime_failure;
  Manifest m(opt.out_dir, command);
  const auto t0 = Clock::now();
  const int code = guarded(m, [&] {
    config::Settings s = config::load(config_path);
    if (opt.seed) s.seed = *opt.seed;
    if (opt.threads) {
      if (*opt.threads < 1) throw ConfigError("threads must be >= 1");
      s.threads = *opt.threads;
    }
    config::apply_seed(s);
    set_fft_threads(s.threads);
    m.set_config(s, read_text(config_path));
    if (command == "simulate-system1") return simulate1(m, s);
    if (command == "simulate-system2") return simulate2(m, s);
    if (command == "gate-report") return gate_report(m, s);
    if (command == "verify-decomposition") return verify_decomposition(m, s);
    if (command == "verify-kernels") return verify_kernels(m, s);
    return decay_fit(m, s);
  });
  m.timing("total_seconds", seconds_since(t0));
  m.write(code);
  return code;
}

// -- compare ------------------------------------------------------------------

namespace {

fs::path run_dir(const fs::path& p) { return fs::is_directory(p) ? p : p.parent_path(); }

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw DataError("malformed number " + s);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("malformed number " + s);
  }
}

double config_number(const json& manifest, const char* key) {
  if (!manifest.contains("config") || !manifest["config"].contains(key))
    throw UsageError(std::string("manifest lacks config key ") + key);
  return cell(manifest["config"][key].get<std::string>());
}

}  // namespace

int compare(const fs::path& a, const fs::path& b, const Options& opt) {
  if (!prepare_dir(opt.out_dir)) return ExitCode::runtime_failure;
  Manifest m(opt.out_dir, "compare");
  const auto t0 = Clock::now();
  const int code = guarded(m, [&] {
    const fs::path da = run_dir(a), db = run_dir(b);
    const std::string ta = read_text(da / "manifest.json"), tb = read_text(db / "manifest.json");
    m.set_inputs_hash(git_blob_hash(ta + tb));
    const json ma = json::parse(ta), mb = json::parse(tb);
    for (const char* key : {"n", "L", "T"})
      if (config_number(ma, key) != config_number(mb, key))
        throw UsageError(std::string("incompatible runs: ") + key + " differs");
    const double dta = config_number(ma, "dt"), dtb = config_number(mb, "dt");
    const double s = config_number(ma, "s");
    const auto na = read_csv(da / "norms.csv"), nb = read_csv(db / "norms.csv");
    std::map<long long, std::size_t> index_b;
    const double quantum = std::min(dta, dtb) * 1e-6;
    for (std::size_t j = 0; j < nb.size(); ++j) index_b[std::llround(cell(nb[j][0]) / quantum)] = j;

    auto os = open_out(opt.out_dir / "compare.csv");
    os << "t,Hs_a,Hs_b,Hs_delta,field_distance\n";
    double max_delta = 0.0, max_field = 0.0, sup_a = 0.0, sup_b = 0.0;
    for (std::size_t j = 0; j < na.size(); ++j) {
      const double t = cell(na[j][0]);
      const auto it = index_b.find(std::llround(t / quantum));
      if (it == index_b.end()) continue;
      const double ha = cell(na[j][1]), hb = cell(nb[it->second][1]);
      sup_a = std::max(sup_a, ha);
      sup_b = std::max(sup_b, hb);
      double field = std::nan("");
      std::ostringstream fa, fb;
      fa << "u_" << std::setw(6) << std::setfill('0') << j << ".dkg";
      fb << "u_" << std::setw(6) << std::setfill('0') << it->second << ".dkg";
      const fs::path pa = da / "fields" / fa.str(), pb = db / "fields" / fb.str();
      if (fs::exists(pa) && fs::exists(pb)) {
        const auto ua = std::get<SpinorField>(read_dump(pa));
        const auto ub = std::get<SpinorField>(read_dump(pb));
        require_same_grid(ua.grid, ub.grid, "compare");
        field = norms::sobolev_norm(ua - ub, s);
        max_field = std::max(max_field, field);
      }
      max_delta = std::max(max_delta, std::abs(ha - hb));
      os << num(t) << ',' << num(ha) << ',' << num(hb) << ',' << num(std::abs(ha - hb)) << ',' << num(field) << '\n';
    }
    os.close();
    m.artifact("compare.csv");

    if (fs::exists(da / "report.csv") && fs::exists(db / "report.csv")) {
      std::map<std::string, double> rb;
      for (const auto& r : read_csv(db / "report.csv"))
        if (r.size() >= 3) rb.emplace(r[0], cell(r[2]));
      auto rs = open_out(opt.out_dir / "compare_report.csv");
      rs << "name,a,b,delta\n";
      for (const auto& r : read_csv(da / "report.csv")) {
        if (r.size() < 3 || !rb.count(r[0])) continue;
        const double va = cell(r[2]), vb = rb[r[0]];
        rs << r[0] << ',' << num(va) << ',' << num(vb) << ',' << num(std::abs(va - vb)) << '\n';
      }
      rs.close();
      m.artifact("compare_report.csv");
    }
    m.result("max_Hs_delta", max_delta);
    m.result("sup_Hs_delta", std::abs(sup_a - sup_b));
    m.result("max_field_distance", max_field);
    std::cout << "sup_t ||u||_H^s delta " << std::abs(sup_a - sup_b) << ", max per-node delta " << max_delta
              << ", max field distance " << max_field << "\n";
    return static_cast<int>(ExitCode::ok);
  });
  m.timing("total_seconds", seconds_since(t0));
  m.write(code);
  return code;
}

}  // namespace dkg::harness
