#include "dkg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

extern char** environ;

namespace dkg::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(out)) bad(key, v, "a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) bad(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(key, v, "a boolean");
}

std::vector<std::string> split(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
  const auto parts = split(v);
  if (parts.size() != 3) bad(key, v, "three comma-separated numbers");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
}

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string vec(const Vec3& v) { return num(v.x) + "," + num(v.y) + "," + num(v.z); }
std::string boolean(bool b) { return b ? "true" : "false"; }

struct Key {
  std::string name;
  std::function<void(Settings&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

#define DKG_DOUBLE(k, field)                                                            \
  Key {                                                                                 \
    k, [](Settings& s, const std::string& v) { s.field = to_double(k, v); },            \
        [](const Settings& s) { return num(s.field); }                                  \
  }
#define DKG_INT(k, field)                                                               \
  Key {                                                                                 \
    k, [](Settings& s, const std::string& v) { s.field = static_cast<int>(to_int(k, v)); }, \
        [](const Settings& s) { return std::to_string(s.field); }                       \
  }
#define DKG_BOOL(k, field)                                                              \
  Key {                                                                                 \
    k, [](Settings& s, const std::string& v) { s.field = to_bool(k, v); },              \
        [](const Settings& s) { return boolean(s.field); }                              \
  }
#define DKG_VEC(k, field)                                                               \
  Key {                                                                                 \
    k, [](Settings& s, const std::string& v) { s.field = to_vec3(k, v); },              \
        [](const Settings& s) { return vec(s.field); }                                  \
  }

const std::vector<Key>& table() {
  static const std::vector<Key> keys = {
      DKG_INT("n", run.n),
      DKG_DOUBLE("L", run.L),
      DKG_DOUBLE("T", run.T),
      DKG_DOUBLE("dt", run.dt),
      DKG_DOUBLE("p", run.p),
      DKG_DOUBLE("s", run.s),
      DKG_DOUBLE("N", run.N),
      DKG_DOUBLE("M", run.M),
      DKG_VEC("v0", run.v0),
      DKG_DOUBLE("eps_soft", run.eps_soft),
      DKG_DOUBLE("picard_tol", run.picard_tol),
      DKG_INT("picard_max_iters", run.picard_max_iters),
      DKG_DOUBLE("q_tol", run.q_tol),
      DKG_INT("q_max_iters", run.q_max_iters),
      DKG_BOOL("nonlinearity", run.nonlinearity),
      DKG_BOOL("coupling", run.coupling),
      Key{"chi_profile",
          [](Settings& s, const std::string& v) {
            const std::string t = trim(v);
            if (t == "gaussian") s.run.chi.kind = kg::ProfileKind::gaussian;
            else if (t == "bump") s.run.chi.kind = kg::ProfileKind::bump;
            else bad("chi_profile", v, "gaussian or bump");
          },
          [](const Settings& s) {
            return std::string(s.run.chi.kind == kg::ProfileKind::gaussian ? "gaussian" : "bump");
          }},
      DKG_DOUBLE("chi_amplitude", run.chi.amplitude),
      DKG_DOUBLE("chi_width", run.chi.width),
      DKG_DOUBLE("delta", run.delta),
      DKG_DOUBLE("w0_amplitude", run.w0.amplitude),
      DKG_DOUBLE("w0_width", run.w0.width),
      DKG_VEC("w0_center", run.w0.center),
      DKG_DOUBLE("w1_amplitude", run.w1.amplitude),
      DKG_DOUBLE("w1_width", run.w1.width),
      DKG_VEC("w1_center", run.w1.center),
      DKG_DOUBLE("u0_amplitude", run.u0.amplitude),
      DKG_DOUBLE("u0_width", run.u0.width),
      DKG_VEC("u0_center", run.u0.center),
      Key{"u0_polarization",
          [](Settings& s, const std::string& v) {
            if (trim(v) == "random") {
              s.random_polarization = true;
              return;
            }
            const auto parts = split(v);
            if (parts.size() != 4) bad("u0_polarization", v, "four comma-separated numbers or 'random'");
            s.random_polarization = false;
            for (int c = 0; c < 4; ++c) s.run.u0.polarization[c] = to_double("u0_polarization", parts[c]);
          },
          [](const Settings& s) {
            if (s.random_polarization) return std::string("random");
            std::string out;
            for (int c = 0; c < 4; ++c) {
              const cplx z = s.run.u0.polarization[c];
              if (c) out += ",";
              out += num(z.real());
              if (z.imag() != 0.0) out += (z.imag() > 0 ? "+" : "") + num(z.imag()) + "i";
            }
            return out;
          }},
      DKG_DOUBLE("u0_phase", run.u0.phase),
      Key{"path",
          [](Settings& s, const std::string& v) {
            const std::string t = trim(v);
            if (t == "rest") s.run.path_kind = solver::PathKind::rest;
            else if (t == "inertial") s.run.path_kind = solver::PathKind::inertial;
            else if (t == "oscillating") s.run.path_kind = solver::PathKind::oscillating;
            else if (t == "file") s.run.path_kind = solver::PathKind::file;
            else bad("path", v, "rest, inertial, oscillating or file");
          },
          [](const Settings& s) {
            switch (s.run.path_kind) {
              case solver::PathKind::rest: return std::string("rest");
              case solver::PathKind::inertial: return std::string("inertial");
              case solver::PathKind::oscillating: return std::string("oscillating");
              case solver::PathKind::file: return std::string("file");
            }
            return std::string("rest");
          }},
      DKG_VEC("path_amplitude", run.path_amplitude),
      DKG_DOUBLE("path_omega", run.path_omega),
      Key{"path_file", [](Settings& s, const std::string& v) { s.run.path_file = trim(v); },
          [](const Settings& s) { return s.run.path_file; }},
      Key{"w_mode",
          [](Settings& s, const std::string& v) {
            const std::string t = trim(v);
            if (t == "decomposition") s.run.w_mode = kg::WMode::decomposition;
            else if (t == "direct") s.run.w_mode = kg::WMode::direct;
            else bad("w_mode", v, "decomposition or direct");
          },
          [](const Settings& s) {
            return std::string(s.run.w_mode == kg::WMode::decomposition ? "decomposition" : "direct");
          }},
      DKG_INT("quad_substeps", run.quad_substeps),
      DKG_BOOL("theorem_compliant", run.theorem_compliant),
      DKG_BOOL("enforce_gates", run.enforce_gates),
      DKG_DOUBLE("horizon_eta", run.horizon_eta),
      DKG_DOUBLE("gate_chi", run.thresholds.chi),
      DKG_DOUBLE("gate_chi_weighted", run.thresholds.chi_weighted),
      DKG_DOUBLE("gate_w0", run.thresholds.w0),
      DKG_DOUBLE("gate_w1", run.thresholds.w1),
      DKG_DOUBLE("gate_u0", run.thresholds.u0),
      DKG_DOUBLE("gate_potential", run.thresholds.potential),
      Key{"seed",
          [](Settings& s, const std::string& v) {
            const long long x = to_int("seed", v);
            if (x < 0) bad("seed", v, "a nonnegative integer");
            s.seed = static_cast<std::uint64_t>(x);
          },
          [](const Settings& s) { return std::to_string(s.seed); }},
      DKG_INT("threads", threads),
      DKG_INT("dump_stride", dump_stride),
      DKG_INT("system", system),
      DKG_DOUBLE("decay_t_min", decay_t_min),
      DKG_DOUBLE("decay_t_max", decay_t_max),
      DKG_DOUBLE("decay_dt", decay_dt),
      DKG_DOUBLE("decay_tol", decay_tol),
      DKG_VEC("kernel_v", kernel_v),
      DKG_DOUBLE("kernel_tol", kernel_tol),
      Key{"decomp_levels",
          [](Settings& s, const std::string& v) {
            std::vector<int> out;
            for (const auto& part : split(v)) {
              const long long x = to_int("decomp_levels", part);
              if (x < 1) bad("decomp_levels", v, "positive integers");
              out.push_back(static_cast<int>(x));
            }
            if (out.size() < 2) bad("decomp_levels", v, "at least two step counts");
            s.decomp_levels = std::move(out);
          },
          [](const Settings& s) {
            std::string out;
            for (std::size_t i = 0; i < s.decomp_levels.size(); ++i)
              out += (i ? "," : "") + std::to_string(s.decomp_levels[i]);
            return out;
          }},
      DKG_DOUBLE("decomp_tol", decomp_tol),
  };
  return keys;
}

#undef DKG_DOUBLE
#undef DKG_INT
#undef DKG_BOOL
#undef DKG_VEC

const Key* find(const std::string& name) {
  for (const auto& k : table())
    if (k.name == name) return &k;
  return nullptr;
}

std::string env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void validate_extras(const Settings& s) {
  if (s.threads < 1) throw ConfigError("threads must be >= 1");
  if (s.dump_stride < 0) throw ConfigError("dump_stride must be >= 0");
  if (s.system != 1 && s.system != 2) throw ConfigError("system must be 1 or 2");
  if (!(s.decay_dt > 0.0) || !(s.decay_t_max > s.decay_t_min) || s.decay_t_min < 0.0)
    throw ConfigError("decay window needs 0 <= decay_t_min < decay_t_max and decay_dt > 0");
  if (!(s.decay_tol > 0.0) || !(s.kernel_tol > 0.0) || !(s.decomp_tol > 0.0))
    throw ConfigError("tolerances must be positive");
}

}  // namespace

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys{"n", "L", "T", "dt"};
  return keys;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : table()) out.push_back(k.name);
  return out;
}

void set(Settings& s, const std::string& key, const std::string& value) {
  const Key* k = find(key);
  if (!k) throw ConfigError("unknown config key: " + key);
  k->set(s, value);
}

Settings parse(const std::string& text, bool apply_env) {
  Settings s;
  std::set<std::string> seen;
  std::vector<std::string> unknown;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!find(key)) {
      unknown.push_back(key);
      continue;
    }
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
    set(s, key, value);
  }
  if (apply_env) {
    for (char** e = environ; e && *e; ++e) {
      const std::string entry(*e);
      if (entry.rfind(kEnvPrefix, 0) != 0) continue;
      const auto eq = entry.find('=');
      const std::string name = entry.substr(0, eq);
      // DKG_n and DKG_N both upper-case to DKG_N: an exact-case key wins.
      const Key* match = find(name.substr(std::string(kEnvPrefix).size()));
      if (!match) {
        int hits = 0;
        for (const auto& k : table())
          if (env_name(k.name) == name) {
            match = &k;
            ++hits;
          }
        if (hits > 1) throw ConfigError(name + " is ambiguous between keys differing only in case");
      }
      if (!match) {
        unknown.push_back(name + " (environment)");
        continue;
      }
      match->set(s, eq == std::string::npos ? std::string() : entry.substr(eq + 1));
      seen.insert(match->name);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  std::vector<std::string> missing;
  for (const auto& r : required_keys())
    if (!seen.count(r)) missing.push_back(r);
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& m : missing) msg += " " + m;
    msg += " (n, L, T and dt have no defaults; every other key falls back to its documented default)";
    throw ConfigError(msg);
  }
  validate_extras(s);
  s.run.validate();
  return s;
}

Settings load(const std::filesystem::path& file, bool apply_env) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), apply_env);
}

std::vector<std::pair<std::string, std::string>> echo_pairs(const Settings& s) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : table()) out.emplace_back(k.name, k.get(s));
  return out;
}

std::string echo(const Settings& s) {
  std::string out;
  for (const auto& [k, v] : echo_pairs(s)) out += k + " = " + v + "\n";
  return out;
}

void apply_seed(Settings& s) {
  if (!s.random_polarization) return;
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& c : s.run.u0.polarization) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    c = cplx{re, im};
  }
}

}  // namespace dkg::config
