#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dkg/kleingordon.hpp"

namespace dkg::kg {

NucleusPath::NucleusPath(double dt, std::vector<PathState> samples, double mass, Analytic analytic)
    : dt_(dt), samples_(std::move(samples)), mass_(mass), analytic_(std::move(analytic)) {
  if (!(dt > 0.0)) throw ConfigError("path time step must be positive");
  if (samples_.size() < 2) throw ConfigError("a nucleus path needs at least two samples");
  if (!(mass > 0.0)) throw ConfigError("nucleus mass must be positive");
}

namespace {
std::size_t sample_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw ConfigError("path horizon and dt must be positive");
  const double k = horizon / dt;
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9 * std::max(1.0, kr)) throw ConfigError("dt must divide the path horizon");
  return static_cast<std::size_t>(kr) + 1;
}

NucleusPath from_function(const NucleusPath::Analytic& f, double horizon, double dt, double mass) {
  const std::size_t count = sample_count(horizon, dt);
  std::vector<PathState> s(count);
  for (std::size_t j = 0; j < count; ++j) s[j] = f(dt * static_cast<double>(j));
  return NucleusPath(dt, std::move(s), mass, f);
}
}  // namespace

NucleusPath NucleusPath::at_rest(double horizon, double dt, double mass) {
  return from_function([](double) { return PathState{}; }, horizon, dt, mass);
}

NucleusPath NucleusPath::inertial(const Vec3& v0, double horizon, double dt, double mass) {
  return from_function([v0](double t) { return PathState{t * v0, v0, {}}; }, horizon, dt, mass);
}

NucleusPath NucleusPath::oscillating(const Vec3& amplitude, double omega, double horizon, double dt,
                                     double mass) {
  return from_function(
      [amplitude, omega](double t) {
        const double s = std::sin(omega * t);
        const double c = std::cos(omega * t);
        return PathState{s * amplitude, (omega * c) * amplitude, (-omega * omega * s) * amplitude};
      },
      horizon, dt, mass);
}

PathState NucleusPath::state_at(double t) const {
  const double T = horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (!(t >= -slack) || t > T + slack) {
    std::ostringstream os;
    os << "time " << t << " is outside the nucleus path [0, " << T << "]";
    throw RangeError(os.str());
  }
  t = std::clamp(t, 0.0, T);
  if (analytic_) return analytic_(t);
  const double pos = t / dt_;
  std::size_t j = static_cast<std::size_t>(std::floor(pos));
  if (j >= samples_.size() - 1) j = samples_.size() - 2;
  const double h = dt_;
  const double s = pos - static_cast<double>(j);
  const PathState& a = samples_[j];
  const PathState& b = samples_[j + 1];
  if (s == 0.0) return a;
  // Cubic Hermite on (q, qdot) for q; linear for the derivatives.
  const double h00 = 2 * s * s * s - 3 * s * s + 1;
  const double h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s;
  const double h11 = s * s * s - s * s;
  PathState out;
  out.q = h00 * a.q + (h10 * h) * a.qdot + h01 * b.q + (h11 * h) * b.qdot;
  out.qdot = (1.0 - s) * a.qdot + s * b.qdot;
  out.qddot = (1.0 - s) * a.qddot + s * b.qddot;
  return out;
}

double NucleusPath::qddot_l1() const {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < samples_.size(); ++j)
    acc += 0.5 * dt_ * (norm(samples_[j].qddot) + norm(samples_[j + 1].qddot));
  return acc;
}

double NucleusPath::sup_qdot() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, norm(s.qdot));
  return m;
}

double NucleusPath::sup_q() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, norm(s.q));
  return m;
}

void NucleusPath::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << "t,qx,qy,qz,vx,vy,vz,ax,ay,az\n";
  os << std::setprecision(17);
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    const auto& s = samples_[j];
    os << time(j) << ',' << s.q.x << ',' << s.q.y << ',' << s.q.z << ',' << s.qdot.x << ','
       << s.qdot.y << ',' << s.qdot.z << ',' << s.qddot.x << ',' << s.qddot.y << ',' << s.qddot.z
       << '\n';
  }
}

NucleusPath NucleusPath::from_csv(const std::filesystem::path& path, double mass) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open path file " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw DataError(path.string() + ": empty path file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,qx,qy,qz,vx,vy,vz,ax,ay,az")
    throw DataError(path.string() + ": expected header t,qx,qy,qz,vx,vy,vz,ax,ay,az");
  std::vector<double> times;
  std::vector<PathState> samples;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::array<double, 10> v{};
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (!std::getline(ss, cell, ','))
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 10 columns");
      try {
        v[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": not a number: " + cell);
      }
    }
    times.push_back(v[0]);
    samples.push_back({{v[1], v[2], v[3]}, {v[4], v[5], v[6]}, {v[7], v[8], v[9]}});
  }
  if (samples.size() < 2) throw DataError(path.string() + ": need at least two samples");
  const double dt = times[1] - times[0];
  if (std::abs(times[0]) > 1e-12 || !(dt > 0.0)) throw DataError(path.string() + ": times must start at 0 and increase");
  for (std::size_t j = 0; j < times.size(); ++j)
    if (std::abs(times[j] - dt * static_cast<double>(j)) > 1e-9 * std::max(1.0, dt * j))
      throw DataError(path.string() + ": non-uniform time grid at row " + std::to_string(j + 2));
  return NucleusPath(dt, std::move(samples), mass);
}

}  // namespace dkg::kg
