#include "dkg/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

namespace dkg {

Grid3::Grid3(int n, double box_length) : n_(n), length_(box_length) {
  if (n % 2 != 0) throw ConfigError("n must be even (got " + std::to_string(n) + ")");
  if (n < 4) throw ConfigError("n must be at least 4 (got " + std::to_string(n) + ")");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ConfigError("box length L must be positive and finite");
}

Grid3 make_grid(int n, double box_length) { return Grid3(n, box_length); }

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// The FFTW planner is not re-entrant; plans are created once per size under
// this lock and executed through the new-array interface afterwards.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::map<int, PlanPair>& plan_cache() {
  static std::map<int, PlanPair> cache;
  return cache;
}

int& fft_threads() {
  static int t = 1;
  return t;
}

PlanPair plans_for(int n) {
  std::lock_guard lock(planner_mutex());
  auto& cache = plan_cache();
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const std::size_t count = static_cast<std::size_t>(n) * n * n;
  auto* scratch = fftw_alloc_complex(count);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_3d(n, n, n, scratch, scratch, FFTW_FORWARD, flags);
  p.inverse = fftw_plan_dft_3d(n, n, n, scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
  if (p.forward == nullptr || p.inverse == nullptr)
    throw NumericError("FFTW failed to create a plan for n = " + std::to_string(n));
  cache.emplace(n, p);
  return p;
}

}  // namespace

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  threads = std::max(1, threads);
  if (threads == fft_threads()) return;
  static bool initialized = false;
  if (!initialized) {
    fftw_init_threads();
    initialized = true;
  }
  fftw_plan_with_nthreads(threads);
  for (auto& [n, p] : plan_cache()) {
    fftw_destroy_plan(p.forward);
    fftw_destroy_plan(p.inverse);
  }
  plan_cache().clear();
  fft_threads() = threads;
}

void fft_inplace(const Grid3& g, std::span<cplx> data, Direction dir) {
  if (data.size() != g.size()) throw UsageError("fft_inplace: array size does not match grid");
  const PlanPair p = plans_for(g.n());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(dir == Direction::forward ? p.forward : p.inverse, ptr, ptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
  for (auto& v : data) v *= scale;
}

namespace {
Representation target_of(Direction dir) {
  return dir == Direction::forward ? Representation::frequency : Representation::space;
}
void check_direction(Representation rep, Direction dir) {
  if (rep == target_of(dir))
    throw UsageError(dir == Direction::forward
                         ? "forward transform requested on a field already in frequency space"
                         : "inverse transform requested on a field already in physical space");
}
}  // namespace

ScalarField transform(const ScalarField& f, Direction dir) {
  check_direction(f.rep, dir);
  ScalarField out = f;
  fft_inplace(out.grid, out.values, dir);
  out.rep = target_of(dir);
  return out;
}

SpinorField transform(const SpinorField& f, Direction dir) {
  check_direction(f.rep, dir);
  SpinorField out = f;
  for (auto& c : out.comp) fft_inplace(out.grid, c, dir);
  out.rep = target_of(dir);
  return out;
}

namespace detail {
void throw_nonfinite_multiplier(const Vec3& xi) {
  std::ostringstream os;
  os << "multiplier is not finite at xi = (" << xi.x << ", " << xi.y << ", " << xi.z << ")";
  throw NumericError(os.str());
}
}  // namespace detail

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.grid.cell_volume());
}

double l2_norm(const SpinorField& f) {
  double s = 0.0;
  for (const auto& c : f.comp)
    for (const auto& v : c) s += std::norm(v);
  return std::sqrt(s * f.grid.cell_volume());
}

double linf_norm(const ScalarField& f) {
  if (f.rep != Representation::space) throw UsageError("linf_norm needs a physical-space field");
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double linf_norm(const SpinorField& f) {
  if (f.rep != Representation::space) throw UsageError("linf_norm needs a physical-space field");
  double m = 0.0;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    double s = 0.0;
    for (const auto& c : f.comp) s += std::norm(c[i]);
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

cplx inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  if (a.rep != b.rep) throw UsageError("inner: representation mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
  return s * a.grid.cell_volume();
}

cplx inner(const SpinorField& a, const SpinorField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  if (a.rep != b.rep) throw UsageError("inner: representation mismatch");
  cplx s = 0.0;
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < a.grid.size(); ++i) s += std::conj(a.comp[c][i]) * b.comp[c][i];
  return s * a.grid.cell_volume();
}

double imag_residue(const ScalarField& f) {
  double im = 0.0;
  double mag = 0.0;
  for (const auto& v : f.values) {
    im = std::max(im, std::abs(v.imag()));
    mag = std::max(mag, std::abs(v));
  }
  return mag > 0.0 ? im / mag : 0.0;
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values.begin(), f.values.end(), detail::finite);
}

bool all_finite(const SpinorField& f) {
  return std::all_of(f.comp.begin(), f.comp.end(), [](const auto& c) {
    return std::all_of(c.begin(), c.end(), detail::finite);
  });
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* what) {
  if (!(a == b)) throw UsageError(std::string(what) + ": fields live on different grids");
}

namespace {
template <class Weight>
double boundary_fraction(const Grid3& g, int width, Weight&& w) {
  double total = 0.0;
  double shell = 0.0;
  const int n = g.n();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [ix, iy, iz] = g.unflatten(i);
    const double v = w(i);
    total += v;
    const auto edge = [&](int j) { return j < width || j >= n - width; };
    if (edge(ix) || edge(iy) || edge(iz)) shell += v;
  }
  return total > 0.0 ? shell / total : 0.0;
}
}  // namespace

double boundary_mass_fraction(const ScalarField& f, int width) {
  const ScalarField s = to_space(f);
  return boundary_fraction(s.grid, width, [&](std::size_t i) { return std::norm(s.values[i]); });
}

double boundary_mass_fraction(const SpinorField& f, int width) {
  const SpinorField s = to_space(f);
  return boundary_fraction(s.grid, width, [&](std::size_t i) {
    double v = 0.0;
    for (const auto& c : s.comp) v += std::norm(c[i]);
    return v;
  });
}

const std::vector<Vec3>& frequency_table(const Grid3& g) {
  static std::mutex m;
  static std::map<std::pair<int, double>, std::vector<Vec3>> cache;
  std::lock_guard lock(m);
  auto [it, inserted] = cache.try_emplace({g.n(), g.length()});
  if (inserted) {
    it->second.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) it->second[i] = g.frequency(i);
  }
  return it->second;
}

ScalarField translate_nodes(const ScalarField& f, int sx, int sy, int sz) {
  if (f.rep != Representation::space) throw UsageError("translate_nodes needs a physical-space field");
  const Grid3& g = f.grid;
  const int n = g.n();
  const auto wrap = [n](int j) { return ((j % n) + n) % n; };
  ScalarField out(g);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        out.values[g.index(wrap(ix + sx), wrap(iy + sy), wrap(iz + sz))] = f.values[g.index(ix, iy, iz)];
  return out;
}

namespace {
template <class Field>
void check_binary(const Field& a, const Field& b, const char* op) {
  require_same_grid(a.grid, b.grid, op);
  if (a.rep != b.rep) throw UsageError(std::string(op) + ": representation mismatch");
}
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  check_binary(a, b, "operator+");
  ScalarField out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  check_binary(a, b, "operator-");
  ScalarField out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

ScalarField operator*(cplx s, const ScalarField& a) {
  ScalarField out = a;
  for (auto& v : out.values) v *= s;
  return out;
}

SpinorField operator+(const SpinorField& a, const SpinorField& b) {
  check_binary(a, b, "operator+");
  SpinorField out = a;
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < a.grid.size(); ++i) out.comp[c][i] += b.comp[c][i];
  return out;
}

SpinorField operator-(const SpinorField& a, const SpinorField& b) {
  check_binary(a, b, "operator-");
  SpinorField out = a;
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < a.grid.size(); ++i) out.comp[c][i] -= b.comp[c][i];
  return out;
}

SpinorField operator*(cplx s, const SpinorField& a) {
  SpinorField out = a;
  for (auto& c : out.comp)
    for (auto& v : c) v *= s;
  return out;
}

SpinorField multiply(const ScalarField& w, const SpinorField& u) {
  require_same_grid(w.grid, u.grid, "multiply");
  if (w.rep != Representation::space || u.rep != Representation::space)
    throw UsageError("multiply needs physical-space fields");
  SpinorField out = u;
  for (auto& c : out.comp)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w.values[i];
  return out;
}

ScalarField real_part(const ScalarField& f) {
  ScalarField out = f;
  for (auto& v : out.values) v = v.real();
  return out;
}

}  // namespace dkg
