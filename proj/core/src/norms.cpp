#include "avsamp/norms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "avsamp/coefficients.hpp"

namespace avsamp {

MixedExponents::MixedExponents(double p_, double q_) : p(p_), q(q_) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponents: p must satisfy 1 <= p < inf");
  if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("exponents: q must satisfy 1 <= q < inf");
}

namespace {

inline double powabs(double v, double e) {
  const double a = std::abs(v);
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  return std::pow(a, e);
}

inline double root(double v, double e) {
  if (e == 1.0) return v;
  if (e == 2.0) return std::sqrt(v);
  return std::pow(v, 1.0 / e);
}

// For a fixed x cell, flat offsets within the y block map to unit-cell ids.
std::vector<long> y_block_ids(const GridSpec& spec, long& n_blocks) {
  const long ny = spec.size() / spec.cells(0);
  std::vector<long> ids(static_cast<std::size_t>(ny));
  n_blocks = 1;
  for (int a = 1; a < spec.dims(); ++a) n_blocks *= spec.period(a);
  for (long y = 0; y < ny; ++y) {
    long rem = y;
    long id = 0;
    for (int a = 1; a < spec.dims(); ++a) {
      const long c = rem / spec.stride(a);
      rem %= spec.stride(a);
      id = id * spec.period(a) + c / spec.m();
    }
    ids[static_cast<std::size_t>(y)] = id;
  }
  return ids;
}

// out[i] = max (or min) of line[i - r .. i + r], periodic. Monotone deque.
void sliding_extreme(const std::vector<double>& line, long r, bool take_max, std::vector<double>& out) {
  const long n = static_cast<long>(line.size());
  out.resize(line.size());
  std::deque<long> dq;  // positions in the extended sequence [-r, n + r)
  auto value = [&](long pos) { return line[static_cast<std::size_t>(((pos % n) + n) % n)]; };
  auto better = [&](double a, double b) { return take_max ? a >= b : a <= b; };
  for (long pos = -r; pos < n + r; ++pos) {
    const double v = value(pos);
    while (!dq.empty() && better(v, value(dq.back()))) dq.pop_back();
    dq.push_back(pos);
    const long centre = pos - r;
    if (centre >= 0) {
      while (dq.front() < centre - r) dq.pop_front();
      out[static_cast<std::size_t>(centre)] = value(dq.front());
    }
  }
}

// Separable box-window max/min filter over all axes.
DiscreteField window_extreme(const DiscreteField& f, long r, bool take_max) {
  const GridSpec& spec = f.spec();
  DiscreteField cur = f;
  std::vector<double> line, out;
  for (int a = 0; a < spec.dims(); ++a) {
    const long n = spec.cells(a);
    const long stride = spec.stride(a);
    const long outer = spec.size() / (n * stride);
    line.resize(static_cast<std::size_t>(n));
    for (long o = 0; o < outer; ++o) {
      for (long inner = 0; inner < stride; ++inner) {
        const long base = o * n * stride + inner;
        for (long i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = cur[base + i * stride];
        sliding_extreme(line, r, take_max, out);
        for (long i = 0; i < n; ++i) cur[base + i * stride] = out[static_cast<std::size_t>(i)];
      }
    }
  }
  return cur;
}

}  // namespace

double mixed_lebesgue_norm(const DiscreteField& f, const MixedExponents& e) {
  const GridSpec& spec = f.spec();
  const long nx = spec.cells(0);
  const long ny = spec.size() / nx;
  const double hy = std::pow(spec.h(), spec.d());
  double outer = 0.0;
  for (long x = 0; x < nx; ++x) {
    double inner = 0.0;
    for (long y = 0; y < ny; ++y) inner += powabs(f[x * ny + y], e.q);
    inner *= hy;
    outer += (e.p == e.q ? inner : std::pow(inner, e.p / e.q)) * spec.h();
  }
  return root(outer, e.p);
}

double mixed_seq_norm(const CoefficientArray& c, int i, const MixedExponents& e) {
  if (i < 0 || i >= c.r()) throw std::out_of_range("mixed_seq_norm: generator index out of range");
  auto entries = c.generator(i);
  const long n1 = c.extents()[0];
  const long n2 = c.sites() / n1;
  double outer = 0.0;
  for (long k1 = 0; k1 < n1; ++k1) {
    double inner = 0.0;
    for (long k2 = 0; k2 < n2; ++k2) inner += powabs(entries[static_cast<std::size_t>(k1 * n2 + k2)], e.q);
    outer += e.p == e.q ? inner : std::pow(inner, e.p / e.q);
  }
  return root(outer, e.p);
}

double wiener_amalgam_norm(const DiscreteField& f, const MixedExponents& e) {
  const GridSpec& spec = f.spec();
  long n_blocks = 0;
  const std::vector<long> ids = y_block_ids(spec, n_blocks);
  const long nx = spec.cells(0);
  const long ny = spec.size() / nx;
  std::vector<double> block_max(static_cast<std::size_t>(n_blocks));
  double outer = 0.0;
  for (long n = 0; n < spec.period(0); ++n) {
    double best = 0.0;
    for (long x = n * spec.m(); x < (n + 1) * spec.m(); ++x) {
      std::fill(block_max.begin(), block_max.end(), 0.0);
      for (long y = 0; y < ny; ++y) {
        double& slot = block_max[static_cast<std::size_t>(ids[static_cast<std::size_t>(y)])];
        slot = std::max(slot, std::abs(f[x * ny + y]));
      }
      double inner = 0.0;
      for (double v : block_max) inner += powabs(v, e.q);
      best = std::max(best, inner);
    }
    outer += e.p == e.q ? best : std::pow(best, e.p / e.q);
  }
  return root(outer, e.p);
}

long oscillation_radius(const GridSpec& spec, double delta) {
  // Grid offsets j with |j| h <= delta; the epsilon absorbs delta = k h exactly.
  return static_cast<long>(std::floor(delta * spec.m() * (1.0 + 1e-12) + 1e-12));
}

DiscreteField oscillation(const DiscreteField& f, double delta) {
  const GridSpec& spec = f.spec();
  if (!(delta > 0.0)) throw std::invalid_argument("oscillation: delta must be positive");
  if (delta > spec.min_period() / 4.0)
    throw std::invalid_argument("oscillation: delta " + std::to_string(delta) + " exceeds min period / 4");
  const long r = oscillation_radius(spec, delta);
  if (r == 0) return DiscreteField(spec);
  const DiscreteField hi = window_extreme(f, r, true);
  const DiscreteField lo = window_extreme(f, r, false);
  DiscreteField out(spec);
  for (long i = 0; i < spec.size(); ++i) out[i] = std::max(hi[i] - f[i], f[i] - lo[i]);
  return out;
}

}  // namespace avsamp
