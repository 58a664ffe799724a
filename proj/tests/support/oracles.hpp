// Brute-force reference implementations used by the tests. They share no code
// with the library beyond the data containers and index helpers.

#ifndef AVSAMP_TESTS_ORACLES_HPP
#define AVSAMP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "avsamp/coefficients.hpp"
#include "avsamp/grid.hpp"
#include "avsamp/kernel.hpp"
#include "avsamp/norms.hpp"
#include "avsamp/random.hpp"
#include "avsamp/sampling.hpp"

namespace oracle {

using avsamp::CoefficientArray;
using avsamp::DiscreteField;
using avsamp::GridSpec;
using avsamp::Index;

inline long mod(long a, long n) { return ((a % n) + n) % n; }

inline DiscreteField random_field(const GridSpec& spec, std::uint64_t seed) {
  avsamp::Rng rng(seed);
  DiscreteField f(spec);
  for (double& v : f.values()) v = rng.uniform(-1.0, 1.0);
  return f;
}

// O(N^2) periodic convolution straight from the definition.
inline DiscreteField convolve(const DiscreteField& f, const DiscreteField& g) {
  const GridSpec& spec = f.spec();
  DiscreteField out(spec);
  for (long i = 0; i < spec.size(); ++i) {
    const Index xi = spec.unflat(i);
    double acc = 0.0;
    for (long j = 0; j < spec.size(); ++j) {
      const Index xj = spec.unflat(j);
      Index diff(xi.size());
      for (std::size_t a = 0; a < xi.size(); ++a) diff[a] = mod(xi[a] - xj[a], spec.cells(static_cast<int>(a)));
      acc += f[j] * g[spec.flat(diff)];
    }
    out[i] = acc * std::pow(spec.h(), spec.dims());
  }
  return out;
}

// Value at x = k * h (cell index k along each axis, not the midpoint).
inline double value_at_reflection(const DiscreteField& f, const Index& k) {
  const GridSpec& spec = f.spec();
  Index r(k.size());
  for (std::size_t a = 0; a < k.size(); ++a) r[a] = mod(-k[a] - 1, spec.cells(static_cast<int>(a)));
  return f[spec.flat(r)];
}

// Two-stage nested sums over explicit (x, y...) indices.
inline double mixed_lebesgue_norm(const DiscreteField& f, double p, double q) {
  const GridSpec& spec = f.spec();
  std::vector<double> inner(static_cast<std::size_t>(spec.cells(0)), 0.0);
  for (long i = 0; i < spec.size(); ++i) {
    const Index x = spec.unflat(i);
    inner[static_cast<std::size_t>(x[0])] += std::pow(std::abs(f[i]), q) * std::pow(spec.h(), spec.d());
  }
  double outer = 0.0;
  for (double v : inner) outer += std::pow(v, p / q) * spec.h();
  return std::pow(outer, 1.0 / p);
}

inline double mixed_seq_norm(const CoefficientArray& c, int i, double p, double q) {
  std::vector<double> inner(static_cast<std::size_t>(c.extents()[0]), 0.0);
  for (long s = 0; s < c.sites(); ++s) inner[static_cast<std::size_t>(c.site_index(s)[0])] += std::pow(std::abs(c(i, s)), q);
  double outer = 0.0;
  for (double v : inner) outer += std::pow(v, p / q);
  return std::pow(outer, 1.0 / p);
}

// For every unit x-interval: max over its x cells of the sum over unit
// y-blocks of (max over the block's y cells of |f|)^q.
inline double wiener_amalgam_norm(const DiscreteField& f, double p, double q) {
  const GridSpec& spec = f.spec();
  const int m = spec.m();
  double outer = 0.0;
  for (long n = 0; n < spec.period(0); ++n) {
    double best = 0.0;
    for (long x = n * m; x < (n + 1) * m; ++x) {
      // Enumerate unit y-blocks and scan every cell of each.
      long blocks = 1;
      for (int a = 1; a < spec.dims(); ++a) blocks *= spec.period(a);
      double sum = 0.0;
      for (long b = 0; b < blocks; ++b) {
        Index block(static_cast<std::size_t>(spec.dims()), 0);
        long rem = b;
        for (int a = spec.dims() - 1; a >= 1; --a) {
          block[a] = rem % spec.period(a);
          rem /= spec.period(a);
        }
        double mx = 0.0;
        for (long i = 0; i < spec.size(); ++i) {
          const Index c = spec.unflat(i);
          if (c[0] != x) continue;
          bool inside = true;
          for (int a = 1; a < spec.dims(); ++a) inside = inside && c[a] / m == block[a];
          if (inside) mx = std::max(mx, std::abs(f[i]));
        }
        sum += std::pow(mx, q);
      }
      best = std::max(best, sum);
    }
    outer += std::pow(best, p / q);
  }
  return std::pow(outer, 1.0 / p);
}

// Exhaustive window scan, O(window^(d+1) N).
inline DiscreteField oscillation(const DiscreteField& f, double delta) {
  const GridSpec& spec = f.spec();
  const long r = static_cast<long>(std::floor(delta * spec.m() + 1e-9));
  DiscreteField out(spec);
  const int dims = spec.dims();
  long window = 1;
  for (int a = 0; a < dims; ++a) window *= 2 * r + 1;
  for (long i = 0; i < spec.size(); ++i) {
    const Index c = spec.unflat(i);
    double best = 0.0;
    for (long w = 0; w < window; ++w) {
      long rem = w;
      Index o(c);
      for (int a = 0; a < dims; ++a) {
        o[a] = mod(c[a] + rem % (2 * r + 1) - r, spec.cells(a));
        rem /= 2 * r + 1;
      }
      best = std::max(best, std::abs(f[spec.flat(o)] - f[i]));
    }
    out[i] = best;
  }
  return out;
}

// Direct evaluation of a kernel at every midpoint, summing all periodic images
// within reach (the support is smaller than the period, so at most one hits).
inline double kernel_at(const avsamp::KernelSpec& k, const GridSpec& spec, const Index& cell) {
  double total = 0.0;
  const int dims = spec.dims();
  long images = 1;
  for (int a = 0; a < dims; ++a) images *= 3;
  for (long im = 0; im < images; ++im) {
    long rem = im;
    std::vector<double> x(static_cast<std::size_t>(dims));
    for (int a = 0; a < dims; ++a) {
      x[a] = spec.midpoint(a, cell[a]) + static_cast<double>(rem % 3 - 1) * spec.period(a);
      rem /= 3;
    }
    total += k(x);
  }
  return total;
}

// f = sum_i sum_k c_i(k) phi_i(. - k) evaluated at every midpoint directly.
inline DiscreteField synthesize(const CoefficientArray& c, const std::vector<avsamp::KernelSpec>& gens, const GridSpec& spec) {
  DiscreteField out(spec);
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (long s = 0; s < c.sites(); ++s) {
      const double w = c(static_cast<int>(i), s);
      if (w == 0.0) continue;
      const Index k = c.site_index(s);
      std::vector<double> shift(k.begin(), k.end());
      const avsamp::KernelSpec moved = gens[i].shifted(shift);
      for (long n = 0; n < spec.size(); ++n) out[n] += w * kernel_at(moved, spec, spec.unflat(n));
    }
  return out;
}

// sum_j values_j beta_j(cell) with beta_j the indicator of "j is nearest,
// lowest index on ties", computed from an exhaustive distance table.
inline std::vector<int> voronoi(const avsamp::SamplingSet& X, const GridSpec& spec) {
  std::vector<int> owner(static_cast<std::size_t>(spec.size()), -1);
  for (long n = 0; n < spec.size(); ++n) {
    const Index c = spec.unflat(n);
    double best = std::numeric_limits<double>::infinity();
    for (long j = 0; j < X.size(); ++j) {
      double d2 = 0.0;
      for (int a = 0; a < spec.dims(); ++a) {
        double t = std::abs(spec.midpoint(a, c[a]) - X.point(j)[a]);
        t = std::min(t, spec.period(a) - t);
        d2 += t * t;
      }
      if (d2 < best) {
        best = d2;
        owner[static_cast<std::size_t>(n)] = static_cast<int>(j);
      }
    }
  }
  return owner;
}

inline DiscreteField spread(const std::vector<double>& values, const avsamp::SamplingSet& X, const GridSpec& spec) {
  const std::vector<int> owner = voronoi(X, spec);
  DiscreteField out(spec);
  for (long n = 0; n < spec.size(); ++n)
    for (long j = 0; j < X.size(); ++j) out[n] += values[static_cast<std::size_t>(j)] * (owner[static_cast<std::size_t>(n)] == j ? 1.0 : 0.0);
  return out;
}

}  // namespace oracle

#endif
