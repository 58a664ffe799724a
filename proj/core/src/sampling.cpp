#include "avsamp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "avsamp/random.hpp"

namespace avsamp {

SamplingSet::SamplingSet(int dims, std::vector<double> points, SetStructure structure, double gamma_nominal)
    : dims_(dims), points_(std::move(points)), structure_(structure), gamma_(gamma_nominal) {
  if (dims_ < 2) throw std::invalid_argument("sampling set: need at least two coordinates per point");
  if (points_.empty() || points_.size() % static_cast<std::size_t>(dims_) != 0)
    throw std::invalid_argument("sampling set: must be a nonempty list of complete points");
}

void SamplingSet::check_inside(const GridSpec& spec) const {
  if (spec.dims() != dims_) throw std::invalid_argument("sampling set: dimension does not match grid");
  for (long j = 0; j < size(); ++j) {
    auto p = point(j);
    for (int a = 0; a < dims_; ++a)
      if (!(p[a] >= 0.0 && p[a] < spec.period(a)))
        throw std::invalid_argument("sampling set: point " + std::to_string(j) + " lies outside the torus");
  }
}

namespace {

double wrap_coordinate(double x, double L) {
  x = std::fmod(x, L);
  if (x < 0.0) x += L;
  if (x >= L) x = 0.0;
  return x;
}

}  // namespace

SamplingSet generate_sampling_set(const SamplingMode& mode, const GridSpec& spec, std::uint64_t seed,
                                  double gamma_nominal) {
  const int dims = spec.dims();
  Rng rng(seed);
  std::vector<double> pts;
  if (const auto* jg = std::get_if<JitteredGrid>(&mode)) {
    if (!(jg->spacing > 0.0) || jg->spacing >= spec.min_period())
      throw std::invalid_argument("jittered grid: spacing must be positive and below the smallest period");
    if (!(jg->jitter >= 0.0) || jg->jitter >= 0.5 * jg->spacing)
      throw std::invalid_argument("jittered grid: jitter must lie in [0, spacing / 2)");
    std::vector<long> counts(static_cast<std::size_t>(dims));
    long total = 1;
    for (int a = 0; a < dims; ++a) {
      counts[a] = std::max(1L, static_cast<long>(std::floor(spec.period(a) / jg->spacing + 1e-9)));
      total *= counts[a];
    }
    // Product sets jitter each lattice line once per axis.
    std::vector<std::vector<double>> line_jitter(static_cast<std::size_t>(dims));
    if (jg->structure == SetStructure::product)
      for (int a = 0; a < dims; ++a)
        for (long i = 0; i < counts[a]; ++i) line_jitter[a].push_back(rng.uniform(-jg->jitter, jg->jitter));
    pts.reserve(static_cast<std::size_t>(total * dims));
    for (long n = 0; n < total; ++n) {
      long rem = n;
      std::vector<long> idx(static_cast<std::size_t>(dims));
      for (int a = dims - 1; a >= 0; --a) {
        idx[a] = rem % counts[a];
        rem /= counts[a];
      }
      for (int a = 0; a < dims; ++a) {
        double x = jg->origin + static_cast<double>(idx[a]) * jg->spacing;
        if (jg->jitter > 0.0)
          x += jg->structure == SetStructure::product ? line_jitter[a][static_cast<std::size_t>(idx[a])]
                                                      : rng.uniform(-jg->jitter, jg->jitter);
        pts.push_back(wrap_coordinate(x, spec.period(a)));
      }
    }
    return SamplingSet(dims, std::move(pts), jg->structure, gamma_nominal);
  }
  const auto& ur = std::get<UniformRandom>(mode);
  if (ur.count < 1) throw std::invalid_argument("uniform random: count must be >= 1");
  for (long n = 0; n < ur.count; ++n)
    for (int a = 0; a < dims; ++a) pts.push_back(wrap_coordinate(rng.uniform(0.0, spec.period(a)), spec.period(a)));
  return SamplingSet(dims, std::move(pts), SetStructure::scattered, gamma_nominal);
}

double torus_distance2(const GridSpec& spec, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (int k = 0; k < spec.dims(); ++k) {
    const double t = spec.wrap_delta(k, b[k] - a[k]);
    s += t * t;
  }
  return s;
}

namespace {

// Uniform bucket grid over the torus for nearest-sample queries.
class BucketIndex {
 public:
  BucketIndex(const SamplingSet& X, const GridSpec& spec) : X_(X), spec_(spec) {
    const int dims = spec.dims();
    double volume = 1.0;
    for (int a = 0; a < dims; ++a) volume *= spec.period(a);
    const double side = std::pow(2.0 * volume / static_cast<double>(X.size()), 1.0 / dims);
    counts_.resize(static_cast<std::size_t>(dims));
    widths_.resize(static_cast<std::size_t>(dims));
    long total = 1;
    for (int a = 0; a < dims; ++a) {
      counts_[a] = std::max(1L, static_cast<long>(std::floor(spec.period(a) / side)));
      widths_[a] = static_cast<double>(spec.period(a)) / static_cast<double>(counts_[a]);
      total *= counts_[a];
    }
    buckets_.resize(static_cast<std::size_t>(total));
    stamp_.assign(static_cast<std::size_t>(total), -1);
    for (long j = 0; j < X.size(); ++j) buckets_[static_cast<std::size_t>(bucket_of(X.point(j)))].push_back(static_cast<int>(j));
    min_width_ = *std::min_element(widths_.begin(), widths_.end());
  }

  std::pair<int, double> nearest(std::span<const double> q) {
    const int dims = spec_.dims();
    ++epoch_;
    std::vector<long> home(static_cast<std::size_t>(dims));
    for (int a = 0; a < dims; ++a) home[a] = std::min(counts_[a] - 1, static_cast<long>(std::floor(q[a] / widths_[a])));
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    std::vector<long> off(static_cast<std::size_t>(dims));
    for (long R = 0;; ++R) {
      // Visit every bucket in the cube of radius R not seen yet.
      long span = 2 * R + 1;
      long cube = 1;
      for (int a = 0; a < dims; ++a) cube *= std::min(span, counts_[a]);
      bool covers_all = true;
      for (int a = 0; a < dims; ++a) covers_all = covers_all && span >= counts_[a];
      for (long c = 0; c < cube; ++c) {
        long rem = c;
        long id = 0;
        for (int a = 0; a < dims; ++a) {
          const long width = std::min(span, counts_[a]);
          off[a] = rem % width;
          rem /= width;
          long b = (home[a] + (width == counts_[a] ? off[a] : off[a] - R)) % counts_[a];
          if (b < 0) b += counts_[a];
          id = id * counts_[a] + b;
        }
        if (stamp_[static_cast<std::size_t>(id)] == epoch_) continue;
        stamp_[static_cast<std::size_t>(id)] = epoch_;
        for (int j : buckets_[static_cast<std::size_t>(id)]) {
          const double d2 = torus_distance2(spec_, q, X_.point(j));
          if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
            best_d2 = d2;
            best = j;
          }
        }
      }
      // Unvisited buckets are at least R bucket widths away.
      const double reach = static_cast<double>(R) * min_width_;
      if (covers_all || (best >= 0 && best_d2 < reach * reach)) break;
    }
    return {best, best_d2};
  }

 private:
  long bucket_of(std::span<const double> p) const {
    long id = 0;
    for (int a = 0; a < spec_.dims(); ++a) {
      const long b = std::min(counts_[a] - 1, static_cast<long>(std::floor(p[a] / widths_[a])));
      id = id * counts_[a] + b;
    }
    return id;
  }

  const SamplingSet& X_;
  const GridSpec& spec_;
  std::vector<long> counts_;
  std::vector<double> widths_;
  double min_width_ = 0.0;
  std::vector<std::vector<int>> buckets_;
  std::vector<long> stamp_;
  long epoch_ = 0;
};

}  // namespace

NearestSample nearest_samples(const SamplingSet& X, const GridSpec& spec) {
  X.check_inside(spec);
  BucketIndex index(X, spec);
  NearestSample out;
  out.index.resize(static_cast<std::size_t>(spec.size()));
  out.distance.resize(static_cast<std::size_t>(spec.size()));
  std::vector<double> q(static_cast<std::size_t>(spec.dims()));
  for (long c = 0; c < spec.size(); ++c) {
    long rem = c;
    for (int a = 0; a < spec.dims(); ++a) {
      q[a] = spec.midpoint(a, rem / spec.stride(a));
      rem %= spec.stride(a);
    }
    auto [j, d2] = index.nearest(q);
    out.index[static_cast<std::size_t>(c)] = j;
    out.distance[static_cast<std::size_t>(c)] = std::sqrt(d2);
  }
  return out;
}

DensityReport verify_density(const SamplingSet& X, double gamma, const GridSpec& spec) {
  if (!(gamma > 0.0)) throw std::invalid_argument("verify_density: gamma must be positive");
  const NearestSample ns = nearest_samples(X, spec);
  DensityReport r;
  r.worst_gap = *std::max_element(ns.distance.begin(), ns.distance.end());
  r.certified = r.worst_gap < gamma;
  return r;
}

Bupu::Bupu(GridSpec spec, long samples, std::vector<int> assignment, std::vector<double> distance)
    : spec_(std::move(spec)), samples_(samples), assignment_(std::move(assignment)), distance_(std::move(distance)) {
  if (static_cast<long>(assignment_.size()) != spec_.size() || distance_.size() != assignment_.size())
    throw std::invalid_argument("bupu: assignment size does not match grid");
}

double Bupu::partition_sum(long cell) const {
  const int j = owner(cell);
  return (j >= 0 && j < samples_) ? 1.0 : 0.0;
}

Bupu build_bupu(const SamplingSet& X, const GridSpec& spec) {
  NearestSample ns = nearest_samples(X, spec);
  return Bupu(spec, X.size(), std::move(ns.index), std::move(ns.distance));
}

double AveragingKernel::operator()(std::span<const double> offset) const {
  double v = 0.0;
  for (const auto& [w, k] : terms) {
    std::vector<double> off(offset.begin(), offset.end());
    for (int a = 0; a < k.dims(); ++a) off[a] -= k.center[a];
    v += w * k.at_offset(off);
  }
  return v;
}

double AveragingKernel::mass() const {
  double m = 0.0;
  for (const auto& [w, k] : terms) m += w * k.mass();
  return m;
}

double AveragingKernel::support_radius() const {
  double r = 0.0;
  for (const auto& [w, k] : terms)
    for (int a = 0; a < k.dims(); ++a) r = std::max(r, k.support_radius(a) + std::abs(k.center[a]));
  return r;
}

AveragingKernel AveragingKernel::dilated(double a) const {
  AveragingKernel out;
  for (const auto& [w, k] : terms) out.terms.emplace_back(w, k.dilated(a));
  return out;
}

AveragingKernel AveragingKernel::shifted(std::span<const double> offset) const {
  AveragingKernel out;
  for (const auto& [w, k] : terms) out.terms.emplace_back(w, k.shifted(offset));
  return out;
}

AveragingKernel base_averaging_kernel(AveragingShape shape, int dims, double m_target) {
  if (!(m_target >= 1.0)) throw std::invalid_argument("averaging kernel: M must be >= 1 (integral of psi is 1)");
  AveragingKernel k;
  switch (shape) {
    case AveragingShape::box:
    case AveragingShape::tent:
      if (m_target != 1.0) throw std::invalid_argument("averaging kernel: M > 1 requires the signed shape");
      if (shape == AveragingShape::box) {
        k.terms.emplace_back(1.0, KernelSpec::box(dims));
      } else {
        KernelSpec t = KernelSpec::tent(dims);
        k.terms.emplace_back(1.0, t.dilated(0.5));
      }
      break;
    case AveragingShape::signed_box: {
      if (m_target == 1.0) {
        k.terms.emplace_back(1.0, KernelSpec::box(dims));
        break;
      }
      // Outer box (mass alpha) minus inner half-size box (mass alpha - 1); the
      // inner region is negative once M > 1, giving
      // integral |psi| = 2 alpha (1 - rho) - 1 with rho = 2^-dims.
      const double rho = std::pow(0.5, dims);
      const double alpha = (m_target + 1.0) / (2.0 * (1.0 - rho));
      k.terms.emplace_back(alpha, KernelSpec::box(dims));
      k.terms.emplace_back(-(alpha - 1.0), KernelSpec::box(dims, 0.5).with_amplitude(std::pow(2.0, dims)));
      break;
    }
  }
  return k;
}

std::span<const double> AveragingKernelSet::offset(long j) const {
  const auto dims = static_cast<std::size_t>(spec_.dims());
  return std::span<const double>(offsets_).subspan(static_cast<std::size_t>(j) * dims, dims);
}

AveragingKernel AveragingKernelSet::kernel_for(long j) const { return scaled_.shifted(offset(j)); }

namespace {

// Grid weights of one unit-mass kernel centred at `centre`, normalised so they
// sum to 1; returns (cells, weights).
Stencil unit_stencil(const KernelSpec& k, std::span<const double> centre, const GridSpec& spec) {
  const int dims = spec.dims();
  std::vector<std::vector<long>> axis_cells(static_cast<std::size_t>(dims));
  std::vector<std::vector<double>> axis_vals(static_cast<std::size_t>(dims));
  for (int a = 0; a < dims; ++a) {
    const double c = centre[a] + k.center[a];
    const double r = k.support_radius(a);
    const long lo = static_cast<long>(std::floor((c - r) * spec.m() - 0.5)) - 1;
    const long hi = static_cast<long>(std::ceil((c + r) * spec.m() - 0.5)) + 1;
    for (long i = lo; i <= hi; ++i) {
      const double t = spec.wrap_delta(a, spec.midpoint(a, i) - c);
      const double v = k.factor(a, t);
      if (v == 0.0) continue;
      long wrapped = i % spec.cells(a);
      if (wrapped < 0) wrapped += spec.cells(a);
      axis_cells[a].push_back(wrapped);
      axis_vals[a].push_back(v);
    }
  }
  Stencil s;
  long count = 1;
  for (int a = 0; a < dims; ++a) count *= static_cast<long>(axis_cells[a].size());
  double total = 0.0;
  const double scale = k.mass() * spec.cell_volume();
  for (long n = 0; n < count; ++n) {
    long rem = n;
    long flat = 0;
    double w = scale;
    for (int a = dims - 1; a >= 0; --a) {
      const auto width = static_cast<long>(axis_cells[a].size());
      const long i = rem % width;
      rem /= width;
      flat += axis_cells[a][static_cast<std::size_t>(i)] * spec.stride(a);
      w *= axis_vals[a][static_cast<std::size_t>(i)];
    }
    s.cells.push_back(flat);
    s.weights.push_back(w);
    total += w;
  }
  if (total == 0.0) throw std::invalid_argument("averaging kernel: support contains no grid midpoint");
  const double target = k.mass();
  for (double& w : s.weights) w = w / total * target;
  return s;
}

}  // namespace

AveragingKernelSet make_kernels(const KernelOptions& options, const SamplingSet& X, const GridSpec& spec) {
  if (!(options.a > 0.0) || options.a > spec.min_period() / 8.0)
    throw std::invalid_argument("averaging kernel: a must satisfy 0 < a <= min period / 8");
  if (!(options.offset_fraction >= 0.0) || options.offset_fraction > 0.25)
    throw std::invalid_argument("averaging kernel: offset fraction must lie in [0, 1/4]");
  X.check_inside(spec);
  const int dims = spec.dims();

  AveragingKernelSet set;
  set.options_ = options;
  set.spec_ = spec;
  set.scaled_ = base_averaging_kernel(options.shape, dims, options.m_target).dilated(options.a);
  if (std::abs(set.scaled_.mass() - 1.0) > 1e-10) throw std::runtime_error("averaging kernel: normalisation failed");

  set.offsets_.assign(static_cast<std::size_t>(X.size() * dims), 0.0);
  if (options.mode == KernelMode::per_sample && options.offset_fraction > 0.0) {
    Rng rng(options.seed);
    const double lim = options.offset_fraction * options.a;
    for (double& o : set.offsets_) o = rng.uniform(-lim, lim);
  }

  for (long j = 0; j < X.size(); ++j) {
    std::vector<double> centre(X.point(j).begin(), X.point(j).end());
    for (int a = 0; a < dims; ++a) centre[a] += set.offset(j)[a];
    // Terms share a centre, so their stencils are merged cell by cell.
    Stencil merged;
    std::vector<std::pair<long, double>> acc;
    for (const auto& [w, k] : set.scaled_.terms) {
      const Stencil s = unit_stencil(k, centre, spec);
      for (std::size_t n = 0; n < s.cells.size(); ++n) acc.emplace_back(s.cells[n], w * s.weights[n]);
    }
    std::stable_sort(acc.begin(), acc.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [cell, w] : acc) {
      if (!merged.cells.empty() && merged.cells.back() == cell) {
        merged.weights.back() += w;
      } else {
        merged.cells.push_back(cell);
        merged.weights.push_back(w);
      }
    }
    double mass = 0.0, abs_mass = 0.0;
    for (double w : merged.weights) {
      mass += w;
      abs_mass += std::abs(w);
    }
    set.realized_m_ = std::max(set.realized_m_, abs_mass);
    set.mass_defect_ = std::max(set.mass_defect_, std::abs(mass - 1.0));
    set.stencils_.push_back(std::move(merged));
  }
  if (set.mass_defect_ > 1e-10) throw std::runtime_error("averaging kernel: grid mass differs from 1");
  return set;
}

DiscreteField averaging_kernel_field(const AveragingKernelSet& kernels) {
  const GridSpec& spec = kernels.spec();
  std::vector<double> shift(static_cast<std::size_t>(spec.dims()), -0.5 * spec.h());
  DiscreteField out(spec);
  for (const auto& [w, k] : kernels.scaled_kernel().terms) out += w * rasterize(k.shifted(shift), spec);
  return out;
}

std::vector<double> acquire_samples(const DiscreteField& f, const AveragingKernelSet& kernels, const SamplingSet& X) {
  require_same_grid(f.spec(), kernels.spec(), "acquire_samples");
  if (X.size() != kernels.samples()) throw std::invalid_argument("acquire_samples: kernel set built for another sampling set");
  std::vector<double> s(static_cast<std::size_t>(X.size()));
  for (long j = 0; j < X.size(); ++j) {
    const Stencil& st = kernels.stencil(j);
    double acc = 0.0;
    for (std::size_t n = 0; n < st.cells.size(); ++n) acc += st.weights[n] * f[st.cells[n]];
    s[static_cast<std::size_t>(j)] = acc;
  }
  return s;
}

void write_sampling_csv(const SamplingSet& X, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sampling set to " + path);
  out << std::setprecision(17);
  out << "# gamma=" << X.gamma_nominal() << "\n";
  for (long j = 0; j < X.size(); ++j) {
    auto p = X.point(j);
    for (int a = 0; a < X.dims(); ++a) out << (a ? "," : "") << p[a];
    out << "\n";
  }
}

SamplingSet read_sampling_csv(const std::string& path, int dims) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sampling set from " + path);
  std::string line;
  double gamma = 0.0;
  std::vector<double> pts;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("gamma=");
      if (pos != std::string::npos) gamma = std::stod(line.substr(pos + 6));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      pts.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != dims)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dims) + " columns");
  }
  return SamplingSet(dims, std::move(pts), SetStructure::scattered, gamma);
}

}  // namespace avsamp
