// sampling.hpp
//
// Nonuniform sampling sets on the torus, their density certificate, the hard
// Voronoi partition of unity attached to them, and the averaging functionals
// that produce the measured samples <f, psi_j>.

#ifndef AVSAMP_SAMPLING_HPP
#define AVSAMP_SAMPLING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "avsamp/grid.hpp"
#include "avsamp/kernel.hpp"

namespace avsamp {

enum class SetStructure { product, scattered };

class SamplingSet {
 public:
  SamplingSet(int dims, std::vector<double> points, SetStructure structure, double gamma_nominal);

  int dims() const { return dims_; }
  long size() const { return static_cast<long>(points_.size()) / dims_; }
  std::span<const double> point(long j) const {
    return std::span<const double>(points_).subspan(static_cast<std::size_t>(j * dims_), static_cast<std::size_t>(dims_));
  }
  const std::vector<double>& coordinates() const { return points_; }
  SetStructure structure() const { return structure_; }
  double gamma_nominal() const { return gamma_; }

  // Throws unless every point lies in [0, L_a) on every axis.
  void check_inside(const GridSpec& spec) const;

  bool operator==(const SamplingSet& o) const {
    return dims_ == o.dims_ && points_ == o.points_ && structure_ == o.structure_ && gamma_ == o.gamma_;
  }

 private:
  int dims_;
  std::vector<double> points_;
  SetStructure structure_;
  double gamma_;
};

struct JitteredGrid {
  double spacing = 0.5;
  double jitter = 0.2;
  // Per-axis jitter of each lattice line (product set) or per-point jitter.
  SetStructure structure = SetStructure::scattered;
  // Lattice anchor; points sit at origin + j * spacing before jitter.
  double origin = 0.0;
};

struct UniformRandom {
  long count = 1;
};

using SamplingMode = std::variant<JitteredGrid, UniformRandom>;

SamplingSet generate_sampling_set(const SamplingMode& mode, const GridSpec& spec, std::uint64_t seed,
                                  double gamma_nominal = 0.0);

// Squared torus-Euclidean distance.
double torus_distance2(const GridSpec& spec, std::span<const double> a, std::span<const double> b);

struct NearestSample {
  std::vector<int> index;        // per grid cell
  std::vector<double> distance;  // per grid cell
};

// Nearest sample to every grid midpoint; ties go to the lowest sample index.
NearestSample nearest_samples(const SamplingSet& X, const GridSpec& spec);

struct DensityReport {
  bool certified = false;
  double worst_gap = 0.0;
};

// worst_gap = max over midpoints of the distance to the nearest sample;
// certified iff worst_gap < gamma.
DensityReport verify_density(const SamplingSet& X, double gamma, const GridSpec& spec);

// Bounded uniform partition of unity realized as Voronoi indicators:
// beta_j(cell) = 1 iff sample j is the cell's nearest sample.
class Bupu {
 public:
  Bupu(GridSpec spec, long samples, std::vector<int> assignment, std::vector<double> distance);

  const GridSpec& spec() const { return spec_; }
  long samples() const { return samples_; }
  const std::vector<int>& assignment() const { return assignment_; }
  int owner(long cell) const { return assignment_[static_cast<std::size_t>(cell)]; }
  // Distance from a cell's midpoint to its assigned sample.
  double distance(long cell) const { return distance_[static_cast<std::size_t>(cell)]; }

  double weight(long sample, long cell) const { return owner(cell) == sample ? 1.0 : 0.0; }
  // sum_j beta_j(cell); 1 for every valid assignment.
  double partition_sum(long cell) const;

  // Fault injection for the verification suite: leaves a cell unowned.
  void unassign(long cell) { assignment_[static_cast<std::size_t>(cell)] = -1; }

 private:
  GridSpec spec_;
  long samples_;
  std::vector<int> assignment_;
  std::vector<double> distance_;
};

Bupu build_bupu(const SamplingSet& X, const GridSpec& spec);

enum class KernelMode { single, per_sample };
enum class AveragingShape { box, tent, signed_box };

// psi at unit scale: a sum of weighted unit-mass kernels sharing one centre,
// supported in [-1/2, 1/2]^(d+1).
struct AveragingKernel {
  std::vector<std::pair<double, KernelSpec>> terms;

  double operator()(std::span<const double> offset) const;
  double mass() const;
  double support_radius() const;
  AveragingKernel dilated(double a) const;
  AveragingKernel shifted(std::span<const double> offset) const;
};

// box: unit box; tent: tent of half-width 1/2; signed_box:
// alpha * box(1) - (alpha - 1) * box(1/2) with alpha set so that
// integral |psi| = m_target (alpha = 1 when m_target = 1).
AveragingKernel base_averaging_kernel(AveragingShape shape, int dims, double m_target);

// Weights of one functional on the grid: <f, psi_j> = sum_n weights[n] f[cells[n]].
struct Stencil {
  std::vector<long> cells;
  std::vector<double> weights;
};

struct KernelOptions {
  KernelMode mode = KernelMode::single;
  AveragingShape shape = AveragingShape::box;
  double a = 0.25;
  double m_target = 1.0;
  // Per-sample centre offsets are uniform in [-offset_fraction a, offset_fraction a]
  // per axis (per_sample mode only).
  double offset_fraction = 0.25;
  std::uint64_t seed = 0;
};

class AveragingKernelSet {
 public:
  KernelMode mode() const { return options_.mode; }
  const KernelOptions& options() const { return options_; }
  double a() const { return options_.a; }
  const GridSpec& spec() const { return spec_; }
  long samples() const { return static_cast<long>(stencils_.size()); }

  // psi_a for single mode (psi_{x_j} centred at the sample in per-sample mode).
  const AveragingKernel& scaled_kernel() const { return scaled_; }
  // Centre offset of psi_j relative to sample j.
  std::span<const double> offset(long j) const;
  AveragingKernel kernel_for(long j) const;
  const Stencil& stencil(long j) const { return stencils_[static_cast<std::size_t>(j)]; }

  // max_j integral |psi_j| evaluated with the grid quadrature.
  double realized_m() const { return realized_m_; }
  // max_j |integral psi_j - 1| on the grid.
  double mass_defect() const { return mass_defect_; }

 private:
  friend AveragingKernelSet make_kernels(const KernelOptions&, const SamplingSet&, const GridSpec&);
  KernelOptions options_;
  GridSpec spec_;
  AveragingKernel scaled_;
  std::vector<double> offsets_;
  std::vector<Stencil> stencils_;
  double realized_m_ = 0.0;
  double mass_defect_ = 0.0;
};

// Builds the functionals psi_j for every sample of X. Each unit-mass term is
// normalised on the grid so that sum_n weights[n] = 1 exactly (up to
// rounding); for boxes with a * m integral this is a no-op.
AveragingKernelSet make_kernels(const KernelOptions& options, const SamplingSet& X, const GridSpec& spec);

// psi_a sampled on the lattice of cell differences: the value stored at cell
// k is psi_a((k + 1) h). With this layout,
//   convolve(f, reflect_conjugate(averaging_kernel_field(...)))
// evaluated at cell i equals the grid average <f, psi_a(. - x_i)> at the
// midpoint x_i, which is what the single-kernel samples measure.
DiscreteField averaging_kernel_field(const AveragingKernelSet& kernels);

// s_j = <f, psi_j> by midpoint quadrature.
std::vector<double> acquire_samples(const DiscreteField& f, const AveragingKernelSet& kernels, const SamplingSet& X);

// CSV exchange: header "# gamma=<value>", then one point per line.
void write_sampling_csv(const SamplingSet& X, const std::string& path);
SamplingSet read_sampling_csv(const std::string& path, int dims);

}  // namespace avsamp

#endif
