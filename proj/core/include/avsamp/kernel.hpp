// kernel.hpp
//
// Compactly supported tensor-product kernels used both as generators of the
// shift-invariant space and as averaging functions. Every one-dimensional
// profile has unit mass, so a kernel's integral is amplitude * prod(scale).

#ifndef AVSAMP_KERNEL_HPP
#define AVSAMP_KERNEL_HPP

#include <span>
#include <string>
#include <vector>

#include "avsamp/grid.hpp"

namespace avsamp {

enum class Shape { box, tent, bspline, gaussian };

struct KernelSpec {
  Shape shape = Shape::box;
  int order = 1;          // bspline only, 1..4 (1 = box, 2 = tent)
  double sigma = 0.5;     // gaussian only
  double cutoff = 3.0;    // gaussian only, support radius in units of sigma
  std::vector<double> scale{1.0, 1.0};
  std::vector<double> center{0.0, 0.0};
  double amplitude = 1.0;

  static KernelSpec box(int dims, double side = 1.0);
  static KernelSpec tent(int dims);
  static KernelSpec bspline(int dims, int order);
  static KernelSpec gaussian(int dims, double sigma, double cutoff);

  int dims() const { return static_cast<int>(scale.size()); }

  // psi_a(x) = a^-(dims) psi(x / a).
  KernelSpec dilated(double a) const;
  KernelSpec shifted(std::span<const double> offset) const;
  KernelSpec with_amplitude(double amp) const;

  // Value at x (absolute coordinates, no periodic wrapping).
  double operator()(std::span<const double> x) const;
  // Value at a displacement from the kernel centre.
  double at_offset(std::span<const double> offset) const;
  // One-dimensional factor along one axis at displacement t from the centre.
  double factor(int axis, double t) const;

  double support_radius(int axis) const;
  double support_diameter() const;
  // Closed-form integral.
  double mass() const;
  // Closed-form integral of |kernel|.
  double abs_mass() const;
  // True for continuous shapes (everything but the box).
  bool continuous() const;

  std::string name() const;
};

// Unit-mass one-dimensional profiles centred at 0.
double profile_value(const KernelSpec& k, double t);
double profile_radius(const KernelSpec& k);

// Parses a shape token: box, tent, bspline1..bspline4, gauss(sigma,cutoff),
// optionally followed by "*<a>" for the unit-mass dilate by a (bspline3*0.5).
// Returns a kernel centred at the origin.
KernelSpec parse_kernel_token(const std::string& token, int dims);

// Field value at each midpoint equals the kernel evaluated at the periodic
// image of that midpoint closest to the kernel centre.
DiscreteField rasterize(const KernelSpec& kernel, const GridSpec& spec);

}  // namespace avsamp

#endif
