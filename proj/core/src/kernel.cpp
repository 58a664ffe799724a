#include "avsamp/kernel.hpp"

#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace avsamp {

namespace {

double gaussian_raw(double t, double sigma, double cutoff) {
  const double r = cutoff * sigma;
  if (std::abs(t) >= r) return 0.0;
  return std::exp(-t * t / (2.0 * sigma * sigma)) - std::exp(-0.5 * cutoff * cutoff);
}

double gaussian_raw_mass(double sigma, double cutoff) {
  return sigma * std::sqrt(2.0 * M_PI) * std::erf(cutoff / std::sqrt(2.0)) -
         2.0 * cutoff * sigma * std::exp(-0.5 * cutoff * cutoff);
}

// Centred cardinal B-spline of the given order (support [-order/2, order/2]).
// The box takes the value 1/2 on its edges, the midpoint of the jump.
double bspline_value(int order, double t) {
  const double x = std::abs(t);
  switch (order) {
    case 1:
      if (x < 0.5) return 1.0;
      return x == 0.5 ? 0.5 : 0.0;
    case 2:
      return x < 1.0 ? 1.0 - x : 0.0;
    case 3:
      if (x < 0.5) return 0.75 - x * x;
      if (x < 1.5) return 0.5 * (1.5 - x) * (1.5 - x);
      return 0.0;
    case 4:
      if (x < 1.0) return 2.0 / 3.0 - x * x + 0.5 * x * x * x;
      if (x < 2.0) return (2.0 - x) * (2.0 - x) * (2.0 - x) / 6.0;
      return 0.0;
    default:
      throw std::invalid_argument("bspline order must be in 1..4");
  }
}

}  // namespace

double profile_value(const KernelSpec& k, double t) {
  switch (k.shape) {
    case Shape::box:
      return bspline_value(1, t);
    case Shape::tent:
      return bspline_value(2, t);
    case Shape::bspline:
      return bspline_value(k.order, t);
    case Shape::gaussian:
      return gaussian_raw(t, k.sigma, k.cutoff) / gaussian_raw_mass(k.sigma, k.cutoff);
  }
  return 0.0;
}

double profile_radius(const KernelSpec& k) {
  switch (k.shape) {
    case Shape::box:
      return 0.5;
    case Shape::tent:
      return 1.0;
    case Shape::bspline:
      return 0.5 * k.order;
    case Shape::gaussian:
      return k.cutoff * k.sigma;
  }
  return 0.0;
}

KernelSpec KernelSpec::box(int dims, double side) {
  KernelSpec k;
  k.shape = Shape::box;
  k.order = 1;
  k.scale.assign(static_cast<std::size_t>(dims), side);
  k.center.assign(static_cast<std::size_t>(dims), 0.0);
  k.amplitude = 1.0;
  return k;
}

KernelSpec KernelSpec::tent(int dims) {
  KernelSpec k = box(dims);
  k.shape = Shape::tent;
  k.order = 2;
  return k;
}

KernelSpec KernelSpec::bspline(int dims, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("bspline order must be in 1..4");
  KernelSpec k = box(dims);
  k.shape = Shape::bspline;
  k.order = order;
  return k;
}

KernelSpec KernelSpec::gaussian(int dims, double sigma, double cutoff) {
  if (!(sigma > 0.0) || !(cutoff > 0.0)) throw std::invalid_argument("gaussian needs sigma > 0 and cutoff > 0");
  KernelSpec k = box(dims);
  k.shape = Shape::gaussian;
  k.sigma = sigma;
  k.cutoff = cutoff;
  return k;
}

KernelSpec KernelSpec::dilated(double a) const {
  if (!(a > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  KernelSpec k = *this;
  for (double& s : k.scale) s *= a;
  for (double& c : k.center) c *= a;
  k.amplitude /= std::pow(a, dims());
  return k;
}

KernelSpec KernelSpec::shifted(std::span<const double> offset) const {
  KernelSpec k = *this;
  for (int a = 0; a < dims(); ++a) k.center[a] += offset[a];
  return k;
}

KernelSpec KernelSpec::with_amplitude(double amp) const {
  KernelSpec k = *this;
  k.amplitude = amp;
  return k;
}

double KernelSpec::factor(int axis, double t) const { return profile_value(*this, t / scale[axis]) / scale[axis]; }

double KernelSpec::at_offset(std::span<const double> offset) const {
  // amplitude * prod(scale) is the mass; factor() carries 1/scale per axis.
  double v = mass();
  for (int a = 0; a < dims() && v != 0.0; ++a) v *= factor(a, offset[a]);
  return v;
}

double KernelSpec::operator()(std::span<const double> x) const {
  std::vector<double> off(static_cast<std::size_t>(dims()));
  for (int a = 0; a < dims(); ++a) off[a] = x[a] - center[a];
  return at_offset(off);
}

double KernelSpec::support_radius(int axis) const { return profile_radius(*this) * scale[axis]; }

double KernelSpec::support_diameter() const {
  double d = 0.0;
  for (int a = 0; a < dims(); ++a) d = std::max(d, 2.0 * support_radius(a));
  return d;
}

double KernelSpec::mass() const {
  double m = amplitude;
  for (double s : scale) m *= s;
  return m;
}

double KernelSpec::abs_mass() const { return std::abs(mass()); }

bool KernelSpec::continuous() const { return !(shape == Shape::box || (shape == Shape::bspline && order == 1)); }

std::string KernelSpec::name() const {
  std::ostringstream os;
  switch (shape) {
    case Shape::box:
      os << "box";
      break;
    case Shape::tent:
      os << "tent";
      break;
    case Shape::bspline:
      os << "bspline" << order;
      break;
    case Shape::gaussian:
      os << "gauss(" << sigma << "," << cutoff << ")";
      break;
  }
  return os.str();
}

KernelSpec parse_kernel_token(const std::string& token, int dims) {
  static const std::regex bspline_re(R"(bspline([1-4]))");
  static const std::regex gauss_re(R"(gauss\(\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*\))");
  static const std::regex scaled_re(R"((.+)\*\s*([0-9.eE+-]+))");
  std::smatch m;
  if (std::regex_match(token, m, scaled_re)) {
    const double a = std::stod(m[2].str());
    if (!(a > 0.0)) throw std::invalid_argument("kernel '" + token + "': scale must be positive");
    return parse_kernel_token(m[1].str(), dims).dilated(a);
  }
  if (token == "box") return KernelSpec::box(dims);
  if (token == "tent") return KernelSpec::tent(dims);
  if (std::regex_match(token, m, bspline_re)) return KernelSpec::bspline(dims, std::stoi(m[1].str()));
  if (std::regex_match(token, m, gauss_re)) return KernelSpec::gaussian(dims, std::stod(m[1].str()), std::stod(m[2].str()));
  throw std::invalid_argument("unknown kernel shape '" + token + "'");
}

DiscreteField rasterize(const KernelSpec& kernel, const GridSpec& spec) {
  if (kernel.dims() != spec.dims()) throw GridError("rasterize: kernel and grid dimensions differ");
  if (kernel.support_diameter() >= spec.min_period())
    throw GridError("rasterize: kernel support diameter " + std::to_string(kernel.support_diameter()) +
                    " is not below the smallest period " + std::to_string(spec.min_period()));
  const int dims = spec.dims();
  // Tensor product: tabulate each axis once.
  std::vector<std::vector<double>> axis_values(static_cast<std::size_t>(dims));
  for (int a = 0; a < dims; ++a) {
    auto& col = axis_values[a];
    col.resize(static_cast<std::size_t>(spec.cells(a)));
    for (long i = 0; i < spec.cells(a); ++i)
      col[static_cast<std::size_t>(i)] = kernel.factor(a, spec.wrap_delta(a, spec.midpoint(a, i) - kernel.center[a]));
  }
  const double mass = kernel.mass();
  std::vector<double> values(static_cast<std::size_t>(spec.size()));
  for (long f = 0; f < spec.size(); ++f) {
    long rem = f;
    double v = mass;
    for (int a = 0; a < dims; ++a) {
      const long i = rem / spec.stride(a);
      rem %= spec.stride(a);
      v *= axis_values[a][static_cast<std::size_t>(i)];
    }
    values[static_cast<std::size_t>(f)] = v;
  }
  return DiscreteField(spec, std::move(values));
}

}  // namespace avsamp
