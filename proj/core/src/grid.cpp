#include "avsamp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace avsamp {

GridSpec::GridSpec(int d, std::vector<int> periods, int m) : d_(d), m_(m), periods_(std::move(periods)) {
  if (d_ < 1) throw GridError("grid: d must be >= 1");
  if (static_cast<int>(periods_.size()) != d_ + 1)
    throw GridError("grid: expected d + 1 periods, got " + std::to_string(periods_.size()));
  for (int p : periods_)
    if (p < 4) throw GridError("grid: every period must be >= 4");
  if (m_ < 4) throw GridError("grid: m must be >= 4");

  cells_.resize(periods_.size());
  strides_.resize(periods_.size());
  size_ = 1;
  for (int a = dims() - 1; a >= 0; --a) {
    cells_[a] = static_cast<long>(m_) * periods_[a];
    strides_[a] = size_;
    size_ *= cells_[a];
  }
  cell_volume_ = std::pow(h(), dims());
}

GridSpec GridSpec::uniform(int d, int L1, int L2, int m) {
  std::vector<int> periods(static_cast<std::size_t>(d) + 1, L2);
  periods[0] = L1;
  return GridSpec(d, std::move(periods), m);
}

int GridSpec::min_period() const { return *std::min_element(periods_.begin(), periods_.end()); }

long GridSpec::lattice_size() const {
  long n = 1;
  for (int p : periods_) n *= p;
  return n;
}

long GridSpec::flat(const Index& idx) const {
  long f = 0;
  for (int a = 0; a < dims(); ++a) f += idx[a] * strides_[a];
  return f;
}

long GridSpec::wrap_flat(const Index& idx) const {
  long f = 0;
  for (int a = 0; a < dims(); ++a) {
    long i = idx[a] % cells_[a];
    if (i < 0) i += cells_[a];
    f += i * strides_[a];
  }
  return f;
}

Index GridSpec::unflat(long flat) const {
  Index idx(static_cast<std::size_t>(dims()));
  for (int a = 0; a < dims(); ++a) {
    idx[a] = flat / strides_[a];
    flat -= idx[a] * strides_[a];
  }
  return idx;
}

long GridSpec::cell_of(int axis, double x) const {
  long i = static_cast<long>(std::floor(x * m_));
  i %= cells_[axis];
  if (i < 0) i += cells_[axis];
  return i;
}

long GridSpec::cell_of(std::span<const double> point) const {
  long f = 0;
  for (int a = 0; a < dims(); ++a) f += cell_of(a, point[a]) * strides_[a];
  return f;
}

double GridSpec::wrap_delta(int axis, double delta) const {
  const double L = periods_[axis];
  delta = std::fmod(delta, L);
  if (delta >= 0.5 * L) delta -= L;
  if (delta < -0.5 * L) delta += L;
  return delta;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "d=" << d_ << " m=" << m_ << " periods=(";
  for (std::size_t a = 0; a < periods_.size(); ++a) os << (a ? "," : "") << periods_[a];
  os << ")";
  return os.str();
}

DiscreteField::DiscreteField(GridSpec spec, double fill)
    : spec_(std::move(spec)), values_(static_cast<std::size_t>(spec_.size()), fill) {}

DiscreteField::DiscreteField(GridSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  if (static_cast<long>(values_.size()) != spec_.size())
    throw GridError("field: value count does not match grid size");
  check_finite();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (a != b) throw GridError(std::string(what) + ": grid mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

DiscreteField& DiscreteField::operator+=(const DiscreteField& o) {
  require_same_grid(spec_, o.spec_, "field +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

DiscreteField& DiscreteField::operator-=(const DiscreteField& o) {
  require_same_grid(spec_, o.spec_, "field -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

DiscreteField& DiscreteField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double DiscreteField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void DiscreteField::check_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw GridError("field: non-finite value");
}

DiscreteField operator+(DiscreteField a, const DiscreteField& b) { return a += b; }
DiscreteField operator-(DiscreteField a, const DiscreteField& b) { return a -= b; }
DiscreteField operator*(double s, DiscreteField a) { return a *= s; }

double integrate(const DiscreteField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.spec().cell_volume();
}

DiscreteField abs(const DiscreteField& f) {
  DiscreteField out = f;
  for (double& v : out.values()) v = std::abs(v);
  return out;
}

DiscreteField lin_comb(const std::vector<std::pair<double, const DiscreteField*>>& terms) {
  if (terms.empty()) throw GridError("lin_comb: no terms");
  const GridSpec& spec = terms.front().second->spec();
  DiscreteField out(spec);
  for (const auto& [scale, field] : terms) {
    require_same_grid(spec, field->spec(), "lin_comb");
    auto src = field->values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
  return out;
}

DiscreteField lin_comb(std::initializer_list<std::pair<double, const DiscreteField*>> terms) {
  return lin_comb(std::vector<std::pair<double, const DiscreteField*>>(terms));
}

namespace {

// Coordinates of every cell, flattened (cell-major).
std::vector<long> all_coords(const GridSpec& spec) {
  const int dims = spec.dims();
  std::vector<long> coords(static_cast<std::size_t>(spec.size() * dims));
  for (long i = 0; i < spec.size(); ++i) {
    long rem = i;
    for (int a = 0; a < dims; ++a) {
      coords[static_cast<std::size_t>(i * dims + a)] = rem / spec.stride(a);
      rem %= spec.stride(a);
    }
  }
  return coords;
}

// Flat index of (coord + shift) with both already reduced to [0, cells).
inline long shifted_flat(const GridSpec& spec, const long* coord, const long* shift) {
  long f = 0;
  for (int a = 0; a < spec.dims(); ++a) {
    long c = coord[a] + shift[a];
    if (c >= spec.cells(a)) c -= spec.cells(a);
    f += c * spec.stride(a);
  }
  return f;
}

}  // namespace

DiscreteField translate(const DiscreteField& f, const Index& shift) {
  const GridSpec& spec = f.spec();
  const int dims = spec.dims();
  std::vector<long> s(static_cast<std::size_t>(dims));
  for (int a = 0; a < dims; ++a) {
    s[a] = shift[a] % spec.cells(a);
    if (s[a] < 0) s[a] += spec.cells(a);
  }
  const std::vector<long> coords = all_coords(spec);
  DiscreteField out(spec);
  for (long i = 0; i < spec.size(); ++i) out[shifted_flat(spec, &coords[static_cast<std::size_t>(i * dims)], s.data())] = f[i];
  return out;
}

DiscreteField convolve(const DiscreteField& f, const DiscreteField& g) {
  require_same_grid(f.spec(), g.spec(), "convolve");
  const GridSpec& spec = f.spec();
  const int dims = spec.dims();
  auto nonzeros = [](const DiscreteField& x) {
    std::vector<long> nz;
    for (long i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) nz.push_back(i);
    return nz;
  };
  // Convolution is symmetric in its operands; loop over the sparser one.
  std::vector<long> nz_f = nonzeros(f);
  std::vector<long> nz_g = nonzeros(g);
  const bool f_outer = nz_f.size() <= nz_g.size();
  const DiscreteField& outer = f_outer ? f : g;
  const DiscreteField& inner = f_outer ? g : f;
  const std::vector<long>& outer_nz = f_outer ? nz_f : nz_g;
  const std::vector<long>& inner_nz = f_outer ? nz_g : nz_f;

  const std::vector<long> coords = all_coords(spec);
  std::vector<double> acc(static_cast<std::size_t>(spec.size()), 0.0);
  // acc(i) += outer(j) * inner(i - j)  <=>  acc(k + j) += outer(j) * inner(k)
  if (4 * static_cast<long>(inner_nz.size()) > spec.size()) {
    // Dense inner operand: add whole shifted rows along the last axis.
    const int last = dims - 1;
    const long n = spec.cells(last);
    const long rows = spec.size() / n;
    std::vector<long> row_shift(static_cast<std::size_t>(dims), 0);
    for (long j : outer_nz) {
      const double w = outer[j];
      const long* shift = &coords[static_cast<std::size_t>(j * dims)];
      for (int a = 0; a < last; ++a) row_shift[a] = shift[a];
      const long t = shift[last];
      for (long r = 0; r < rows; ++r) {
        const long src = r * n;
        const long dst = shifted_flat(spec, &coords[static_cast<std::size_t>(src * dims)], row_shift.data());
        const double* in = &inner.values()[static_cast<std::size_t>(src)];
        double* out = &acc[static_cast<std::size_t>(dst)];
        for (long k = 0; k < n - t; ++k) out[k + t] += w * in[k];
        for (long k = n - t; k < n; ++k) out[k + t - n] += w * in[k];
      }
    }
    const double vol = spec.cell_volume();
    for (double& v : acc) v *= vol;
    return DiscreteField(spec, std::move(acc));
  }
  for (long j : outer_nz) {
    const double w = outer[j];
    const long* shift = &coords[static_cast<std::size_t>(j * dims)];
    for (long k : inner_nz)
      acc[static_cast<std::size_t>(shifted_flat(spec, &coords[static_cast<std::size_t>(k * dims)], shift))] += w * inner[k];
  }
  const double vol = spec.cell_volume();
  for (double& v : acc) v *= vol;
  return DiscreteField(spec, std::move(acc));
}

DiscreteField reflect_conjugate(const DiscreteField& f) {
  const GridSpec& spec = f.spec();
  const int dims = spec.dims();
  const std::vector<long> coords = all_coords(spec);
  DiscreteField out(spec);
  for (long i = 0; i < spec.size(); ++i) {
    long target = 0;
    for (int a = 0; a < dims; ++a) target += (spec.cells(a) - 1 - coords[static_cast<std::size_t>(i * dims + a)]) * spec.stride(a);
    out[target] = f[i];
  }
  return out;
}

}  // namespace avsamp
