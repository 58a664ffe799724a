// grid.hpp
//
// Discretized functions on a periodic torus T = [0,L_1) x [0,L_2)^d sampled at
// the midpoints of a uniform grid with m cells per unit length. Axis 0 is the
// "time-like" x axis; axes 1..d are the spatial y axes. Values are stored
// row-major with axis 0 outermost, so the y block of a fixed x cell is
// contiguous.

#ifndef AVSAMP_GRID_HPP
#define AVSAMP_GRID_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace avsamp {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Index = std::vector<long>;

class GridSpec {
 public:
  GridSpec() : GridSpec(1, {4, 4}, 4) {}
  // periods.size() must be d + 1.
  GridSpec(int d, std::vector<int> periods, int m);
  // L_1 on axis 0, L_2 on every remaining axis.
  static GridSpec uniform(int d, int L1, int L2, int m);

  int d() const { return d_; }
  int dims() const { return d_ + 1; }
  int m() const { return m_; }
  double h() const { return 1.0 / m_; }
  const std::vector<int>& periods() const { return periods_; }
  int period(int axis) const { return periods_[axis]; }
  int min_period() const;
  // Cells along one axis (m * period).
  long cells(int axis) const { return cells_[axis]; }
  long stride(int axis) const { return strides_[axis]; }
  long size() const { return size_; }
  // Lattice sites of the integer translates, prod(periods).
  long lattice_size() const;
  // Quadrature weight of one cell, h^(d+1).
  double cell_volume() const { return cell_volume_; }

  long flat(const Index& idx) const;
  // Flat index with every coordinate reduced modulo the axis length.
  long wrap_flat(const Index& idx) const;
  Index unflat(long flat) const;
  double midpoint(int /*axis*/, long i) const { return (static_cast<double>(i) + 0.5) / m_; }
  // Grid cell containing x (equivalently: nearest midpoint), per axis.
  long cell_of(int axis, double x) const;
  long cell_of(std::span<const double> point) const;
  // Shortest signed displacement b - a on the circle of the given axis.
  double wrap_delta(int axis, double delta) const;

  bool operator==(const GridSpec& o) const {
    return d_ == o.d_ && m_ == o.m_ && periods_ == o.periods_;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

  std::string describe() const;

 private:
  int d_ = 1;
  int m_ = 4;
  std::vector<int> periods_{4, 4};
  std::vector<long> cells_;
  std::vector<long> strides_;
  long size_ = 0;
  double cell_volume_ = 0.0;
};

class DiscreteField {
 public:
  DiscreteField() = default;
  explicit DiscreteField(GridSpec spec, double fill = 0.0);
  DiscreteField(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  long size() const { return static_cast<long>(values_.size()); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](long flat) const { return values_[static_cast<std::size_t>(flat)]; }
  double& operator[](long flat) { return values_[static_cast<std::size_t>(flat)]; }
  // Periodic access; any integer multi-index is accepted.
  double at(const Index& idx) const { return values_[static_cast<std::size_t>(spec_.wrap_flat(idx))]; }
  double& at(const Index& idx) { return values_[static_cast<std::size_t>(spec_.wrap_flat(idx))]; }

  DiscreteField& operator+=(const DiscreteField& o);
  DiscreteField& operator-=(const DiscreteField& o);
  DiscreteField& operator*=(double s);

  double max_abs() const;
  // Throws if any value is NaN or infinite.
  void check_finite() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

DiscreteField operator+(DiscreteField a, const DiscreteField& b);
DiscreteField operator-(DiscreteField a, const DiscreteField& b);
DiscreteField operator*(double s, DiscreteField a);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

// h^(d+1) * sum of values (midpoint rule).
double integrate(const DiscreteField& f);

DiscreteField abs(const DiscreteField& f);

// Pointwise sum of scalar * field. All fields must share one grid.
DiscreteField lin_comb(std::initializer_list<std::pair<double, const DiscreteField*>> terms);
DiscreteField lin_comb(const std::vector<std::pair<double, const DiscreteField*>>& terms);

// out(i) = f(i - shift), shift given in grid cells per axis.
DiscreteField translate(const DiscreteField& f, const Index& shift);

// Periodic discrete convolution on the cell lattice:
//   out(i) = h^(d+1) * sum_j f(j) g(i - j).
// g is read as a function of cell offsets, so a unit-mass single cell at j
// translates g by j cells. The sparser operand drives the loop; zeros are
// skipped, which keeps kernel convolutions O(nnz * N).
DiscreteField convolve(const DiscreteField& f, const DiscreteField& g);

// Geometric reflection x -> -x of a midpoint field: cell i maps to cell
// -i - 1, so a kernel centred at the origin is left unchanged. Data are real,
// so conjugation is the identity.
DiscreteField reflect_conjugate(const DiscreteField& f);

}  // namespace avsamp

#endif
