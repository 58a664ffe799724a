// coefficients.hpp
//
// Mixed sequences c_i(k1, k2) for r generators on the periodic integer lattice
// Z_{L_1} x Z_{L_2}^d. Entries are stored generator-major, then lattice
// row-major with axis 0 outermost (matching the field layout).

#ifndef AVSAMP_COEFFICIENTS_HPP
#define AVSAMP_COEFFICIENTS_HPP

#include <span>
#include <vector>

#include "avsamp/grid.hpp"

namespace avsamp {

class CoefficientArray {
 public:
  CoefficientArray() = default;
  CoefficientArray(int r, std::vector<int> extents, double fill = 0.0);
  CoefficientArray(int r, std::vector<int> extents, std::vector<double> entries);

  int r() const { return r_; }
  const std::vector<int>& extents() const { return extents_; }
  int dims() const { return static_cast<int>(extents_.size()); }
  long sites() const { return sites_; }
  long size() const { return static_cast<long>(entries_.size()); }

  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }
  std::span<const double> generator(int i) const;

  double operator()(int i, long site) const { return entries_[static_cast<std::size_t>(i * sites_ + site)]; }
  double& operator()(int i, long site) { return entries_[static_cast<std::size_t>(i * sites_ + site)]; }
  // Periodic lattice access.
  double at(int i, const Index& k) const { return (*this)(i, wrap_site(k)); }
  double& at(int i, const Index& k) { return (*this)(i, wrap_site(k)); }

  long wrap_site(const Index& k) const;
  Index site_index(long site) const;

  double max_abs(int i) const;
  bool same_shape(const CoefficientArray& o) const { return r_ == o.r_ && extents_ == o.extents_; }

 private:
  int r_ = 0;
  std::vector<int> extents_;
  long sites_ = 0;
  std::vector<double> entries_;
};

}  // namespace avsamp

#endif
