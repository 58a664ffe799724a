#include "avsamp/coefficients.hpp"

#include <cmath>
#include <stdexcept>

namespace avsamp {

CoefficientArray::CoefficientArray(int r, std::vector<int> extents, double fill) : r_(r), extents_(std::move(extents)) {
  if (r_ < 1) throw std::invalid_argument("coefficients: r must be >= 1");
  sites_ = 1;
  for (int e : extents_) {
    if (e < 1) throw std::invalid_argument("coefficients: extents must be positive");
    sites_ *= e;
  }
  entries_.assign(static_cast<std::size_t>(r_ * sites_), fill);
}

CoefficientArray::CoefficientArray(int r, std::vector<int> extents, std::vector<double> entries)
    : CoefficientArray(r, std::move(extents)) {
  if (entries.size() != entries_.size()) throw std::invalid_argument("coefficients: entry count mismatch");
  for (double v : entries)
    if (!std::isfinite(v)) throw std::invalid_argument("coefficients: non-finite entry");
  entries_ = std::move(entries);
}

std::span<const double> CoefficientArray::generator(int i) const {
  return std::span<const double>(entries_).subspan(static_cast<std::size_t>(i * sites_), static_cast<std::size_t>(sites_));
}

long CoefficientArray::wrap_site(const Index& k) const {
  long s = 0;
  for (int a = 0; a < dims(); ++a) {
    long v = k[a] % extents_[a];
    if (v < 0) v += extents_[a];
    s = s * extents_[a] + v;
  }
  return s;
}

Index CoefficientArray::site_index(long site) const {
  Index k(extents_.size());
  for (int a = dims() - 1; a >= 0; --a) {
    k[a] = site % extents_[a];
    site /= extents_[a];
  }
  return k;
}

double CoefficientArray::max_abs(int i) const {
  double m = 0.0;
  for (double v : generator(i)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace avsamp
