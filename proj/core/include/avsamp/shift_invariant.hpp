// shift_invariant.hpp
//
// The space V(Phi) spanned by integer translates of r generators on the torus:
// synthesis from coefficients, the Gram system of the translates, the grid-L2
// orthogonal projection onto V, and Monte-Carlo estimates of the Riesz-type
// norm-equivalence constants and of the projection's L^{p,q} operator norm.

#ifndef AVSAMP_SHIFT_INVARIANT_HPP
#define AVSAMP_SHIFT_INVARIANT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "avsamp/coefficients.hpp"
#include "avsamp/grid.hpp"
#include "avsamp/kernel.hpp"
#include "avsamp/norms.hpp"

namespace avsamp {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class GeneratorBank {
 public:
  GeneratorBank(GridSpec spec, std::vector<KernelSpec> kernels);

  int r() const { return static_cast<int>(kernels_.size()); }
  const GridSpec& spec() const { return spec_; }
  const std::vector<KernelSpec>& kernels() const { return kernels_; }
  const DiscreteField& rasterized(int i) const { return rasters_[static_cast<std::size_t>(i)]; }

  CoefficientArray zero_coefficients() const { return CoefficientArray(r(), spec_.periods()); }

  // Nonzero cells of generator i: flat index at the origin translate, and
  // per-axis cell coordinates (nnz x dims) for fast lattice shifts.
  struct Support {
    std::vector<long> flat;
    std::vector<long> coords;
    std::vector<double> values;
  };
  const Support& support(int i) const { return supports_[static_cast<std::size_t>(i)]; }

  // Flat index of support cell n of generator i translated by lattice site k.
  // shift holds k * m per axis (precomputed by lattice_shift).
  long shifted(int i, std::size_t n, const long* shift) const;
  std::vector<long> lattice_shift(long site) const;

 private:
  GridSpec spec_;
  std::vector<KernelSpec> kernels_;
  std::vector<DiscreteField> rasters_;
  std::vector<Support> supports_;
};

// f = sum_i sum_k c_i(k) phi_i(. - k).
DiscreteField synthesize(const CoefficientArray& c, const GeneratorBank& bank);

// b_(i,k) = <g, phi_i(. - k)> with the grid inner product h^(d+1) sum f g.
CoefficientArray analysis(const DiscreteField& g, const GeneratorBank& bank);

// (sum_i ||c_i||^2_{l^{p,q}})^{1/2}.
double coefficient_norm(const CoefficientArray& c, const MixedExponents& e);

class GramOperator {
 public:
  explicit GramOperator(GeneratorBank bank);

  const GeneratorBank& bank() const { return bank_; }
  const Eigen::MatrixXd& matrix() const { return gram_; }
  long dimension() const { return gram_.rows(); }
  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }
  // Max |G - G^T|.
  double asymmetry() const;

  // Solves G c = b; throws SolverError if the relative residual exceeds tol.
  CoefficientArray solve(const CoefficientArray& b, double tol = 1e-10) const;

 private:
  GeneratorBank bank_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

// Rejects numerically singular (non-Riesz) banks.
GramOperator build_gram(const GeneratorBank& bank);

// Coefficients of the grid-L2 orthogonal projection of g onto V.
CoefficientArray project(const DiscreteField& g, const GramOperator& gram);

// Convenience: synthesize(project(g)).
DiscreteField project_field(const DiscreteField& g, const GramOperator& gram);

struct NormEquivalence {
  double d1 = 0.0;
  double d2 = 0.0;
  int trials = 0;
  MixedExponents exponents;
};

// coefficient_norm(c) / ||synthesize(c)||_{L^{p,q}}.
double coefficient_to_function_ratio(const CoefficientArray& c, const GeneratorBank& bank, const MixedExponents& e);

// Coefficients i.i.d. uniform on [-1, 1].
CoefficientArray random_coefficients(const GeneratorBank& bank, std::uint64_t seed);

NormEquivalence estimate_norm_equivalence(const GeneratorBank& bank, const MixedExponents& e, int trials,
                                          std::uint64_t seed);

// Max over random fields g of ||P g|| / ||g||. Each draw is a random member of
// V plus independent cellwise noise of random amplitude.
double estimate_projection_norm(const GramOperator& gram, const MixedExponents& e, int trials, std::uint64_t seed);

}  // namespace avsamp

#endif
