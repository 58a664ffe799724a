#include "avsamp/shift_invariant.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "avsamp/random.hpp"

namespace avsamp {

GeneratorBank::GeneratorBank(GridSpec spec, std::vector<KernelSpec> kernels)
    : spec_(std::move(spec)), kernels_(std::move(kernels)) {
  if (kernels_.empty()) throw std::invalid_argument("generator bank: need at least one generator");
  const int dims = spec_.dims();
  for (const KernelSpec& k : kernels_) {
    if (k.dims() != dims) throw std::invalid_argument("generator bank: kernel dimension does not match grid");
    rasters_.push_back(rasterize(k, spec_));
    const DiscreteField& f = rasters_.back();
    Support s;
    for (long n = 0; n < f.size(); ++n) {
      if (f[n] == 0.0) continue;
      s.flat.push_back(n);
      s.values.push_back(f[n]);
      long rem = n;
      for (int a = 0; a < dims; ++a) {
        s.coords.push_back(rem / spec_.stride(a));
        rem %= spec_.stride(a);
      }
    }
    supports_.push_back(std::move(s));
  }
}

std::vector<long> GeneratorBank::lattice_shift(long site) const {
  const int dims = spec_.dims();
  std::vector<long> shift(static_cast<std::size_t>(dims));
  for (int a = dims - 1; a >= 0; --a) {
    shift[a] = (site % spec_.period(a)) * spec_.m();
    site /= spec_.period(a);
  }
  return shift;
}

long GeneratorBank::shifted(int i, std::size_t n, const long* shift) const {
  const int dims = spec_.dims();
  const long* coord = &supports_[static_cast<std::size_t>(i)].coords[n * static_cast<std::size_t>(dims)];
  long f = 0;
  for (int a = 0; a < dims; ++a) {
    long c = coord[a] + shift[a];
    if (c >= spec_.cells(a)) c -= spec_.cells(a);
    f += c * spec_.stride(a);
  }
  return f;
}

DiscreteField synthesize(const CoefficientArray& c, const GeneratorBank& bank) {
  if (c.r() != bank.r() || c.extents() != bank.spec().periods())
    throw std::invalid_argument("synthesize: coefficient extents do not match the generator bank");
  DiscreteField out(bank.spec());
  for (int i = 0; i < bank.r(); ++i) {
    const auto& sup = bank.support(i);
    for (long site = 0; site < c.sites(); ++site) {
      const double w = c(i, site);
      if (w == 0.0) continue;
      const std::vector<long> shift = bank.lattice_shift(site);
      for (std::size_t n = 0; n < sup.values.size(); ++n) out[bank.shifted(i, n, shift.data())] += w * sup.values[n];
    }
  }
  return out;
}

CoefficientArray analysis(const DiscreteField& g, const GeneratorBank& bank) {
  require_same_grid(g.spec(), bank.spec(), "analysis");
  CoefficientArray b = bank.zero_coefficients();
  const double vol = bank.spec().cell_volume();
  for (int i = 0; i < bank.r(); ++i) {
    const auto& sup = bank.support(i);
    for (long site = 0; site < b.sites(); ++site) {
      const std::vector<long> shift = bank.lattice_shift(site);
      double acc = 0.0;
      for (std::size_t n = 0; n < sup.values.size(); ++n) acc += g[bank.shifted(i, n, shift.data())] * sup.values[n];
      b(i, site) = acc * vol;
    }
  }
  return b;
}

double coefficient_norm(const CoefficientArray& c, const MixedExponents& e) {
  double s = 0.0;
  for (int i = 0; i < c.r(); ++i) {
    const double n = mixed_seq_norm(c, i, e);
    s += n * n;
  }
  return std::sqrt(s);
}

GramOperator::GramOperator(GeneratorBank bank) : bank_(std::move(bank)) {
  const GridSpec& spec = bank_.spec();
  const int r = bank_.r();
  const long sites = spec.lattice_size();
  const double vol = spec.cell_volume();

  // corr[i][j][delta] = <phi_i, phi_j(. - delta)>; translates only interact
  // through their lattice offset.
  std::vector<double> corr(static_cast<std::size_t>(r * r * sites), 0.0);
  for (int i = 0; i < r; ++i) {
    const auto& sup = bank_.support(i);
    for (int j = 0; j < r; ++j) {
      const DiscreteField& phi_j = bank_.rasterized(j);
      for (long delta = 0; delta < sites; ++delta) {
        // phi_j(x - delta) at x = support cell  <=>  phi_j at x + (L - delta).
        std::vector<long> shift = bank_.lattice_shift(delta);
        for (int a = 0; a < spec.dims(); ++a) shift[a] = shift[a] == 0 ? 0 : spec.cells(a) - shift[a];
        double acc = 0.0;
        for (std::size_t n = 0; n < sup.values.size(); ++n) acc += sup.values[n] * phi_j[bank_.shifted(i, n, shift.data())];
        corr[static_cast<std::size_t>((i * r + j) * sites + delta)] = acc * vol;
      }
    }
  }

  const CoefficientArray layout = bank_.zero_coefficients();
  const long n = static_cast<long>(r) * sites;
  gram_.resize(n, n);
  Index diff(static_cast<std::size_t>(spec.dims()));
  for (int i = 0; i < r; ++i)
    for (long k = 0; k < sites; ++k) {
      const Index ki = layout.site_index(k);
      for (int j = 0; j < r; ++j)
        for (long kp = 0; kp < sites; ++kp) {
          const Index kpi = layout.site_index(kp);
          for (int a = 0; a < spec.dims(); ++a) diff[a] = kpi[a] - ki[a];
          gram_(i * sites + k, j * sites + kp) = corr[static_cast<std::size_t>((i * r + j) * sites + layout.wrap_site(diff))];
        }
    }
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  min_eig_ = eig.eigenvalues().minCoeff();
  max_eig_ = eig.eigenvalues().maxCoeff();
  if (!(max_eig_ > 0.0) || min_eig_ < 1e-10 * max_eig_) {
    std::ostringstream os;
    os << "gram: translates are not a Riesz basis (eigenvalue range [" << min_eig_ << ", " << max_eig_ << "])";
    throw SolverError(os.str(), min_eig_);
  }
  factor_.compute(gram_);
  if (factor_.info() != Eigen::Success) throw SolverError("gram: Cholesky factorization failed", min_eig_);
}

double GramOperator::asymmetry() const { return (gram_ - gram_.transpose()).cwiseAbs().maxCoeff(); }

CoefficientArray GramOperator::solve(const CoefficientArray& b, double tol) const {
  const long n = gram_.rows();
  if (b.size() != n) throw std::invalid_argument("gram solve: right-hand side has the wrong size");
  Eigen::Map<const Eigen::VectorXd> rhs(b.entries().data(), n);
  const double rhs_norm = rhs.norm();
  CoefficientArray c(b.r(), b.extents());
  if (rhs_norm == 0.0) return c;
  Eigen::VectorXd x = factor_.solve(rhs);
  double rel = (gram_ * x - rhs).norm() / rhs_norm;
  // Iterative refinement for ill-conditioned banks.
  for (int pass = 0; pass < 3 && rel > tol; ++pass) {
    x += factor_.solve(rhs - gram_ * x);
    rel = (gram_ * x - rhs).norm() / rhs_norm;
  }
  if (!(rel <= tol)) {
    std::ostringstream os;
    os << "gram solve did not reach relative residual " << tol << " (got " << rel << ")";
    throw SolverError(os.str(), rel);
  }
  Eigen::Map<Eigen::VectorXd>(c.entries().data(), n) = x;
  return c;
}

GramOperator build_gram(const GeneratorBank& bank) { return GramOperator(bank); }

CoefficientArray project(const DiscreteField& g, const GramOperator& gram) {
  return gram.solve(analysis(g, gram.bank()));
}

DiscreteField project_field(const DiscreteField& g, const GramOperator& gram) {
  return synthesize(project(g, gram), gram.bank());
}

double coefficient_to_function_ratio(const CoefficientArray& c, const GeneratorBank& bank, const MixedExponents& e) {
  const double fn = mixed_lebesgue_norm(synthesize(c, bank), e);
  if (fn == 0.0) return std::numeric_limits<double>::infinity();
  return coefficient_norm(c, e) / fn;
}

CoefficientArray random_coefficients(const GeneratorBank& bank, std::uint64_t seed) {
  Rng rng(seed);
  CoefficientArray c = bank.zero_coefficients();
  for (double& v : c.entries()) v = rng.uniform(-1.0, 1.0);
  return c;
}

NormEquivalence estimate_norm_equivalence(const GeneratorBank& bank, const MixedExponents& e, int trials,
                                          std::uint64_t seed) {
  if (trials < 10) throw std::invalid_argument("estimate_norm_equivalence: need at least 10 trials");
  NormEquivalence out;
  out.exponents = e;
  out.trials = trials;
  out.d1 = std::numeric_limits<double>::infinity();
  out.d2 = 0.0;
  std::uint64_t salt = 0;
  for (int t = 0; t < trials; ++t) {
    double ratio = std::numeric_limits<double>::infinity();
    // A draw synthesizing to zero is redrawn.
    while (!std::isfinite(ratio)) ratio = coefficient_to_function_ratio(random_coefficients(bank, mix_seed(seed, salt++)), bank, e);
    out.d1 = std::min(out.d1, ratio);
    out.d2 = std::max(out.d2, ratio);
  }
  return out;
}

double estimate_projection_norm(const GramOperator& gram, const MixedExponents& e, int trials, std::uint64_t seed) {
  if (trials < 10) throw std::invalid_argument("estimate_projection_norm: need at least 10 trials");
  const GeneratorBank& bank = gram.bank();
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    DiscreteField g = synthesize(random_coefficients(bank, rng.next()), bank);
    const double amp = rng.canonical();
    for (double& v : g.values()) v += amp * rng.uniform(-1.0, 1.0);
    const double gn = mixed_lebesgue_norm(g, e);
    if (gn == 0.0) continue;
    best = std::max(best, mixed_lebesgue_norm(project_field(g, gram), e) / gn);
  }
  return best;
}

}  // namespace avsamp
