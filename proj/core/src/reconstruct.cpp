#include "avsamp/reconstruct.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <stdexcept>
#include <thread>

#include "avsamp/random.hpp"

namespace avsamp {

DiscreteField spread(std::span<const double> values, const Bupu& bupu) {
  if (static_cast<long>(values.size()) != bupu.samples())
    throw std::invalid_argument("spread: expected " + std::to_string(bupu.samples()) + " values, got " +
                                std::to_string(values.size()));
  const GridSpec& spec = bupu.spec();
  DiscreteField out(spec);
  for (long c = 0; c < spec.size(); ++c) {
    const int j = bupu.owner(c);
    if (j >= 0) out[c] = values[static_cast<std::size_t>(j)];
  }
  return out;
}

DiscreteField quasi_interpolant(const DiscreteField& f, const SamplingSet& X, const Bupu& bupu) {
  require_same_grid(f.spec(), bupu.spec(), "quasi_interpolant");
  std::vector<double> values(static_cast<std::size_t>(X.size()));
  for (long j = 0; j < X.size(); ++j) values[static_cast<std::size_t>(j)] = f[f.spec().cell_of(X.point(j))];
  return spread(values, bupu);
}

DiscreteField approx_operator(std::span<const double> samples, const Bupu& bupu) { return spread(samples, bupu); }

DiscreteField apply_error_operator(const DiscreteField& e, const SamplingSystem& sys) {
  const std::vector<double> s = acquire_samples(e, sys.kernels, sys.X);
  return e - project_field(approx_operator(s, sys.bupu), sys.gram);
}

std::string to_string(ReconstructionStatus s) {
  switch (s) {
    case ReconstructionStatus::converged:
      return "converged";
    case ReconstructionStatus::diverged:
      return "diverged";
    case ReconstructionStatus::max_iter:
      return "max_iter";
  }
  return "unknown";
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ReconstructionResult reconstruct(std::span<const double> samples, const SamplingSystem& sys,
                                 const ReconstructionOptions& opts) {
  if (opts.max_iter < 1) throw std::invalid_argument("reconstruct: max_iter must be >= 1");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("reconstruct: tol must be positive");
  if (static_cast<long>(samples.size()) != sys.X.size())
    throw std::invalid_argument("reconstruct: sample vector length does not match the sampling set");
  const GeneratorBank& bank = sys.gram.bank();
  if (opts.truth) require_same_grid(opts.truth->spec(), bank.spec(), "reconstruct truth");

  ReconstructionResult res{bank.zero_coefficients(), DiscreteField(bank.spec()), {}};
  ReconstructionReport& rep = res.report;
  std::vector<double> residual(samples.size());
  int growth = 0;
  for (int n = 1; n <= opts.max_iter; ++n) {
    const std::vector<double> current = acquire_samples(res.field, sys.kernels, sys.X);
    for (std::size_t j = 0; j < samples.size(); ++j) residual[j] = samples[j] - current[j];
    const CoefficientArray step = project(approx_operator(residual, sys.bupu), sys.gram);
    const DiscreteField step_field = synthesize(step, bank);
    for (long k = 0; k < res.coefficients.size(); ++k) res.coefficients.entries()[static_cast<std::size_t>(k)] += step.entries()[static_cast<std::size_t>(k)];
    res.field += step_field;

    const double change = mixed_lebesgue_norm(step_field, opts.exponents);
    rep.successive_changes.push_back(change);
    if (opts.truth) rep.true_errors.push_back(mixed_lebesgue_norm(*opts.truth - res.field, opts.exponents));
    rep.timestamps.push_back(utc_now());
    rep.iterations_run = n;

    if (!std::isfinite(change)) {
      rep.status = ReconstructionStatus::diverged;
      rep.reason = "successive change is not finite";
      break;
    }
    if (change <= opts.tol) {
      rep.status = ReconstructionStatus::converged;
      break;
    }
    if (n > 1) growth = change > rep.successive_changes[rep.successive_changes.size() - 2] ? growth + 1 : 0;
    if (growth >= opts.divergence_window) {
      rep.status = ReconstructionStatus::diverged;
      rep.reason = "successive change grew for " + std::to_string(growth) + " consecutive iterations";
      break;
    }
  }
  if (rep.status == ReconstructionStatus::max_iter) rep.reason = "tolerance not reached within max_iter";
  rep.converged = rep.status == ReconstructionStatus::converged;

  const std::vector<double>& decay = opts.truth ? rep.true_errors : rep.successive_changes;
  try {
    rep.alpha_fit = fit_decay(decay);
  } catch (const std::invalid_argument&) {
    rep.alpha_fit.reset();
  }
  if (opts.truth && rep.true_errors.size() >= 2) {
    double worst = 0.0;
    for (std::size_t n = 1; n < rep.true_errors.size(); ++n)
      if (rep.true_errors[n - 1] > 0.0) worst = std::max(worst, rep.true_errors[n] / rep.true_errors[n - 1]);
    rep.max_ratio = worst;
  }
  return res;
}

Eigen::MatrixXd error_operator_matrix(const SamplingSystem& sys) {
  const GeneratorBank& bank = sys.gram.bank();
  const long n = sys.gram.dimension();
  Eigen::MatrixXd M(n, n);
  CoefficientArray unit = bank.zero_coefficients();
  for (long k = 0; k < n; ++k) {
    unit.entries()[static_cast<std::size_t>(k)] = 1.0;
    const std::vector<double> s = acquire_samples(synthesize(unit, bank), sys.kernels, sys.X);
    const CoefficientArray pa = project(approx_operator(s, sys.bupu), sys.gram);
    for (long i = 0; i < n; ++i) M(i, k) = (i == k ? 1.0 : 0.0) - pa.entries()[static_cast<std::size_t>(i)];
    unit.entries()[static_cast<std::size_t>(k)] = 0.0;
  }
  return M;
}

namespace {

Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> error_operator_spectrum(const Eigen::MatrixXd& M,
                                                                                  const GramOperator& gram) {
  const Eigen::MatrixXd& G = gram.matrix();
  Eigen::MatrixXd A = M.transpose() * G * M;
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, G);
  if (eig.info() != Eigen::Success) throw SolverError("error operator: generalized eigensolver failed", 0.0);
  return eig;
}

double ratio_of(const Eigen::VectorXd& c, const Eigen::MatrixXd& M, const GeneratorBank& bank, const MixedExponents& e) {
  CoefficientArray in = bank.zero_coefficients();
  CoefficientArray out = bank.zero_coefficients();
  Eigen::Map<Eigen::VectorXd>(in.entries().data(), c.size()) = c;
  Eigen::Map<Eigen::VectorXd>(out.entries().data(), c.size()) = M * c;
  const double fn = mixed_lebesgue_norm(synthesize(in, bank), e);
  if (fn == 0.0) return 0.0;
  return mixed_lebesgue_norm(synthesize(out, bank), e) / fn;
}

}  // namespace

double error_operator_l2_norm(const Eigen::MatrixXd& M, const GramOperator& gram) {
  const auto eig = error_operator_spectrum(M, gram);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

ContractionEstimate estimate_contraction(const SamplingSystem& sys, const MixedExponents& e, int trials,
                                         std::uint64_t seed, int threads) {
  if (trials < 10) throw std::invalid_argument("estimate_contraction: need at least 10 trials");
  const GeneratorBank& bank = sys.gram.bank();
  const Eigen::MatrixXd M = error_operator_matrix(sys);

  std::vector<double> ratios(static_cast<std::size_t>(trials), 0.0);
  auto work = [&](int first, int stride) {
    for (int t = first; t < trials; t += stride) {
      const CoefficientArray c = random_coefficients(bank, mix_seed(seed, static_cast<std::uint64_t>(t)));
      ratios[static_cast<std::size_t>(t)] =
          ratio_of(Eigen::Map<const Eigen::VectorXd>(c.entries().data(), c.size()), M, bank, e);
    }
  };
  const int workers = std::max(1, std::min(threads, trials));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  ContractionEstimate out;
  out.trials = trials;
  out.gamma = sys.X.gamma_nominal();
  out.a = sys.kernels.a();
  out.alpha_sampled = *std::max_element(ratios.begin(), ratios.end());
  out.alpha_hat = out.alpha_sampled;

  // The leading generalized eigenvectors are the worst L2 directions; they are
  // also strong candidates for the mixed norms.
  const auto eig = error_operator_spectrum(M, sys.gram);
  const long n = M.cols();
  for (long k = n - 1; k >= std::max(0L, n - 4); --k)
    out.alpha_hat = std::max(out.alpha_hat, ratio_of(eig.eigenvectors().col(k), M, bank, e));
  if (e.p == 2.0 && e.q == 2.0) {
    out.alpha_l2 = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    out.alpha_hat = std::max(out.alpha_hat, *out.alpha_l2);
  }
  return out;
}

double fit_decay(std::span<const double> errors) {
  if (errors.empty() || !(errors[0] > 0.0)) throw std::invalid_argument("fit_decay: need a positive first entry");
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * errors[0];
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n = 0; n < errors.size(); ++n)
    if (errors[n] > floor && std::isfinite(errors[n])) pts.emplace_back(static_cast<double>(n), std::log(errors[n]));
  if (pts.size() < 3) throw std::invalid_argument("fit_decay: fewer than 3 usable entries");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return std::exp(sxy / sxx);
}

nlohmann::json report_to_json(const ReconstructionReport& report) {
  nlohmann::json j;
  j["iterations_run"] = report.iterations_run;
  j["converged"] = report.converged;
  j["status"] = to_string(report.status);
  j["reason"] = report.reason;
  j["alpha_fit"] = report.alpha_fit ? nlohmann::json(*report.alpha_fit) : nlohmann::json(nullptr);
  j["max_ratio"] = report.max_ratio ? nlohmann::json(*report.max_ratio) : nlohmann::json(nullptr);
  j["successive_changes"] = report.successive_changes;
  j["true_errors"] = report.true_errors;
  return j;
}

void write_iterations_csv(std::ostream& out, const ReconstructionReport& report, bool timestamps) {
  const bool truth = !report.true_errors.empty();
  out << "n,successive_change";
  if (truth) out << ",true_error";
  if (timestamps) out << ",timestamp";
  out << "\n";
  char buf[64];
  for (int n = 0; n < report.iterations_run; ++n) {
    out << (n + 1);
    std::snprintf(buf, sizeof buf, ",%.17g", report.successive_changes[static_cast<std::size_t>(n)]);
    out << buf;
    if (truth) {
      std::snprintf(buf, sizeof buf, ",%.17g", report.true_errors[static_cast<std::size_t>(n)]);
      out << buf;
    }
    if (timestamps) out << "," << report.timestamps[static_cast<std::size_t>(n)];
    out << "\n";
  }
}

}  // namespace avsamp
