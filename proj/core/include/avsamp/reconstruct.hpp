// reconstruct.hpp
//
// Sample-to-field operators (spread, quasi-interpolant, approximation
// operator), the fixed-point reconstruction iteration, contraction estimates
// for the error operator T = I - P A on V, and convergence diagnostics.

#ifndef AVSAMP_RECONSTRUCT_HPP
#define AVSAMP_RECONSTRUCT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "avsamp/coefficients.hpp"
#include "avsamp/grid.hpp"
#include "avsamp/norms.hpp"
#include "avsamp/sampling.hpp"
#include "avsamp/shift_invariant.hpp"

namespace avsamp {

// Field whose value on each cell is the value of that cell's assigned sample,
// i.e. sum_j values_j beta_j.
DiscreteField spread(std::span<const double> values, const Bupu& bupu);

// Spread of the point values f(x_j), each read at the midpoint of the cell
// containing x_j.
DiscreteField quasi_interpolant(const DiscreteField& f, const SamplingSet& X, const Bupu& bupu);

// A f assembled from measured samples; the same assembly as spread().
DiscreteField approx_operator(std::span<const double> samples, const Bupu& bupu);

// The fixed pieces every iteration touches.
struct SamplingSystem {
  const GramOperator& gram;
  const Bupu& bupu;
  const AveragingKernelSet& kernels;
  const SamplingSet& X;
};

// e -> e - P A e.
DiscreteField apply_error_operator(const DiscreteField& e, const SamplingSystem& sys);

struct ReconstructionOptions {
  MixedExponents exponents;
  int max_iter = 500;
  double tol = 1e-10;
  // When set, e_n = ||truth - f_n|| is logged every iteration.
  const DiscreteField* truth = nullptr;
  int divergence_window = 5;
};

enum class ReconstructionStatus { converged, diverged, max_iter };

std::string to_string(ReconstructionStatus s);

struct ReconstructionReport {
  int iterations_run = 0;
  std::vector<double> successive_changes;
  std::vector<double> true_errors;
  // ISO-8601 UTC wall-clock time at the end of each iteration.
  std::vector<std::string> timestamps;
  std::optional<double> alpha_fit;
  // max_n e_{n+1} / e_n over logged true errors.
  std::optional<double> max_ratio;
  bool converged = false;
  ReconstructionStatus status = ReconstructionStatus::max_iter;
  std::string reason;
};

struct ReconstructionResult {
  CoefficientArray coefficients;
  DiscreteField field;
  ReconstructionReport report;
};

// f_0 = 0, f_{n+1} = f_n + P spread(s - acquire(f_n)). By linearity of A this
// is the same as f_{n+1} = f_n + P A (f - f_n), but it only ever touches f
// through the measured samples s.
ReconstructionResult reconstruct(std::span<const double> samples, const SamplingSystem& sys,
                                 const ReconstructionOptions& opts);

// Coefficient matrix of T restricted to V: column k holds the coefficients of
// T phi_k, with phi_k the k-th translate in coefficient order.
Eigen::MatrixXd error_operator_matrix(const SamplingSystem& sys);

// Exact grid-L2 operator norm of T on V, from the generalized eigenproblem
// M^T G M v = lambda G v.
double error_operator_l2_norm(const Eigen::MatrixXd& M, const GramOperator& gram);

struct ContractionEstimate {
  double alpha_hat = 0.0;
  // Largest ratio over the random draws alone.
  double alpha_sampled = 0.0;
  // Exact operator norm; only filled when p = q = 2.
  std::optional<double> alpha_l2;
  int trials = 0;
  double gamma = 0.0;
  double a = 0.0;
};

// alpha_hat = max ||T f|| / ||f|| over seeded random members of V together
// with the leading L2 singular directions of T. Draws run on `threads`
// workers; the result does not depend on the worker count.
ContractionEstimate estimate_contraction(const SamplingSystem& sys, const MixedExponents& e, int trials,
                                         std::uint64_t seed, int threads = 1);

// exp of the least-squares slope of log e_n against n, over entries above
// 10 eps e_1. Throws std::invalid_argument with fewer than 3 usable entries.
double fit_decay(std::span<const double> errors);

nlohmann::json report_to_json(const ReconstructionReport& report);

// Columns n, successive_change[, true_error][, timestamp].
void write_iterations_csv(std::ostream& out, const ReconstructionReport& report, bool timestamps);

}  // namespace avsamp

#endif
