// experiment.hpp
//
// Batch layer behind the command line tool: the flat dotted-key config,
// single runs, parameter sweeps and the invariant suite runner.

#ifndef AVSAMP_EXPERIMENT_HPP
#define AVSAMP_EXPERIMENT_HPP

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "avsamp/grid.hpp"
#include "avsamp/norms.hpp"
#include "avsamp/reconstruct.hpp"
#include "avsamp/sampling.hpp"

namespace avsamp {

enum class SamplingKind { jittered, random, file };

struct ExperimentConfig {
  int d = 1;
  std::vector<int> periods;
  int m = 16;
  double p = 2.0;
  double q = 2.0;
  std::vector<std::string> generators;
  SamplingKind sampling_mode = SamplingKind::jittered;
  double gamma = 0.0;
  // Unset means: spacing = gamma, jitter = 0.4 * spacing.
  std::optional<double> spacing;
  std::optional<double> jitter;
  long count = 0;
  SetStructure structure = SetStructure::scattered;
  std::string sampling_file;
  KernelMode kernel_mode = KernelMode::single;
  AveragingShape kernel_shape = AveragingShape::box;
  double a = 0.25;
  double m_target = 1.0;
  double offset_fraction = 0.25;
  int max_iter = 500;
  double tol = 1e-10;
  int contraction_trials = 20;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool timestamps = false;

  double effective_spacing() const { return spacing.value_or(gamma); }
  double effective_jitter() const { return jitter.value_or(0.4 * effective_spacing()); }
  MixedExponents exponents() const { return MixedExponents(p, q); }
  GridSpec grid() const { return GridSpec(d, periods, m); }

  bool operator==(const ExperimentConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Parses "key = value" lines ('#' starts a comment). Every violation is
// collected and reported together, each prefixed by its key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
// Lossless: parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);
// Returns the list of violations (empty when valid).
std::vector<std::string> validate_config(const ExperimentConfig& c);

// All objects one experiment needs, built deterministically from the config.
struct Experiment {
  ExperimentConfig config;
  GridSpec spec;
  GramOperator gram;
  SamplingSet X;
  Bupu bupu;
  AveragingKernelSet kernels;

  SamplingSystem system() const { return SamplingSystem{gram, bupu, kernels, X}; }
};

Experiment build_experiment(const ExperimentConfig& c);

// Independent seed streams derived from the config seed.
enum class SeedStream : std::uint64_t { sampling = 1, offsets = 2, truth = 3, contraction = 4, verify = 5 };
std::uint64_t stream_seed(std::uint64_t seed, SeedStream s);

struct RunOutcome {
  int exit_code = 0;  // 0 converged, 2 not converged
  ReconstructionReport report;
  ContractionEstimate contraction;
  DensityReport density;
  double relative_error = 0.0;
  nlohmann::json report_json;
  std::string iterations_csv;
};

// Draws a seeded truth in V, samples it, reconstructs. A run only counts as
// converged when the iteration reached tol and the contraction certificate
// alpha_hat < 1 holds; otherwise it is reported as diverged.
RunOutcome run_experiment(const ExperimentConfig& c, int threads = 1);

// Writes report.json, iterations.csv and config.txt into dir.
void write_run_outputs(const RunOutcome& r, const ExperimentConfig& c, const std::string& dir);

struct SweepAxes {
  std::vector<double> gamma;
  std::vector<double> a;
  std::vector<double> p;
  std::vector<double> q;
};

struct SweepRow {
  double gamma = 0.0, a = 0.0, p = 0.0, q = 0.0;
  std::uint64_t seed = 0;
  double alpha_hat = 0.0;
  std::optional<double> alpha_fit;
  bool converged = false;
  int iterations = 0;
  std::string error;  // non-empty when the combination could not be built
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // Largest gamma (then largest a) among converged rows with alpha_hat < 1.
  std::optional<SweepRow> frontier;
};

// Configuration of one sweep combination: gamma, a, p, q replaced, spacing and
// jitter scaled with gamma, seed mixed with a hash of the combination.
ExperimentConfig sweep_config(const ExperimentConfig& base, double gamma, double a, double p, double q);

// Runs every combination; rows come back in axis order (gamma outermost)
// regardless of the worker count. Per-combination outputs go to
// <output_dir>/sweep/<index>/ when write_outputs is set.
SweepResult run_sweep(const ExperimentConfig& base, const SweepAxes& axes, int threads = 1, bool write_outputs = true);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class Fault { none, bupu };

// Runs every module invariant at the config's scale.
std::vector<CheckResult> run_verify(const ExperimentConfig& c, Fault fault = Fault::none, int threads = 1);

}  // namespace avsamp

#endif
