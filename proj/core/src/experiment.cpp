#include "avsamp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "avsamp/random.hpp"

namespace avsamp {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits on commas that are not inside parentheses.
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v, std::vector<std::string>& errs) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  errs.push_back(key + ": expected a number, got '" + v + "'");
  return 0.0;
}

long parse_long(const std::string& key, const std::string& v, std::vector<std::string>& errs) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  errs.push_back(key + ": expected an integer, got '" + v + "'");
  return 0;
}

const char* kind_name(SamplingKind k) {
  switch (k) {
    case SamplingKind::jittered:
      return "jittered";
    case SamplingKind::random:
      return "random";
    case SamplingKind::file:
      return "file";
  }
  return "";
}

const char* shape_name(AveragingShape s) {
  switch (s) {
    case AveragingShape::box:
      return "box";
    case AveragingShape::tent:
      return "tent";
    case AveragingShape::signed_box:
      return "signed_box";
  }
  return "";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid config:\n  " + join(violations, "\n  ")), violations_(std::move(violations)) {}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> errs;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (kv.count(key)) errs.push_back(key + ": given more than once");
    kv[key] = trim(line.substr(eq + 1));
  }

  for (const char* required : {"grid.periods", "bank.generators", "sampling.gamma"})
    if (!kv.count(required)) errs.push_back(std::string(required) + ": missing required key");

  std::optional<long> bank_r;
  for (const auto& [key, v] : kv) {
    if (key == "grid.d") {
      c.d = static_cast<int>(parse_long(key, v, errs));
    } else if (key == "grid.periods") {
      c.periods.clear();
      for (const auto& t : split_list(v)) c.periods.push_back(static_cast<int>(parse_long(key, t, errs)));
    } else if (key == "grid.m") {
      c.m = static_cast<int>(parse_long(key, v, errs));
    } else if (key == "exponents.p") {
      c.p = parse_double(key, v, errs);
    } else if (key == "exponents.q") {
      c.q = parse_double(key, v, errs);
    } else if (key == "bank.generators") {
      c.generators = split_list(v);
    } else if (key == "bank.r") {
      bank_r = parse_long(key, v, errs);
    } else if (key == "sampling.mode") {
      if (v == "jittered") c.sampling_mode = SamplingKind::jittered;
      else if (v == "random") c.sampling_mode = SamplingKind::random;
      else if (v == "file") c.sampling_mode = SamplingKind::file;
      else errs.push_back(key + ": expected jittered, random or file, got '" + v + "'");
    } else if (key == "sampling.gamma") {
      c.gamma = parse_double(key, v, errs);
    } else if (key == "sampling.s") {
      c.spacing = parse_double(key, v, errs);
    } else if (key == "sampling.eta") {
      c.jitter = parse_double(key, v, errs);
    } else if (key == "sampling.n") {
      c.count = parse_long(key, v, errs);
    } else if (key == "sampling.structure") {
      if (v == "scattered") c.structure = SetStructure::scattered;
      else if (v == "product") c.structure = SetStructure::product;
      else errs.push_back(key + ": expected scattered or product, got '" + v + "'");
    } else if (key == "sampling.file") {
      c.sampling_file = v;
    } else if (key == "kernels.mode") {
      if (v == "single") c.kernel_mode = KernelMode::single;
      else if (v == "per_sample") c.kernel_mode = KernelMode::per_sample;
      else errs.push_back(key + ": expected single or per_sample, got '" + v + "'");
    } else if (key == "kernels.shape") {
      if (v == "box") c.kernel_shape = AveragingShape::box;
      else if (v == "tent") c.kernel_shape = AveragingShape::tent;
      else if (v == "signed_box") c.kernel_shape = AveragingShape::signed_box;
      else errs.push_back(key + ": expected box, tent or signed_box, got '" + v + "'");
    } else if (key == "kernels.a") {
      c.a = parse_double(key, v, errs);
    } else if (key == "kernels.M") {
      c.m_target = parse_double(key, v, errs);
    } else if (key == "kernels.offset_fraction") {
      c.offset_fraction = parse_double(key, v, errs);
    } else if (key == "iteration.max_iter") {
      c.max_iter = static_cast<int>(parse_long(key, v, errs));
    } else if (key == "iteration.tol") {
      c.tol = parse_double(key, v, errs);
    } else if (key == "contraction.trials") {
      c.contraction_trials = static_cast<int>(parse_long(key, v, errs));
    } else if (key == "seed") {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
      } catch (const std::exception&) {
        errs.push_back(key + ": expected a non-negative integer, got '" + v + "'");
      }
    } else if (key == "output.dir") {
      c.output_dir = v;
    } else if (key == "output.timestamps") {
      if (v == "true") c.timestamps = true;
      else if (v == "false") c.timestamps = false;
      else errs.push_back(key + ": expected true or false, got '" + v + "'");
    } else {
      errs.push_back(key + ": unknown key");
    }
  }
  if (bank_r && *bank_r != static_cast<long>(c.generators.size()))
    errs.push_back("bank.r: " + std::to_string(*bank_r) + " does not match the " +
                   std::to_string(c.generators.size()) + " entries of bank.generators");

  // Range checks for keys that already failed to parse would only repeat them.
  for (auto& e : validate_config(c)) {
    const std::string key = e.substr(0, e.find(':'));
    const bool seen = std::any_of(errs.begin(), errs.end(), [&](const std::string& x) { return x.rfind(key + ":", 0) == 0; });
    if (!seen) errs.push_back(std::move(e));
  }
  if (!errs.empty()) throw ConfigError(errs);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errs;
  if (c.d < 1) errs.push_back("grid.d: must be >= 1");
  bool grid_ok = c.d >= 1 && static_cast<int>(c.periods.size()) == c.d + 1;
  if (static_cast<int>(c.periods.size()) != c.d + 1)
    errs.push_back("grid.periods: expected d + 1 = " + std::to_string(c.d + 1) + " entries");
  for (int L : c.periods)
    if (L < 4) {
      errs.push_back("grid.periods: every period must be >= 4 (got " + std::to_string(L) + ")");
      grid_ok = false;
    }
  if (c.m < 4) {
    errs.push_back("grid.m: must be >= 4 (got " + std::to_string(c.m) + ")");
    grid_ok = false;
  }
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) errs.push_back("exponents.p: must satisfy p >= 1 and be finite (got " + fmt(c.p) + ")");
  if (!(c.q >= 1.0) || !std::isfinite(c.q)) errs.push_back("exponents.q: must satisfy q >= 1 and be finite (got " + fmt(c.q) + ")");
  const double min_period = c.periods.empty() ? 0.0 : *std::min_element(c.periods.begin(), c.periods.end());

  if (c.generators.empty()) errs.push_back("bank.generators: need at least one generator");
  for (const auto& g : c.generators) {
    try {
      const KernelSpec k = parse_kernel_token(g, c.d + 1);
      if (grid_ok && k.support_diameter() >= min_period)
        errs.push_back("bank.generators: support of '" + g + "' (diameter " + fmt(k.support_diameter()) +
                       ") must be smaller than the smallest period " + fmt(min_period));
    } catch (const std::exception& e) {
      errs.push_back("bank.generators: " + std::string(e.what()));
    }
  }

  if (!(c.gamma > 0.0)) errs.push_back("sampling.gamma: must be positive (got " + fmt(c.gamma) + ")");
  switch (c.sampling_mode) {
    case SamplingKind::jittered: {
      const double s = c.effective_spacing();
      if (!(s > 0.0) || (grid_ok && s >= min_period))
        errs.push_back("sampling.s: spacing must satisfy 0 < s < smallest period (got " + fmt(s) + ")");
      const double eta = c.effective_jitter();
      if (!(eta >= 0.0) || !(eta < 0.5 * s))
        errs.push_back("sampling.eta: jitter must satisfy 0 <= eta < s / 2 (got " + fmt(eta) + ")");
      break;
    }
    case SamplingKind::random:
      if (c.count < 1) errs.push_back("sampling.n: must be >= 1 for random sampling");
      break;
    case SamplingKind::file:
      if (c.sampling_file.empty()) errs.push_back("sampling.file: required when sampling.mode = file");
      else if (!std::filesystem::exists(c.sampling_file))
        errs.push_back("sampling.file: '" + c.sampling_file + "' does not exist");
      break;
  }

  if (!(c.a > 0.0)) errs.push_back("kernels.a: must be positive (got " + fmt(c.a) + ")");
  else if (grid_ok && c.a > min_period / 8.0)
    errs.push_back("kernels.a: support-vs-period rule violated, a = " + fmt(c.a) +
                   " must be <= smallest period / 8 = " + fmt(min_period / 8.0));
  if (c.a > 0.0 && c.m >= 1 && c.a < 1.0 / c.m)
    errs.push_back("kernels.a: must be >= the grid spacing 1/m = " + fmt(1.0 / c.m) + " (got " + fmt(c.a) + ")");
  if (!(c.m_target >= 1.0)) errs.push_back("kernels.M: must be >= 1 (got " + fmt(c.m_target) + ")");
  else if (c.m_target > 1.0 && c.kernel_shape != AveragingShape::signed_box)
    errs.push_back("kernels.M: M > 1 requires kernels.shape = signed_box");
  if (!(c.offset_fraction >= 0.0) || c.offset_fraction > 0.25)
    errs.push_back("kernels.offset_fraction: must lie in [0, 0.25] (got " + fmt(c.offset_fraction) + ")");
  if (c.max_iter < 1) errs.push_back("iteration.max_iter: must be >= 1");
  if (!(c.tol > 0.0)) errs.push_back("iteration.tol: must be positive");
  if (c.contraction_trials < 10) errs.push_back("contraction.trials: must be >= 10");
  if (c.output_dir.empty()) errs.push_back("output.dir: must not be empty");
  return errs;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  std::vector<std::string> periods;
  for (int L : c.periods) periods.push_back(std::to_string(L));
  o << "grid.d = " << c.d << "\n";
  o << "grid.periods = " << join(periods, ", ") << "\n";
  o << "grid.m = " << c.m << "\n";
  o << "exponents.p = " << fmt(c.p) << "\n";
  o << "exponents.q = " << fmt(c.q) << "\n";
  o << "bank.generators = " << join(c.generators, ", ") << "\n";
  o << "sampling.mode = " << kind_name(c.sampling_mode) << "\n";
  o << "sampling.gamma = " << fmt(c.gamma) << "\n";
  if (c.spacing) o << "sampling.s = " << fmt(*c.spacing) << "\n";
  if (c.jitter) o << "sampling.eta = " << fmt(*c.jitter) << "\n";
  if (c.count != 0) o << "sampling.n = " << c.count << "\n";
  o << "sampling.structure = " << (c.structure == SetStructure::product ? "product" : "scattered") << "\n";
  if (!c.sampling_file.empty()) o << "sampling.file = " << c.sampling_file << "\n";
  o << "kernels.mode = " << (c.kernel_mode == KernelMode::single ? "single" : "per_sample") << "\n";
  o << "kernels.shape = " << shape_name(c.kernel_shape) << "\n";
  o << "kernels.a = " << fmt(c.a) << "\n";
  o << "kernels.M = " << fmt(c.m_target) << "\n";
  o << "kernels.offset_fraction = " << fmt(c.offset_fraction) << "\n";
  o << "iteration.max_iter = " << c.max_iter << "\n";
  o << "iteration.tol = " << fmt(c.tol) << "\n";
  o << "contraction.trials = " << c.contraction_trials << "\n";
  o << "seed = " << c.seed << "\n";
  o << "output.dir = " << c.output_dir << "\n";
  o << "output.timestamps = " << (c.timestamps ? "true" : "false") << "\n";
  return o.str();
}

std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) { return mix_seed(seed, static_cast<std::uint64_t>(s)); }

namespace {

SamplingSet make_sampling_set(const ExperimentConfig& c, const GridSpec& spec) {
  const std::uint64_t seed = stream_seed(c.seed, SeedStream::sampling);
  switch (c.sampling_mode) {
    case SamplingKind::jittered: {
      JitteredGrid jg;
      jg.spacing = c.effective_spacing();
      jg.jitter = c.effective_jitter();
      jg.structure = c.structure;
      return generate_sampling_set(jg, spec, seed, c.gamma);
    }
    case SamplingKind::random:
      return generate_sampling_set(UniformRandom{c.count}, spec, seed, c.gamma);
    case SamplingKind::file: {
      const SamplingSet loaded = read_sampling_csv(c.sampling_file, spec.dims());
      return SamplingSet(spec.dims(), loaded.coordinates(), loaded.structure(), c.gamma);
    }
  }
  throw std::logic_error("unreachable sampling mode");
}

GeneratorBank make_bank(const ExperimentConfig& c, const GridSpec& spec) {
  std::vector<KernelSpec> kernels;
  for (const auto& g : c.generators) kernels.push_back(parse_kernel_token(g, spec.dims()));
  return GeneratorBank(spec, kernels);
}

KernelOptions kernel_options(const ExperimentConfig& c) {
  KernelOptions o;
  o.mode = c.kernel_mode;
  o.shape = c.kernel_shape;
  o.a = c.a;
  o.m_target = c.m_target;
  o.offset_fraction = c.offset_fraction;
  o.seed = stream_seed(c.seed, SeedStream::offsets);
  return o;
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& c) {
  const auto errs = validate_config(c);
  if (!errs.empty()) throw ConfigError(errs);
  GridSpec spec = c.grid();
  SamplingSet X = make_sampling_set(c, spec);
  Bupu bupu = build_bupu(X, spec);
  AveragingKernelSet kernels = make_kernels(kernel_options(c), X, spec);
  return Experiment{c, spec, GramOperator(make_bank(c, spec)), std::move(X), std::move(bupu), std::move(kernels)};
}

RunOutcome run_experiment(const ExperimentConfig& c, int threads) {
  const Experiment ex = build_experiment(c);
  const SamplingSystem sys = ex.system();
  const MixedExponents e = c.exponents();
  const GeneratorBank& bank = ex.gram.bank();

  RunOutcome out;
  out.density = verify_density(ex.X, c.gamma, ex.spec);
  const DiscreteField truth = synthesize(random_coefficients(bank, stream_seed(c.seed, SeedStream::truth)), bank);
  const std::vector<double> samples = acquire_samples(truth, ex.kernels, ex.X);
  out.contraction =
      estimate_contraction(sys, e, c.contraction_trials, stream_seed(c.seed, SeedStream::contraction), threads);

  ReconstructionOptions opts;
  opts.exponents = e;
  opts.max_iter = c.max_iter;
  opts.tol = c.tol;
  opts.truth = &truth;
  ReconstructionResult res = reconstruct(samples, sys, opts);
  out.report = std::move(res.report);
  if (out.report.converged && !(out.contraction.alpha_hat < 1.0)) {
    // The iterates settled, but nothing certifies that they settled on f: T
    // is not a contraction on V, so part of V is invisible to the samples.
    out.report.converged = false;
    out.report.status = ReconstructionStatus::diverged;
    out.report.reason = "no contraction certificate: alpha_hat = " + fmt(out.contraction.alpha_hat) + " >= 1";
  }
  const double truth_norm = mixed_lebesgue_norm(truth, e);
  out.relative_error = out.report.true_errors.empty() || truth_norm == 0.0 ? 0.0 : out.report.true_errors.back() / truth_norm;
  out.exit_code = out.report.converged ? 0 : 2;

  nlohmann::json j = report_to_json(out.report);
  j["alpha_hat"] = out.contraction.alpha_hat;
  j["alpha_sampled"] = out.contraction.alpha_sampled;
  j["alpha_l2"] = out.contraction.alpha_l2 ? nlohmann::json(*out.contraction.alpha_l2) : nlohmann::json(nullptr);
  j["contraction_trials"] = out.contraction.trials;
  j["gamma"] = c.gamma;
  j["a"] = c.a;
  j["p"] = c.p;
  j["q"] = c.q;
  j["seed"] = c.seed;
  j["samples"] = ex.X.size();
  j["dimension"] = ex.gram.dimension();
  j["realized_M"] = ex.kernels.realized_m();
  j["density"] = {{"certified", out.density.certified}, {"worst_gap", out.density.worst_gap}};
  j["truth_norm"] = truth_norm;
  j["relative_error"] = out.relative_error;
  if (out.report.alpha_fit && !out.report.true_errors.empty() && *out.report.alpha_fit > 0.0)
    j["empirical_prefactor"] = out.report.true_errors.front() / *out.report.alpha_fit;
  else
    j["empirical_prefactor"] = nullptr;
  out.report_json = std::move(j);

  std::ostringstream csv;
  write_iterations_csv(csv, out.report, c.timestamps);
  out.iterations_csv = csv.str();
  return out;
}

void write_run_outputs(const RunOutcome& r, const ExperimentConfig& c, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream(base / "report.json") << r.report_json.dump(2) << "\n";
  std::ofstream(base / "iterations.csv") << r.iterations_csv;
  std::ofstream(base / "config.txt") << serialize_config(c);
}

ExperimentConfig sweep_config(const ExperimentConfig& base, double gamma, double a, double p, double q) {
  ExperimentConfig c = base;
  const double ratio = gamma / base.gamma;
  c.gamma = gamma;
  if (base.spacing) c.spacing = *base.spacing * ratio;
  if (base.jitter) c.jitter = *base.jitter * ratio;
  c.a = a;
  c.p = p;
  c.q = q;
  const std::string combo = "gamma=" + fmt(gamma) + ";a=" + fmt(a) + ";p=" + fmt(p) + ";q=" + fmt(q);
  c.seed = base.seed ^ hash_string(combo);
  return c;
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepAxes& axes, int threads, bool write_outputs) {
  if (axes.gamma.empty() || axes.a.empty() || axes.p.empty() || axes.q.empty())
    throw std::invalid_argument("sweep: every axis needs at least one value");
  std::vector<ExperimentConfig> combos;
  for (double g : axes.gamma)
    for (double a : axes.a)
      for (double p : axes.p)
        for (double q : axes.q) combos.push_back(sweep_config(base, g, a, p, q));

  SweepResult result;
  result.rows.resize(combos.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < combos.size(); i += stride) {
      const ExperimentConfig& c = combos[i];
      SweepRow& row = result.rows[i];
      row.gamma = c.gamma;
      row.a = c.a;
      row.p = c.p;
      row.q = c.q;
      row.seed = c.seed;
      try {
        const RunOutcome r = run_experiment(c, 1);
        row.alpha_hat = r.contraction.alpha_hat;
        row.alpha_fit = r.report.alpha_fit;
        row.converged = r.report.converged;
        row.iterations = r.report.iterations_run;
        if (write_outputs) write_run_outputs(r, c, (std::filesystem::path(base.output_dir) / "sweep" / std::to_string(i)).string());
      } catch (const std::exception& e) {
        row.alpha_hat = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), combos.size()));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }

  for (const SweepRow& row : result.rows) {
    if (!row.converged || !(row.alpha_hat < 1.0)) continue;
    if (!result.frontier || row.gamma > result.frontier->gamma ||
        (row.gamma == result.frontier->gamma && row.a > result.frontier->a))
      result.frontier = row;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "gamma,a,p,q,alpha_hat,alpha_fit,converged,iterations\n";
  for (const SweepRow& r : result.rows) {
    out << fmt(r.gamma) << "," << fmt(r.a) << "," << fmt(r.p) << "," << fmt(r.q) << ","
        << (std::isnan(r.alpha_hat) ? std::string("nan") : fmt(r.alpha_hat)) << ","
        << (r.alpha_fit ? fmt(*r.alpha_fit) : std::string("")) << "," << (r.converged ? "true" : "false") << ","
        << r.iterations << "\n";
  }
}

// ---------------------------------------------------------------------------
// Invariant suites.

namespace {

DiscreteField random_field(const GridSpec& spec, Rng& rng) {
  DiscreteField f(spec);
  for (double& v : f.values()) v = rng.uniform(-1.0, 1.0);
  return f;
}

double max_diff(const DiscreteField& a, const DiscreteField& b) { return (a - b).max_abs(); }

double max_diff(const CoefficientArray& a, const CoefficientArray& b) {
  double d = 0.0;
  for (long k = 0; k < a.size(); ++k)
    d = std::max(d, std::abs(a.entries()[static_cast<std::size_t>(k)] - b.entries()[static_cast<std::size_t>(k)]));
  return d;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Suite {
 public:
  Suite(std::vector<CheckResult>& out, std::string name) : out_(out), name_(std::move(name)) {}

  void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult r{name_, name, false, ""};
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out_.push_back(std::move(r));
  }

 private:
  std::vector<CheckResult>& out_;
  std::string name_;
};

// 0.05 once m >= 256 (enough for the tent at the last dyadic step), growing
// linearly in h on coarser grids.
double oscillation_threshold(int m) { return 0.05 * std::max(1.0, 256.0 / m); }

}  // namespace

std::vector<CheckResult> run_verify(const ExperimentConfig& c, Fault fault, int threads) {
  std::vector<CheckResult> results;
  Experiment ex = build_experiment(c);
  if (fault == Fault::bupu) ex.bupu.unassign(0);
  const GridSpec& spec = ex.spec;
  const MixedExponents e = c.exponents();
  const GeneratorBank& bank = ex.gram.bank();
  const SamplingSystem sys = ex.system();
  const std::uint64_t seed = stream_seed(c.seed, SeedStream::verify);
  const MixedExponents e11(1.0, 1.0);

  {
    Suite s(results, "field_grid");
    s.check("periodic-translation", [&] {
      Rng rng(mix_seed(seed, 1));
      const DiscreteField f = random_field(spec, rng);
      for (int a = 0; a < spec.dims(); ++a) {
        Index shift(static_cast<std::size_t>(spec.dims()), 0);
        shift[a] = spec.cells(a);
        if (max_diff(translate(f, shift), f) != 0.0) return std::pair{false, "axis " + std::to_string(a)};
      }
      return std::pair{true, std::string()};
    });
    s.check("convolution-bilinearity", [&] {
      Rng rng(mix_seed(seed, 2));
      const DiscreteField f = random_field(spec, rng), g = random_field(spec, rng);
      const DiscreteField& h = bank.rasterized(0);
      const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
      const DiscreteField lhs = convolve(lin_comb({{a, &f}, {b, &g}}), h);
      const DiscreteField cf = convolve(f, h), cg = convolve(g, h);
      const double d = max_diff(lhs, lin_comb({{a, &cf}, {b, &cg}}));
      return std::pair{d <= 1e-10, "max diff " + num(d)};
    });
    s.check("amalgam-convolution-bound", [&] {
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        Rng rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(t)));
        const DiscreteField f = random_field(spec, rng);
        const DiscreteField& g = bank.rasterized(t % bank.r());
        const double bound = wiener_amalgam_norm(g, e11) * integrate(abs(f));
        worst = std::max(worst, wiener_amalgam_norm(convolve(f, g), e11) / bound);
      }
      return std::pair{worst <= 1.0 + 1e-8, "max ratio " + num(worst)};
    });
  }

  {
    Suite s(results, "norms");
    s.check("p-equals-q", [&] {
      Rng rng(mix_seed(seed, 3));
      const DiscreteField f = random_field(spec, rng);
      double worst = 0.0;
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        double acc = 0.0;
        for (double v : f.values()) acc += std::pow(std::abs(v), p);
        const double plain = std::pow(acc * spec.cell_volume(), 1.0 / p);
        worst = std::max(worst, std::abs(mixed_lebesgue_norm(f, MixedExponents(p, p)) - plain) / plain);
      }
      return std::pair{worst <= 1e-12, "max rel diff " + num(worst)};
    });
    s.check("homogeneity", [&] {
      Rng rng(mix_seed(seed, 4));
      const DiscreteField f = random_field(spec, rng);
      const double alpha = -2.75;
      const DiscreteField g = alpha * f;
      const CoefficientArray cf = random_coefficients(bank, mix_seed(seed, 5));
      CoefficientArray cg = cf;
      for (double& v : cg.entries()) v *= alpha;
      const double delta = 0.5 * spec.min_period() / 4.0;
      const double pairs[4][2] = {
          {mixed_lebesgue_norm(g, e), mixed_lebesgue_norm(f, e)},
          {mixed_seq_norm(cg, 0, e), mixed_seq_norm(cf, 0, e)},
          {wiener_amalgam_norm(g, e), wiener_amalgam_norm(f, e)},
          {wiener_amalgam_norm(oscillation(g, delta), e11), wiener_amalgam_norm(oscillation(f, delta), e11)}};
      double worst = 0.0;
      for (const auto& pr : pairs) worst = std::max(worst, std::abs(pr[0] - std::abs(alpha) * pr[1]) / (std::abs(alpha) * pr[1]));
      return std::pair{worst <= 1e-12, "max rel diff " + num(worst)};
    });
    s.check("monotonicity", [&] {
      Rng rng(mix_seed(seed, 6));
      const DiscreteField f = random_field(spec, rng);
      DiscreteField g = f;
      for (double& v : g.values()) v *= 1.0 + rng.canonical();
      const CoefficientArray cf = random_coefficients(bank, mix_seed(seed, 7));
      CoefficientArray cg = cf;
      for (double& v : cg.entries()) v *= 1.0 + rng.canonical();
      const bool ok = mixed_lebesgue_norm(f, e) <= mixed_lebesgue_norm(g, e) &&
                      wiener_amalgam_norm(f, e) <= wiener_amalgam_norm(g, e) &&
                      mixed_seq_norm(cf, 0, e) <= mixed_seq_norm(cg, 0, e);
      return std::pair{ok, std::string()};
    });
    const int kmax = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(spec.m())))) - 1);
    s.check("oscillation-finite", [&] {
      for (int i = 0; i < bank.r(); ++i)
        for (int k = 1; k <= kmax; ++k) {
          const double delta = std::ldexp(1.0, -k);
          if (delta > spec.min_period() / 4.0) continue;
          if (!std::isfinite(wiener_amalgam_norm(oscillation(bank.rasterized(i), delta), e11)))
            return std::pair{false, "generator " + std::to_string(i) + ", k = " + std::to_string(k)};
        }
      return std::pair{true, std::string()};
    });
    s.check("oscillation-decay", [&] {
      std::string detail;
      bool ok = true;
      for (int i = 0; i < bank.r(); ++i) {
        const DiscreteField& phi = bank.rasterized(i);
        const double ref = wiener_amalgam_norm(phi, e11);
        double prev = std::numeric_limits<double>::infinity();
        double last = 0.0;
        for (int k = 1; k <= kmax; ++k) {
          last = wiener_amalgam_norm(oscillation(phi, std::ldexp(1.0, -k)), e11);
          if (last > prev + 1e-10) ok = false;
          prev = last;
        }
        // Discontinuous generators keep their jump; only the monotone part applies.
        const bool continuous = bank.kernels()[static_cast<std::size_t>(i)].continuous();
        if (continuous && last > oscillation_threshold(spec.m()) * ref) ok = false;
        detail += (i ? "; " : "") + bank.kernels()[static_cast<std::size_t>(i)].name() + " final/norm " + num(last / ref);
      }
      return std::pair{ok, detail};
    });
  }

  {
    Suite s(results, "shift_invariant");
    s.check("projection-idempotence", [&] {
      Rng rng(mix_seed(seed, 8));
      const CoefficientArray pg = project(random_field(spec, rng), ex.gram);
      const double d = max_diff(project(synthesize(pg, bank), ex.gram), pg);
      return std::pair{d <= 1e-9, "max diff " + num(d)};
    });
    s.check("projection-linearity", [&] {
      Rng rng(mix_seed(seed, 9));
      const DiscreteField f = random_field(spec, rng), g = random_field(spec, rng);
      const double a = 1.5, b = -0.75;
      const CoefficientArray lhs = project(lin_comb({{a, &f}, {b, &g}}), ex.gram);
      CoefficientArray rhs = project(f, ex.gram);
      const CoefficientArray pg = project(g, ex.gram);
      for (long k = 0; k < rhs.size(); ++k)
        rhs.entries()[static_cast<std::size_t>(k)] = a * rhs.entries()[static_cast<std::size_t>(k)] + b * pg.entries()[static_cast<std::size_t>(k)];
      const double d = max_diff(lhs, rhs);
      return std::pair{d <= 1e-9, "max diff " + num(d)};
    });
    s.check("absolute-convergence-bound", [&] {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        const CoefficientArray cc = random_coefficients(bank, mix_seed(seed, 200 + static_cast<std::uint64_t>(t)));
        double bound = 0.0;
        for (int i = 0; i < bank.r(); ++i) bound += cc.max_abs(i) * wiener_amalgam_norm(bank.rasterized(i), e11);
        worst = std::max(worst, synthesize(cc, bank).max_abs() / bound);
      }
      return std::pair{worst <= 1.0 + 1e-8, "max ratio " + num(worst)};
    });
    s.check("synthesis-bound", [&] {
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        const CoefficientArray cc = random_coefficients(bank, mix_seed(seed, 300 + static_cast<std::uint64_t>(t)));
        double bound = 0.0;
        for (int i = 0; i < bank.r(); ++i) bound += mixed_seq_norm(cc, i, e) * wiener_amalgam_norm(bank.rasterized(i), e11);
        worst = std::max(worst, mixed_lebesgue_norm(synthesize(cc, bank), e) / bound);
      }
      return std::pair{worst <= 1.0 + 1e-8, "max ratio " + num(worst)};
    });
  }

  {
    Suite s(results, "sampling");
    s.check("partition-of-unity", [&] {
      long bad = 0;
      for (long cell = 0; cell < spec.size(); ++cell)
        if (ex.bupu.partition_sum(cell) != 1.0) ++bad;
      return std::pair{bad == 0, std::to_string(bad) + " cells with sum != 1"};
    });
    s.check("support-in-ball", [&] {
      const DensityReport d = verify_density(ex.X, c.gamma, spec);
      if (!d.certified) return std::pair{true, "not certified (worst gap " + num(d.worst_gap) + "), nothing to check"};
      for (long cell = 0; cell < spec.size(); ++cell)
        if (!(ex.bupu.distance(cell) < c.gamma)) return std::pair{false, "cell " + std::to_string(cell)};
      return std::pair{true, "worst gap " + num(d.worst_gap)};
    });
    s.check("voronoi-argmin", [&] {
      std::vector<double> q(static_cast<std::size_t>(spec.dims()));
      for (long cell = 0; cell < spec.size(); ++cell) {
        const Index idx = spec.unflat(cell);
        for (int a = 0; a < spec.dims(); ++a) q[a] = spec.midpoint(a, idx[a]);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (long j = 0; j < ex.X.size(); ++j) {
          const double d2 = torus_distance2(spec, q, ex.X.point(j));
          if (d2 < best_d) {
            best_d = d2;
            best = static_cast<int>(j);
          }
        }
        if (ex.bupu.owner(cell) != best) return std::pair{false, "cell " + std::to_string(cell)};
      }
      return std::pair{true, std::string()};
    });
    s.check("point-value-consistency", [&] {
      KernelOptions o;
      o.a = spec.h();
      const AveragingKernelSet point = make_kernels(o, ex.X, spec);
      Rng rng(mix_seed(seed, 10));
      const DiscreteField f = random_field(spec, rng);
      const std::vector<double> s = acquire_samples(f, point, ex.X);
      for (long j = 0; j < ex.X.size(); ++j)
        if (s[static_cast<std::size_t>(j)] != f[spec.cell_of(ex.X.point(j))]) return std::pair{false, "sample " + std::to_string(j)};
      return std::pair{true, std::string()};
    });
    s.check("determinism", [&] {
      const Experiment again = build_experiment(c);
      bool ok = again.X == ex.X;
      for (long j = 0; ok && j < ex.X.size(); ++j) {
        ok = again.kernels.stencil(j).cells == ex.kernels.stencil(j).cells &&
             again.kernels.stencil(j).weights == ex.kernels.stencil(j).weights;
      }
      if (fault == Fault::none) ok = ok && again.bupu.assignment() == ex.bupu.assignment();
      return std::pair{ok, std::string()};
    });
  }

  {
    Suite s(results, "reconstruct");
    const DiscreteField truth = synthesize(random_coefficients(bank, mix_seed(seed, 11)), bank);
    const std::vector<double> samples = acquire_samples(truth, ex.kernels, ex.X);
    ReconstructionOptions opts;
    opts.exponents = e;
    opts.max_iter = c.max_iter;
    opts.tol = c.tol;
    opts.truth = &truth;

    s.check("error-recursion", [&] {
      const ReconstructionResult full = reconstruct(samples, sys, opts);
      const int steps = std::min(10, full.report.iterations_run - 1);
      double worst = 0.0;
      for (int n = 1; n <= steps; ++n) {
        ReconstructionOptions o = opts;
        o.max_iter = n;
        o.tol = std::numeric_limits<double>::min();
        const ReconstructionResult fn = reconstruct(samples, sys, o);
        const double predicted = mixed_lebesgue_norm(apply_error_operator(truth - fn.field, sys), e);
        worst = std::max(worst, std::abs(predicted - full.report.true_errors[static_cast<std::size_t>(n)]));
      }
      return std::pair{worst <= 1e-9, "max diff " + num(worst) + " over " + std::to_string(steps) + " steps"};
    });
    s.check("contraction-bound", [&] {
      const ContractionEstimate ce =
          estimate_contraction(sys, e, c.contraction_trials, stream_seed(c.seed, SeedStream::contraction), threads);
      if (!(ce.alpha_hat < 1.0)) return std::pair{true, "alpha_hat " + num(ce.alpha_hat) + " >= 1, nothing to check"};
      for (int t = 0; t < 5; ++t) {
        const DiscreteField f = synthesize(random_coefficients(bank, mix_seed(seed, 400 + static_cast<std::uint64_t>(t))), bank);
        ReconstructionOptions o = opts;
        o.truth = &f;
        const auto rep = reconstruct(acquire_samples(f, ex.kernels, ex.X), sys, o).report;
        const double e0 = mixed_lebesgue_norm(f, e);
        double prev = e0;
        for (double en : rep.true_errors) {
          if (en > ce.alpha_hat * prev * (1.0 + 1e-6)) return std::pair{false, "truth " + std::to_string(t)};
          prev = en;
        }
      }
      return std::pair{true, "alpha_hat " + num(ce.alpha_hat)};
    });
    s.check("kernel-path-consistency", [&] {
      ExperimentConfig single = c, per = c;
      single.kernel_mode = KernelMode::single;
      single.m_target = 1.0;
      if (single.kernel_shape == AveragingShape::signed_box) single.kernel_shape = AveragingShape::box;
      per = single;
      per.kernel_mode = KernelMode::per_sample;
      per.offset_fraction = 0.0;
      const AveragingKernelSet ks = make_kernels(kernel_options(single), ex.X, spec);
      const AveragingKernelSet kp = make_kernels(kernel_options(per), ex.X, spec);
      const SamplingSystem ss{ex.gram, ex.bupu, ks, ex.X}, sp{ex.gram, ex.bupu, kp, ex.X};
      const auto rs = reconstruct(acquire_samples(truth, ks, ex.X), ss, opts);
      const auto rp = reconstruct(acquire_samples(truth, kp, ex.X), sp, opts);
      const bool ok = rs.report.successive_changes == rp.report.successive_changes &&
                      std::ranges::equal(rs.coefficients.entries(), rp.coefficients.entries());
      return std::pair{ok, std::string()};
    });
    auto alpha_at = [&](double gamma, double a) {
      ExperimentConfig cc = c;
      cc.gamma = gamma;
      if (c.spacing) cc.spacing = *c.spacing * gamma / c.gamma;
      if (c.jitter) cc.jitter = *c.jitter * gamma / c.gamma;
      cc.a = a;
      Experiment local = build_experiment(cc);
      if (fault == Fault::bupu) local.bupu.unassign(0);
      return estimate_contraction(local.system(), e, c.contraction_trials, stream_seed(c.seed, SeedStream::contraction), threads)
          .alpha_hat;
    };
    s.check("monotone-in-gamma", [&] {
      const double a = std::min(c.a, spec.min_period() / 8.0);
      const double a1 = alpha_at(1.0, a), a2 = alpha_at(0.5, a), a3 = alpha_at(0.25, a);
      return std::pair{a2 <= a1 * 1.05 && a3 <= a2 * 1.05, num(a1) + ", " + num(a2) + ", " + num(a3)};
    });
    s.check("monotone-in-a", [&] {
      // Widths below one grid cell are not resolvable and are skipped.
      std::vector<double> alphas;
      std::string detail;
      for (double a : {0.5, 0.25, 0.125}) {
        if (a < spec.h() || a > spec.min_period() / 8.0) continue;
        alphas.push_back(alpha_at(c.gamma, a));
        detail += (detail.empty() ? "" : ", ") + num(alphas.back());
      }
      bool ok = true;
      for (std::size_t i = 1; i < alphas.size(); ++i) ok = ok && alphas[i] <= alphas[i - 1] * 1.05;
      return std::pair{ok, detail};
    });
    s.check("quasi-interpolant-bound", [&] {
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        const CoefficientArray cc = random_coefficients(bank, mix_seed(seed, 500 + static_cast<std::uint64_t>(t)));
        double denom = 0.0;
        for (int i = 0; i < bank.r(); ++i) denom += mixed_seq_norm(cc, i, e) * wiener_amalgam_norm(bank.rasterized(i), e11);
        worst = std::max(worst, mixed_lebesgue_norm(quasi_interpolant(synthesize(cc, bank), ex.X, ex.bupu), e) / denom);
      }
      return std::pair{std::isfinite(worst), "C = " + num(worst)};
    });
  }

  {
    Suite s(results, "cli");
    s.check("config-roundtrip", [&] { return std::pair{parse_config_text(serialize_config(c)) == c, std::string()}; });
    s.check("reproducibility", [&] {
      const RunOutcome r1 = run_experiment(c, 1);
      const RunOutcome r2 = run_experiment(c, std::max(2, threads));
      return std::pair{r1.iterations_csv == r2.iterations_csv, std::string()};
    });
  }
  return results;
}

}  // namespace avsamp
