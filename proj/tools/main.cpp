// avsamp: run, sweep and verify reconstruction experiments from a config file.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "avsamp/experiment.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kVerifyFailed = 3;

struct Common {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 1;
};

avsamp::ExperimentConfig load(const Common& opts) {
  avsamp::ExperimentConfig c = avsamp::parse_config(opts.config_path);
  if (!opts.out_dir.empty()) c.output_dir = opts.out_dir;
  if (opts.seed >= 0) c.seed = static_cast<std::uint64_t>(opts.seed);
  return c;
}

// Accepts "0.25,0.5 1" style lists: repeated values, commas, or both.
bool parse_axis(const std::vector<std::string>& raw, std::vector<double>& out, const char* name) {
  out.clear();
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        std::cerr << "error: --" << name << ": '" << tok << "' is not a number\n";
        return false;
      }
    }
  }
  if (out.empty()) {
    std::cerr << "error: --" << name << " needs at least one value\n";
    return false;
  }
  return true;
}

int cmd_run(const Common& opts) {
  const avsamp::ExperimentConfig c = load(opts);
  const avsamp::RunOutcome r = avsamp::run_experiment(c, opts.threads);
  avsamp::write_run_outputs(r, c, c.output_dir);
  std::printf("status=%s iterations=%d alpha_hat=%.6g relative_error=%.3e output=%s\n",
              avsamp::to_string(r.report.status).c_str(), r.report.iterations_run, r.contraction.alpha_hat,
              r.relative_error, c.output_dir.c_str());
  if (!r.report.converged) std::printf("not converged: %s\n", r.report.reason.c_str());
  return r.exit_code;
}

int cmd_sweep(const Common& opts, const avsamp::SweepAxes& axes) {
  const avsamp::ExperimentConfig c = load(opts);
  const avsamp::SweepResult res = avsamp::run_sweep(c, axes, opts.threads);
  std::filesystem::create_directories(c.output_dir);
  const auto path = std::filesystem::path(c.output_dir) / "sweep.csv";
  std::ofstream out(path);
  avsamp::write_sweep_csv(out, res);
  nlohmann::json frontier = nullptr;
  if (res.frontier)
    frontier = {{"gamma", res.frontier->gamma}, {"a", res.frontier->a}, {"p", res.frontier->p},
                {"q", res.frontier->q}, {"alpha_hat", res.frontier->alpha_hat}};
  std::ofstream(std::filesystem::path(c.output_dir) / "frontier.json") << frontier.dump(2) << "\n";
  for (const auto& row : res.rows)
    if (!row.error.empty()) std::fprintf(stderr, "combination gamma=%g a=%g p=%g q=%g failed: %s\n", row.gamma, row.a, row.p, row.q, row.error.c_str());
  std::printf("%zu combinations written to %s\n", res.rows.size(), path.string().c_str());
  if (res.frontier)
    std::printf("certified frontier: gamma=%g a=%g (alpha_hat=%.6g)\n", res.frontier->gamma, res.frontier->a, res.frontier->alpha_hat);
  else
    std::printf("certified frontier: none\n");
  return 0;
}

int cmd_verify(const Common& opts, const std::string& fault_name) {
  avsamp::Fault fault = avsamp::Fault::none;
  if (fault_name == "bupu") {
    fault = avsamp::Fault::bupu;
  } else if (!fault_name.empty() && fault_name != "none") {
    std::cerr << "error: unknown fault '" << fault_name << "' (known: bupu)\n";
    return kUsage;
  }
  const avsamp::ExperimentConfig c = load(opts);
  const auto results = avsamp::run_verify(c, fault, opts.threads);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%-4s  %-16s %-28s %s\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(), r.name.c_str(), r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-sampling reconstruction experiments"};
  app.require_subcommand(1);
  Common opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", opts.seed, "seed override")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "reconstruct one seeded truth");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
  add_common(sweep);
  std::vector<std::string> gamma_raw, a_raw, p_raw, q_raw;
  sweep->add_option("--gamma", gamma_raw, "gamma values")->required()->expected(0, -1);
  sweep->add_option("--a", a_raw, "kernel widths")->required()->expected(0, -1);
  sweep->add_option("--p", p_raw, "outer exponents")->expected(0, -1);
  sweep->add_option("--q", q_raw, "inner exponents")->expected(0, -1);

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
  add_common(verify);
  std::string fault;
  verify->add_option("--inject-fault", fault, "corrupt one component on purpose (bupu)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) return cmd_run(opts);
    if (*sweep) {
      avsamp::SweepAxes axes;
      if (!parse_axis(gamma_raw, axes.gamma, "gamma") || !parse_axis(a_raw, axes.a, "a")) return kUsage;
      const bool has_p = sweep->count("--p") > 0, has_q = sweep->count("--q") > 0;
      if (has_p && !parse_axis(p_raw, axes.p, "p")) return kUsage;
      if (has_q && !parse_axis(q_raw, axes.q, "q")) return kUsage;
      if (!has_p || !has_q) {
        const avsamp::ExperimentConfig c = load(opts);
        if (!has_p) axes.p = {c.p};
        if (!has_q) axes.q = {c.q};
      }
      return cmd_sweep(opts, axes);
    }
    if (*verify) return cmd_verify(opts, fault);
  } catch (const avsamp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
