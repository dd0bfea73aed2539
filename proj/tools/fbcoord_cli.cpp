#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbcoord/errors.hpp"
#include "fbcoord/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

std::vector<fbc::AlgorithmId> parse_algos(const std::vector<std::string>& names) {
  std::vector<fbc::AlgorithmId> out;
  for (const auto& name : names) {
    const auto algo = fbc::parse_algorithm(name);
    if (!algo) throw fbc::ValidationError("unknown algorithm '" + name + "'");
    out.push_back(*algo);
  }
  return out;
}

int run_command(const std::string& config_path, const std::string& out_path, const std::uint64_t* seed,
                int workers, const std::vector<std::string>& algos, const std::vector<int>& iters, bool quiet) {
  fbc::ExperimentSpec spec;
  try {
    spec = fbc::load_experiment(config_path);
    if (!out_path.empty()) spec.output_path = out_path;
    if (seed) spec.master_seed = *seed;
    if (workers > 0) spec.workers = workers;
    if (!algos.empty()) spec.algos = parse_algos(algos);
    if (!iters.empty()) spec.iteration_list = iters;
    spec.validate();
  } catch (const fbc::ParseError& e) {
    std::cerr << config_path << ":" << e.line() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const fbc::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const fbc::ExperimentResult result = fbc::run_experiment(spec);
  for (const auto& f : result.failures) {
    std::cerr << "failed: " << fbc::to_string(f.algo) << " snr=" << f.snr_db << " realization=" << f.realization
              << ": " << f.message << "\n";
  }
  if (result.rows.empty()) {
    std::cerr << "no rows produced\n";
    return kExitPartial;
  }
  try {
    fbc::emit_csv(result.rows, spec.output_path);
  } catch (const fbc::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  if (!quiet) std::cout << fbc::summarize(result.rows);
  return result.failures.empty() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-backward multi-cell MIMO coordination simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo sweep described by a config file");
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> algos;
  std::vector<int> iters;
  bool quiet = false;
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_path, "CSV output path");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--algo", algos, "Algorithms, comma separated")->delimiter(',');
  run->add_option("--iters", iters, "Iteration counts, comma separated")->delimiter(',');
  run->add_flag("-q,--quiet", quiet, "Suppress the summary table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    return run_command(config_path, out_path, seed_opt->count() ? &seed : nullptr, workers, algos, iters, quiet);
  }
  return kExitOk;
}
