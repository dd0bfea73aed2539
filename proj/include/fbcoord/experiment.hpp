#pragma once

/**
 * @file experiment.hpp
 * @brief Monte-Carlo sweep runner behind the `fbcoord run` command.
 *
 * Config format is line-oriented `key = value` with `[section]` headers and
 * `#` comments. Sections: [network], [channel], [run]. See configs/ for
 * complete examples.
 */

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fbcoord/chanmodel.hpp"
#include "fbcoord/coord.hpp"
#include "fbcoord/netmodel.hpp"

namespace fbc {

struct IidChannelSpec {
  std::vector<double> snr_db{20.0};
  bool operator==(const IidChannelSpec&) const = default;
};

struct DenseChannelSpec {
  DeploymentSpec deployment;
  double target_snr_db = 19.0;
  bool operator==(const DenseChannelSpec&) const = default;
};

struct ExperimentSpec {
  NetworkConfig network;  // noise is filled in per SNR point
  double reverse_noise_factor = 1.0;
  std::variant<IidChannelSpec, DenseChannelSpec> channel;
  std::vector<AlgorithmId> algos;
  std::vector<int> iteration_list{4};
  int realizations = 500;
  std::uint64_t master_seed = 1;
  InitPolicy init = InitPolicy::kEigen;
  bool ra_last_iteration_only = false;
  std::string output_path = "results.csv";
  int workers = 1;

  std::vector<double> snr_points() const;
  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

/// Throws ParseError (with line number) or ValidationError.
ExperimentSpec parse_experiment(std::string_view text);
ExperimentSpec load_experiment(const std::string& path);
std::string serialize_experiment(const ExperimentSpec& spec);

struct ResultRow {
  AlgorithmId algo = AlgorithmId::kMaxDlt;
  int L = 0;
  int K = 0;
  int M = 0;
  int N = 0;
  int d = 0;
  int T = 0;
  double snr_db = 0.0;
  int realization = 0;
  double sum_rate_bits = 0.0;
  double dlt_objective = 0.0;
  std::int64_t overhead = 0;
  double wall_time_s = 0.0;
};

struct RowFailure {
  AlgorithmId algo;
  double snr_db;
  int realization;
  std::string message;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<RowFailure> failures;
};

/// Seed of realization r at SNR point index s. Channels and random initial
/// filters depend on nothing else, so every algorithm sees the same draws.
std::uint64_t realization_seed(std::uint64_t master, std::size_t snr_index, int realization);

/// Rows are ordered by (algo, T, snr, realization) whatever the worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 0);

inline constexpr std::string_view kCsvHeader =
    "algo,L,K,M,N,d,T,snr_db,realization,sum_rate_bits,dlt_objective,overhead,wall_time_s";

std::string format_csv(const std::vector<ResultRow>& rows);
/// Throws IoError; an empty row set is an error and creates no file.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_csv(const std::string& path);

struct SummaryRow {
  AlgorithmId algo;
  int T;
  double snr_db;
  int count;
  double mean;
  double stderr_;
  std::int64_t overhead;
};

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows);
/// Console table of mean +- standard error per (algo, T, snr).
std::string summarize(const std::vector<ResultRow>& rows);

}  // namespace fbc
