#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "fbcoord/chanmodel.hpp"
#include "fbcoord/errors.hpp"
#include "fbcoord/experiment.hpp"
#include "fbcoord/rng.hpp"

namespace fbc {
namespace {

struct Task {
  std::size_t snr_index;
  double snr_db;
  int realization;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::vector<RowFailure> failures;
};

TaskOutput run_task(const ExperimentSpec& spec, const Task& task) {
  TaskOutput out;
  const std::uint64_t seed = realization_seed(spec.master_seed, task.snr_index, task.realization);
  NetworkConfig cfg = spec.network;
  ChannelSet ch;
  try {
    if (std::holds_alternative<IidChannelSpec>(spec.channel)) {
      cfg.set_noise(std::pow(10.0, -task.snr_db / 10.0), spec.reverse_noise_factor);
      ch = iid_channels(cfg, seed);
    } else {
      const auto& dense = std::get<DenseChannelSpec>(spec.channel);
      ch = dense_drop(cfg, dense.deployment, seed);
      cfg.set_noise(calibrate_noise(ch, cfg, dense.target_snr_db), spec.reverse_noise_factor);
    }
  } catch (const Error& e) {
    for (AlgorithmId algo : spec.algos) out.failures.push_back({algo, task.snr_db, task.realization, e.what()});
    return out;
  }

  const int max_t = *std::max_element(spec.iteration_list.begin(), spec.iteration_list.end());
  RunOptions options;
  options.init = spec.init;
  options.ra_last_iteration_only = spec.ra_last_iteration_only;
  const std::uint64_t init_seed = derive_seed(seed, {1});

  for (AlgorithmId algo : spec.algos) {
    try {
      if (spec.ra_last_iteration_only && algo == AlgorithmId::kAimsRa) {
        // The final-iteration rank switch depends on T, so each T is its own run.
        for (int t : spec.iteration_list) {
          const RunResult result = run(algo, cfg, ch, t, init_seed, options);
          const TraceEntry& e = result.trace.entries.back();
          out.rows.push_back({algo, cfg.cells, cfg.users_per_cell, cfg.tx_antennas, cfg.rx_antennas,
                              cfg.streams, t, task.snr_db, task.realization, e.sum_rate, e.dlt_fwd,
                              run_overhead(algo, cfg, t), e.wall_time});
        }
        continue;
      }
      const RunResult result = run(algo, cfg, ch, max_t, init_seed, options);
      const auto& entries = result.trace.entries;
      for (int t : spec.iteration_list) {
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(t), entries.size() - 1);
        const TraceEntry& e = entries[idx];
        out.rows.push_back({algo, cfg.cells, cfg.users_per_cell, cfg.tx_antennas, cfg.rx_antennas,
                            cfg.streams, t, task.snr_db, task.realization, e.sum_rate, e.dlt_fwd,
                            run_overhead(algo, cfg, t), e.wall_time});
      }
    } catch (const Error& e) {
      out.failures.push_back({algo, task.snr_db, task.realization, e.what()});
    }
  }
  return out;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t master, std::size_t snr_index, int realization) {
  return derive_seed(master, {static_cast<std::uint64_t>(snr_index), static_cast<std::uint64_t>(realization)});
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int workers) {
  spec.validate();
  if (workers <= 0) workers = spec.workers;

  std::vector<Task> tasks;
  const auto snrs = spec.snr_points();
  for (std::size_t s = 0; s < snrs.size(); ++s)
    for (int r = 0; r < spec.realizations; ++r) tasks.push_back({s, snrs[s], r});

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) outputs[i] = run_task(spec, tasks[i]);
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (auto& o : outputs) {
    std::move(o.rows.begin(), o.rows.end(), std::back_inserter(result.rows));
    std::move(o.failures.begin(), o.failures.end(), std::back_inserter(result.failures));
  }
  std::map<AlgorithmId, std::size_t> algo_rank;
  for (std::size_t i = 0; i < spec.algos.size(); ++i) algo_rank.emplace(spec.algos[i], i);
  std::stable_sort(result.rows.begin(), result.rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::tuple(algo_rank[a.algo], a.T, a.snr_db, a.realization) <
           std::tuple(algo_rank[b.algo], b.T, b.snr_db, b.realization);
  });
  std::stable_sort(result.failures.begin(), result.failures.end(), [&](const RowFailure& a, const RowFailure& b) {
    return std::tuple(algo_rank[a.algo], a.snr_db, a.realization) <
           std::tuple(algo_rank[b.algo], b.snr_db, b.realization);
  });
  return result;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += std::string(to_string(r.algo)) + ',' + std::to_string(r.L) + ',' + std::to_string(r.K) + ',' +
           std::to_string(r.M) + ',' + std::to_string(r.N) + ',' + std::to_string(r.d) + ',' +
           std::to_string(r.T) + ',' + fmt12(r.snr_db) + ',' + std::to_string(r.realization) + ',' +
           fmt12(r.sum_rate_bits) + ',' + fmt12(r.dlt_objective) + ',' + std::to_string(r.overhead) + ',' +
           fmt12(r.wall_time_s) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw IoError("no rows to write");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << format_csv(rows);
  if (!out) throw IoError("write to " + path + " failed");
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError(path + ": unexpected CSV header");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 13) throw ParseError(line_no, "expected 13 CSV columns");
    const auto algo = parse_algorithm(cells[0]);
    if (!algo) throw ParseError(line_no, "unknown algorithm " + cells[0]);
    try {
      rows.push_back({*algo, std::stoi(cells[1]), std::stoi(cells[2]), std::stoi(cells[3]), std::stoi(cells[4]),
                      std::stoi(cells[5]), std::stoi(cells[6]), std::stod(cells[7]), std::stoi(cells[8]),
                      std::stod(cells[9]), std::stod(cells[10]), std::stoll(cells[11]), std::stod(cells[12])});
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "malformed numeric field");
    }
  }
  return rows;
}

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<int, int, double>, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const ResultRow& r : rows) {
    const auto key = std::tuple(static_cast<int>(r.algo), r.T, r.snr_db);
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      out.push_back({r.algo, r.T, r.snr_db, 0, 0.0, 0.0, r.overhead});
      samples.emplace_back();
    }
    samples[it->second].push_back(r.sum_rate_bits);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& xs = samples[i];
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    out[i].count = static_cast<int>(xs.size());
    out[i].mean = mean;
    out[i].stderr_ = xs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  }
  return out;
}

std::string summarize(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %4s %8s %6s %12s %10s %10s\n", "algo", "T", "snr_db", "n", "sum_rate",
                "stderr", "overhead");
  out << buf;
  for (const SummaryRow& s : aggregate(rows)) {
    std::snprintf(buf, sizeof buf, "%-14s %4d %8.2f %6d %12.4f %10.4f %10lld\n",
                  std::string(to_string(s.algo)).c_str(), s.T, s.snr_db, s.count, s.mean, s.stderr_,
                  static_cast<long long>(s.overhead));
    out << buf;
  }
  return out.str();
}

}  // namespace fbc
