#pragma once

/**
 * @file coord.hpp
 * @brief Forward-backward coordination engine.
 *
 * One iteration is a forward phase (every BS refreshes its receive filters
 * from the current transmit filters) followed by a backward phase (every user
 * refreshes its transmit filter in the reverse network). All nodes of a phase
 * read the same snapshot of the filter bank.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "fbcoord/netmodel.hpp"

namespace fbc {

enum class AlgorithmId { kAims, kAimsRa, kMaxDlt, kMaxSinr, kUncoordinated };

std::string_view to_string(AlgorithmId algo);
/// Accepts the canonical names AIMS, AIMS_RA, MAX_DLT, MAX_SINR, UNCOORDINATED.
std::optional<AlgorithmId> parse_algorithm(std::string_view name);
const std::vector<AlgorithmId>& all_algorithms();

enum class InitPolicy { kEigen, kRandom };
std::string_view to_string(InitPolicy policy);
std::optional<InitPolicy> parse_init_policy(std::string_view name);

enum class Phase { kForward, kBackward };

struct TraceEntry {
  double sum_rate = 0.0;
  double dlt_fwd = 0.0;
  double filter_norm_dev = 0.0;
  std::vector<int> active_ranks;  // transmitted streams per user
  std::vector<int> rx_ranks;      // receive filter rank per user
  double wall_time = 0.0;         // seconds since the start of the run
};

/// entries[0] is the initial filter bank; entries[t] follows iteration t.
struct RunTrace {
  std::vector<TraceEntry> entries;
};

struct RunOptions {
  InitPolicy init = InitPolicy::kEigen;
  /// AIMS_RA only: adapt receive ranks in the final forward phase instead of every iteration.
  bool ra_last_iteration_only = false;
  /// Called after every phase with the updated bank.
  std::function<void(int iteration, Phase phase, const FilterBank& fb)> on_phase;
};

struct RunResult {
  FilterBank filters;
  RunTrace trace;
};

/// Throws CoordinationError (node, phase, iteration) when a node update fails.
RunResult run(AlgorithmId algo, const NetworkConfig& cfg, const ChannelSet& ch, int iterations,
              std::uint64_t seed, const RunOptions& options = {});

FilterBank init_filters(const NetworkConfig& cfg, const ChannelSet& ch, InitPolicy policy,
                        std::uint64_t seed);

/// Columns whose power exceeds 1e-9 * power / d.
int active_columns(const CMat& filter, double power);

enum class OverheadFamily { kProposed, kWmmse, kCcpWmmse };
std::optional<OverheadFamily> parse_overhead_family(std::string_view name);

/// Orthogonal pilot channel uses consumed by `iterations` coordination rounds.
std::int64_t overhead(OverheadFamily family, std::int64_t iterations, std::int64_t users_per_cell,
                      std::int64_t cells, std::int64_t tx_antennas, std::int64_t rx_antennas,
                      std::int64_t streams, std::int64_t turbo_iterations = 0);

/// Overhead charged to one engine run; zero for the uncoordinated baseline.
std::int64_t run_overhead(AlgorithmId algo, const NetworkConfig& cfg, int iterations);

}  // namespace fbc
