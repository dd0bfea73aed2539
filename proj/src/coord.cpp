#include "fbcoord/coord.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include "fbcoord/errors.hpp"
#include "fbcoord/rng.hpp"
#include "fbcoord/solvers.hpp"

namespace fbc {
namespace {

constexpr std::array<std::pair<AlgorithmId, std::string_view>, 5> kAlgorithmNames{{
    {AlgorithmId::kAims, "AIMS"},
    {AlgorithmId::kAimsRa, "AIMS_RA"},
    {AlgorithmId::kMaxDlt, "MAX_DLT"},
    {AlgorithmId::kMaxSinr, "MAX_SINR"},
    {AlgorithmId::kUncoordinated, "UNCOORDINATED"},
}};

constexpr double kActiveColumnFraction = 1e-9;

CMat scaled_to(const CMat& x, double power) {
  const double norm = x.norm();
  if (!(norm > 0.0)) throw SingularProjection("filter collapsed to zero");
  return x * (std::sqrt(power) / norm);
}

// Keeps the first `rank` columns, zeroes the rest, and renormalizes.
CMat truncated(const CMat& x, int rank, double power) {
  CMat out = CMat::Zero(x.rows(), x.cols());
  out.leftCols(rank) = x.leftCols(rank);
  return scaled_to(out, power);
}

double norm_deviation(const CMat& x, double power) {
  const double dev = std::abs(x.squaredNorm() - power);
  return power > 0.0 ? dev / power : dev;
}

class Engine {
 public:
  Engine(AlgorithmId algo, const NetworkConfig& cfg, const ChannelSet& ch, int iterations,
         const RunOptions& options)
      : algo_(algo), cfg_(cfg), ch_(ch), iterations_(iterations), options_(options) {}

  RunResult operator()(FilterBank fb) {
    start_ = std::chrono::steady_clock::now();
    RunResult result;
    result.trace.entries.push_back(record(fb));
    if (algo_ == AlgorithmId::kUncoordinated) {
      result.filters = std::move(fb);
      return result;
    }
    for (int t = 1; t <= iterations_; ++t) {
      forward_phase(fb, t);
      if (options_.on_phase) options_.on_phase(t, Phase::kForward, fb);
      backward_phase(fb, t);
      if (options_.on_phase) options_.on_phase(t, Phase::kBackward, fb);
      result.trace.entries.push_back(record(fb));
    }
    result.filters = std::move(fb);
    return result;
  }

 private:
  template <typename Fn>
  void for_each_node(const char* phase, int t, Fn&& fn) {
    for (int u = 0; u < cfg_.num_users(); ++u) {
      try {
        fn(u);
      } catch (const Error& e) {
        throw CoordinationError(e.what(), u, phase, t);
      }
    }
  }

  bool adapt_now(int t) const {
    return algo_ == AlgorithmId::kAimsRa && (!options_.ra_last_iteration_only || t == iterations_);
  }

  void forward_phase(FilterBank& fb, int t) {
    const int d = cfg_.streams;
    const double power = cfg_.rx_filter_power;
    std::vector<CMat> next(fb.rx.size());
    if (algo_ == AlgorithmId::kMaxSinr) {
      for_each_node("forward", t, [&](int u) { next[u] = max_sinr_update(cfg_, ch_, fb, u, Side::kForward); });
      fb.rx = std::move(next);
      return;
    }
    const auto covs = all_covariances(cfg_, ch_, fb, Side::kForward);
    rx_rank_.assign(fb.rx.size(), d);
    for_each_node("forward", t, [&](int u) {
      const CovariancePair& cov = covs[u];
      switch (algo_) {
        case AlgorithmId::kMaxDlt:
          next[u] = nh_waterfill(cov.signal, cov.interference, d, power).filter;
          break;
        case AlgorithmId::kAims:
          next[u] = scaled_to(gmrq_max(cov.signal, cov.interference, d), power);
          break;
        case AlgorithmId::kAimsRa: {
          const GeneralizedBasis basis = generalized_basis(cov.signal, cov.interference);
          const CMat full = basis.filters.leftCols(d);
          // Truncation to the pair rank happens in the backward phase.
          if (adapt_now(t)) rx_rank_[u] = rank_from_eigenvalues(basis.values, d);
          next[u] = scaled_to(full, power);
          break;
        }
        default:
          break;
      }
    });
    fb.rx = std::move(next);
  }

  void backward_phase(FilterBank& fb, int t) {
    const int d = cfg_.streams;
    const double power = cfg_.tx_power;
    std::vector<CMat> next(fb.tx.size());
    if (algo_ == AlgorithmId::kMaxSinr) {
      for_each_node("backward", t, [&](int u) { next[u] = max_sinr_update(cfg_, ch_, fb, u, Side::kReverse); });
      fb.tx = std::move(next);
      return;
    }
    const auto covs = all_covariances(cfg_, ch_, fb, Side::kReverse);
    const bool pair_ranks = adapt_now(t);
    for_each_node("backward", t, [&](int u) {
      const CovariancePair& cov = covs[u];
      switch (algo_) {
        case AlgorithmId::kMaxDlt:
          next[u] = nh_waterfill(cov.signal, cov.interference, d, power).filter;
          break;
        case AlgorithmId::kAims:
          next[u] = scaled_to(gmrq_max(cov.signal, cov.interference, d), power);
          break;
        case AlgorithmId::kAimsRa: {
          const GeneralizedBasis basis = generalized_basis(cov.signal, cov.interference);
          const CMat full = basis.filters.leftCols(d);
          if (pair_ranks) {
            // Each transmit/receive pair uses the smaller of its two adapted ranks.
            const int rank = std::min(rx_rank_[u], rank_from_eigenvalues(basis.values, d));
            next[u] = truncated(full, rank, power);
            fb.rx[u] = truncated(fb.rx[u], rank, cfg_.rx_filter_power);
          } else {
            next[u] = scaled_to(full, power);
          }
          break;
        }
        default:
          break;
      }
    });
    fb.tx = std::move(next);
  }

  TraceEntry record(const FilterBank& fb) const {
    TraceEntry e;
    e.sum_rate = sum_rate(cfg_, ch_, fb);
    e.dlt_fwd = dlt_objective(cfg_, ch_, fb, Side::kForward);
    for (int u = 0; u < cfg_.num_users(); ++u) {
      e.filter_norm_dev = std::max({e.filter_norm_dev, norm_deviation(fb.rx[u], cfg_.rx_filter_power),
                                    norm_deviation(fb.tx[u], cfg_.tx_power)});
      e.active_ranks.push_back(active_columns(fb.tx[u], cfg_.tx_power));
      e.rx_ranks.push_back(active_columns(fb.rx[u], cfg_.rx_filter_power));
    }
    e.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return e;
  }

  AlgorithmId algo_;
  const NetworkConfig& cfg_;
  const ChannelSet& ch_;
  int iterations_;
  const RunOptions& options_;
  std::vector<int> rx_rank_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::string_view to_string(AlgorithmId algo) {
  for (const auto& [id, name] : kAlgorithmNames)
    if (id == algo) return name;
  return "UNKNOWN";
}

std::optional<AlgorithmId> parse_algorithm(std::string_view name) {
  for (const auto& [id, canonical] : kAlgorithmNames)
    if (canonical == name) return id;
  return std::nullopt;
}

const std::vector<AlgorithmId>& all_algorithms() {
  static const std::vector<AlgorithmId> algos = [] {
    std::vector<AlgorithmId> v;
    for (const auto& entry : kAlgorithmNames) v.push_back(entry.first);
    return v;
  }();
  return algos;
}

std::string_view to_string(InitPolicy policy) { return policy == InitPolicy::kEigen ? "eigen" : "random"; }

std::optional<InitPolicy> parse_init_policy(std::string_view name) {
  if (name == "eigen") return InitPolicy::kEigen;
  if (name == "random") return InitPolicy::kRandom;
  return std::nullopt;
}

int active_columns(const CMat& filter, double power) {
  const double floor = kActiveColumnFraction * power / std::max<Index>(filter.cols(), 1);
  int count = 0;
  for (Index c = 0; c < filter.cols(); ++c)
    if (filter.col(c).squaredNorm() > floor) ++count;
  return count;
}

FilterBank init_filters(const NetworkConfig& cfg, const ChannelSet& ch, InitPolicy policy,
                        std::uint64_t seed) {
  check_dimensions(cfg, ch);
  const int users = cfg.num_users();
  const int d = cfg.streams;
  FilterBank fb;
  fb.rx.reserve(users);
  fb.tx.reserve(users);
  if (policy == InitPolicy::kEigen) {
    for (int u = 0; u < users; ++u) {
      EigenBeamformer bf = eigen_beamform(ch.at(cfg.cell_of(u), u), d, cfg.tx_power);
      fb.tx.push_back(std::move(bf.tx));
      fb.rx.push_back(bf.rx * std::sqrt(cfg.rx_filter_power / d));
    }
    return fb;
  }
  Rng rng(seed);
  auto orthonormal = [&](Index rows, double power) {
    Eigen::HouseholderQR<CMat> qr(rng.complex_normal_matrix(rows, d));
    CMat q = qr.householderQ() * CMat::Identity(rows, d);
    return CMat(q * std::sqrt(power / d));
  };
  for (int u = 0; u < users; ++u) {
    fb.tx.push_back(orthonormal(cfg.tx_antennas, cfg.tx_power));
    fb.rx.push_back(orthonormal(cfg.rx_antennas, cfg.rx_filter_power));
  }
  return fb;
}

RunResult run(AlgorithmId algo, const NetworkConfig& cfg, const ChannelSet& ch, int iterations,
              std::uint64_t seed, const RunOptions& options) {
  if (iterations < 0) throw InvalidInput("run: iteration count must be non-negative");
  cfg.validate();
  check_dimensions(cfg, ch);
  if (algo != AlgorithmId::kUncoordinated && (!(cfg.tx_power > 0.0) || !(cfg.rx_filter_power > 0.0))) {
    throw InvalidInput("run: coordinated algorithms need positive transmit and receive power");
  }
  const InitPolicy init = algo == AlgorithmId::kUncoordinated ? InitPolicy::kEigen : options.init;
  Engine engine(algo, cfg, ch, iterations, options);
  return engine(init_filters(cfg, ch, init, seed));
}

std::optional<OverheadFamily> parse_overhead_family(std::string_view name) {
  if (name == "prop") return OverheadFamily::kProposed;
  if (name == "wmmse") return OverheadFamily::kWmmse;
  if (name == "ccp_wmmse") return OverheadFamily::kCcpWmmse;
  return std::nullopt;
}

std::int64_t overhead(OverheadFamily family, std::int64_t iterations, std::int64_t users_per_cell,
                      std::int64_t cells, std::int64_t tx_antennas, std::int64_t rx_antennas,
                      std::int64_t streams, std::int64_t turbo_iterations) {
  if (iterations < 0 || users_per_cell < 0 || cells < 0 || tx_antennas < 0 || rx_antennas < 0 ||
      streams < 0 || turbo_iterations < 0) {
    throw InvalidInput("overhead: arguments must be non-negative");
  }
  const std::int64_t pilots = users_per_cell * cells;  // K L
  switch (family) {
    case OverheadFamily::kProposed:
      return 2 * iterations * pilots * streams;
    case OverheadFamily::kWmmse:
      return iterations * (pilots * streams + pilots * tx_antennas + pilots * streams);
    case OverheadFamily::kCcpWmmse:
      return iterations * (pilots * tx_antennas * (cells - 1) + turbo_iterations * pilots * rx_antennas);
  }
  throw InvalidInput("overhead: unknown family");
}

std::int64_t run_overhead(AlgorithmId algo, const NetworkConfig& cfg, int iterations) {
  if (algo == AlgorithmId::kUncoordinated) return 0;
  return overhead(OverheadFamily::kProposed, iterations, cfg.users_per_cell, cfg.cells, cfg.tx_antennas,
                  cfg.rx_antennas, cfg.streams);
}

}  // namespace fbc
