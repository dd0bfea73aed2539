#pragma once

/**
 * @file netmodel.hpp
 * @brief Network data model: dimensions, channels, filter banks, forward and
 * reverse covariance assembly, and the rate / bound metrics built on them.
 *
 * Users are indexed flat: user (cell l, slot j) has index l * K + j. The
 * engine always optimizes "transmit side M, receive side N"; a downlink is
 * described by swapping which physical device owns which antenna count.
 */

#include <optional>
#include <vector>

#include "fbcoord/matrixkit.hpp"

namespace fbc {

struct NetworkConfig {
  int cells = 1;           // L
  int users_per_cell = 1;  // K
  int tx_antennas = 1;     // M
  int rx_antennas = 1;     // N
  int streams = 1;         // d
  double tx_power = 1.0;         // P_t, ||V||_F^2
  double rx_filter_power = 1.0;  // P_r, ||U||_F^2
  std::vector<double> noise_fwd;  // per BS
  std::vector<double> noise_rev;  // per user

  /// Same noise at every BS; reverse noise defaults to the forward value.
  static NetworkConfig uniform(int cells, int users_per_cell, int tx_antennas, int rx_antennas,
                               int streams, double noise, std::optional<double> noise_reverse = {},
                               double tx_power = 1.0, double rx_filter_power = 1.0);

  int num_users() const { return cells * users_per_cell; }
  int cell_of(int user) const { return user / users_per_cell; }
  int user_index(int cell, int slot) const { return cell * users_per_cell + slot; }

  /// Replaces all noise variances (reverse scaled by reverse_factor).
  void set_noise(double noise, double reverse_factor = 1.0);

  /// Throws ValidationError on a violated invariant.
  void validate() const;

  bool operator==(const NetworkConfig&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Geometry {
  std::vector<Point2> bs_positions;
  std::vector<std::vector<Point2>> user_positions;  // [cell][slot]
};

/// H_{l, u}: N x M channel from user u to BS l, stored at links[l * num_users + u].
struct ChannelSet {
  int cells = 0;
  int users = 0;
  std::vector<CMat> links;
  std::optional<Geometry> geometry;

  const CMat& at(int bs, int user) const { return links[static_cast<size_t>(bs * users + user)]; }
  CMat& at(int bs, int user) { return links[static_cast<size_t>(bs * users + user)]; }
};

/// rx[u] is U_u (N x d), tx[u] is V_u (M x d).
struct FilterBank {
  std::vector<CMat> rx;
  std::vector<CMat> tx;
};

enum class Side { kForward, kReverse };

struct CovariancePair {
  CMat signal;        // R
  CMat interference;  // Q, interference plus noise
  Side side = Side::kForward;
  int owner = 0;
};

/// Checks channel and filter shapes against cfg; throws DimensionMismatch.
void check_dimensions(const NetworkConfig& cfg, const ChannelSet& ch);
void check_dimensions(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb);

CovariancePair fwd_covariances(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb,
                               int user);
CovariancePair rev_covariances(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb,
                               int user);

/// All users at once; shares per-link products across users.
std::vector<CovariancePair> all_covariances(const NetworkConfig& cfg, const ChannelSet& ch,
                                            const FilterBank& fb, Side side);

enum class SingularPolicy {
  kThrow,  // SingularProjection when cond(U^H Q U) > 1e12
  kRidge,  // add 1e-12 * tr(Q) * I to U^H Q U instead
};

/// log2 |I + (U^H R U)(U^H Q U)^{-1}| in bits per channel use.
double user_rate(const CMat& u, const CovariancePair& cov,
                 SingularPolicy policy = SingularPolicy::kThrow);

/// Sum of user_rate over all users. Rank-collapsed filters are ridge-regularized.
double sum_rate(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb);

/// Per-user rates, same regularization as sum_rate.
std::vector<double> user_rates(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb);

/// GMRQ separability |U^H R U| / |U^H Q U|.
double gmrq_value(const CMat& u, const CovariancePair& cov);

/// log2 |I + U^H R U| - tr(U^H Q U).
double dlt_user_lb(const CMat& u, const CovariancePair& cov);

/// Sum of dlt_user_lb over users of the requested network direction.
double dlt_objective(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb, Side side);

/// lambda_min(U^H Q U) >= 1.
bool interference_limited_check(const CMat& u, const CovariancePair& cov);

}  // namespace fbc
