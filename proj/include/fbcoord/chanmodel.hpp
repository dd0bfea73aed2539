#pragma once

/**
 * @file chanmodel.hpp
 * @brief Seeded channel generation: i.i.d. Rayleigh links and the
 * pathloss / shadowing / fading dense-deployment drop.
 */

#include <cstdint>

#include "fbcoord/netmodel.hpp"

namespace fbc {

/// Dense deployment on a sqrt(L) x sqrt(L) grid of cells.
struct DeploymentSpec {
  double cell_radius = 10.0;       // m
  double carrier_freq = 28e9;      // Hz
  double pathloss_exponent = 3.4;  // n_p
  double shadowing_std = 9.0;      // dB
  double min_distance = 1.0;       // m
  double rician_k = 0.0;           // 0 = Rayleigh fading

  void validate(int cells) const;
  double wavelength() const;

  bool operator==(const DeploymentSpec&) const = default;
};

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr int kDropRejectionBudget = 1000;

/// Entries i.i.d. CN(0, 1), bit-identical for equal (cfg shape, seed).
ChannelSet iid_channels(const NetworkConfig& cfg, std::uint64_t seed);

/// 20 log10(4 pi / lambda_c) + 10 n_p log10(D) + shadow.
double pathloss_db(double distance, const DeploymentSpec& spec, double shadow_db);

/// Channels carry sqrt(10^(-pathloss/10)) * fading; geometry is attached to the result.
ChannelSet dense_drop(const NetworkConfig& cfg, const DeploymentSpec& spec, std::uint64_t seed);

/// sigma^2 with mean over direct links of P_t ||H_{l,u}||_F^2 / (M sigma^2) = 10^(target/10).
double calibrate_noise(const ChannelSet& ch, const NetworkConfig& cfg, double target_snr_db);

/// The average effective SNR (dB) that calibrate_noise targets, at a given sigma^2.
double effective_snr_db(const ChannelSet& ch, const NetworkConfig& cfg, double noise);

}  // namespace fbc
