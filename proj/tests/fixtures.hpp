#pragma once

#include <cmath>

#include "fbcoord/chanmodel.hpp"
#include "fbcoord/netmodel.hpp"
#include "fbcoord/rng.hpp"

namespace fixtures {

/// Gaussian filters; when normalized, every U has ||U||^2 = P_r and every V has ||V||^2 = P_t.
inline fbc::FilterBank random_bank(fbc::Rng& rng, const fbc::NetworkConfig& cfg, bool normalized = true) {
  fbc::FilterBank fb;
  for (int u = 0; u < cfg.num_users(); ++u) {
    fbc::CMat rx = rng.complex_normal_matrix(cfg.rx_antennas, cfg.streams);
    fbc::CMat tx = rng.complex_normal_matrix(cfg.tx_antennas, cfg.streams);
    if (normalized) {
      rx *= std::sqrt(cfg.rx_filter_power) / rx.norm();
      tx *= std::sqrt(cfg.tx_power) / tx.norm();
    }
    fb.rx.push_back(rx);
    fb.tx.push_back(tx);
  }
  return fb;
}

inline double snr_to_noise(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace fixtures
