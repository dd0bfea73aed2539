#include "fbcoord/chanmodel.hpp"

#include <cmath>
#include <numbers>

#include "fbcoord/errors.hpp"
#include "fbcoord/rng.hpp"

namespace fbc {
namespace {

int grid_side(int cells) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cells))));
  return side * side == cells ? side : -1;
}

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double mean_direct_gain(const ChannelSet& ch, const NetworkConfig& cfg) {
  if (ch.links.empty() || cfg.num_users() == 0) throw InvalidInput("empty channel set");
  check_dimensions(cfg, ch);
  double acc = 0.0;
  for (int u = 0; u < cfg.num_users(); ++u) acc += ch.at(cfg.cell_of(u), u).squaredNorm();
  return acc / cfg.num_users();
}

}  // namespace

void DeploymentSpec::validate(int cells) const {
  if (cells < 1 || grid_side(cells) < 0) {
    throw ValidationError("dense deployment needs a perfect-square number of cells");
  }
  if (!(min_distance > 0.0) || !(cell_radius > min_distance)) {
    throw ValidationError("need cell_radius > min_distance > 0");
  }
  if (!(carrier_freq > 0.0) || !(pathloss_exponent > 0.0) || shadowing_std < 0.0 || rician_k < 0.0) {
    throw ValidationError("carrier_freq and pathloss_exponent must be positive; "
                          "shadowing_std and rician_k non-negative");
  }
}

double DeploymentSpec::wavelength() const { return kSpeedOfLight / carrier_freq; }

ChannelSet iid_channels(const NetworkConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ChannelSet ch;
  ch.cells = cfg.cells;
  ch.users = cfg.num_users();
  ch.links.reserve(static_cast<size_t>(ch.cells * ch.users));
  for (int l = 0; l < ch.cells; ++l)
    for (int u = 0; u < ch.users; ++u)
      ch.links.push_back(rng.complex_normal_matrix(cfg.rx_antennas, cfg.tx_antennas));
  return ch;
}

double pathloss_db(double distance, const DeploymentSpec& spec, double shadow_db) {
  if (!(distance >= spec.min_distance)) {
    throw BelowMinDistance("distance " + std::to_string(distance) + " m is below the minimum " +
                           std::to_string(spec.min_distance) + " m");
  }
  return 20.0 * std::log10(4.0 * std::numbers::pi / spec.wavelength()) +
         10.0 * spec.pathloss_exponent * std::log10(distance) + shadow_db;
}

ChannelSet dense_drop(const NetworkConfig& cfg, const DeploymentSpec& spec, std::uint64_t seed) {
  spec.validate(cfg.cells);
  const int side = grid_side(cfg.cells);
  const double spacing = 2.0 * spec.cell_radius;
  Rng rng(seed);

  Geometry geo;
  for (int l = 0; l < cfg.cells; ++l) {
    geo.bs_positions.push_back({(l % side) * spacing, (l / side) * spacing});
  }
  geo.user_positions.resize(static_cast<size_t>(cfg.cells));
  for (int l = 0; l < cfg.cells; ++l) {
    const Point2 centre = geo.bs_positions[l];
    for (int j = 0; j < cfg.users_per_cell; ++j) {
      int attempts = 0;
      while (true) {
        // Uniform in the disc: radius ~ R sqrt(U).
        const double r = spec.cell_radius * std::sqrt(rng.uniform());
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        const Point2 p{centre.x + r * std::cos(theta), centre.y + r * std::sin(theta)};
        bool ok = true;
        for (const Point2& bs : geo.bs_positions) ok = ok && distance(p, bs) >= spec.min_distance;
        if (ok) {
          geo.user_positions[l].push_back(p);
          break;
        }
        if (++attempts >= kDropRejectionBudget) {
          throw RejectionBudgetExceeded("could not place a user outside min_distance after " +
                                        std::to_string(kDropRejectionBudget) + " draws");
        }
      }
    }
  }

  const double los = std::sqrt(spec.rician_k / (spec.rician_k + 1.0));
  const double scatter = std::sqrt(1.0 / (spec.rician_k + 1.0));
  ChannelSet ch;
  ch.cells = cfg.cells;
  ch.users = cfg.num_users();
  ch.links.reserve(static_cast<size_t>(ch.cells * ch.users));
  for (int l = 0; l < cfg.cells; ++l) {
    for (int u = 0; u < ch.users; ++u) {
      const Point2& pos = geo.user_positions[cfg.cell_of(u)][u % cfg.users_per_cell];
      const double shadow = spec.shadowing_std * rng.normal();
      const double loss = pathloss_db(distance(pos, geo.bs_positions[l]), spec, shadow);
      const double amplitude = std::sqrt(std::pow(10.0, -loss / 10.0));
      CMat fading = rng.complex_normal_matrix(cfg.rx_antennas, cfg.tx_antennas) * scatter;
      fading.array() += los;  // line-of-sight term with zero phase
      ch.links.push_back(amplitude * fading);
    }
  }
  ch.geometry = std::move(geo);
  return ch;
}

double calibrate_noise(const ChannelSet& ch, const NetworkConfig& cfg, double target_snr_db) {
  const double gain = mean_direct_gain(ch, cfg);
  return cfg.tx_power * gain / (cfg.tx_antennas * std::pow(10.0, target_snr_db / 10.0));
}

double effective_snr_db(const ChannelSet& ch, const NetworkConfig& cfg, double noise) {
  const double gain = mean_direct_gain(ch, cfg);
  return 10.0 * std::log10(cfg.tx_power * gain / (cfg.tx_antennas * noise));
}

}  // namespace fbc
