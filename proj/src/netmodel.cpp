#include "fbcoord/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbcoord/errors.hpp"

namespace fbc {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRidgeScale = 1e-12;

std::string shape(const CMat& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void check_filter(const CMat& filter, const CovariancePair& cov, const char* what) {
  if (cov.signal.rows() != cov.signal.cols() || cov.interference.rows() != cov.interference.cols() ||
      cov.signal.rows() != cov.interference.rows()) {
    throw DimensionMismatch(std::string(what) + ": covariance pair is not square and matched");
  }
  if (filter.rows() != cov.signal.rows()) {
    throw DimensionMismatch(std::string(what) + ": filter " + shape(filter) + " vs covariance " +
                            shape(cov.signal));
  }
}

// U^H Q U, optionally regularized when it is numerically singular.
CMat projected_interference(const CMat& u, const CovariancePair& cov, SingularPolicy policy) {
  CMat b = hermitian_part(u.adjoint() * cov.interference * u);
  if (b.rows() == 0) return b;
  const RVec eig = hermitian_eigenvalues(b);
  const double lo = eig.minCoeff();
  const double hi = eig.maxCoeff();
  if (lo > 0.0 && hi <= kMaxCondition * lo) return b;
  if (policy == SingularPolicy::kThrow) {
    throw SingularProjection("projected I+N covariance is numerically singular (cond > 1e12)");
  }
  const double ridge = kRidgeScale * std::max(cov.interference.trace().real(), 1e-300);
  b.diagonal().array() += ridge;
  return b;
}

CMat identity_plus(const CMat& a) {
  CMat out = hermitian_part(a);
  out.diagonal().array() += 1.0;
  return out;
}

}  // namespace

NetworkConfig NetworkConfig::uniform(int cells, int users_per_cell, int tx_antennas, int rx_antennas,
                                     int streams, double noise, std::optional<double> noise_reverse,
                                     double tx_power, double rx_filter_power) {
  NetworkConfig cfg;
  cfg.cells = cells;
  cfg.users_per_cell = users_per_cell;
  cfg.tx_antennas = tx_antennas;
  cfg.rx_antennas = rx_antennas;
  cfg.streams = streams;
  cfg.tx_power = tx_power;
  cfg.rx_filter_power = rx_filter_power;
  cfg.noise_fwd.assign(static_cast<size_t>(std::max(cells, 0)), noise);
  cfg.noise_rev.assign(static_cast<size_t>(std::max(cells * users_per_cell, 0)),
                       noise_reverse.value_or(noise));
  return cfg;
}

void NetworkConfig::set_noise(double noise, double reverse_factor) {
  noise_fwd.assign(static_cast<size_t>(cells), noise);
  noise_rev.assign(static_cast<size_t>(num_users()), noise * reverse_factor);
}

void NetworkConfig::validate() const {
  if (cells < 1 || users_per_cell < 1 || tx_antennas < 1 || rx_antennas < 1 || streams < 1) {
    throw ValidationError("cells, users_per_cell, tx_antennas, rx_antennas and streams must be >= 1");
  }
  if (streams > std::min(tx_antennas, rx_antennas)) {
    throw ValidationError("streams must not exceed min(tx_antennas, rx_antennas)");
  }
  if (!std::isfinite(tx_power) || tx_power < 0.0 || !std::isfinite(rx_filter_power) ||
      rx_filter_power < 0.0) {
    throw ValidationError("powers must be finite and non-negative");
  }
  if (noise_fwd.size() != static_cast<size_t>(cells) ||
      noise_rev.size() != static_cast<size_t>(num_users())) {
    throw ValidationError("need one forward noise per cell and one reverse noise per user");
  }
  auto bad = [](double s) { return !std::isfinite(s) || s <= 0.0; };
  if (std::any_of(noise_fwd.begin(), noise_fwd.end(), bad) ||
      std::any_of(noise_rev.begin(), noise_rev.end(), bad)) {
    throw ValidationError("noise variances must be finite and strictly positive");
  }
}

void check_dimensions(const NetworkConfig& cfg, const ChannelSet& ch) {
  const int users = cfg.num_users();
  if (ch.cells != cfg.cells || ch.users != users ||
      ch.links.size() != static_cast<size_t>(cfg.cells * users)) {
    throw DimensionMismatch("channel set does not cover L x (L*K) links");
  }
  for (const CMat& h : ch.links) {
    if (h.rows() != cfg.rx_antennas || h.cols() != cfg.tx_antennas) {
      throw DimensionMismatch("channel " + shape(h) + " is not N x M");
    }
  }
}

void check_dimensions(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb) {
  check_dimensions(cfg, ch);
  const auto users = static_cast<size_t>(cfg.num_users());
  if (fb.rx.size() != users || fb.tx.size() != users) {
    throw DimensionMismatch("filter bank does not hold one filter pair per user");
  }
  for (size_t u = 0; u < users; ++u) {
    if (fb.rx[u].rows() != cfg.rx_antennas || fb.rx[u].cols() != cfg.streams) {
      throw DimensionMismatch("receive filter " + shape(fb.rx[u]) + " is not N x d");
    }
    if (fb.tx[u].rows() != cfg.tx_antennas || fb.tx[u].cols() != cfg.streams) {
      throw DimensionMismatch("transmit filter " + shape(fb.tx[u]) + " is not M x d");
    }
  }
}

std::vector<CovariancePair> all_covariances(const NetworkConfig& cfg, const ChannelSet& ch,
                                            const FilterBank& fb, Side side) {
  check_dimensions(cfg, ch, fb);
  const int users = cfg.num_users();
  std::vector<CovariancePair> out(static_cast<size_t>(users));

  if (side == Side::kForward) {
    const Index n = cfg.rx_antennas;
    for (int l = 0; l < cfg.cells; ++l) {
      // Effective channels H_{l,i} V_i seen at BS l.
      std::vector<CMat> eff(static_cast<size_t>(users));
      for (int i = 0; i < users; ++i) eff[i] = ch.at(l, i) * fb.tx[i];
      for (int j = 0; j < cfg.users_per_cell; ++j) {
        const int u = cfg.user_index(l, j);
        CovariancePair& cov = out[u];
        cov.side = Side::kForward;
        cov.owner = u;
        cov.signal = hermitian_part(eff[u] * eff[u].adjoint());
        cov.interference = CMat::Identity(n, n) * cfg.noise_fwd[l];
        for (int i = 0; i < users; ++i) {
          if (i != u) cov.interference.noalias() += eff[i] * eff[i].adjoint();
        }
        cov.interference = hermitian_part(cov.interference);
      }
    }
    return out;
  }

  const Index m = cfg.tx_antennas;
  for (int u = 0; u < users; ++u) {
    CovariancePair& cov = out[u];
    cov.side = Side::kReverse;
    cov.owner = u;
    cov.interference = CMat::Identity(m, m) * cfg.noise_rev[u];
    for (int l = 0; l < cfg.cells; ++l) {
      const CMat& h = ch.at(l, u);
      for (int j = 0; j < cfg.users_per_cell; ++j) {
        const int rx_user = cfg.user_index(l, j);
        const CMat eff = h.adjoint() * fb.rx[rx_user];
        if (rx_user == u) {
          cov.signal = hermitian_part(eff * eff.adjoint());
        } else {
          cov.interference.noalias() += eff * eff.adjoint();
        }
      }
    }
    cov.interference = hermitian_part(cov.interference);
  }
  return out;
}

CovariancePair fwd_covariances(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb,
                               int user) {
  check_dimensions(cfg, ch, fb);
  if (user < 0 || user >= cfg.num_users()) throw InvalidInput("fwd_covariances: user out of range");
  const int l = cfg.cell_of(user);
  const Index n = cfg.rx_antennas;
  CovariancePair cov;
  cov.side = Side::kForward;
  cov.owner = user;
  cov.interference = CMat::Identity(n, n) * cfg.noise_fwd[l];
  for (int i = 0; i < cfg.num_users(); ++i) {
    const CMat eff = ch.at(l, i) * fb.tx[i];
    if (i == user) {
      cov.signal = hermitian_part(eff * eff.adjoint());
    } else {
      cov.interference.noalias() += eff * eff.adjoint();
    }
  }
  cov.interference = hermitian_part(cov.interference);
  return cov;
}

CovariancePair rev_covariances(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb,
                               int user) {
  check_dimensions(cfg, ch, fb);
  if (user < 0 || user >= cfg.num_users()) throw InvalidInput("rev_covariances: user out of range");
  const Index m = cfg.tx_antennas;
  CovariancePair cov;
  cov.side = Side::kReverse;
  cov.owner = user;
  cov.interference = CMat::Identity(m, m) * cfg.noise_rev[user];
  for (int rx_user = 0; rx_user < cfg.num_users(); ++rx_user) {
    const CMat eff = ch.at(cfg.cell_of(rx_user), user).adjoint() * fb.rx[rx_user];
    if (rx_user == user) {
      cov.signal = hermitian_part(eff * eff.adjoint());
    } else {
      cov.interference.noalias() += eff * eff.adjoint();
    }
  }
  cov.interference = hermitian_part(cov.interference);
  return cov;
}

double user_rate(const CMat& u, const CovariancePair& cov, SingularPolicy policy) {
  check_filter(u, cov, "user_rate");
  const CMat b = projected_interference(u, cov, policy);
  const CMat a = hermitian_part(u.adjoint() * cov.signal * u);
  // |I + A B^{-1}| = |B + A| / |B|
  const double rate = log2_det_hpd(b + a) - log2_det_hpd(b);
  return std::max(rate, 0.0);
}

std::vector<double> user_rates(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb) {
  const auto covs = all_covariances(cfg, ch, fb, Side::kForward);
  std::vector<double> rates(covs.size());
  for (size_t u = 0; u < covs.size(); ++u) {
    rates[u] = user_rate(fb.rx[u], covs[u], SingularPolicy::kRidge);
  }
  return rates;
}

double sum_rate(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb) {
  double total = 0.0;
  for (double r : user_rates(cfg, ch, fb)) total += r;
  return total;
}

double gmrq_value(const CMat& u, const CovariancePair& cov) {
  check_filter(u, cov, "gmrq_value");
  const CMat b = projected_interference(u, cov, SingularPolicy::kThrow);
  const CMat a = hermitian_part(u.adjoint() * cov.signal * u);
  const double det_a = std::max(a.determinant().real(), 0.0);
  return det_a / b.determinant().real();
}

double dlt_user_lb(const CMat& u, const CovariancePair& cov) {
  check_filter(u, cov, "dlt_user_lb");
  const CMat a = u.adjoint() * cov.signal * u;
  const double trace_q = (u.adjoint() * cov.interference * u).trace().real();
  return log2_det_hpd(identity_plus(a)) - trace_q;
}

double dlt_objective(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb, Side side) {
  const auto covs = all_covariances(cfg, ch, fb, side);
  const std::vector<CMat>& filters = side == Side::kForward ? fb.rx : fb.tx;
  double total = 0.0;
  for (size_t u = 0; u < covs.size(); ++u) total += dlt_user_lb(filters[u], covs[u]);
  return total;
}

bool interference_limited_check(const CMat& u, const CovariancePair& cov) {
  check_filter(u, cov, "interference_limited_check");
  const CMat b = projected_interference(u, cov, SingularPolicy::kThrow);
  return hermitian_eigenvalues(b).minCoeff() >= 1.0;
}

}  // namespace fbc
