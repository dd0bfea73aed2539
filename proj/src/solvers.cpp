#include "fbcoord/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fbcoord/errors.hpp"

namespace fbc {
namespace {

constexpr int kMaxBisection = 200;
constexpr int kMaxNewton = 8;

void require_rank(int rank, Index n, const char* what) {
  if (rank < 1 || rank > n) {
    throw InvalidInput(std::string(what) + ": rank " + std::to_string(rank) + " outside [1, " +
                       std::to_string(n) + "]");
  }
}

// Water-filling state for the streams that carry a log term.
struct LogStreams {
  const RVec& alpha;
  const RVec& beta;
  std::vector<Index> idx;

  double power(Index i, double mu) const {
    return std::max(1.0 / (1.0 + mu * beta(i)) - 1.0 / alpha(i), 0.0);
  }
  double budget(double mu) const {
    double s = 0.0;
    for (Index i : idx) s += beta(i) * power(i, mu);
    return s;
  }
  double slope(double mu) const {
    double s = 0.0;
    for (Index i : idx) {
      if (power(i, mu) > 0.0) {
        const double t = 1.0 + mu * beta(i);
        s -= beta(i) * beta(i) / (t * t);
      }
    }
    return s;
  }
};

// Finds mu with budget(mu) = zeta on ]lo, inf[, given budget(lo+) > zeta.
double solve_multiplier(const LogStreams& streams, double lo, double zeta) {
  auto g = [&](double mu) { return streams.budget(mu) - zeta; };

  double lower;
  double upper;
  if (g(0.0) > 0.0) {
    lower = 0.0;
    upper = 1.0;
    while (g(upper) > 0.0) {
      lower = upper;
      upper *= 2.0;
      if (!std::isfinite(upper)) throw ConvergenceFailure("power_alloc: upper bracket diverged");
    }
  } else {
    upper = 0.0;
    double gap = -lo;
    lower = lo + 0.5 * gap;
    int halvings = 0;
    while (g(lower) <= 0.0) {
      upper = lower;
      gap *= 0.5;
      lower = lo + gap;
      if (++halvings > 2000 || lower == lo) {
        throw ConvergenceFailure("power_alloc: could not bracket the water level");
      }
    }
  }

  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lower + upper);
    if (mid <= lower || mid >= upper) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    (gm > 0.0 ? lower : upper) = mid;
  }
  // Newton polish inside the bracket; g is smooth once the active set is fixed.
  double mu = 0.5 * (lower + upper);
  for (int it = 0; it < kMaxNewton; ++it) {
    const double gm = g(mu);
    const double dg = streams.slope(mu);
    if (gm == 0.0 || dg == 0.0) break;
    const double next = mu - gm / dg;
    if (!(next >= lower && next <= upper) || next == mu) break;
    mu = next;
  }
  return mu;
}

}  // namespace

GeneralizedBasis generalized_basis(const CMat& r, const CMat& q) {
  Whitened w = whiten(r, q);
  EigenPair eig = herm_eig(w.matrix);
  GeneralizedBasis out;
  out.filters = lower_adjoint_solve(w.factor, eig.vectors);
  out.factor = std::move(w.factor);
  out.values = std::move(eig.values);
  out.whitened_vectors = std::move(eig.vectors);
  return out;
}

CMat gmrq_max(const CMat& r, const CMat& q, int rank) {
  require_rank(rank, r.rows(), "gmrq_max");
  return generalized_basis(r, q).filters.leftCols(rank);
}

int rank_from_eigenvalues(const RVec& descending_values, int max_rank) {
  if (max_rank < 1) throw InvalidInput("rank_adapt: max_rank must be >= 1");
  const auto above = static_cast<int>((descending_values.array() >= 1.0).count());
  return std::clamp(above, 1, max_rank);
}

int rank_adapt(const CMat& r, const CMat& q, int max_rank) {
  const Whitened w = whiten(r, q);
  return rank_from_eigenvalues(hermitian_eigenvalues(w.matrix), max_rank);
}

PowerAllocation power_alloc(const RVec& alpha, const RVec& beta, double zeta) {
  const Index r = alpha.size();
  if (beta.size() != r) throw DimensionMismatch("power_alloc: alpha and beta differ in length");
  if (r == 0) throw InfeasibleAllocation("power_alloc: no streams to allocate");
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidInput("power_alloc: zeta must be positive");
  for (Index i = 0; i < r; ++i) {
    if (!(beta(i) > 0.0) || !std::isfinite(beta(i))) {
      throw InvalidInput("power_alloc: beta must be positive and finite");
    }
    if (!(alpha(i) >= 0.0)) throw InvalidInput("power_alloc: alpha must be non-negative");
  }

  PowerAllocation out{RVec::Zero(r), 0.0, alpha, beta, zeta};
  LogStreams streams{alpha, beta, {}};
  for (Index i = 0; i < r; ++i)
    if (alpha(i) > kAlphaFloor) streams.idx.push_back(i);

  Index widest = 0;
  beta.maxCoeff(&widest);
  const double beta_max = beta(widest);
  const double lo = -1.0 / beta_max;

  // The budget diverges at lo only if a log stream attains max beta.
  const bool diverges = std::any_of(streams.idx.begin(), streams.idx.end(),
                                    [&](Index i) { return beta(i) == beta_max; });
  double boundary_budget = 0.0;
  if (!diverges) {
    for (Index i : streams.idx) {
      const double x = std::max(1.0 / (1.0 - beta(i) / beta_max) - 1.0 / alpha(i), 0.0);
      boundary_budget += beta(i) * x;
    }
  }

  if (!diverges && boundary_budget <= zeta) {
    // Boundary solution: the widest zero-SINR stream soaks up what is left.
    Index sink = 0;
    for (Index i = 0; i < r; ++i) {
      if (beta(i) == beta_max && alpha(i) <= kAlphaFloor) {
        sink = i;
        break;
      }
    }
    out.mu = lo;
    for (Index i : streams.idx) out.x(i) = std::max(1.0 / (1.0 - beta(i) / beta_max) - 1.0 / alpha(i), 0.0);
    out.x(sink) = (zeta - boundary_budget) / beta(sink);
    return out;
  }

  out.mu = solve_multiplier(streams, lo, zeta);
  for (Index i : streams.idx) out.x(i) = streams.power(i, out.mu);
  return out;
}

namespace {

constexpr double kBits = 1.0 / std::numbers::ln2;

// Waterfilling restricted to the eigenbasis of the pencil (R, Q). In bits,
// sum x - log2(1 + alpha x) is the natural-log problem in y = x ln2 with
// alpha' = alpha / ln2 and zeta' = zeta ln2.
PowerAllocation basis_allocation(const GeneralizedBasis& basis, int rank, double zeta, CMat& unit) {
  unit = basis.filters.leftCols(rank);
  const RVec alpha = basis.values.head(rank).cwiseMax(0.0);
  const RVec beta = unit.colwise().squaredNorm().transpose();
  PowerAllocation scaled = power_alloc(alpha * kBits, beta, zeta / kBits);
  return {scaled.x * kBits, scaled.mu, alpha, beta, zeta};
}

// Unconstrained minimizer of tr(X^H (Q + mu I) X) - log2|I + X^H R X|:
// unit-cost waterfilling x_i = (1/ln2 - 1/alpha_i)^+ on the pencil (R, Q + mu I).
// The record is expressed along Q-normalized directions d_i, where it solves the
// allocation problem with alpha_i = d_i^H R d_i and beta_i = ||d_i||^2.
struct PenalizedSolution {
  CMat unit;
  PowerAllocation allocation;
  double norm2 = 0.0;
};

PenalizedSolution penalized(const CMat& r, const CMat& q, int rank, double mu, double zeta) {
  CMat shifted = q;
  shifted.diagonal().array() += mu;
  const GeneralizedBasis basis = generalized_basis(r, shifted);
  PenalizedSolution out;
  out.unit = basis.filters.leftCols(rank);
  RVec alpha = basis.values.head(rank).cwiseMax(0.0);
  RVec beta = out.unit.colwise().squaredNorm().transpose();
  RVec x = RVec::Zero(rank);
  for (Index i = 0; i < rank; ++i) {
    if (alpha(i) > kAlphaFloor) x(i) = std::max(kBits - 1.0 / alpha(i), 0.0);
    // d_i^H Q d_i = 1 - mu beta_i > 0 since Q + mu I and Q are both PD.
    const double q_norm2 = 1.0 - mu * beta(i);
    out.unit.col(i) /= std::sqrt(q_norm2);
    alpha(i) /= q_norm2;
    beta(i) /= q_norm2;
    x(i) *= q_norm2;
  }
  out.norm2 = beta.dot(x);
  out.allocation = {std::move(x), mu, std::move(alpha), std::move(beta), zeta};
  return out;
}

}  // namespace

SolverOutput nh_waterfill(const CMat& r, const CMat& q, int rank, double zeta) {
  require_rank(rank, r.rows(), "nh_waterfill");
  if (!(zeta > 0.0)) throw InvalidInput("nh_waterfill: zeta must be positive");

  // The squared norm of the penalized minimizer is non-increasing in mu, so the
  // multiplier is bracketed on ]-lambda_min(Q), inf[ and bisected.
  const double q_min = hermitian_eigenvalues(q).minCoeff();
  if (!(q_min > 0.0)) throw NotPositiveDefinite("nh_waterfill: Q must be positive definite");

  SolverOutput out;
  CMat unit;
  auto excess = [&](double mu) { return penalized(r, q, rank, mu, zeta).norm2 - zeta; };

  double lower = 0.0;
  double upper = 0.0;
  bool bracketed = true;
  if (excess(0.0) >= 0.0) {
    upper = q_min;
    while (excess(upper) >= 0.0) {
      lower = upper;
      upper *= 2.0;
      if (!std::isfinite(upper)) throw ConvergenceFailure("nh_waterfill: upper bracket diverged");
    }
  } else {
    upper = 0.0;
    double gap = q_min;
    bracketed = false;
    for (int k = 0; k < 60; ++k) {
      gap *= 0.5;
      const double mu = -q_min + gap;
      double e = 0.0;
      try {
        e = excess(mu);
      } catch (const NotPositiveDefinite&) {
        break;
      }
      if (e >= 0.0) {
        lower = mu;
        bracketed = true;
        break;
      }
      upper = mu;
    }
  }

  if (bracketed) {
    for (int it = 0; it < kMaxBisection; ++it) {
      const double mid = 0.5 * (lower + upper);
      if (mid <= lower || mid >= upper) break;
      const double e = excess(mid);
      if (std::abs(e) <= 1e-12 * zeta) {
        lower = upper = mid;
        break;
      }
      (e > 0.0 ? lower : upper) = mid;
    }
    PenalizedSolution best = penalized(r, q, rank, 0.5 * (lower + upper), zeta);
    if (best.norm2 > 0.0) {
      unit = std::move(best.unit);
      out.allocation = std::move(best.allocation);
      out.allocation.x *= zeta / best.norm2;
    } else {
      bracketed = false;
    }
  }
  // No stream can absorb the budget: fall back to the fixed (R, Q) basis.
  if (!bracketed) out.allocation = basis_allocation(generalized_basis(r, q), rank, zeta, unit);

  const RVec& beta = out.allocation.beta;
  // A switched-off stream keeps a column of norm delta so it can revive later.
  const double delta = kStreamEps * std::sqrt(zeta / rank);
  out.filter = unit;
  bool padded = false;
  for (Index i = 0; i < rank; ++i) {
    const double power = out.allocation.x(i) * beta(i);
    if (power > delta * delta) {
      ++out.active_streams;
      out.filter.col(i) *= std::sqrt(out.allocation.x(i));
    } else {
      out.filter.col(i) *= delta / std::sqrt(beta(i));
      padded = true;
    }
  }
  if (padded) out.filter *= std::sqrt(zeta) / out.filter.norm();
  return out;
}

double logtrace_cost(const CMat& x, const CMat& r, const CMat& q) {
  CMat a = x.adjoint() * r * x;
  a.diagonal().array() += 1.0;
  return (x.adjoint() * q * x).trace().real() - log2_det_hpd(a);
}

double allocation_cost(const RVec& x, const RVec& alpha) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += x(i) - std::log2(1.0 + alpha(i) * x(i));
  return s;
}

CMat max_sinr_update(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb, int node,
                     Side side) {
  check_dimensions(cfg, ch, fb);
  if (node < 0 || node >= cfg.num_users()) throw InvalidInput("max_sinr_update: node out of range");

  const bool forward = side == Side::kForward;
  const Index dim = forward ? cfg.rx_antennas : cfg.tx_antennas;
  const double power = forward ? cfg.rx_filter_power : cfg.tx_power;
  CMat total = CMat::Identity(dim, dim) * (forward ? cfg.noise_fwd[cfg.cell_of(node)] : cfg.noise_rev[node]);
  CMat direct;
  if (forward) {
    const int l = cfg.cell_of(node);
    for (int i = 0; i < cfg.num_users(); ++i) {
      const CMat eff = ch.at(l, i) * fb.tx[i];
      total.noalias() += eff * eff.adjoint();
      if (i == node) direct = eff;
    }
  } else {
    for (int rx = 0; rx < cfg.num_users(); ++rx) {
      const CMat eff = ch.at(cfg.cell_of(rx), node).adjoint() * fb.rx[rx];
      total.noalias() += eff * eff.adjoint();
      if (rx == node) direct = eff;
    }
  }
  total = hermitian_part(total);

  const double column_norm = std::sqrt(power / cfg.streams);
  CMat out(dim, cfg.streams);
  for (int m = 0; m < cfg.streams; ++m) {
    const CVec h = direct.col(m);
    const CMat others = hermitian_part(total - h * h.adjoint());
    Eigen::LLT<CMat> llt(others);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("max_sinr_update: stream interference covariance not positive definite");
    }
    CVec w = llt.solve(h);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw SingularProjection("max_sinr_update: stream " + std::to_string(m) + " has no signal");
    }
    out.col(m) = w * (column_norm / norm);
  }
  return out;
}

EigenBeamformer eigen_beamform(const CMat& h, int streams, double power) {
  if (streams < 1 || streams > std::min(h.rows(), h.cols())) {
    throw DimensionMismatch("eigen_beamform: streams must lie in [1, min(N, M)]");
  }
  Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMat v = svd.matrixV().leftCols(streams);
  CMat u = svd.matrixU().leftCols(streams);
  // Fix the phase on v, then carry the same rotation to u so u^H H v stays real positive.
  for (Index c = 0; c < streams; ++c) {
    for (Index i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, c));
      if (mag > 1e-12) {
        const cd rot = std::conj(v(i, c)) / mag;
        v.col(c) *= rot;
        u.col(c) *= rot;
        v(i, c) = cd(v(i, c).real(), 0.0);
        break;
      }
    }
  }
  return {v * std::sqrt(power / streams), u};
}

}  // namespace fbc
