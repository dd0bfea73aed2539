#pragma once

/**
 * @file solvers.hpp
 * @brief Per-node optimization kernels used inside one forward or backward
 * phase: GMRQ maximization, rank adaptation, non-homogeneous waterfilling,
 * per-stream max-SINR, and SVD eigen-beamforming for the uncoordinated case.
 */

#include "fbcoord/matrixkit.hpp"
#include "fbcoord/netmodel.hpp"

namespace fbc {

/// Quasi-SINRs at or below this are treated as exactly zero.
inline constexpr double kAlphaFloor = 1e-12;
/// Switched-off streams keep a filter column of norm kStreamEps * sqrt(zeta / r).
inline constexpr double kStreamEps = 1e-6;

/// Generalized eigenbasis of the pencil (R, Q), largest eigenvalue first.
struct GeneralizedBasis {
  CholeskyFactor factor;
  RVec values;   // eigenvalues of L^{-1} R L^{-H}
  CMat whitened_vectors;  // Psi, orthonormal
  CMat filters;  // L^{-H} Psi, satisfies R X = Q X diag(values)
};

GeneralizedBasis generalized_basis(const CMat& r, const CMat& q);

/// Maximizer of |X^H R X| / |X^H Q X| over n x rank matrices: L^{-H} times the
/// top eigenvectors of the whitened signal covariance.
CMat gmrq_max(const CMat& r, const CMat& q, int rank);

/// Number of whitened eigenvalues >= 1, clamped to [1, max_rank].
int rank_adapt(const CMat& r, const CMat& q, int max_rank);
int rank_from_eigenvalues(const RVec& descending_values, int max_rank);

struct PowerAllocation {
  RVec x;      // stream powers
  double mu = 0.0;
  RVec alpha;  // quasi-SINR per stream
  RVec beta;   // power cost per stream
  double zeta = 0.0;
};

/**
 * Closed-form allocation x_i = (1/(1 + mu beta_i) - 1/alpha_i)^+ with mu the
 * root of g(mu) = sum_i beta_i x_i(mu) - zeta on ]-1/max beta, inf[.
 *
 * Streams with alpha_i <= kAlphaFloor carry no log term. If every stream is
 * such (or the log streams cannot absorb the budget even at the left end of
 * the interval), the remainder goes to the zero-quasi-SINR stream of largest
 * beta and mu sits on the boundary -1/max beta.
 */
PowerAllocation power_alloc(const RVec& alpha, const RVec& beta, double zeta);

struct SolverOutput {
  CMat filter;
  PowerAllocation allocation;
  int active_streams = 0;
};

/**
 * Minimizes tr(X^H Q X) - log2|I + X^H R X| subject to ||X||_F^2 = zeta over
 * n x rank matrices. For a multiplier mu > -lambda_min(Q) the penalized problem
 * with Q + mu I is solved by unit-cost waterfilling on the pencil (R, Q + mu I);
 * mu is bisected until the budget holds. When Q is a multiple of I this is
 * X = L^{-H} Psi diag(sqrt(x)) with Psi the top eigenvectors of L^{-1} R L^{-H}.
 *
 * The allocation record uses Q-normalized stream directions d_i, on which
 * x minimizes sum_i x_i - log2(1 + alpha_i x_i) subject to sum_i beta_i x_i =
 * zeta with alpha_i = d_i^H R d_i and beta_i = ||d_i||^2, at multiplier mu.
 * If no stream can absorb the budget the (R, Q) eigenbasis is used with
 * power_alloc. Switched-off streams keep a column of norm
 * kStreamEps * sqrt(zeta / rank) and the filter is rescaled onto the budget.
 */
SolverOutput nh_waterfill(const CMat& r, const CMat& q, int rank, double zeta);

/// tr(X^H Q X) - log2|I + X^H R X|
double logtrace_cost(const CMat& x, const CMat& r, const CMat& q);

/// sum_i x_i - log2(1 + alpha_i x_i)
double allocation_cost(const RVec& x, const RVec& alpha);

/// Stream-by-stream max-SINR filter for one node, columns scaled to sqrt(P/d).
CMat max_sinr_update(const NetworkConfig& cfg, const ChannelSet& ch, const FilterBank& fb, int node,
                     Side side);

struct EigenBeamformer {
  CMat tx;  // M x d, right singular vectors scaled sqrt(P/d)
  CMat rx;  // N x d, left singular vectors
};

EigenBeamformer eigen_beamform(const CMat& h, int streams, double power);

}  // namespace fbc
