// Acceptance gate: one pass/fail line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "fbcoord/chanmodel.hpp"
#include "fbcoord/coord.hpp"
#include "fbcoord/experiment.hpp"
#include "fbcoord/solvers.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fbc;

namespace {

constexpr double kBits = 1.0 / std::numbers::ln2;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_rate(const ExperimentResult& res, AlgorithmId algo, int t) {
  double sum = 0.0;
  int n = 0;
  for (const ResultRow& r : res.rows) {
    if (r.algo == algo && r.T == t) {
      sum += r.sum_rate_bits;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

ExperimentSpec iid_sweep(int L, int K, int M, int N, int d, double snr_db, int realizations) {
  ExperimentSpec spec;
  spec.network = NetworkConfig::uniform(L, K, M, N, d, 1.0);
  spec.channel = IidChannelSpec{{snr_db}};
  spec.realizations = realizations;
  spec.master_seed = 1;
  return spec;
}

Outcome gmrq_optimality() {
  Rng rng(101);
  double worst_residual = 0.0;
  int residual_fail = 0, search_fail = 0, searched = 0, degenerate = 0;
  for (int i = 0; i < 500; ++i) {
    const int n = 4 + i % 5;
    const int r = 1 + (i / 5) % 3;
    const CMat q = oracle::random_pd(rng, n, 0.05 + rng.uniform());
    const int signal_rank = 1 + static_cast<int>(rng.uniform() * n);
    const CMat rr = oracle::random_psd(rng, n, signal_rank);
    const CMat x = gmrq_max(rr, q, r);
    const RVec lambda = generalized_basis(rr, q).values.head(r);
    const double res = (rr * x - q * x * lambda.cast<cd>().asDiagonal()).norm() / rr.norm();
    worst_residual = std::max(worst_residual, res);
    if (res > 1e-8) ++residual_fail;
    if (i % 10 == 0) {
      ++searched;
      const CovariancePair cov{rr, q, Side::kForward, 0};
      const double best = oracle::best_random_gmrq(rng, rr, q, r, 10000);
      const double got = gmrq_value(x, cov);
      if (signal_rank < r) {
        // Every filter has a singular X^H R X here, so the maximum is zero and
        // both values must vanish on the scale of the pencil.
        ++degenerate;
        const double zero = 1e-10 * std::pow(oracle::generalized_eig(rr, q).values(0), r);
        if (got > zero || best > zero) ++search_fail;
      } else if (got < best * (1.0 - 1e-12)) {
        ++search_fail;
      }
    }
  }
  return {residual_fail == 0 && search_fail == 0,
          fmt("500 instances, max residual %.2e, %d residual failures; %d/%d random searches matched or beaten "
              "(%d with rank(R) < r, maximum zero)",
              worst_residual, residual_fail, searched - search_fail, searched, degenerate)};
}

Outcome waterfill_oracle() {
  Rng rng(102);
  double worst_gap = 0.0, worst_kkt = 0.0, worst_budget = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = 4 + i % 3;
    const int r = 1 + i % 3;
    const CMat q = oracle::random_pd(rng, n, 0.05) * (0.1 + rng.uniform());
    const CMat rr = oracle::random_psd(rng, n, 1 + i % n) * std::pow(10.0, 2.0 * rng.uniform() - 0.5);
    const double zeta = 0.2 + 3.0 * rng.uniform();
    const SolverOutput out = nh_waterfill(rr, q, r, zeta);
    const PowerAllocation& a = out.allocation;

    const double best = oracle::surface_minimum(rng, rr, q, r, zeta);
    const double cost = oracle::logtrace(out.filter, rr, q);
    worst_gap = std::max(worst_gap, std::abs(cost - best) / std::max(1.0, std::abs(best)));

    // Stationarity of the bit-valued allocation record.
    std::vector<int> active;
    for (int k = 0; k < r; ++k) {
      if (a.alpha(k) <= kAlphaFloor) continue;
      if (a.x(k) > 0.0) {
        active.push_back(k);
        worst_kkt = std::max(worst_kkt, std::abs(1.0 - kBits / (a.x(k) + 1.0 / a.alpha(k)) + a.mu * a.beta(k)));
      } else {
        worst_kkt = std::max(worst_kkt, (kBits * a.alpha(k) - 1.0) / a.beta(k) - a.mu);
      }
    }
    // Stationarity of the matrix problem on the streams that carry power.
    const auto [residual, mu] = oracle::stationarity(out.filter, rr, q, active);
    worst_kkt = std::max({worst_kkt, residual, std::abs(mu - a.mu) / std::max(1.0, std::abs(mu))});
    worst_budget = std::max(worst_budget, std::abs(a.beta.dot(a.x) - zeta) / zeta);
  }
  return {worst_gap <= 1e-6 && worst_kkt <= 1e-8 && worst_budget <= 1e-10,
          fmt("200 instances, max objective gap %.2e, max KKT residual %.2e, max budget residual %.2e", worst_gap,
              worst_kkt, worst_budget)};
}

Outcome dlt_monotone() {
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double snr = 30.0 * (i % 31) / 30.0;
    const NetworkConfig cfg = NetworkConfig::uniform(3, 2, 4, 4, 2, fixtures::snr_to_noise(snr));
    const ChannelSet ch = iid_channels(cfg, derive_seed(103, {static_cast<std::uint64_t>(i)}));
    RunOptions opts;
    opts.init = i % 2 ? InitPolicy::kRandom : InitPolicy::kEigen;
    const RunTrace trace = run(AlgorithmId::kMaxDlt, cfg, ch, 10, i, opts).trace;
    for (std::size_t t = 1; t < trace.entries.size(); ++t) {
      const double prev = trace.entries[t - 1].dlt_fwd;
      const double drop = (prev - trace.entries[t].dlt_fwd) / std::max(std::abs(prev), 1e-300);
      worst = std::max(worst, drop);
      if (drop > 1e-8) ++violations;
    }
  }
  return {violations == 0, fmt("500 runs x 10 iterations, %d violations, largest relative drop %.2e", violations,
                               worst)};
}

Outcome dlt_bound() {
  Rng rng(104);
  int checked = 0, limited = 0, exceptions = 0;
  double worst = -1e300;
  for (int i = 0; i < 1000; ++i) {
    const NetworkConfig cfg =
        NetworkConfig::uniform(2 + i % 2, 1 + i % 3, 4, 4, 1 + i % 2, std::pow(10.0, 2.0 * rng.uniform() - 1.5));
    const ChannelSet ch = iid_channels(cfg, derive_seed(104, {static_cast<std::uint64_t>(i)}));
    FilterBank fb = fixtures::random_bank(rng, cfg, false);
    for (CMat& u : fb.rx) u *= 0.3 + 3.0 * rng.uniform();
    for (int u = 0; u < cfg.num_users(); ++u) {
      const CovariancePair cov = fwd_covariances(cfg, ch, fb, u);
      ++checked;
      if (!interference_limited_check(fb.rx[u], cov)) continue;
      ++limited;
      const double slack = dlt_user_lb(fb.rx[u], cov) - user_rate(fb.rx[u], cov);
      worst = std::max(worst, slack);
      if (slack > 1e-9) ++exceptions;
    }
  }
  return {exceptions == 0 && limited > 0,
          fmt("%d user instances, %d interference-limited, %d exceptions, max(lb - rate) %.3g", checked, limited,
              exceptions, worst)};
}

Outcome forward_reverse() {
  Rng rng(105);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double noise = std::pow(10.0, 3.0 * rng.uniform() - 2.0);
    const double power = 0.5 + rng.uniform();
    const NetworkConfig cfg = NetworkConfig::uniform(2 + i % 3, 1 + i % 2, 2 + i % 3, 2 + (i / 3) % 3, 1 + i % 2,
                                                     noise, {}, power, power);
    const ChannelSet ch = iid_channels(cfg, derive_seed(105, {static_cast<std::uint64_t>(i)}));
    const FilterBank fb = fixtures::random_bank(rng, cfg);
    const double fwd = dlt_objective(cfg, ch, fb, Side::kForward);
    const double rev = dlt_objective(cfg, ch, fb, Side::kReverse);
    worst = std::max(worst, std::abs(fwd - rev) / std::max(1.0, std::abs(fwd)));
  }
  return {worst <= 1e-9, fmt("1000 filter banks, max relative deviation %.2e", worst)};
}

Outcome aims_equals_max_sinr() {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const NetworkConfig cfg = NetworkConfig::uniform(2 + i % 2, 1 + (i / 2) % 2, 2 + i % 3, 2 + (i / 3) % 3, 1,
                                                     fixtures::snr_to_noise(5.0 + i % 20));
    const ChannelSet ch = iid_channels(cfg, derive_seed(106, {static_cast<std::uint64_t>(i)}));
    std::vector<FilterBank> a, b;
    RunOptions opts;
    opts.init = i % 2 ? InitPolicy::kRandom : InitPolicy::kEigen;
    opts.on_phase = [&](int, Phase, const FilterBank& fb) { a.push_back(fb); };
    run(AlgorithmId::kAims, cfg, ch, 3, i, opts);
    opts.on_phase = [&](int, Phase, const FilterBank& fb) { b.push_back(fb); };
    run(AlgorithmId::kMaxSinr, cfg, ch, 3, i, opts);
    for (std::size_t p = 0; p < a.size(); ++p) {
      for (int u = 0; u < cfg.num_users(); ++u) {
        worst = std::max(worst, oracle::cosine_distance(a[p].rx[u], b[p].rx[u]));
        worst = std::max(worst, oracle::cosine_distance(a[p].tx[u], b[p].tx[u]));
      }
    }
  }
  return {worst <= 1e-8, fmt("200 instances x 6 phases, max cosine distance %.2e", worst)};
}

Outcome fast_convergence() {
  ExperimentSpec spec = iid_sweep(2, 2, 4, 4, 2, 20.0, 500);
  spec.algos = {AlgorithmId::kMaxDlt};
  spec.iteration_list = {2, 8};
  const ExperimentResult res = run_experiment(spec, 1);
  const double t2 = mean_rate(res, AlgorithmId::kMaxDlt, 2);
  const double t8 = mean_rate(res, AlgorithmId::kMaxDlt, 8);
  return {res.failures.empty() && t2 >= 0.90 * t8,
          fmt("max-DLT mean %.3f bits at T=2 vs %.3f at T=8, ratio %.4f (need >= 0.90)", t2, t8, t2 / t8)};
}

Outcome interference_limited_ordering() {
  ExperimentSpec spec = iid_sweep(3, 1, 4, 4, 2, 25.0, 500);
  spec.algos = {AlgorithmId::kMaxDlt, AlgorithmId::kMaxSinr, AlgorithmId::kUncoordinated};
  spec.iteration_list = {4};
  const ExperimentResult res = run_experiment(spec, 1);
  const double dlt = mean_rate(res, AlgorithmId::kMaxDlt, 4);
  const double sinr = mean_rate(res, AlgorithmId::kMaxSinr, 4);
  const double unc = mean_rate(res, AlgorithmId::kUncoordinated, 4);
  return {res.failures.empty() && dlt >= 1.15 * sinr && sinr >= 1.3 * unc,
          fmt("means: max-DLT %.3f, max-SINR %.3f, uncoordinated %.3f; max-DLT/max-SINR %.4f (need >= 1.15), "
              "max-SINR/uncoordinated %.4f (need >= 1.3)",
              dlt, sinr, unc, dlt / sinr, sinr / unc)};
}

Outcome dense_gain() {
  ExperimentSpec spec;
  spec.network = NetworkConfig::uniform(9, 8, 4, 8, 2, 1.0);
  spec.channel = DenseChannelSpec{DeploymentSpec{}, 19.0};
  spec.algos = {AlgorithmId::kMaxDlt, AlgorithmId::kUncoordinated};
  spec.iteration_list = {3};
  spec.realizations = 100;
  spec.master_seed = 1;
  const ExperimentResult res = run_experiment(spec, 1);
  const double dlt = mean_rate(res, AlgorithmId::kMaxDlt, 3);
  const double unc = mean_rate(res, AlgorithmId::kUncoordinated, 3);
  return {res.failures.empty() && dlt >= 1.8 * unc,
          fmt("means: max-DLT %.3f, uncoordinated %.3f, ratio %.4f (need >= 1.8)", dlt, unc, dlt / unc)};
}

Outcome overhead_table() {
  struct Row {
    OverheadFamily family;
    std::int64_t T, K, L, M, N, d, I, expected;
  };
  using F = OverheadFamily;
  const std::vector<Row> rows = {
      {F::kProposed, 4, 1, 3, 4, 4, 2, 0, 48},      {F::kProposed, 1, 1, 1, 1, 1, 1, 0, 2},
      {F::kProposed, 2, 2, 2, 4, 4, 2, 0, 32},      {F::kProposed, 3, 8, 9, 4, 8, 2, 0, 864},
      {F::kProposed, 8, 2, 2, 4, 4, 2, 0, 128},     {F::kProposed, 2, 5, 5, 4, 32, 2, 0, 200},
      {F::kProposed, 4, 5, 5, 32, 4, 2, 0, 400},    {F::kProposed, 10, 4, 7, 6, 6, 3, 0, 1680},
      {F::kWmmse, 2, 2, 2, 4, 4, 2, 0, 64},         {F::kWmmse, 4, 1, 3, 4, 4, 2, 0, 96},
      {F::kWmmse, 2, 5, 5, 32, 4, 2, 0, 1800},      {F::kWmmse, 3, 8, 9, 4, 8, 2, 0, 1728},
      {F::kWmmse, 1, 1, 1, 1, 1, 1, 0, 3},          {F::kWmmse, 5, 2, 3, 6, 2, 1, 0, 240},
      {F::kCcpWmmse, 1, 2, 2, 4, 4, 2, 2, 48},      {F::kCcpWmmse, 2, 2, 2, 4, 4, 2, 1, 64},
      {F::kCcpWmmse, 1, 2, 2, 4, 4, 2, 50, 816},    {F::kCcpWmmse, 3, 1, 3, 4, 4, 2, 2, 144},
      {F::kCcpWmmse, 2, 8, 9, 4, 8, 2, 1, 5760},    {F::kCcpWmmse, 1, 1, 1, 2, 3, 1, 5, 15},
  };
  int mismatches = 0;
  for (const Row& r : rows) {
    if (overhead(r.family, r.T, r.K, r.L, r.M, r.N, r.d, r.I) != r.expected) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu tabulated tuples, %d mismatches", rows.size(), mismatches)};
}

Outcome non_orthonormality() {
  Rng rng(107);
  const NetworkConfig cfg = NetworkConfig::uniform(3, 1, 4, 4, 2, 0.1);
  int above = 0;
  for (int i = 0; i < 1000; ++i) {
    const ChannelSet ch = iid_channels(cfg, derive_seed(107, {static_cast<std::uint64_t>(i)}));
    const FilterBank fb = fixtures::random_bank(rng, cfg);
    const CovariancePair cov = fwd_covariances(cfg, ch, fb, 0);
    const CMat u = gmrq_max(cov.signal, cov.interference, cfg.streams);
    const CMat gram = u.adjoint() * u;
    const double scale = gram.trace().real() / cfg.streams;
    const double dev = (gram - scale * CMat::Identity(cfg.streams, cfg.streams)).norm() / gram.norm();
    if (dev > 0.01) ++above;
  }
  return {above >= 990, fmt("deviation > 0.01 in %d of 1000 draws (need >= 990)", above)};
}

Outcome rank_adaptation() {
  struct Case {
    std::vector<double> values;
    int max_rank, expected;
  };
  const std::vector<Case> table = {
      {{2.5, 1.2, 0.7, 0.1}, 4, 2}, {{0.9, 0.5, 0.2, 0.1}, 4, 1}, {{3.0, 2.5, 2.0, 1.5}, 2, 2},
      {{1.0, 1.0, 1.0}, 3, 3},      {{1.0, 0.999999}, 2, 1},       {{5.0}, 1, 1},
      {{0.0, 0.0}, 2, 1},           {{7.0, 6.0, 5.0, 4.0}, 3, 3}, {{1.5, 1.0, 0.99}, 3, 2},
  };
  int table_fail = 0;
  for (const Case& c : table) {
    RVec v = Eigen::Map<const RVec>(c.values.data(), static_cast<Index>(c.values.size()));
    if (rank_from_eigenvalues(v, c.max_rank) != c.expected) ++table_fail;
    CMat r = v.cast<cd>().asDiagonal();
    if (rank_adapt(r, CMat::Identity(v.size(), v.size()), c.max_rank) != c.expected) ++table_fail;
  }
  int pair_fail = 0, reduced = 0;
  for (int i = 0; i < 100; ++i) {
    const NetworkConfig cfg = NetworkConfig::uniform(3, 2, 4, 4, 2, fixtures::snr_to_noise(30.0 * (i % 11) / 10.0));
    const ChannelSet ch = iid_channels(cfg, derive_seed(108, {static_cast<std::uint64_t>(i)}));
    const RunTrace trace = run(AlgorithmId::kAimsRa, cfg, ch, 5, i).trace;
    for (const TraceEntry& e : trace.entries) {
      if (e.active_ranks != e.rx_ranks) ++pair_fail;
      for (int rank : e.active_ranks) reduced += rank < cfg.streams;
    }
  }
  return {table_fail == 0 && pair_fail == 0,
          fmt("%zu table cases (%d mismatches); 100 runs, %d unpaired trace entries, %d reduced-rank links seen",
              table.size(), table_fail, pair_fail, reduced)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"GMRQ optimality suite", gmrq_optimality},
      {"Waterfilling oracle equivalence", waterfill_oracle},
      {"max-DLT monotone convergence", dlt_monotone},
      {"DLT bound validity", dlt_bound},
      {"Forward/reverse objective identity", forward_reverse},
      {"AIMS equals max-SINR at d = 1", aims_equals_max_sinr},
      {"Fast convergence of max-DLT", fast_convergence},
      {"Interference-limited ordering", interference_limited_ordering},
      {"Dense-deployment coordination gain", dense_gain},
      {"Overhead arithmetic", overhead_table},
      {"Non-orthonormal GMRQ filters", non_orthonormality},
      {"Rank adaptation", rank_adaptation},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  [%2d] %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
