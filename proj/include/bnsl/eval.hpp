#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "bnsl/evaluator.hpp"
#include "bnsl/network.hpp"
#include "bnsl/rng.hpp"
#include "bnsl/sampling.hpp"
#include "bnsl/search.hpp"

namespace bnsl {

// Evaluation-time smoothing: mix every stored parameter vector with the
// uniform distribution so a learned network assigns no zero probabilities.
// Never applied to the data-generating side of a comparison and never part
// of learning.
inline BayesianNetwork smooth_network(const BayesianNetwork& net,
                                      double eps) {
  BayesianNetwork out = net;
  for (int v = 0; v < net.vars.size(); ++v) {
    const int card = net.vars.cardinality(v);
    CptParams smoothed(card);
    for (const auto& [pid, dist] : net.params[v].entries()) {
      std::vector<double> d(card);
      for (int x = 0; x < card; ++x)
        d[x] = (1.0 - eps) * dist[x] + eps / card;
      smoothed.set(pid, std::move(d));
    }
    out.params[v] = std::move(smoothed);
  }
  return out;
}

struct KlEstimate {
  double kl = 0.0;
  double stderr_kl = 0.0;
  bool monte_carlo = false;
};

// Exact KL(P || Q) in bits by enumerating the joint state space.
inline KlEstimate kl_exact(const BayesianNetwork& p, const BayesianNetwork& q,
                           std::uint64_t state_cap = std::uint64_t(1) << 22) {
  if (!(p.vars == q.vars))
    throw SchemaMismatchError("KL of networks over different variables");
  if (joint_state_count(p.vars) > static_cast<double>(state_cap))
    throw StateSpaceTooLargeError("joint state space exceeds the cap");
  CompiledNetwork cp(p), cq(q);
  const int n = p.vars.size();
  std::vector<std::uint8_t> u(n, 0);
  double kl = 0.0;
  bool done = false;
  while (!done) {
    const double lp = cp.log2_joint(u);
    if (lp != -std::numeric_limits<double>::infinity()) {
      const double lq = cq.log2_joint(u);
      if (lq == -std::numeric_limits<double>::infinity())
        return {std::numeric_limits<double>::infinity(), 0.0, false};
      kl += std::exp2(lp) * (lp - lq);
    }
    done = true;
    for (int v = 0; v < n; ++v) {
      if (++u[v] < p.vars.cardinality(v)) {
        done = false;
        break;
      }
      u[v] = 0;
    }
  }
  return {kl, 0.0, false};
}

// Monte Carlo KL(P || Q): mean of log2 P(u) - log2 Q(u) over samples drawn
// from P, with the standard error of that mean. A sample with Q(u) = 0
// certifies infinite divergence and aborts.
inline KlEstimate kl_monte_carlo(const BayesianNetwork& p,
                                 const BayesianNetwork& q,
                                 std::int64_t samples, std::uint64_t seed) {
  if (!(p.vars == q.vars))
    throw SchemaMismatchError("KL of networks over different variables");
  if (samples < 1) throw ValidationError("need at least one sample");
  CompiledNetwork cp(p), cq(q);
  SplitMix64 rng(seed);
  std::vector<std::uint8_t> u(p.vars.size());
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t k = 1; k <= samples; ++k) {
    cp.sample_row(rng, u);
    const double lq = cq.log2_joint(u);
    if (lq == -std::numeric_limits<double>::infinity())
      throw InfiniteSampleError(
          "sampled event has zero probability under the candidate");
    const double diff = cp.log2_joint(u) - lq;
    const double d1 = diff - mean;
    mean += d1 / static_cast<double>(k);
    m2 += d1 * (diff - mean);
  }
  KlEstimate est;
  est.kl = mean;
  est.monte_carlo = true;
  if (samples > 1)
    est.stderr_kl = std::sqrt(
        m2 / (static_cast<double>(samples - 1) * static_cast<double>(samples)));
  return est;
}

struct EvalRecord {
  std::int64_t size = 0;
  CptKind mode = CptKind::Table;
  int rep = 0;
  std::uint64_t seed = 0;
  double kl = 0.0;
  double kl_stderr = 0.0;
  bool monte_carlo = false;
  double scaled_error = 0.0;  // kl * N / log2 N
  std::int64_t actual_params = 0;
  std::int64_t tabular_complexity = 0;
  double wall_seconds = 0.0;
};

struct CurveOptions {
  SearchConfig search;  // mode is overridden per cell
  double smoothing_eps = 1e-4;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t exact_state_cap = std::uint64_t(1) << 22;
  // Worker threads for curve cells. Cells are independent and their seeds
  // are derived from the cell coordinates, so any thread count produces the
  // identical records in the identical order.
  int threads = 1;
};

namespace detail {

inline int mode_index(CptKind mode) { return static_cast<int>(mode); }

inline KlEstimate divergence_from(const BayesianNetwork& target,
                                  const BayesianNetwork& learned,
                                  const CurveOptions& opts,
                                  std::uint64_t kl_seed) {
  if (joint_state_count(target.vars) <=
      static_cast<double>(opts.exact_state_cap))
    return kl_exact(target, learned, opts.exact_state_cap);
  return kl_monte_carlo(target, learned, opts.mc_samples, kl_seed);
}

inline EvalRecord evaluate_cell(const BayesianNetwork& target,
                                const BayesianNetwork& learned,
                                const CurveOptions& opts, std::int64_t size,
                                CptKind mode, int rep, std::uint64_t seed,
                                double wall_seconds) {
  EvalRecord rec;
  rec.size = size;
  rec.mode = mode;
  rec.rep = rep;
  rec.seed = seed;
  const BayesianNetwork q = smooth_network(learned, opts.smoothing_eps);
  const KlEstimate est =
      divergence_from(target, q, opts, derive_seed(seed, 0x4B42));
  rec.kl = est.kl;
  rec.kl_stderr = est.stderr_kl;
  rec.monte_carlo = est.monte_carlo;
  rec.scaled_error = est.kl * static_cast<double>(size) /
                     std::log2(static_cast<double>(size));
  rec.actual_params = actual_param_count(learned);
  rec.tabular_complexity = tabular_complexity(learned.dag, learned.vars);
  rec.wall_seconds = wall_seconds;
  return rec;
}

}  // namespace detail

// For each (size, repetition, mode) cell: sample a training set from the
// target with a seed derived from (master, size, rep, mode), learn a network,
// smooth it, and measure KL from the target (exact when the joint state
// space is small enough, Monte Carlo otherwise). Identical cell coordinates
// always reproduce the identical record.
inline std::vector<EvalRecord> learning_curve(
    const BayesianNetwork& target, const std::vector<std::int64_t>& sizes,
    int reps, const std::vector<CptKind>& modes, std::uint64_t master_seed,
    const CurveOptions& opts = {}) {
  validate_network(target);
  struct Cell {
    std::int64_t size;
    int rep;
    CptKind mode;
  };
  std::vector<Cell> cells;
  for (const std::int64_t size : sizes)
    for (int rep = 0; rep < reps; ++rep)
      for (const CptKind mode : modes) cells.push_back({size, rep, mode});

  std::vector<EvalRecord> records(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell& cell = cells[i];
    const std::uint64_t seed = derive_seed(
        master_seed, static_cast<std::uint64_t>(cell.size),
        static_cast<std::uint64_t>(cell.rep),
        static_cast<std::uint64_t>(detail::mode_index(cell.mode)));
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = ancestral_sample(target, cell.size, seed);
    SearchConfig cfg = opts.search;
    cfg.mode = cell.mode;
    const SearchResult res = hill_climb(ds, cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    records[i] = detail::evaluate_cell(target, res.network, opts, cell.size,
                                       cell.mode, cell.rep, seed, wall);
  };

  const std::size_t workers = std::min<std::size_t>(
      cells.size(), opts.threads > 1 ? static_cast<std::size_t>(opts.threads)
                                     : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    // Striped ownership: worker t evaluates cells t, t+W, ... into their own
    // slots, so the result is independent of scheduling.
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < cells.size(); i += workers) run_cell(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return records;
}

// Interpolated quantile (linear between order statistics).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of nothing");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

struct CurveAggregate {
  std::int64_t size = 0;
  CptKind mode = CptKind::Table;
  int count = 0;
  double scaled_median = 0.0;
  double scaled_q1 = 0.0;
  double scaled_q3 = 0.0;
  double scaled_mean = 0.0;
  double kl_median = 0.0;
  double kl_mean = 0.0;
  double params_median = 0.0;
  double complexity_median = 0.0;
};

// Grouped summaries in (size, mode) order of first appearance.
inline std::vector<CurveAggregate> aggregate_curve(
    const std::vector<EvalRecord>& records) {
  std::vector<CurveAggregate> out;
  std::vector<std::pair<std::int64_t, CptKind>> keys;
  for (const auto& r : records) {
    const std::pair<std::int64_t, CptKind> key{r.size, r.mode};
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      keys.push_back(key);
  }
  for (const auto& [size, mode] : keys) {
    std::vector<double> scaled, kls, params, complexity;
    for (const auto& r : records)
      if (r.size == size && r.mode == mode) {
        scaled.push_back(r.scaled_error);
        kls.push_back(r.kl);
        params.push_back(static_cast<double>(r.actual_params));
        complexity.push_back(static_cast<double>(r.tabular_complexity));
      }
    CurveAggregate agg;
    agg.size = size;
    agg.mode = mode;
    agg.count = static_cast<int>(scaled.size());
    agg.scaled_median = median(scaled);
    agg.scaled_q1 = quantile(scaled, 0.25);
    agg.scaled_q3 = quantile(scaled, 0.75);
    double sum = 0.0;
    for (double s : scaled) sum += s;
    agg.scaled_mean = sum / static_cast<double>(scaled.size());
    agg.kl_median = median(kls);
    sum = 0.0;
    for (double k : kls) sum += k;
    agg.kl_mean = sum / static_cast<double>(kls.size());
    agg.params_median = median(params);
    agg.complexity_median = median(complexity);
    out.push_back(agg);
  }
  return out;
}

// Relearn every family of a fixed DAG in the given representation.
inline BayesianNetwork refit_network(const Dataset& ds, const Dag& dag,
                                     CptKind mode) {
  BayesianNetwork net;
  net.vars = ds.vars;
  net.dag = dag;
  for (int v = 0; v < ds.vars.size(); ++v) {
    FittedFamily fam = learn_local(ds, v, dag.parents(v), mode);
    net.locals.push_back(std::move(fam.ls));
    net.params.push_back(std::move(fam.params));
  }
  return net;
}

struct MixedRecord {
  int rep = 0;
  CptKind structure_mode = CptKind::Table;
  CptKind param_mode = CptKind::Table;
  std::uint64_t seed = 0;
  double kl = 0.0;
  double kl_stderr = 0.0;
  bool monte_carlo = false;
  double scaled_error = 0.0;
  std::int64_t actual_params = 0;
  std::int64_t tabular_complexity = 0;
};

struct MixedResult {
  std::vector<CptKind> modes;
  std::int64_t size = 0;
  // mean_kl[row][col]: structure learned with modes[row], locals and
  // parameters relearned with modes[col] on the frozen DAG.
  std::vector<std::vector<double>> mean_kl;
  std::vector<MixedRecord> records;
};

// Separates the benefit of structure-during-search from parameter
// representation: for each row mode, learn a network end to end (sharing the
// learning-curve cell seed), then refit its frozen DAG under each column
// mode and measure KL for every combination.
inline MixedResult mixed_experiment(const BayesianNetwork& target,
                                    std::int64_t size, int reps,
                                    const std::vector<CptKind>& modes,
                                    std::uint64_t master_seed,
                                    const CurveOptions& opts = {}) {
  validate_network(target);
  MixedResult result;
  result.modes = modes;
  result.size = size;
  const std::size_t k = modes.size();
  result.mean_kl.assign(k, std::vector<double>(k, 0.0));
  for (int rep = 0; rep < reps; ++rep) {
    for (std::size_t r = 0; r < k; ++r) {
      const std::uint64_t seed = derive_seed(
          master_seed, static_cast<std::uint64_t>(size),
          static_cast<std::uint64_t>(rep),
          static_cast<std::uint64_t>(detail::mode_index(modes[r])));
      const Dataset ds = ancestral_sample(target, size, seed);
      SearchConfig cfg = opts.search;
      cfg.mode = modes[r];
      const SearchResult res = hill_climb(ds, cfg);
      for (std::size_t c = 0; c < k; ++c) {
        const BayesianNetwork refit =
            refit_network(ds, res.network.dag, modes[c]);
        const BayesianNetwork q = smooth_network(refit, opts.smoothing_eps);
        // Columns share the row's KL sampling seed: estimates are paired
        // across parameter modes, and the diagonal reproduces the plain
        // learning-curve cell exactly.
        const KlEstimate est = detail::divergence_from(
            target, q, opts, derive_seed(seed, 0x4B42));
        MixedRecord rec;
        rec.rep = rep;
        rec.structure_mode = modes[r];
        rec.param_mode = modes[c];
        rec.seed = seed;
        rec.kl = est.kl;
        rec.kl_stderr = est.stderr_kl;
        rec.monte_carlo = est.monte_carlo;
        rec.scaled_error = est.kl * static_cast<double>(size) /
                           std::log2(static_cast<double>(size));
        rec.actual_params = actual_param_count(refit);
        rec.tabular_complexity = tabular_complexity(refit.dag, refit.vars);
        result.records.push_back(rec);
        result.mean_kl[r][c] += est.kl / static_cast<double>(reps);
      }
    }
  }
  return result;
}

}  // namespace bnsl
