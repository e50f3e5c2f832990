#pragma once

#include <cstdint>

#include "bnsl/dataset.hpp"
#include "bnsl/evaluator.hpp"
#include "bnsl/network.hpp"
#include "bnsl/rng.hpp"

namespace bnsl {

// Forward sampling: rows are drawn independently; within a row nodes are
// visited in the canonical topological order, each consuming one uniform
// draw and picking the smallest value whose cdf exceeds it. The same
// (network, n, seed) triple always yields the identical dataset.
inline Dataset ancestral_sample(const BayesianNetwork& net, std::int64_t n,
                                std::uint64_t seed) {
  if (n < 0) throw ValidationError("sample size must be nonnegative");
  CompiledNetwork compiled(net);
  SplitMix64 rng(seed);
  Dataset ds;
  ds.vars = net.vars;
  ds.num_rows = n;
  const int width = net.vars.size();
  ds.cells.resize(static_cast<std::size_t>(n) * width);
  for (std::int64_t r = 0; r < n; ++r)
    compiled.sample_row(rng, {ds.cells.data() + r * width,
                              static_cast<std::size_t>(width)});
  return ds;
}

}  // namespace bnsl
