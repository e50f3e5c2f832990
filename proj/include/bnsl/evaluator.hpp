#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bnsl/network.hpp"
#include "bnsl/rng.hpp"

namespace bnsl {

// Flattened, cache-friendly form of a network for the inner loops: ancestral
// sampling and joint log-probability. Partition parameters are densified, so
// compilation requires every family's partition count to be materializable.
class CompiledNetwork {
 public:
  explicit CompiledNetwork(const BayesianNetwork& net) {
    validate_network(net);
    const int n = net.vars.size();
    order_ = topological_order(net.dag);
    fams_.resize(n);
    cards_.resize(n);
    for (int v = 0; v < n; ++v) {
      cards_[v] = net.vars.cardinality(v);
      Family& f = fams_[v];
      f.parents = net.dag.parents(v);
      f.card = cards_[v];
      PartitionIndexer indexer(net.vars, f.parents, net.locals[v]);
      const std::uint64_t parts = indexer.count();
      if (parts > (std::uint64_t(1) << 24))
        throw StateSpaceTooLargeError(
            "family too large to densify: " + net.vars.name(v));
      f.partitions = parts;
      f.indexer.push_back(indexer);
      f.probs.resize(parts * f.card);
      f.log2probs.resize(parts * f.card);
      f.cdf.resize(parts * f.card);
      for (std::uint64_t pid = 0; pid < parts; ++pid) {
        const auto& dist = net.params[v].dist(pid);
        double cum = 0.0;
        for (int x = 0; x < f.card; ++x) {
          const double p = dist[x];
          f.probs[pid * f.card + x] = p;
          f.log2probs[pid * f.card + x] =
              p > 0.0 ? std::log2(p)
                      : -std::numeric_limits<double>::infinity();
          cum += p;
          f.cdf[pid * f.card + x] = cum;
        }
      }
    }
  }

  int num_vars() const { return static_cast<int>(cards_.size()); }
  const std::vector<int>& order() const { return order_; }

  // Draws one full row. Nodes are visited in the canonical topological
  // order and each consumes exactly one uniform draw, so the stream of
  // (network, seed) is reproducible bit for bit.
  void sample_row(SplitMix64& rng, std::span<std::uint8_t> out) const {
    for (int v : order_) {
      const Family& f = fams_[v];
      const std::uint64_t pid = f.parents.empty()
                                    ? 0
                                    : f.indexer.front().from_row(out);
      const double* cdf = f.cdf.data() + pid * f.card;
      const double* probs = f.probs.data() + pid * f.card;
      const double u = rng.next_unit();
      int pick = -1;
      for (int x = 0; x < f.card; ++x)
        if (u < cdf[x] && probs[x] > 0.0) {
          pick = x;
          break;
        }
      if (pick < 0)  // guard against rounding at the top of the cdf
        for (int x = f.card - 1; x >= 0; --x)
          if (probs[x] > 0.0) {
            pick = x;
            break;
          }
      out[v] = static_cast<std::uint8_t>(pick);
    }
  }

  double log2_joint(std::span<const std::uint8_t> row) const {
    double bits = 0.0;
    for (int v = 0; v < num_vars(); ++v) {
      const Family& f = fams_[v];
      const std::uint64_t pid = f.parents.empty()
                                    ? 0
                                    : f.indexer.front().from_row(row);
      const double lp = f.log2probs[pid * f.card + row[v]];
      if (lp == -std::numeric_limits<double>::infinity())
        return -std::numeric_limits<double>::infinity();
      bits += lp;
    }
    return bits;
  }

 private:
  struct Family {
    std::vector<int> parents;
    int card = 0;
    std::uint64_t partitions = 0;
    // single-element vector: PartitionIndexer has no default constructor
    std::vector<PartitionIndexer> indexer;
    std::vector<double> probs, log2probs, cdf;
  };

  std::vector<int> order_;
  std::vector<int> cards_;
  std::vector<Family> fams_;
};

}  // namespace bnsl
