#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "spinobs/graph.hpp"
#include "spinobs/model.hpp"

namespace spinobs {

struct EnumOptions {
    // Default budget covers two-spin <= 24 vertices and q=3 Potts <= 15.
    uint64_t max_configs = uint64_t(1) << 25;
    int threads = 1;
};

struct ConfigStatsResult {
    int size;   // |sigma| (two-spin; 0 for Potts)
    int mono;   // monochromatic edges (Potts; 0 for two-spin)
    int m0, m1; // (0,0)- and (1,1)-edges (two-spin)
    Rat weight;
};

ConfigStatsResult config_stats(const Multigraph& g, const SpinConfig& sigma, const ModelParams& model);

// Exact partition function. Dispatches to a tree DP when the graph is a
// forest (no relational pins); otherwise exhaustive enumeration, bucketed by
// integer feature vectors so weights are evaluated once per bucket.
Rat partition_function(const Multigraph& g, const ModelParams& model, const EnumOptions& opts = {});

// Z restricted to configurations satisfying `pins`.
Rat restricted_partition_function(const Multigraph& g, const ModelParams& model, const PinSet& pins,
                                  const EnumOptions& opts = {});

Rat gibbs_probability(const Multigraph& g, const ModelParams& model, const PinSet& event,
                      const EnumOptions& opts = {});

// Potts: E[m_F | pins] (obs ignored). Two-spin: E[a|sigma_F| + b m0_F + c m1_F | pins].
// F defaults to the whole graph.
Rat observable_expectation(const Multigraph& g, const ModelParams& model,
                           const VertexEdgeObservable& obs, const PinSet& pins = {},
                           const std::optional<SubgraphRef>& F = std::nullopt,
                           const EnumOptions& opts = {});

// Hard-core cross-check: number of independent sets weighted by lambda^size,
// computed by direct subset enumeration (independent of the generic path).
Rat independent_set_polynomial(const Multigraph& g, const Rat& lambda, const EnumOptions& opts = {});

// Tree fast path, exposed for agreement tests. Requires a forest.
Rat partition_function_tree(const Multigraph& g, const ModelParams& model, const PinSet& pins = {});

// Series-parallel fast path: reduces the graph by pendant folding, series
// contraction and parallel merging; returns nullopt when the graph is not
// reducible this way (the caller falls back to enumeration). Two-spin unary
// pins fold into vertex weights; Potts pins are not supported here.
std::optional<Rat> partition_function_sp(const Multigraph& g, const ModelParams& model,
                                         const PinSet& pins = {});

// m(sigma)-histogram of a Potts graph: counts[k] = #configs with k
// monochromatic edges. Grid oracles reuse this to answer many beta values
// from one enumeration sweep.
std::vector<Int> potts_mono_histogram(const Multigraph& g, int q, const EnumOptions& opts = {});
// Two-spin (size, m0, m1) histogram as a sorted map.
std::map<std::array<int, 3>, Int> twospin_histogram(const Multigraph& g, const EnumOptions& opts = {});

}  // namespace spinobs
