#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spinobs/graph.hpp"
#include "spinobs/model.hpp"
#include "spinobs/rng.hpp"

namespace spinobs {

// Single-site heat-bath (Glauber) dynamics, reversible for the Gibbs measure.
// Sampling is done in exact integer arithmetic against a 64-bit uniform draw,
// so trajectories are bit-reproducible across platforms.

struct ChainState {
    SpinConfig config;
    long long steps = 0;
    Xoshiro256 rng{0};
};

// Full conditional distribution of vertex v given the rest of `sigma`
// (unnormalized rational weights, one per spin).
std::vector<Rat> heat_bath_weights(const Multigraph& g, const ModelParams& model,
                                   const SpinConfig& sigma, int v);

// One-step transition kernel P[x][y] over all q^n configurations, exact.
// Test support for detailed balance; intended for tiny systems.
std::vector<std::vector<Rat>> glauber_kernel(const Multigraph& g, const ModelParams& model);

ChainState glauber_init(const Multigraph& g, const ModelParams& model, uint64_t seed,
                        const std::optional<SpinConfig>& init = std::nullopt);
void glauber_step(const Multigraph& g, const ModelParams& model, ChainState& chain);
ChainState glauber_run(const Multigraph& g, const ModelParams& model, long long steps,
                       uint64_t seed, const std::optional<SpinConfig>& init = std::nullopt);

struct Estimate {
    double mean = 0;
    double std_error = 0;
    bool std_error_defined = false;  // false for a single sample
    long long samples = 0;
    long long burn_in = 0;
    uint64_t seed = 0;
};

// Potts: observable is m_F(sigma) over the whole graph; two-spin: the (a,b,c)
// observable. Batch-means standard error.
Estimate mc_estimate(const Multigraph& g, const ModelParams& model, const VertexEdgeObservable& obs,
                     long long samples, long long burn_in, long long thinning, uint64_t seed,
                     const std::optional<SpinConfig>& init = std::nullopt);

double observable_value(const Multigraph& g, const ModelParams& model,
                        const VertexEdgeObservable& obs, const SpinConfig& sigma);

}  // namespace spinobs
