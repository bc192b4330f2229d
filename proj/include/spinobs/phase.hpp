#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spinobs/exact.hpp"
#include "spinobs/graph.hpp"
#include "spinobs/model.hpp"
#include "spinobs/rng.hpp"

namespace spinobs {

// Near-Delta-regular bipartite phase gadget: n interior vertices of degree
// Delta and t ports of degree Delta-1 on each side. Vertices 0..n+t-1 are the
// left side (ports first: 0..t-1), n+t..2(n+t)-1 the right side (ports
// n+t..n+t+t-1).
struct PhaseGadget {
    Multigraph graph;
    int n, t, delta;
    int side_size() const { return n + t; }
    bool left(int v) const { return v < side_size(); }
    bool is_port(int v) const {
        int local = v % side_size();
        return local < t;
    }
    std::vector<int> ports() const;
    std::vector<int> interior() const;  // degree-Delta vertices, both sides
    void audit() const;                 // bipartite, simple, degree multiset
};

// Configuration-model sample, rejected until simple; deterministic per seed.
PhaseGadget sample_phase_gadget(int n, int t, int delta, uint64_t seed, int max_rejects = 20000);

// Phase of a configuration. Potts: most frequent colour among interior
// vertices; two-spin: side with more occupied interior vertices. Ties are
// broken uniformly at random (seeded).
int phase_of(const PhaseGadget& g, const SpinConfig& sigma, const ModelParams& model,
             Xoshiro256& rng);
// Exact fractional attribution: probability vector over phases for a single
// configuration under uniform tie-breaking.
std::vector<Rat> phase_attribution(const PhaseGadget& g, const SpinConfig& sigma,
                                   const ModelParams& model);

struct PhaseAssessment {
    double eps_balance;  // max_i |mu(Y=i) - 1/q|
    double eps_port;     // max over phases/port configs of |cond. ratio - 1|
    double se_balance;   // standard errors (MC mode; 0 in exact mode)
    double se_port;
    long long samples;   // 0 in exact mode
};

// Exact mode enumerates all configurations (budget applies); bias parameters
// (port law) are taken from the criticality module via `p` or `q_pm`.
PhaseAssessment assess_phase_gadget_exact(const PhaseGadget& g, const ModelParams& model,
                                          double p_or_qplus, double q_minus = 0,
                                          const EnumOptions& opts = {});
PhaseAssessment assess_phase_gadget_mc(const PhaseGadget& g, const ModelParams& model,
                                       double p_or_qplus, double q_minus, long long samples,
                                       long long burn_in, uint64_t seed);

// Idealized per-port product law.
struct PortLaw {
    // probs[k][s]: probability that port k takes spin s.
    std::vector<std::vector<double>> probs;
    std::vector<int> port_ids;
    double prob_of(const std::vector<int>& tau) const;
    std::vector<int> sample(Xoshiro256& rng) const;
};

// Potts: per-port law p for the phase colour, (1-p)/(q-1) for the rest.
PortLaw ideal_port_distribution_potts(int q, double p, int phase, const std::vector<int>& port_ids);
// Two-spin: occupation q_plus on the phase side, q_minus on the other.
PortLaw ideal_port_distribution_twospin(double q_plus, double q_minus, int phase,
                                        const std::vector<int>& port_ids,
                                        const std::vector<bool>& port_on_plus_side);

}  // namespace spinobs
