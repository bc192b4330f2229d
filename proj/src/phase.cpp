#include "spinobs/phase.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "spinobs/errors.hpp"
#include "spinobs/sampler.hpp"

namespace spinobs {

std::vector<int> PhaseGadget::ports() const {
    std::vector<int> out;
    for (int v = 0; v < graph.vertex_count(); ++v)
        if (is_port(v)) out.push_back(v);
    return out;
}

std::vector<int> PhaseGadget::interior() const {
    std::vector<int> out;
    for (int v = 0; v < graph.vertex_count(); ++v)
        if (!is_port(v)) out.push_back(v);
    return out;
}

void PhaseGadget::audit() const {
    auto deg = graph.degrees();
    for (int v = 0; v < graph.vertex_count(); ++v) {
        int want = is_port(v) ? delta - 1 : delta;
        if (deg[static_cast<size_t>(v)] != want)
            throw ValidationError("phase gadget degree audit failed at vertex " + std::to_string(v));
    }
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : graph.edges()) {
        if (left(u) == left(v)) throw ValidationError("phase gadget is not bipartite by sides");
        auto key = std::minmax(u, v);
        if (!seen.insert(key).second) throw ValidationError("phase gadget has a parallel edge");
    }
    if (!graph.bipartition()) throw ValidationError("phase gadget is not bipartite");
}

namespace {

// Gale-Ryser feasibility for a simple bipartite realization.
bool bipartite_degree_feasible(std::vector<int> a, const std::vector<int>& b) {
    long sa = 0, sb = 0;
    for (int x : a) sa += x;
    for (int x : b) sb += x;
    if (sa != sb) return false;
    std::sort(a.begin(), a.end(), std::greater<int>());
    for (size_t k = 1; k <= a.size(); ++k) {
        long lhs = 0;
        for (size_t i = 0; i < k; ++i) lhs += a[i];
        long rhs = 0;
        for (int x : b) rhs += std::min<long>(x, static_cast<long>(k));
        if (lhs > rhs) return false;
    }
    return true;
}

}  // namespace

PhaseGadget sample_phase_gadget(int n, int t, int delta, uint64_t seed, int max_rejects) {
    if (n < 0 || t < 0 || n + t <= 0 || delta < 2)
        throw ValidationError("sample_phase_gadget: need n,t >= 0, n+t > 0, Delta >= 2");
    int side = n + t;
    std::vector<int> degs(static_cast<size_t>(side));
    for (int i = 0; i < side; ++i) degs[static_cast<size_t>(i)] = (i < t) ? delta - 1 : delta;
    if (!bipartite_degree_feasible(degs, degs))
        throw ValidationError("infeasible degree sequence: no simple bipartite realization");

    std::vector<int> stubs_left, stubs_right;
    for (int v = 0; v < side; ++v)
        for (int k = 0; k < degs[static_cast<size_t>(v)]; ++k) {
            stubs_left.push_back(v);
            stubs_right.push_back(v + side);
        }

    Xoshiro256 rng(seed);
    for (int attempt = 0; attempt < max_rejects; ++attempt) {
        std::vector<int> perm = stubs_right;
        for (size_t i = perm.size(); i > 1; --i) {
            size_t j = rng.below(i);
            std::swap(perm[i - 1], perm[j]);
        }
        std::set<std::pair<int, int>> seen;
        bool simple = true;
        for (size_t i = 0; i < perm.size() && simple; ++i)
            simple = seen.insert({stubs_left[i], perm[i]}).second;
        if (!simple) continue;
        PhaseGadget g;
        g.n = n;
        g.t = t;
        g.delta = delta;
        g.graph = Multigraph(2 * side);
        for (size_t i = 0; i < perm.size(); ++i) g.graph.add_edge(stubs_left[i], perm[i]);
        g.audit();
        return g;
    }
    throw BudgetError("configuration-model rejection budget exhausted (no simple sample)");
}

std::vector<Rat> phase_attribution(const PhaseGadget& g, const SpinConfig& sigma,
                                   const ModelParams& model) {
    const int q = spin_count(model);
    if (static_cast<int>(sigma.size()) != g.graph.vertex_count())
        throw ValidationError("config length mismatch");
    int phases = is_potts(model) ? q : 2;
    std::vector<long> counts(static_cast<size_t>(phases), 0);
    if (is_potts(model)) {
        for (int v : g.interior()) ++counts[static_cast<size_t>(sigma[static_cast<size_t>(v)])];
    } else {
        for (int v : g.interior())
            if (sigma[static_cast<size_t>(v)] == 1) ++counts[g.left(v) ? 0 : 1];
    }
    long best = *std::max_element(counts.begin(), counts.end());
    int ties = 0;
    for (long c : counts)
        if (c == best) ++ties;
    std::vector<Rat> attr(static_cast<size_t>(phases), Rat(0));
    for (int i = 0; i < phases; ++i)
        if (counts[static_cast<size_t>(i)] == best) attr[static_cast<size_t>(i)] = Rat(1, ties);
    return attr;
}

int phase_of(const PhaseGadget& g, const SpinConfig& sigma, const ModelParams& model,
             Xoshiro256& rng) {
    auto attr = phase_attribution(g, sigma, model);
    std::vector<int> argmax;
    for (size_t i = 0; i < attr.size(); ++i)
        if (attr[i] > 0) argmax.push_back(static_cast<int>(i));
    if (argmax.size() == 1) return argmax[0];
    return argmax[rng.below(argmax.size())];
}

double PortLaw::prob_of(const std::vector<int>& tau) const {
    if (tau.size() != probs.size()) throw ValidationError("port config length mismatch");
    double p = 1;
    for (size_t k = 0; k < tau.size(); ++k) p *= probs[k][static_cast<size_t>(tau[k])];
    return p;
}

std::vector<int> PortLaw::sample(Xoshiro256& rng) const {
    std::vector<int> tau(probs.size());
    for (size_t k = 0; k < probs.size(); ++k) {
        double u = rng.uniform(), cum = 0;
        int pick = static_cast<int>(probs[k].size()) - 1;
        for (size_t s = 0; s < probs[k].size(); ++s) {
            cum += probs[k][s];
            if (u < cum) {
                pick = static_cast<int>(s);
                break;
            }
        }
        tau[k] = pick;
    }
    return tau;
}

PortLaw ideal_port_distribution_potts(int q, double p, int phase, const std::vector<int>& port_ids) {
    if (q < 2) throw ValidationError("q >= 2 required");
    if (!(p > 1.0 / q && p < 1.0)) throw ValidationError("port bias p must lie in (1/q, 1)");
    if (phase < 0 || phase >= q) throw ValidationError("phase out of range");
    PortLaw law;
    law.port_ids = port_ids;
    for (size_t k = 0; k < port_ids.size(); ++k) {
        std::vector<double> row(static_cast<size_t>(q), (1 - p) / (q - 1));
        row[static_cast<size_t>(phase)] = p;
        law.probs.push_back(std::move(row));
    }
    return law;
}

PortLaw ideal_port_distribution_twospin(double q_plus, double q_minus, int phase,
                                        const std::vector<int>& port_ids,
                                        const std::vector<bool>& port_on_plus_side) {
    if (!(q_plus > 0 && q_plus < 1 && q_minus > 0 && q_minus < 1))
        throw ValidationError("q_pm must lie in (0,1)");
    if (port_ids.size() != port_on_plus_side.size()) throw ValidationError("side flags mismatch");
    PortLaw law;
    law.port_ids = port_ids;
    for (size_t k = 0; k < port_ids.size(); ++k) {
        bool plus_side = port_on_plus_side[k];
        // phase +: plus-side ports occupied w.p. q_plus, minus side w.p. q_minus
        double occ = ((phase == 0) == plus_side) ? q_plus : q_minus;
        law.probs.push_back({1 - occ, occ});
    }
    return law;
}

namespace {

struct ExactPhaseTally {
    std::vector<Rat> mass;
    std::vector<std::map<std::vector<int>, Rat>> port_mass;
    Rat z;
};

ExactPhaseTally tally_exact(const PhaseGadget& g, const ModelParams& model,
                            const EnumOptions& opts) {
    validate(model);
    const int q = spin_count(model);
    const int n = g.graph.vertex_count();
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<uint64_t>(q);
        if (total > opts.max_configs) throw BudgetError("phase assessment budget exceeded");
    }
    int phases = is_potts(model) ? q : 2;
    ExactPhaseTally tl;
    tl.mass.assign(static_cast<size_t>(phases), Rat(0));
    tl.port_mass.resize(static_cast<size_t>(phases));
    tl.z = 0;
    auto ports = g.ports();
    SpinConfig sigma(static_cast<size_t>(n), 0);
    for (;;) {
        Rat w = config_stats(g.graph, sigma, model).weight;
        if (w != 0) {
            auto attr = phase_attribution(g, sigma, model);
            std::vector<int> tau;
            tau.reserve(ports.size());
            for (int v : ports) tau.push_back(sigma[static_cast<size_t>(v)]);
            tl.z += w;
            for (int i = 0; i < phases; ++i)
                if (attr[static_cast<size_t>(i)] > 0) {
                    Rat m = w * attr[static_cast<size_t>(i)];
                    tl.mass[static_cast<size_t>(i)] += m;
                    tl.port_mass[static_cast<size_t>(i)][tau] += m;
                }
        }
        int v = 0;
        while (v < n) {
            if (++sigma[static_cast<size_t>(v)] < q) break;
            sigma[static_cast<size_t>(v)] = 0;
            ++v;
        }
        if (v == n) break;
    }
    return tl;
}

PortLaw law_for_phase(const PhaseGadget& g, const ModelParams& model, double p_or_qplus,
                      double q_minus, int phase) {
    auto ports = g.ports();
    if (is_potts(model))
        return ideal_port_distribution_potts(as_potts(model).q, p_or_qplus, phase, ports);
    std::vector<bool> plus_side;
    for (int v : ports) plus_side.push_back(g.left(v));
    return ideal_port_distribution_twospin(p_or_qplus, q_minus, phase, ports, plus_side);
}

}  // namespace

PhaseAssessment assess_phase_gadget_exact(const PhaseGadget& g, const ModelParams& model,
                                          double p_or_qplus, double q_minus,
                                          const EnumOptions& opts) {
    auto tl = tally_exact(g, model, opts);
    int phases = static_cast<int>(tl.mass.size());
    PhaseAssessment out{0, 0, 0, 0, 0};
    Rat uniform(1, phases);
    Rat worst(0);
    for (int i = 0; i < phases; ++i)
        worst = rat_max(worst, rat_abs(tl.mass[static_cast<size_t>(i)] / tl.z - uniform));
    out.eps_balance = to_double(worst);
    double worst_port = 0;
    for (int i = 0; i < phases; ++i) {
        if (tl.mass[static_cast<size_t>(i)] == 0) continue;
        PortLaw law = law_for_phase(g, model, p_or_qplus, q_minus, i);
        for (const auto& [tau, m] : tl.port_mass[static_cast<size_t>(i)]) {
            double cond = to_double(m / tl.mass[static_cast<size_t>(i)]);
            double ideal = law.prob_of(tau);
            if (ideal > 0) worst_port = std::max(worst_port, std::abs(cond / ideal - 1));
        }
    }
    out.eps_port = worst_port;
    return out;
}

PhaseAssessment assess_phase_gadget_mc(const PhaseGadget& g, const ModelParams& model,
                                       double p_or_qplus, double q_minus, long long samples,
                                       long long burn_in, uint64_t seed) {
    if (samples <= 0) throw ValidationError("MC assessment requires samples > 0");
    ChainState chain = glauber_init(g.graph, model, seed);
    Xoshiro256 tie_rng(seed, 1);
    for (long long i = 0; i < burn_in; ++i) glauber_step(g.graph, model, chain);
    int phases = is_potts(model) ? as_potts(model).q : 2;
    auto ports = g.ports();
    long long thin = std::max<long long>(1, g.graph.vertex_count());
    std::vector<long long> phase_count(static_cast<size_t>(phases), 0);
    std::vector<std::map<std::vector<int>, long long>> port_count(static_cast<size_t>(phases));
    const int n_batches = 20;
    long long per_batch = std::max<long long>(1, samples / n_batches);
    std::vector<std::vector<long long>> batch_count(
        static_cast<size_t>(phases), std::vector<long long>((samples + per_batch - 1) / per_batch, 0));
    for (long long s = 0; s < samples; ++s) {
        for (long long k = 0; k < thin; ++k) glauber_step(g.graph, model, chain);
        int y = phase_of(g, chain.config, model, tie_rng);
        ++phase_count[static_cast<size_t>(y)];
        ++batch_count[static_cast<size_t>(y)][static_cast<size_t>(s / per_batch)];
        std::vector<int> tau;
        tau.reserve(ports.size());
        for (int v : ports) tau.push_back(chain.config[static_cast<size_t>(v)]);
        ++port_count[static_cast<size_t>(y)][tau];
    }
    PhaseAssessment out{0, 0, 0, 0, samples};
    double uniform = 1.0 / phases;
    for (int i = 0; i < phases; ++i) {
        double f = static_cast<double>(phase_count[static_cast<size_t>(i)]) / samples;
        double dev = std::abs(f - uniform);
        if (dev >= out.eps_balance) {
            out.eps_balance = dev;
            // batch-means standard error (accounts for chain autocorrelation)
            const auto& bc = batch_count[static_cast<size_t>(i)];
            size_t nb = bc.size();
            double mean = 0;
            for (long long c : bc) mean += static_cast<double>(c) / per_batch;
            mean /= static_cast<double>(nb);
            double var = 0;
            for (long long c : bc) {
                double d = static_cast<double>(c) / per_batch - mean;
                var += d * d;
            }
            var /= (nb > 1) ? (nb - 1) : 1;
            out.se_balance = std::sqrt(var / static_cast<double>(nb));
        }
    }
    for (int i = 0; i < phases; ++i) {
        long long ni = phase_count[static_cast<size_t>(i)];
        if (ni == 0) continue;
        PortLaw law = law_for_phase(g, model, p_or_qplus, q_minus, i);
        for (const auto& [tau, c] : port_count[static_cast<size_t>(i)]) {
            double cond = static_cast<double>(c) / static_cast<double>(ni);
            double ideal = law.prob_of(tau);
            if (ideal <= 0) continue;
            double dev = std::abs(cond / ideal - 1);
            if (dev >= out.eps_port) {
                out.eps_port = dev;
                out.se_port =
                    std::sqrt(std::max(cond * (1 - cond), 1e-12) / static_cast<double>(ni)) / ideal;
            }
        }
    }
    return out;
}

}  // namespace spinobs
