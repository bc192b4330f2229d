#include "spinobs/sampler.hpp"

#include <cmath>

#include "spinobs/errors.hpp"
#include "spinobs/exact.hpp"

namespace spinobs {

std::vector<Rat> heat_bath_weights(const Multigraph& g, const ModelParams& model,
                                   const SpinConfig& sigma, int v) {
    const int q = spin_count(model);
    std::vector<Rat> w(static_cast<size_t>(q), Rat(1));
    if (is_potts(model)) {
        const auto& p = as_potts(model);
        for (int e = 0; e < g.edge_count(); ++e) {
            auto [a, b] = g.edge(e);
            int u;
            if (a == v)
                u = b;
            else if (b == v)
                u = a;
            else
                continue;
            w[static_cast<size_t>(sigma[static_cast<size_t>(u)])] *= g.edge_activity(e, p.beta);
        }
    } else {
        const auto& p = as_twospin(model);
        w[1] = g.vertex_activity(v, p.lambda);
        for (int e = 0; e < g.edge_count(); ++e) {
            auto [a, b] = g.edge(e);
            int u;
            if (a == v)
                u = b;
            else if (b == v)
                u = a;
            else
                continue;
            int su = sigma[static_cast<size_t>(u)];
            if (su == 0)
                w[0] *= p.beta;
            else
                w[1] *= p.gamma;
        }
    }
    return w;
}

namespace {

// Exact categorical draw: spin s with probability w_s / sum(w), decided by a
// 64-bit uniform integer in integer arithmetic (bit-reproducible).
int draw_from_weights(const std::vector<Rat>& w, uint64_t u) {
    Int denom(1);
    for (const auto& x : w) {
        Int d(x.get_den());
        denom = denom / gcd(denom, d) * d;
    }
    std::vector<Int> scaled(w.size());
    Int total(0);
    for (size_t i = 0; i < w.size(); ++i) {
        scaled[i] = Int(w[i].get_num()) * (denom / Int(w[i].get_den()));
        total += scaled[i];
    }
    if (total == 0) throw NumericalError("heat bath: all conditional weights vanish");
    Int r = (Int(u) * total) >> 64;
    Int cum(0);
    for (size_t i = 0; i < w.size(); ++i) {
        cum += scaled[i];
        if (cum > r) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
}

}  // namespace

ChainState glauber_init(const Multigraph& g, const ModelParams& model, uint64_t seed,
                        const std::optional<SpinConfig>& init) {
    validate(model);
    const int q = spin_count(model);
    ChainState chain;
    chain.rng = Xoshiro256(seed);
    if (init) {
        if (static_cast<int>(init->size()) != g.vertex_count())
            throw ValidationError("init config length mismatch");
        for (int s : *init)
            if (s < 0 || s >= q) throw ValidationError("init spin out of range");
        if (config_stats(g, *init, model).weight == 0)
            throw ValidationError("infeasible initial configuration (zero weight)");
        chain.config = *init;
    } else {
        SpinConfig sigma(static_cast<size_t>(g.vertex_count()), 0);
        if (!is_potts(model) && config_stats(g, sigma, model).weight == 0)
            sigma.assign(static_cast<size_t>(g.vertex_count()), 1);
        if (config_stats(g, sigma, model).weight == 0)
            throw ValidationError("no feasible default initial configuration");
        chain.config = std::move(sigma);
    }
    return chain;
}

void glauber_step(const Multigraph& g, const ModelParams& model, ChainState& chain) {
    int v = static_cast<int>(chain.rng.below(static_cast<uint64_t>(g.vertex_count())));
    auto w = heat_bath_weights(g, model, chain.config, v);
    chain.config[static_cast<size_t>(v)] = draw_from_weights(w, chain.rng.next());
    ++chain.steps;
}

ChainState glauber_run(const Multigraph& g, const ModelParams& model, long long steps,
                       uint64_t seed, const std::optional<SpinConfig>& init) {
    ChainState chain = glauber_init(g, model, seed, init);
    for (long long i = 0; i < steps; ++i) glauber_step(g, model, chain);
    return chain;
}

std::vector<std::vector<Rat>> glauber_kernel(const Multigraph& g, const ModelParams& model) {
    validate(model);
    const int n = g.vertex_count();
    const int q = spin_count(model);
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<uint64_t>(q);
        if (total > 4096) throw BudgetError("glauber_kernel: state space too large");
    }
    auto decode = [&](uint64_t idx) {
        SpinConfig s(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) {
            s[static_cast<size_t>(v)] = static_cast<int>(idx % static_cast<uint64_t>(q));
            idx /= static_cast<uint64_t>(q);
        }
        return s;
    };
    auto encode = [&](const SpinConfig& s) {
        uint64_t idx = 0;
        for (int v = n - 1; v >= 0; --v)
            idx = idx * static_cast<uint64_t>(q) + static_cast<uint64_t>(s[static_cast<size_t>(v)]);
        return idx;
    };
    std::vector<std::vector<Rat>> P(total, std::vector<Rat>(total, Rat(0)));
    Rat site_prob(1, n);
    for (uint64_t x = 0; x < total; ++x) {
        SpinConfig s = decode(x);
        for (int v = 0; v < n; ++v) {
            auto w = heat_bath_weights(g, model, s, v);
            Rat z(0);
            for (const auto& t : w) z += t;
            if (z == 0) continue;  // only reachable from zero-weight states
            for (int sp = 0; sp < q; ++sp) {
                SpinConfig s2 = s;
                s2[static_cast<size_t>(v)] = sp;
                P[x][encode(s2)] += site_prob * w[static_cast<size_t>(sp)] / z;
            }
        }
    }
    return P;
}

double observable_value(const Multigraph& g, const ModelParams& model,
                        const VertexEdgeObservable& obs, const SpinConfig& sigma) {
    auto st = config_stats(g, sigma, model);
    if (is_potts(model)) return static_cast<double>(st.mono);
    return to_double(obs.a) * st.size + to_double(obs.b) * st.m0 + to_double(obs.c) * st.m1;
}

Estimate mc_estimate(const Multigraph& g, const ModelParams& model, const VertexEdgeObservable& obs,
                     long long samples, long long burn_in, long long thinning, uint64_t seed,
                     const std::optional<SpinConfig>& init) {
    if (samples < 1) throw ValidationError("mc_estimate requires samples >= 1");
    if (thinning < 1) thinning = 1;
    ChainState chain = glauber_init(g, model, seed, init);
    for (long long i = 0; i < burn_in; ++i) glauber_step(g, model, chain);
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(samples));
    for (long long i = 0; i < samples; ++i) {
        for (long long k = 0; k < thinning; ++k) glauber_step(g, model, chain);
        vals.push_back(observable_value(g, model, obs, chain.config));
    }
    Estimate est;
    est.samples = samples;
    est.burn_in = burn_in;
    est.seed = seed;
    double sum = 0;
    for (double v : vals) sum += v;
    est.mean = sum / static_cast<double>(samples);
    if (samples >= 2) {
        int nb = static_cast<int>(std::min<long long>(32, samples));
        long long per = samples / nb;
        nb = static_cast<int>(samples / per);
        std::vector<double> batch(static_cast<size_t>(nb), 0);
        for (int b = 0; b < nb; ++b) {
            for (long long i = 0; i < per; ++i)
                batch[static_cast<size_t>(b)] += vals[static_cast<size_t>(b * per + i)];
            batch[static_cast<size_t>(b)] /= static_cast<double>(per);
        }
        double bm = 0;
        for (double v : batch) bm += v;
        bm /= nb;
        double var = 0;
        for (double v : batch) var += (v - bm) * (v - bm);
        var /= (nb > 1) ? (nb - 1) : 1;
        est.std_error = std::sqrt(var / nb);
        est.std_error_defined = true;
    } else {
        est.std_error = std::nan("");
        est.std_error_defined = false;
    }
    return est;
}

}  // namespace spinobs
