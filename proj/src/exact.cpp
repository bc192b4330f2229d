#include "spinobs/exact.hpp"

#include <array>

#include <algorithm>
#include <functional>
#include <thread>
#include <unordered_map>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

struct KeyHash {
    size_t operator()(const std::vector<int>& k) const {
        size_t h = 0x9e3779b97f4a7c15ULL;
        for (int x : k) h = (h ^ static_cast<size_t>(x)) * 0x100000001b3ULL;
        return h;
    }
};

using BucketMap = std::unordered_map<std::vector<int>, uint64_t, KeyHash>;

// Exhaustive enumeration, bucketed by integer feature vectors.
//
// Key layout, Potts:    [mono count per edge-activity class] (+ [m_F])
// Key layout, two-spin: [occupied count per vertex-activity class, m0, m1]
//                       (+ [size_F, m0_F, m1_F])
//
// Per-edge activities are a Potts notion (edge activity vectors), per-vertex
// activities a two-spin notion (field vectors); the other combinations are
// rejected up front.
struct Enumerator {
    const Multigraph& g;
    bool potts;
    int q;
    Rat potts_beta;
    Rat ts_beta, ts_gamma;
    bool ts_beta_zero = false, ts_gamma_zero = false;

    std::vector<int> eclass;
    std::vector<Rat> eclass_value;
    std::vector<char> eclass_zero;
    std::vector<int> vclass;
    std::vector<Rat> vclass_value;

    bool has_F = false;
    std::vector<char> f_vertex, f_edge;

    std::vector<int> pinned;  // -1 = free
    std::vector<std::vector<std::pair<int, bool>>> rel_here;  // checked at the later vertex
    std::vector<std::vector<std::pair<int, int>>> earlier;    // (edge idx, earlier endpoint)

    int off_mono = 0, off_occ = 0, off_m0 = 0, off_m1 = 0, off_f = 0;
    int key_size = 0;

    Enumerator(const Multigraph& graph, const ModelParams& model, const PinSet& pins,
               const std::optional<SubgraphRef>& F)
        : g(graph), potts(is_potts(model)), q(spin_count(model)) {
        validate(model);
        pins.validate(g.vertex_count(), q);
        const int n = g.vertex_count();
        const int m = g.edge_count();

        if (potts) {
            potts_beta = as_potts(model).beta;
            if (g.has_vertex_activities())
                throw ValidationError("per-vertex activities are not defined for the Potts model");
            eclass.resize(static_cast<size_t>(m));
            for (int e = 0; e < m; ++e) {
                Rat a = g.edge_activity(e, potts_beta);
                auto it = std::find(eclass_value.begin(), eclass_value.end(), a);
                if (it == eclass_value.end()) {
                    eclass_value.push_back(a);
                    it = std::prev(eclass_value.end());
                }
                eclass[static_cast<size_t>(e)] = static_cast<int>(it - eclass_value.begin());
            }
            for (const auto& v : eclass_value) eclass_zero.push_back(v == 0);
        } else {
            const auto& p = as_twospin(model);
            ts_beta = p.beta;
            ts_gamma = p.gamma;
            ts_beta_zero = (ts_beta == 0);
            ts_gamma_zero = (ts_gamma == 0);
            if (g.has_edge_activities())
                throw ValidationError("per-edge activities are not defined for two-spin models");
            vclass.resize(static_cast<size_t>(n));
            for (int v = 0; v < n; ++v) {
                Rat a = g.vertex_activity(v, p.lambda);
                auto it = std::find(vclass_value.begin(), vclass_value.end(), a);
                if (it == vclass_value.end()) {
                    vclass_value.push_back(a);
                    it = std::prev(vclass_value.end());
                }
                vclass[static_cast<size_t>(v)] = static_cast<int>(it - vclass_value.begin());
            }
        }

        if (F) {
            has_F = true;
            f_vertex.assign(static_cast<size_t>(n), 0);
            f_edge.assign(static_cast<size_t>(m), 0);
            for (int v : F->vertices) {
                if (v < 0 || v >= n) throw ValidationError("subgraph vertex out of range");
                f_vertex[static_cast<size_t>(v)] = 1;
            }
            for (int e : F->edge_indices) {
                if (e < 0 || e >= m) throw ValidationError("subgraph edge index out of range");
                f_edge[static_cast<size_t>(e)] = 1;
            }
        }

        pinned.assign(static_cast<size_t>(n), -1);
        for (auto [v, s] : pins.assign) pinned[static_cast<size_t>(v)] = s;
        rel_here.resize(static_cast<size_t>(n));
        for (const auto& r : pins.rel)
            rel_here[static_cast<size_t>(std::max(r.u, r.v))].push_back({std::min(r.u, r.v), r.equal});

        earlier.resize(static_cast<size_t>(n));
        for (int e = 0; e < m; ++e) {
            auto [u, v] = g.edge(e);
            earlier[static_cast<size_t>(std::max(u, v))].push_back({e, std::min(u, v)});
        }

        if (potts) {
            off_mono = 0;
            key_size = static_cast<int>(eclass_value.size());
            if (has_F) {
                off_f = key_size;
                key_size += 1;
            }
        } else {
            off_occ = 0;
            off_m0 = static_cast<int>(vclass_value.size());
            off_m1 = off_m0 + 1;
            key_size = off_m1 + 1;
            if (has_F) {
                off_f = key_size;
                key_size += 3;  // size_F, m0_F, m1_F
            }
        }
    }

    uint64_t free_config_count(uint64_t cap) const {
        uint64_t total = 1;
        for (int v = 0; v < g.vertex_count(); ++v) {
            if (pinned[static_cast<size_t>(v)] >= 0) continue;
            if (total > cap / static_cast<uint64_t>(q) + 1) return cap + 1;
            total *= static_cast<uint64_t>(q);
            if (total > cap) return cap + 1;
        }
        return total;
    }

    // Enumerates configurations; workers skip subtrees whose prefix index
    // (base-q over the first `prefix_len` free vertices) misses their residue.
    void run(BucketMap& out, int prefix_len, int n_workers, int worker) const {
        std::vector<int> key(static_cast<size_t>(key_size), 0);
        std::vector<int> sigma(static_cast<size_t>(g.vertex_count()), -1);
        descend(out, key, sigma, 0, 0, prefix_len, 0, n_workers, worker);
    }

  private:
    bool apply_vertex(std::vector<int>& key, std::vector<int>& sigma, int v, int s) const {
        for (auto [u, eq] : rel_here[static_cast<size_t>(v)]) {
            int su = sigma[static_cast<size_t>(u)];
            if (eq ? (su != s) : (su == s)) return false;
        }
        for (auto [e, u] : earlier[static_cast<size_t>(v)]) {
            int su = sigma[static_cast<size_t>(u)];
            if (potts) {
                if (su == s && eclass_zero[static_cast<size_t>(eclass[static_cast<size_t>(e)])])
                    return false;
            } else {
                if (s == 0 && su == 0 && ts_beta_zero) return false;
                if (s == 1 && su == 1 && ts_gamma_zero) return false;
            }
        }
        sigma[static_cast<size_t>(v)] = s;
        for (auto [e, u] : earlier[static_cast<size_t>(v)]) {
            int su = sigma[static_cast<size_t>(u)];
            if (potts) {
                if (su == s) {
                    ++key[static_cast<size_t>(off_mono + eclass[static_cast<size_t>(e)])];
                    if (has_F && f_edge[static_cast<size_t>(e)]) ++key[static_cast<size_t>(off_f)];
                }
            } else {
                if (s == 0 && su == 0) {
                    ++key[static_cast<size_t>(off_m0)];
                    if (has_F && f_edge[static_cast<size_t>(e)]) ++key[static_cast<size_t>(off_f + 1)];
                } else if (s == 1 && su == 1) {
                    ++key[static_cast<size_t>(off_m1)];
                    if (has_F && f_edge[static_cast<size_t>(e)]) ++key[static_cast<size_t>(off_f + 2)];
                }
            }
        }
        if (!potts && s == 1) {
            ++key[static_cast<size_t>(off_occ + vclass[static_cast<size_t>(v)])];
            if (has_F && f_vertex[static_cast<size_t>(v)]) ++key[static_cast<size_t>(off_f)];
        }
        return true;
    }

    void undo_vertex(std::vector<int>& key, std::vector<int>& sigma, int v) const {
        int s = sigma[static_cast<size_t>(v)];
        for (auto [e, u] : earlier[static_cast<size_t>(v)]) {
            int su = sigma[static_cast<size_t>(u)];
            if (potts) {
                if (su == s) {
                    --key[static_cast<size_t>(off_mono + eclass[static_cast<size_t>(e)])];
                    if (has_F && f_edge[static_cast<size_t>(e)]) --key[static_cast<size_t>(off_f)];
                }
            } else {
                if (s == 0 && su == 0) {
                    --key[static_cast<size_t>(off_m0)];
                    if (has_F && f_edge[static_cast<size_t>(e)]) --key[static_cast<size_t>(off_f + 1)];
                } else if (s == 1 && su == 1) {
                    --key[static_cast<size_t>(off_m1)];
                    if (has_F && f_edge[static_cast<size_t>(e)]) --key[static_cast<size_t>(off_f + 2)];
                }
            }
        }
        if (!potts && s == 1) {
            --key[static_cast<size_t>(off_occ + vclass[static_cast<size_t>(v)])];
            if (has_F && f_vertex[static_cast<size_t>(v)]) --key[static_cast<size_t>(off_f)];
        }
        sigma[static_cast<size_t>(v)] = -1;
    }

    void descend(BucketMap& out, std::vector<int>& key, std::vector<int>& sigma, int v,
                 int free_depth, int prefix_len, uint64_t prefix_idx, int n_workers,
                 int worker) const {
        if (v == g.vertex_count()) {
            ++out[key];
            return;
        }
        int pin = pinned[static_cast<size_t>(v)];
        int lo = (pin >= 0) ? pin : 0;
        int hi = (pin >= 0) ? pin + 1 : q;
        bool counts_prefix = (pin < 0) && free_depth < prefix_len;
        for (int s = lo; s < hi; ++s) {
            uint64_t idx = prefix_idx;
            int depth = free_depth;
            if (counts_prefix) {
                idx = prefix_idx * static_cast<uint64_t>(q) + static_cast<uint64_t>(s);
                depth = free_depth + 1;
                if (depth == prefix_len &&
                    idx % static_cast<uint64_t>(n_workers) != static_cast<uint64_t>(worker))
                    continue;
            } else if (pin < 0) {
                depth = free_depth + 1;
            }
            if (!apply_vertex(key, sigma, v, s)) continue;
            descend(out, key, sigma, v + 1, depth, prefix_len, idx, n_workers, worker);
            undo_vertex(key, sigma, v);
        }
    }
};

BucketMap enumerate_buckets(const Multigraph& g, const ModelParams& model, const PinSet& pins,
                            const std::optional<SubgraphRef>& F, const EnumOptions& opts) {
    Enumerator en(g, model, pins, F);
    uint64_t total = en.free_config_count(opts.max_configs);
    if (total > opts.max_configs)
        throw BudgetError("enumeration budget exceeded: " + std::to_string(g.vertex_count()) +
                          " vertices with q=" + std::to_string(en.q) + " spins (max_configs=" +
                          std::to_string(opts.max_configs) + ")");
    int workers = std::max(1, opts.threads);
    if (workers == 1 || total < 4096) {
        BucketMap out;
        en.run(out, 0, 1, 0);
        return out;
    }
    int prefix_len = 0;
    uint64_t span = 1;
    while (span < 4 * static_cast<uint64_t>(workers)) {
        span *= static_cast<uint64_t>(en.q);
        ++prefix_len;
    }
    std::vector<BucketMap> parts(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back(
            [&, w]() { en.run(parts[static_cast<size_t>(w)], prefix_len, workers, w); });
    for (auto& t : pool) t.join();
    BucketMap out = std::move(parts[0]);
    for (int w = 1; w < workers; ++w)
        for (const auto& [k, c] : parts[static_cast<size_t>(w)]) out[k] += c;
    return out;
}

Rat bucket_weight(const std::vector<int>& key, const Enumerator& en) {
    Rat w(1);
    if (en.potts) {
        for (size_t c = 0; c < en.eclass_value.size(); ++c)
            w *= rat_pow(en.eclass_value[c], key[static_cast<size_t>(en.off_mono) + c]);
    } else {
        for (size_t c = 0; c < en.vclass_value.size(); ++c)
            w *= rat_pow(en.vclass_value[c], key[static_cast<size_t>(en.off_occ) + c]);
        w *= rat_pow(en.ts_beta, key[static_cast<size_t>(en.off_m0)]);
        w *= rat_pow(en.ts_gamma, key[static_cast<size_t>(en.off_m1)]);
    }
    return w;
}

}  // namespace

ConfigStatsResult config_stats(const Multigraph& g, const SpinConfig& sigma,
                               const ModelParams& model) {
    validate(model);
    const int n = g.vertex_count();
    if (static_cast<int>(sigma.size()) != n)
        throw ValidationError("config length does not match vertex count");
    const int q = spin_count(model);
    for (int s : sigma)
        if (s < 0 || s >= q) throw ValidationError("spin out of range");
    ConfigStatsResult r{0, 0, 0, 0, Rat(1)};
    if (is_potts(model)) {
        const auto& p = as_potts(model);
        for (int e = 0; e < g.edge_count(); ++e) {
            auto [u, v] = g.edge(e);
            if (sigma[static_cast<size_t>(u)] == sigma[static_cast<size_t>(v)]) {
                ++r.mono;
                r.weight *= g.edge_activity(e, p.beta);
            }
        }
    } else {
        const auto& p = as_twospin(model);
        for (int v = 0; v < n; ++v)
            if (sigma[static_cast<size_t>(v)] == 1) {
                ++r.size;
                r.weight *= g.vertex_activity(v, p.lambda);
            }
        for (int e = 0; e < g.edge_count(); ++e) {
            auto [u, v] = g.edge(e);
            int a = sigma[static_cast<size_t>(u)], b = sigma[static_cast<size_t>(v)];
            if (a == 0 && b == 0) {
                ++r.m0;
                r.weight *= p.beta;
            } else if (a == 1 && b == 1) {
                ++r.m1;
                r.weight *= p.gamma;
            }
        }
    }
    return r;
}

Rat partition_function_tree(const Multigraph& g, const ModelParams& model, const PinSet& pins) {
    validate(model);
    const int q = spin_count(model);
    pins.validate(g.vertex_count(), q);
    if (!pins.rel.empty()) throw ValidationError("tree fast path does not support relational pins");
    if (!g.is_forest()) throw ValidationError("tree fast path requires a forest");
    const bool potts = is_potts(model);
    if (potts && g.has_vertex_activities())
        throw ValidationError("per-vertex activities are not defined for the Potts model");
    if (!potts && g.has_edge_activities())
        throw ValidationError("per-edge activities are not defined for two-spin models");

    const int n = g.vertex_count();
    std::vector<int> pinned(static_cast<size_t>(n), -1);
    for (auto [v, s] : pins.assign) pinned[static_cast<size_t>(v)] = s;

    // adjacency carrying edge indices
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n));
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edge(e);
        adj[static_cast<size_t>(u)].push_back({v, e});
        adj[static_cast<size_t>(v)].push_back({u, e});
    }

    auto vertex_weight = [&](int v, int s) -> Rat {
        if (potts) return Rat(1);
        return s == 1 ? g.vertex_activity(v, as_twospin(model).lambda) : Rat(1);
    };
    auto edge_weight = [&](int e, int s, int t) -> Rat {
        if (potts) return s == t ? g.edge_activity(e, as_potts(model).beta) : Rat(1);
        const auto& p = as_twospin(model);
        if (s == 0 && t == 0) return p.beta;
        if (s == 1 && t == 1) return p.gamma;
        return Rat(1);
    };

    std::vector<char> visited(static_cast<size_t>(n), 0);
    std::function<std::vector<Rat>(int)> dp = [&](int v) -> std::vector<Rat> {
        visited[static_cast<size_t>(v)] = 1;
        std::vector<Rat> zv(static_cast<size_t>(q));
        for (int s = 0; s < q; ++s)
            zv[static_cast<size_t>(s)] =
                (pinned[static_cast<size_t>(v)] < 0 || pinned[static_cast<size_t>(v)] == s)
                    ? vertex_weight(v, s)
                    : Rat(0);
        for (auto [w, e] : adj[static_cast<size_t>(v)]) {
            if (visited[static_cast<size_t>(w)]) continue;
            auto zc = dp(w);
            for (int s = 0; s < q; ++s) {
                Rat acc(0);
                for (int t = 0; t < q; ++t) acc += edge_weight(e, s, t) * zc[static_cast<size_t>(t)];
                zv[static_cast<size_t>(s)] *= acc;
            }
        }
        return zv;
    };

    Rat total(1);
    for (int v = 0; v < n; ++v) {
        if (visited[static_cast<size_t>(v)]) continue;
        auto zr = dp(v);
        Rat zc(0);
        for (int s = 0; s < q; ++s) zc += zr[static_cast<size_t>(s)];
        total *= zc;
    }
    return total;
}


namespace {

// Live edge during series-parallel reduction. Potts states are the symmetric
// (same, diff) pair; two-spin states are indexed by the endpoint spins.
struct SpEdge {
    int a, b;
    Rat zs, zd;          // Potts
    Rat z[2][2];         // two-spin: z[sa][sb]
    bool alive = true;
};

}  // namespace

std::optional<Rat> partition_function_sp(const Multigraph& g, const ModelParams& model,
                                         const PinSet& pins) {
    validate(model);
    const bool potts = is_potts(model);
    const int n = g.vertex_count();
    const int q = spin_count(model);
    pins.validate(n, q);
    if (!pins.rel.empty()) return std::nullopt;
    if (potts && !pins.assign.empty()) return std::nullopt;  // pins break colour symmetry
    if (potts && g.has_vertex_activities())
        throw ValidationError("per-vertex activities are not defined for the Potts model");
    if (!potts && g.has_edge_activities())
        throw ValidationError("per-edge activities are not defined for two-spin models");

    std::vector<SpEdge> edges;
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edge(e);
        SpEdge se;
        se.a = u;
        se.b = v;
        if (potts) {
            se.zs = g.edge_activity(e, as_potts(model).beta);
            se.zd = 1;
        } else {
            const auto& p = as_twospin(model);
            se.z[0][0] = p.beta;
            se.z[0][1] = se.z[1][0] = 1;
            se.z[1][1] = p.gamma;
        }
        edges.push_back(std::move(se));
    }

    // vertex weights: Potts scalar (colour-symmetric), two-spin per spin
    std::vector<Rat> pw(static_cast<size_t>(n), Rat(1));
    std::vector<std::array<Rat, 2>> tw(static_cast<size_t>(n));
    if (!potts) {
        const auto& p = as_twospin(model);
        for (int v = 0; v < n; ++v) tw[static_cast<size_t>(v)] = {Rat(1), g.vertex_activity(v, p.lambda)};
        for (auto [v, spin] : pins.assign) tw[static_cast<size_t>(v)][static_cast<size_t>(1 - spin)] = 0;
    }
    std::vector<char> vertex_alive(static_cast<size_t>(n), 1);

    auto degrees_of = [&]() {
        std::vector<std::vector<int>> inc(static_cast<size_t>(n));
        for (size_t i = 0; i < edges.size(); ++i)
            if (edges[i].alive) {
                inc[static_cast<size_t>(edges[i].a)].push_back(static_cast<int>(i));
                inc[static_cast<size_t>(edges[i].b)].push_back(static_cast<int>(i));
            }
        return inc;
    };

    Rat total(1);
    auto fold_isolated = [&](int v) {
        if (potts)
            total *= Rat(q) * pw[static_cast<size_t>(v)];
        else
            total *= tw[static_cast<size_t>(v)][0] + tw[static_cast<size_t>(v)][1];
        vertex_alive[static_cast<size_t>(v)] = 0;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        auto inc = degrees_of();
        for (int v = 0; v < n && !changed; ++v) {
            if (!vertex_alive[static_cast<size_t>(v)]) continue;
            auto& iv = inc[static_cast<size_t>(v)];
            if (iv.size() == 0) {
                fold_isolated(v);
                changed = true;
            } else if (iv.size() == 1) {
                // pendant: fold v into its neighbour
                SpEdge& e = edges[static_cast<size_t>(iv[0])];
                int u = e.a == v ? e.b : e.a;
                if (u == v) return std::nullopt;
                if (potts) {
                    Rat f = e.zs + (q - 1) * e.zd;  // colour-symmetric factor
                    pw[static_cast<size_t>(u)] *= pw[static_cast<size_t>(v)] * f;
                } else {
                    bool v_first = (e.a == v);
                    for (int su = 0; su < 2; ++su) {
                        Rat f(0);
                        for (int sv = 0; sv < 2; ++sv)
                            f += tw[static_cast<size_t>(v)][static_cast<size_t>(sv)] *
                                 (v_first ? e.z[sv][su] : e.z[su][sv]);
                        tw[static_cast<size_t>(u)][static_cast<size_t>(su)] *= f;
                    }
                }
                e.alive = false;
                vertex_alive[static_cast<size_t>(v)] = 0;
                changed = true;
            } else if (iv.size() == 2 && iv[0] != iv[1]) {
                // series: contract v between its two incident edges
                SpEdge& e1 = edges[static_cast<size_t>(iv[0])];
                SpEdge& e2 = edges[static_cast<size_t>(iv[1])];
                int a = e1.a == v ? e1.b : e1.a;
                int b = e2.a == v ? e2.b : e2.a;
                if (a == v || b == v || a == b) continue;  // self-loop/parallel handled elsewhere
                SpEdge ne;
                ne.a = a;
                ne.b = b;
                if (potts) {
                    Rat w = pw[static_cast<size_t>(v)];
                    ne.zs = w * (e1.zs * e2.zs + (q - 1) * e1.zd * e2.zd);
                    ne.zd = w * (e1.zs * e2.zd + e1.zd * e2.zs + (q - 2) * e1.zd * e2.zd);
                } else {
                    for (int sa = 0; sa < 2; ++sa)
                        for (int sb = 0; sb < 2; ++sb) {
                            Rat acc(0);
                            for (int sv = 0; sv < 2; ++sv) {
                                Rat za = (e1.a == a) ? e1.z[sa][sv] : e1.z[sv][sa];
                                Rat zb = (e2.a == v) ? e2.z[sv][sb] : e2.z[sb][sv];
                                acc += za * tw[static_cast<size_t>(v)][static_cast<size_t>(sv)] * zb;
                            }
                            ne.z[sa][sb] = acc;
                        }
                }
                e1.alive = false;
                e2.alive = false;
                vertex_alive[static_cast<size_t>(v)] = 0;
                edges.push_back(std::move(ne));
                changed = true;
            }
        }
        if (changed) continue;
        // parallel merge
        std::map<std::pair<int, int>, int> first;
        for (size_t i = 0; i < edges.size() && !changed; ++i) {
            if (!edges[i].alive) continue;
            auto key = std::minmax(edges[i].a, edges[i].b);
            auto it = first.find(key);
            if (it == first.end()) {
                first[key] = static_cast<int>(i);
                continue;
            }
            SpEdge& e1 = edges[static_cast<size_t>(it->second)];
            SpEdge& e2 = edges[i];
            if (potts) {
                e1.zs *= e2.zs;
                e1.zd *= e2.zd;
            } else {
                bool flipped = (e1.a != e2.a);
                for (int sa = 0; sa < 2; ++sa)
                    for (int sb = 0; sb < 2; ++sb)
                        e1.z[sa][sb] *= flipped ? e2.z[sb][sa] : e2.z[sa][sb];
            }
            e2.alive = false;
            changed = true;
        }
    }

    // remaining structure must be empty or a single edge per component pair
    int live_edges = 0;
    for (const auto& e : edges)
        if (e.alive) ++live_edges;
    if (live_edges == 1) {
        for (const auto& e : edges)
            if (e.alive) {
                if (potts) {
                    total *= Rat(q) * pw[static_cast<size_t>(e.a)] * pw[static_cast<size_t>(e.b)] *
                             (e.zs + (q - 1) * e.zd);
                } else {
                    Rat z(0);
                    for (int sa = 0; sa < 2; ++sa)
                        for (int sb = 0; sb < 2; ++sb)
                            z += tw[static_cast<size_t>(e.a)][static_cast<size_t>(sa)] *
                                 e.z[sa][sb] * tw[static_cast<size_t>(e.b)][static_cast<size_t>(sb)];
                    total *= z;
                }
                vertex_alive[static_cast<size_t>(e.a)] = 0;
                vertex_alive[static_cast<size_t>(e.b)] = 0;
            }
    } else if (live_edges > 1) {
        return std::nullopt;  // irreducible remainder (not series-parallel)
    }
    for (int v = 0; v < n; ++v)
        if (vertex_alive[static_cast<size_t>(v)]) fold_isolated(v);
    return total;
}
Rat restricted_partition_function(const Multigraph& g, const ModelParams& model, const PinSet& pins,
                                  const EnumOptions& opts) {
    if (g.is_forest() && pins.rel.empty()) return partition_function_tree(g, model, pins);
    if (pins.rel.empty()) {
        auto sp = partition_function_sp(g, model, pins);
        if (sp) return *sp;
    }
    Enumerator en(g, model, pins, std::nullopt);
    auto buckets = enumerate_buckets(g, model, pins, std::nullopt, opts);
    Rat z(0);
    for (const auto& [key, cnt] : buckets) z += Rat(Int(cnt)) * bucket_weight(key, en);
    return z;
}

Rat partition_function(const Multigraph& g, const ModelParams& model, const EnumOptions& opts) {
    Rat z = restricted_partition_function(g, model, PinSet{}, opts);
    if (z <= 0) throw NumericalError("partition function must be positive");
    return z;
}

Rat gibbs_probability(const Multigraph& g, const ModelParams& model, const PinSet& event,
                      const EnumOptions& opts) {
    Rat zp = restricted_partition_function(g, model, event, opts);
    Rat z = partition_function(g, model, opts);
    return zp / z;
}

Rat observable_expectation(const Multigraph& g, const ModelParams& model,
                           const VertexEdgeObservable& obs, const PinSet& pins,
                           const std::optional<SubgraphRef>& F, const EnumOptions& opts) {
    SubgraphRef f = F ? *F : SubgraphRef::whole(g.vertex_count(), g.edge_count());
    Enumerator en(g, model, pins, f);
    auto buckets = enumerate_buckets(g, model, pins, f, opts);
    Rat z(0), acc(0);
    for (const auto& [key, cnt] : buckets) {
        Rat w = Rat(Int(cnt)) * bucket_weight(key, en);
        z += w;
        Rat oval;
        if (en.potts) {
            oval = Rat(key[static_cast<size_t>(en.off_f)]);
        } else {
            oval = obs.a * Rat(key[static_cast<size_t>(en.off_f)]) +
                   obs.b * Rat(key[static_cast<size_t>(en.off_f) + 1]) +
                   obs.c * Rat(key[static_cast<size_t>(en.off_f) + 2]);
        }
        acc += w * oval;
    }
    if (z == 0) throw ValidationError("conditioning event has zero probability");
    return acc / z;
}

Rat independent_set_polynomial(const Multigraph& g, const Rat& lambda, const EnumOptions& opts) {
    const int n = g.vertex_count();
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= 2;
        if (total > opts.max_configs)
            throw BudgetError("independent-set enumeration budget exceeded");
    }
    auto adj = g.adjacency();
    std::vector<Int> by_size(static_cast<size_t>(n + 1), Int(0));
    std::vector<char> in(static_cast<size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int v, int size) {
        if (v == n) {
            ++by_size[static_cast<size_t>(size)];
            return;
        }
        rec(v + 1, size);
        for (int w : adj[static_cast<size_t>(v)])
            if (w < v && in[static_cast<size_t>(w)]) return;
        in[static_cast<size_t>(v)] = 1;
        rec(v + 1, size + 1);
        in[static_cast<size_t>(v)] = 0;
    };
    rec(0, 0);
    Rat z(0);
    for (int k = 0; k <= n; ++k) z += Rat(by_size[static_cast<size_t>(k)]) * rat_pow(lambda, k);
    return z;
}

std::vector<Int> potts_mono_histogram(const Multigraph& g, int q, const EnumOptions& opts) {
    if (g.has_edge_activities())
        throw ValidationError("mono histogram requires uniform edge activities");
    ModelParams model = PottsParams{q, Rat(2)};  // beta value irrelevant for counting
    auto buckets = enumerate_buckets(g, model, PinSet{}, std::nullopt, opts);
    std::vector<Int> counts(static_cast<size_t>(g.edge_count() + 1), Int(0));
    for (const auto& [key, cnt] : buckets) counts[static_cast<size_t>(key[0])] += Int(cnt);
    return counts;
}

std::map<std::array<int, 3>, Int> twospin_histogram(const Multigraph& g, const EnumOptions& opts) {
    if (g.has_vertex_activities())
        throw ValidationError("two-spin histogram requires uniform vertex activities");
    ModelParams model = TwoSpinParams{Rat(1, 2), Rat(1, 2), Rat(1)};  // positive; no pruning
    auto buckets = enumerate_buckets(g, model, PinSet{}, std::nullopt, opts);
    std::map<std::array<int, 3>, Int> out;
    for (const auto& [key, cnt] : buckets)
        out[{key[0], key[1], key[2]}] += Int(cnt);
    return out;
}

}  // namespace spinobs
