#include "spinobs/gadgets.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <cmath>
#include <sstream>

#include "spinobs/errors.hpp"

namespace spinobs {

// ---------------------------------------------------------------------------
// Recursion constants
// ---------------------------------------------------------------------------

PottsRecursion PottsRecursion::make(int q, const Rat& beta) {
    if (q < 3) throw ValidationError("Potts gadget algebra requires q >= 3");
    if (beta <= 1) throw ValidationError("Potts gadget algebra requires beta > 1");
    PottsRecursion c;
    c.q = q;
    c.beta = beta;
    Rat b1 = beta - 1;
    Rat denom = 2 * beta + (q - 2);
    c.beta_hat = 1 + b1 * b1 / (Rat(q - 1) * denom);
    c.gamma_hat = 1 + b1 * b1 / denom;
    c.lambda_hat = Rat(1, q - 1);
    c.kappa = (c.beta_hat - 1) * (c.gamma_hat - 1) / (c.beta_hat * c.gamma_hat - 1);
    return c;
}

Rat PottsRecursion::compose_value(const Rat& prod_B) const {
    return (1 + gamma_hat * lambda_hat * prod_B) / (beta_hat + lambda_hat * prod_B);
}

Rat PottsRecursion::omega(const Rat& B) const {
    return (1 + beta_hat * gamma_hat - beta_hat * B - gamma_hat / B) / (1 - beta_hat * gamma_hat);
}

Rat PottsRecursion::theta(const Rat& B) const {
    return 2 * beta * (B - 1) * (B + (q - 1)) / (B * (beta - 1) * (beta + (q - 1)));
}

Rat PottsRecursion::path_step_ratio(const Rat& B) const {
    return lambda_hat * (gamma_hat - 1) / (beta_hat + lambda_hat * B);
}

TwoSpinRecursion TwoSpinRecursion::make(const TwoSpinParams& p, const VertexEdgeObservable& obs) {
    p.validate();
    if (!p.antiferromagnetic())
        throw ValidationError("two-spin gadget algebra requires antiferromagnetic parameters");
    return TwoSpinRecursion{p, obs};
}

Rat TwoSpinRecursion::compose_value(const Rat& prod_R) const {
    Rat denom = params.beta + params.lambda * prod_R;
    if (denom == 0) throw NumericalError("compose_value: zero denominator");
    return (1 + params.gamma * params.lambda * prod_R) / denom;
}

Rat TwoSpinRecursion::omega(const Rat& R) const {
    if (R == 0) throw NumericalError("omega: R = 0");
    const Rat& b = params.beta;
    const Rat& g = params.gamma;
    return (1 + b * g - b * R - g / R) / (1 - b * g);
}

Rat TwoSpinRecursion::theta(const Rat& R) const {
    if (R == 0) throw NumericalError("theta: R = 0");
    const Rat& b = params.beta;
    const Rat& g = params.gamma;
    Rat d = 1 - b * g;
    return -obs.a * omega(R) - obs.b * b * (R - g) / d + obs.c * g * (1 / R - b) / d;
}

// ---------------------------------------------------------------------------
// Potts two-terminal state algebra
// ---------------------------------------------------------------------------

namespace {

PottsPairState single_edge_state(const Rat& beta) {
    return PottsPairState{beta, Rat(1), beta, Rat(0)};
}

PottsPairState extend_state(const PottsPairState& s, const Rat& beta, int q) {
    PottsPairState t;
    t.z_same = beta * s.z_same + (q - 1) * s.z_diff;
    t.z_diff = s.z_same + beta * s.z_diff + (q - 2) * s.z_diff;
    t.m_same = beta * (s.m_same + s.z_same) + (q - 1) * s.m_diff;
    t.m_diff = s.m_same + beta * (s.m_diff + s.z_diff) + (q - 2) * s.m_diff;
    return t;
}

// State of the composite: ports rho, rho' pinned; sum over the spins of the
// two junction vertices u, v.
PottsPairState compose_state(const std::vector<const EdgeGadget*>& children, const Rat& beta,
                             int q) {
    auto term = [&](int s_rho, int s_rhop) {
        Rat z(0), m(0);
        for (int su = 0; su < q; ++su) {
            for (int sv = 0; sv < q; ++sv) {
                bool same = (su == sv);
                Rat c(1), msum(0);
                for (const auto* ch : children) {
                    const Rat& zi = same ? ch->state.z_same : ch->state.z_diff;
                    c *= zi;
                }
                for (const auto* ch : children) {
                    const Rat& zi = same ? ch->state.z_same : ch->state.z_diff;
                    const Rat& mi = same ? ch->state.m_same : ch->state.m_diff;
                    msum += mi / zi;
                }
                msum *= c;
                Rat w = (su == s_rho ? beta : Rat(1)) * (sv == s_rhop ? beta : Rat(1));
                int extra = (su == s_rho ? 1 : 0) + (sv == s_rhop ? 1 : 0);
                z += w * c;
                m += w * (msum + extra * c);
            }
        }
        return std::pair<Rat, Rat>(z, m);
    };
    auto [zs, ms] = term(0, 0);
    auto [zd, md] = term(0, 1);
    return PottsPairState{zs, zd, ms, md};
}

void stats_from_state(EdgeGadget& g) {
    if (g.state.z_same == 0 || g.state.z_diff == 0)
        throw NumericalError("degenerate port conditioning in edge gadget");
    g.B = g.state.z_same / g.state.z_diff;
    g.A = g.state.m_same / g.state.z_same;
    g.S = g.A - g.state.m_diff / g.state.z_diff;
}

}  // namespace

EdgeGadget make_single_edge(const PottsRecursion& ctx) {
    EdgeGadget g;
    g.graph = k2();
    g.port_a = 0;
    g.port_b = 1;
    g.recipe = "edge";
    g.state = single_edge_state(ctx.beta);
    stats_from_state(g);
    return g;
}

EdgeGadget make_path_gadget(const PottsRecursion& ctx, int edges) {
    if (edges < 1) throw ValidationError("path needs at least one edge");
    EdgeGadget g;
    g.graph = path_graph(edges);
    g.port_a = 0;
    g.port_b = edges;
    g.recipe = "path " + std::to_string(edges);
    g.state = single_edge_state(ctx.beta);
    for (int i = 1; i < edges; ++i) g.state = extend_state(g.state, ctx.beta, ctx.q);
    stats_from_state(g);
    return g;
}

EdgeComposition compose_edge(const PottsRecursion& ctx, const std::vector<const EdgeGadget*>& children) {
    if (children.empty()) throw ValidationError("compose_edge requires k >= 1 children");
    EdgeComposition out;
    EdgeGadget& g = out.gadget;

    Multigraph asm_graph(4);  // rho=0, u=1, v=2, rho'=3
    for (const auto* ch : children) {
        int off = asm_graph.append_disjoint(ch->graph);
        asm_graph.merge_vertices(1, off + ch->port_a);
        asm_graph.merge_vertices(2, off + ch->port_b);
    }
    asm_graph.add_edge(0, 1);
    asm_graph.add_edge(2, 3);
    auto remap = asm_graph.compact();
    g.graph = std::move(asm_graph);
    g.port_a = remap[0];
    g.port_b = remap[3];

    std::string rec = "composeE(";
    for (size_t i = 0; i < children.size(); ++i) {
        if (i) rec += ",";
        rec += children[i]->recipe;
    }
    rec += ")";
    g.recipe = rec;

    g.state = compose_state(children, ctx.beta, ctx.q);
    stats_from_state(g);

    Rat prod(1), gap_sum(0);
    for (const auto* ch : children) {
        prod *= ch->B;
        gap_sum += ch->S;
    }
    out.predicted_B = ctx.compose_value(prod);
    out.predicted_S = ctx.theta(out.predicted_B) - ctx.omega(out.predicted_B) * gap_sum;
    if (out.predicted_B != g.B || out.predicted_S != g.S)
        throw NumericalError("compose_edge: recursion prediction disagrees with transfer state");
    return out;
}

// ---------------------------------------------------------------------------
// Two-spin rooted-tree aggregates (with 4-cycle leaf blobs)
// ---------------------------------------------------------------------------

namespace {

struct BlobTables {
    Rat z[2], w[2];
};

// Aggregates of a 4-cycle hanging at `anchor`, excluding the anchor's own
// vertex weight / a-contribution (accounted for by the main DP).
BlobTables c4_tables(const Multigraph& g, const std::vector<int>& cycle_vs,
                     const std::vector<int>& cycle_es, int anchor, const TwoSpinParams& p,
                     const VertexEdgeObservable& obs) {
    std::vector<int> free_vs;
    for (int v : cycle_vs)
        if (v != anchor) free_vs.push_back(v);
    BlobTables t;
    for (int s = 0; s < 2; ++s) {
        t.z[s] = 0;
        t.w[s] = 0;
    }
    int nf = static_cast<int>(free_vs.size());
    for (int mask = 0; mask < (1 << nf); ++mask) {
        std::map<int, int> spin;
        for (int i = 0; i < nf; ++i) spin[free_vs[static_cast<size_t>(i)]] = (mask >> i) & 1;
        for (int s = 0; s < 2; ++s) {
            spin[anchor] = s;
            Rat w(1), o(0);
            for (int i = 0; i < nf; ++i)
                if ((mask >> i) & 1) {
                    w *= g.vertex_activity(free_vs[static_cast<size_t>(i)], p.lambda);
                    o += obs.a;
                }
            for (int e : cycle_es) {
                auto [x, y] = g.edge(e);
                int sx = spin[x], sy = spin[y];
                if (sx == 0 && sy == 0) {
                    w *= p.beta;
                    o += obs.b;
                } else if (sx == 1 && sy == 1) {
                    w *= p.gamma;
                    o += obs.c;
                }
            }
            t.z[s] += w;
            t.w[s] += w * o;
        }
    }
    return t;
}

struct BiconnectedComponents {
    // per component: vertex list and edge-index list
    std::vector<std::vector<int>> comp_vertices;
    std::vector<std::vector<int>> comp_edges;
};

BiconnectedComponents biconnected_components(const Multigraph& g) {
    const int n = g.vertex_count();
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n));
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edge(e);
        adj[static_cast<size_t>(u)].push_back({v, e});
        adj[static_cast<size_t>(v)].push_back({u, e});
    }
    BiconnectedComponents out;
    std::vector<int> disc(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
    std::vector<int> estack;
    int timer = 0;
    std::function<void(int, int)> dfs = [&](int u, int pe) {
        disc[static_cast<size_t>(u)] = low[static_cast<size_t>(u)] = timer++;
        for (auto [w, e] : adj[static_cast<size_t>(u)]) {
            if (e == pe) continue;
            if (disc[static_cast<size_t>(w)] == -1) {
                estack.push_back(e);
                dfs(w, e);
                low[static_cast<size_t>(u)] = std::min(low[static_cast<size_t>(u)], low[static_cast<size_t>(w)]);
                if (low[static_cast<size_t>(w)] >= disc[static_cast<size_t>(u)]) {
                    std::vector<int> es;
                    while (!estack.empty()) {
                        int top = estack.back();
                        estack.pop_back();
                        es.push_back(top);
                        if (top == e) break;
                    }
                    std::set<int> vs;
                    for (int ce : es) {
                        vs.insert(g.edge(ce).first);
                        vs.insert(g.edge(ce).second);
                    }
                    out.comp_edges.push_back(es);
                    out.comp_vertices.push_back(std::vector<int>(vs.begin(), vs.end()));
                }
            } else if (disc[static_cast<size_t>(w)] < disc[static_cast<size_t>(u)]) {
                estack.push_back(e);
                low[static_cast<size_t>(u)] = std::min(low[static_cast<size_t>(u)], disc[static_cast<size_t>(w)]);
            }
        }
    };
    for (int v = 0; v < n; ++v)
        if (disc[static_cast<size_t>(v)] == -1) dfs(v, -1);
    return out;
}

}  // namespace

FieldAggregates field_tree_aggregates(const Multigraph& g, int root, const TwoSpinParams& p,
                                      const VertexEdgeObservable& obs) {
    p.validate();
    const int n = g.vertex_count();
    if (root < 0 || root >= n) throw ValidationError("root out of range");
    if (g.has_edge_activities())
        throw ValidationError("per-edge activities are not defined for two-spin models");

    // Blob detection: every biconnected component must be a single edge or a
    // 4-cycle (the latter only at lambda = (1-beta)/(1-gamma)).
    std::vector<char> edge_in_blob(static_cast<size_t>(g.edge_count()), 0);
    std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>> blobs_at(
        static_cast<size_t>(n));
    if (!g.is_forest()) {
        if ((1 - p.gamma) == 0 || p.lambda != (1 - p.beta) / (1 - p.gamma))
            throw ValidationError(
                "field gadget with cycles requires lambda == (1-beta)/(1-gamma)");
        auto bc = biconnected_components(g);
        // distance from root to find each blob's anchor
        std::vector<int> dist(static_cast<size_t>(n), -1);
        {
            auto adj = g.adjacency();
            std::deque<int> bfs{root};
            dist[static_cast<size_t>(root)] = 0;
            while (!bfs.empty()) {
                int u = bfs.front();
                bfs.pop_front();
                for (int w : adj[static_cast<size_t>(u)])
                    if (dist[static_cast<size_t>(w)] == -1) {
                        dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
                        bfs.push_back(w);
                    }
            }
        }
        for (size_t c = 0; c < bc.comp_edges.size(); ++c) {
            if (bc.comp_edges[c].size() == 1) continue;
            bool is_c4 = bc.comp_edges[c].size() == 4 && bc.comp_vertices[c].size() == 4;
            if (!is_c4) throw ValidationError("field gadget cycles must be 4-cycles");
            int anchor = bc.comp_vertices[c][0];
            for (int v : bc.comp_vertices[c])
                if (dist[static_cast<size_t>(v)] < dist[static_cast<size_t>(anchor)]) anchor = v;
            for (int e : bc.comp_edges[c]) edge_in_blob[static_cast<size_t>(e)] = 1;
            blobs_at[static_cast<size_t>(anchor)].push_back({bc.comp_vertices[c], bc.comp_edges[c]});
        }
    }

    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n));
    for (int e = 0; e < g.edge_count(); ++e) {
        if (edge_in_blob[static_cast<size_t>(e)]) continue;
        auto [u, v] = g.edge(e);
        adj[static_cast<size_t>(u)].push_back({v, e});
        adj[static_cast<size_t>(v)].push_back({u, e});
    }

    std::vector<char> in_blob_interior(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v)
        for (auto& blob : blobs_at[static_cast<size_t>(v)])
            for (int bv : blob.first)
                if (bv != v) in_blob_interior[static_cast<size_t>(bv)] = 1;

    std::vector<char> visited(static_cast<size_t>(n), 0);
    // returns (z0,z1,w0,w1) of the subtree at v, v's own weight included
    std::function<std::array<Rat, 4>(int)> dp = [&](int v) -> std::array<Rat, 4> {
        visited[static_cast<size_t>(v)] = 1;
        Rat lamv = g.vertex_activity(v, p.lambda);
        // per-spin lists of child (E, F) factors
        std::array<std::vector<std::pair<Rat, Rat>>, 2> parts;
        for (auto [w, e] : adj[static_cast<size_t>(v)]) {
            (void)e;
            if (visited[static_cast<size_t>(w)]) continue;
            auto c = dp(w);
            for (int s = 0; s < 2; ++s) {
                // edge weights: (0,0)->beta, (1,1)->gamma, mixed->1
                Rat e0 = (s == 0) ? p.beta : Rat(1);
                Rat e1 = (s == 1) ? p.gamma : Rat(1);
                Rat ob0 = (s == 0) ? obs.b : Rat(0);
                Rat ob1 = (s == 1) ? obs.c : Rat(0);
                Rat E = e0 * c[0] + e1 * c[1];
                Rat F = e0 * (c[2] + ob0 * c[0]) + e1 * (c[3] + ob1 * c[1]);
                parts[static_cast<size_t>(s)].push_back({E, F});
            }
        }
        for (auto& blob : blobs_at[static_cast<size_t>(v)]) {
            auto t = c4_tables(g, blob.first, blob.second, v, p, obs);
            for (int s = 0; s < 2; ++s) parts[static_cast<size_t>(s)].push_back({t.z[s], t.w[s]});
        }
        std::array<Rat, 4> out;
        for (int s = 0; s < 2; ++s) {
            Rat vw = (s == 1) ? lamv : Rat(1);
            Rat prod(1), fsum(0);
            for (auto& [E, F] : parts[static_cast<size_t>(s)]) {
                if (E == 0) {
                    prod = 0;
                    break;
                }
                prod *= E;
            }
            if (prod != 0) {
                for (auto& [E, F] : parts[static_cast<size_t>(s)]) fsum += F / E;
                fsum *= prod;
            } else {
                // rebuild weighted sum without division (some factor vanished)
                size_t k = parts[static_cast<size_t>(s)].size();
                fsum = 0;
                for (size_t i = 0; i < k; ++i) {
                    Rat m = parts[static_cast<size_t>(s)][i].second;
                    for (size_t j = 0; j < k; ++j)
                        if (j != i) m *= parts[static_cast<size_t>(s)][j].first;
                    fsum += m;
                }
            }
            Rat z = vw * prod;
            Rat w = vw * (fsum + (s == 1 ? obs.a : Rat(0)) * prod);
            out[static_cast<size_t>(s)] = z;
            out[static_cast<size_t>(2 + s)] = w;
        }
        return out;
    };

    // the root must reach every non-blob-interior vertex (connected gadget)
    auto a = dp(root);
    for (int v = 0; v < n; ++v)
        if (!visited[static_cast<size_t>(v)] && !in_blob_interior[static_cast<size_t>(v)])
            throw ValidationError("field gadget graph is not connected");
    return FieldAggregates{a[0], a[1], a[2], a[3]};
}

namespace {

void field_stats_from_aggregates(FieldGadget& g, const TwoSpinRecursion& ctx) {
    if (g.z0 == 0 || g.z1 == 0)
        throw NumericalError("degenerate root conditioning in field gadget");
    g.R = g.z1 / (ctx.params.lambda * g.z0);
    g.O = g.w1 / g.z1 - ctx.obs.a - g.w0 / g.z0;
    g.A = g.w0 / g.z0;
}

}  // namespace

FieldGadget make_degenerate(const TwoSpinRecursion& ctx) {
    FieldGadget g;
    g.graph = single_vertex();
    g.root = 0;
    g.recipe = "degenerate";
    g.z0 = 1;
    g.z1 = ctx.params.lambda;
    g.w0 = 0;
    g.w1 = ctx.obs.a * ctx.params.lambda;
    field_stats_from_aggregates(g, ctx);
    return g;
}

FieldComposition compose_field(const TwoSpinRecursion& ctx,
                               const std::vector<const FieldGadget*>& children) {
    if (children.empty()) throw ValidationError("compose_field requires k >= 1 children");
    FieldComposition out;
    FieldGadget& g = out.gadget;

    Multigraph asm_graph(2);  // rho=0, u=1
    for (const auto* ch : children) {
        int off = asm_graph.append_disjoint(ch->graph);
        if (ch->graph.vertex_count() == 1) continue;  // degenerate child: merged entirely into u
        asm_graph.merge_vertices(1, off + ch->root);
    }
    asm_graph.add_edge(0, 1);
    auto remap = asm_graph.compact();
    g.graph = std::move(asm_graph);
    g.root = remap[0];

    std::string rec = "composeF(";
    for (size_t i = 0; i < children.size(); ++i) {
        if (i) rec += ",";
        rec += children[i]->recipe;
    }
    rec += ")";
    g.recipe = rec;

    auto agg = field_tree_aggregates(g.graph, g.root, ctx.params, ctx.obs);
    g.z0 = agg.z0;
    g.z1 = agg.z1;
    g.w0 = agg.w0;
    g.w1 = agg.w1;
    field_stats_from_aggregates(g, ctx);

    Rat prod(1), gap_sum(0);
    for (const auto* ch : children) {
        prod *= ch->R;
        gap_sum += ch->O;
    }
    out.predicted_R = ctx.compose_value(prod);
    out.predicted_O = ctx.theta(out.predicted_R) - ctx.omega(out.predicted_R) * gap_sum;
    if (out.predicted_R != g.R || out.predicted_O != g.O)
        throw NumericalError("compose_field: recursion prediction disagrees with tree sums");
    return out;
}

FieldGadget make_field_edge(const TwoSpinRecursion& ctx) {
    auto d = make_degenerate(ctx);
    auto c = compose_field(ctx, {&d});
    c.gadget.recipe = "edge";
    return c.gadget;
}

FieldGadget make_field_path(const TwoSpinRecursion& ctx, int edges) {
    if (edges < 0) throw ValidationError("path length must be >= 0");
    FieldGadget g = make_degenerate(ctx);
    for (int i = 0; i < edges; ++i) {
        auto c = compose_field(ctx, {&g});
        g = std::move(c.gadget);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Brute-force statistics
// ---------------------------------------------------------------------------

EdgeStatsResult edge_gadget_stats(const Multigraph& g, int port_a, int port_b, int q,
                                  const Rat& beta, const EnumOptions& opts) {
    auto deg = g.degrees();
    if (port_a == port_b || deg[static_cast<size_t>(port_a)] != 1 ||
        deg[static_cast<size_t>(port_b)] != 1)
        throw ValidationError("edge gadget ports must be distinct vertices of degree 1");
    if (!is_two_terminal_series_parallel(g, port_a, port_b))
        throw ValidationError("edge gadget must be series-parallel between its ports");
    ModelParams model = PottsParams{q, beta};
    PinSet same, diff, p00, p01;
    same.equal_spins(port_a, port_b);
    diff.distinct_spins(port_a, port_b);
    p00.pin(port_a, 0).pin(port_b, 0);
    p01.pin(port_a, 0).pin(port_b, 1);
    EdgeStatsResult r;
    Rat z00 = restricted_partition_function(g, model, p00, opts);
    Rat z01 = restricted_partition_function(g, model, p01, opts);
    if (z00 == 0 || z01 == 0) throw NumericalError("degenerate port conditioning");
    r.B = z00 / z01;
    r.A = observable_expectation(g, model, {}, same, std::nullopt, opts);
    r.S = r.A - observable_expectation(g, model, {}, diff, std::nullopt, opts);
    return r;
}

FieldStatsResult field_gadget_stats(const Multigraph& g, int root, const TwoSpinParams& p,
                                    const VertexEdgeObservable& obs, const EnumOptions& opts) {
    ModelParams model = p;
    PinSet r0, r1;
    r0.pin(root, 0);
    r1.pin(root, 1);
    Rat z0 = restricted_partition_function(g, model, r0, opts);
    Rat z1 = restricted_partition_function(g, model, r1, opts);
    if (z0 == 0 || z1 == 0) throw NumericalError("degenerate root conditioning");
    FieldStatsResult r;
    r.R = z1 / (p.lambda * z0);
    r.A = observable_expectation(g, model, obs, r0, std::nullopt, opts);
    r.O = observable_expectation(g, model, obs, r1, std::nullopt, opts) - obs.a - r.A;
    return r;
}

bool is_two_terminal_series_parallel(const Multigraph& g, int s, int t) {
    if (s == t || g.vertex_count() < 2 || g.edge_count() < 1) return false;
    if (!g.is_connected()) return false;
    // multiset of live edges; contract/merge until no rule applies
    std::vector<std::pair<int, int>> edges = g.edges();
    bool changed = true;
    while (changed) {
        changed = false;
        // parallel merge
        std::set<std::pair<int, int>> seen;
        for (size_t i = 0; i < edges.size(); ++i) {
            auto key = std::minmax(edges[i].first, edges[i].second);
            if (!seen.insert(key).second) {
                edges.erase(edges.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
        }
        if (changed) continue;
        // series contraction at a degree-2 interior vertex
        std::map<int, std::vector<size_t>> at;
        for (size_t i = 0; i < edges.size(); ++i) {
            at[edges[i].first].push_back(i);
            at[edges[i].second].push_back(i);
        }
        for (const auto& [v, inc] : at) {
            if (v == s || v == t || inc.size() != 2) continue;
            size_t i = inc[0], j = inc[1];
            int a = edges[i].first == v ? edges[i].second : edges[i].first;
            int b = edges[j].first == v ? edges[j].second : edges[j].first;
            if (a == v || b == v) continue;  // self-loop guard (cannot happen here)
            size_t hi = std::max(i, j), lo = std::min(i, j);
            edges.erase(edges.begin() + static_cast<long>(hi));
            edges.erase(edges.begin() + static_cast<long>(lo));
            edges.push_back({a, b});
            changed = true;
            break;
        }
    }
    if (edges.size() != 1) return false;
    auto e = std::minmax(edges[0].first, edges[0].second);
    return e == std::minmax(s, t);
}

void validate_edge_gadget(const EdgeGadget& g) {
    auto deg = g.graph.degrees();
    if (g.port_a == g.port_b) throw ValidationError("edge gadget ports must be distinct");
    if (deg[static_cast<size_t>(g.port_a)] != 1 || deg[static_cast<size_t>(g.port_b)] != 1)
        throw ValidationError("edge gadget ports must have degree 1");
    if (!g.graph.is_connected()) throw ValidationError("edge gadget must be connected");
    if (!is_two_terminal_series_parallel(g.graph, g.port_a, g.port_b))
        throw ValidationError("edge gadget must be series-parallel between its ports");
}

void validate_field_gadget(const FieldGadget& g, const TwoSpinParams& p) {
    auto deg = g.graph.degrees();
    bool degenerate = g.graph.vertex_count() == 1 && g.graph.edge_count() == 0;
    if (!degenerate && deg[static_cast<size_t>(g.root)] != 1)
        throw ValidationError("field gadget root must have degree 1");
    if (!g.graph.is_connected()) throw ValidationError("field gadget must be connected");
    if (!g.graph.is_forest()) {
        if ((1 - p.gamma) == 0 || p.lambda != (1 - p.beta) / (1 - p.gamma))
            throw ValidationError("field gadget cycles require lambda == (1-beta)/(1-gamma)");
    }
}

// ---------------------------------------------------------------------------
// Path builder
// ---------------------------------------------------------------------------

PathBuild build_path(const PottsRecursion& ctx, const Rat& r) {
    if (r <= 0 || r >= Rat(1, 2)) throw ValidationError("build_path requires r in (0, 1/2)");
    Rat B = ctx.beta;
    int ell = 0;
    while (B - 1 >= r) {
        B = ctx.compose_value(B);
        ++ell;
        if (ell > 100000) throw BudgetError("build_path: recursion did not reach target");
    }
    PathBuild out;
    out.steps = ell;
    out.path = make_path_gadget(ctx, 2 * ell + 1);
    if (out.path.B != B) throw NumericalError("build_path: path state disagrees with recursion");
    double lr = std::log(to_double(r));
    double lk = std::log(to_double(ctx.kappa));
    out.ell_bound = static_cast<long>(std::ceil(lr / lk));
    return out;
}

// ---------------------------------------------------------------------------
// Merge fixpoint bracket (rational bisection)
// ---------------------------------------------------------------------------

std::pair<Rat, Rat> twospin_merge_fixpoint_bracket(const TwoSpinParams& p, const Rat& width) {
    p.validate();
    if (width <= 0) throw ValidationError("bracket width must be positive");
    auto h = [&](const Rat& x) -> Rat {
        return x * (p.beta + p.lambda * x * x) - (1 + p.gamma * p.lambda * x * x);
    };
    Rat lo(0), hi(1);
    while (h(hi) <= 0) hi *= 2;
    // h(0) = -1 < 0; h is eventually positive and the relevant root is unique
    // for antiferromagnetic parameters (gamma < 1/beta side).
    for (int it = 0; it < 100000 && hi - lo > width; ++it) {
        Rat mid = (lo + hi) / 2;
        if (h(mid) <= 0)
            lo = mid;
        else
            hi = mid;
    }
    if (hi - lo > width) throw NumericalError("fixpoint bisection failed to converge");
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Dense libraries
// ---------------------------------------------------------------------------

namespace {

long rat_floor_div(const Rat& x, const Rat& bin) {
    Rat q = x / bin;
    Int f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return f.get_si();
}

// Largest uncovered stretch of [lo,hi] given sorted member values; 0 when the
// tau*delta mesh is satisfied everywhere.
Rat coverage_gap_width(const std::vector<Rat>& sorted_members, const Rat& lo, const Rat& hi,
                       const Rat& mesh) {
    Rat w(0);
    if (sorted_members.empty()) return hi - lo;
    if (sorted_members.front() - lo > mesh) w = rat_max(w, Rat(sorted_members.front() - lo));
    if (hi - sorted_members.back() > mesh) w = rat_max(w, Rat(hi - sorted_members.back()));
    for (size_t i = 0; i + 1 < sorted_members.size(); ++i)
        if (sorted_members[i + 1] - sorted_members[i] > 2 * mesh)
            w = rat_max(w, Rat(sorted_members[i + 1] - sorted_members[i]));
    return w;
}

// Breadth-limited closure under pair compositions: one gadget per value bin,
// fine bins of mesh/2 inside the target interval and coarse bins outside (the
// outside values only serve as composition anchors).
struct ClosureHooks {
    std::function<int()> pool_size;
    std::function<Rat(int)> value;
    std::function<int(int)> gadget_size;
    std::function<Rat(const Rat&)> compose_of_product;
    std::function<bool(int, int)> make;  // compose pool[i] (j<0) or pool[i],pool[j]
};

void run_binned_closure(const ClosureHooks& cb, const Rat& lo, const Rat& hi, const Rat& mesh,
                        const Rat& glo, const Rat& ghi, int max_members, int max_rounds,
                        int max_size) {
    Rat fine = mesh / 2;
    Rat coarse = (hi - lo) / 8;
    Rat flo = lo - mesh, fhi = hi + mesh;
    std::set<std::pair<int, long>> bins;
    auto bin_of = [&](const Rat& v) -> std::pair<int, long> {
        if (v >= flo && v <= fhi) return {0, rat_floor_div(Rat(v - flo), fine)};
        return {1, rat_floor_div(Rat(v - glo), coarse)};
    };
    for (int i = 0; i < cb.pool_size(); ++i) {
        Rat v = cb.value(i);
        if (v >= glo && v <= ghi) bins.insert(bin_of(v));
    }
    auto covered = [&]() {
        std::vector<Rat> m;
        for (int i = 0; i < cb.pool_size(); ++i) {
            Rat v = cb.value(i);
            if (v >= lo && v <= hi) m.push_back(v);
        }
        std::sort(m.begin(), m.end());
        return coverage_gap_width(m, lo, hi, mesh) == 0;
    };
    for (int round = 0; round < max_rounds; ++round) {
        if (covered()) return;
        int snap = cb.pool_size();
        int added = 0;
        for (int i = 0; i < snap && cb.pool_size() < max_members; ++i) {
            for (int j = -1; j < snap; ++j) {
                Rat prod = j < 0 ? cb.value(i) : Rat(cb.value(i) * cb.value(j));
                Rat v = cb.compose_of_product(prod);
                if (v < glo || v > ghi) continue;
                auto b = bin_of(v);
                if (bins.count(b)) continue;
                int sz = 2 + cb.gadget_size(i) + (j < 0 ? 0 : cb.gadget_size(j));
                if (sz > max_size) continue;
                if (cb.make(i, j)) {
                    bins.insert(b);
                    ++added;
                }
            }
        }
        if (!added) break;
    }
}

}  // namespace

GadgetLibrary build_dense_library_potts(const PottsRecursion& ctx, const Rat& tau, const Rat& delta,
                                        const LibraryBudget& budget) {
    if (delta <= 0 || delta >= 1) throw ValidationError("delta must lie in (0,1)");
    if (tau <= 0 || 1 + tau >= ctx.gamma_hat)
        throw ValidationError("tau must satisfy 1 + tau < gamma_hat (monotone range)");
    GadgetLibrary lib;
    lib.kind = GadgetKind::PottsEdge;
    lib.tau = tau;
    lib.delta = delta;
    lib.mesh = tau * delta;
    lib.lo = 1;
    lib.hi = 1 + tau;
    lib.x_lo = lib.x_hi = 1;  // the Potts recursion fixes B = 1

    // Generators may live anywhere inside the monotone range (1, gamma_hat);
    // mid-range values are needed as composition anchors even though only
    // interval members ship in the library.
    Rat glo = lib.lo, ghi = 1 + (ctx.gamma_hat - 1) * Rat(19, 20);
    std::vector<EdgeGadget> pool;
    std::set<std::pair<Rat, Rat>> seen;
    auto push = [&](EdgeGadget&& g) -> bool {
        if (!seen.insert({g.B, g.S}).second) return false;
        pool.push_back(std::move(g));
        return true;
    };
    push(make_single_edge(ctx));
    // both parities: even paths supply the gamma_hat-side generator ladder
    for (int k = 2; k <= 41; ++k) {
        auto pg = make_path_gadget(ctx, k);
        bool tiny = pg.B - 1 < lib.mesh / 4;
        push(std::move(pg));
        if (tiny && k % 2 == 0) break;
    }
    ClosureHooks cb;
    cb.pool_size = [&]() { return static_cast<int>(pool.size()); };
    cb.value = [&](int i) { return pool[static_cast<size_t>(i)].B; };
    cb.gadget_size = [&](int i) { return pool[static_cast<size_t>(i)].size(); };
    cb.compose_of_product = [&](const Rat& p) { return ctx.compose_value(p); };
    cb.make = [&](int i, int j) {
        std::vector<const EdgeGadget*> ch{&pool[static_cast<size_t>(i)]};
        if (j >= 0) ch.push_back(&pool[static_cast<size_t>(j)]);
        auto comp = compose_edge(ctx, ch);
        return push(std::move(comp.gadget));
    };
    run_binned_closure(cb, lib.lo, lib.hi, lib.mesh, glo, ghi, budget.max_members,
                       budget.max_rounds, budget.max_size);

    for (auto& g : pool)
        if (g.B >= lib.lo && g.B <= lib.hi) lib.edge_members.push_back(g);
    std::sort(lib.edge_members.begin(), lib.edge_members.end(),
              [](const EdgeGadget& a, const EdgeGadget& b) { return a.B < b.B; });
    {
        std::vector<Rat> m;
        for (const auto& g : lib.edge_members) m.push_back(g.B);
        lib.largest_gap = coverage_gap_width(m, lib.lo, lib.hi, lib.mesh);
    }
    if (lib.largest_gap > 0)
        throw BudgetError("library coverage not achieved within budget; largest gap width " +
                          to_string(lib.largest_gap) + " (~" + format_real(to_double(lib.largest_gap)) +
                          ") exceeds mesh " + format_real(to_double(lib.mesh)));
    return lib;
}

GadgetLibrary build_dense_library_twospin(const TwoSpinRecursion& ctx, const Rat& tau,
                                          const Rat& delta, const LibraryBudget& budget) {
    if (delta <= 0 || delta >= 1) throw ValidationError("delta must lie in (0,1)");
    if (tau <= 0) throw ValidationError("tau must be positive");
    GadgetLibrary lib;
    lib.kind = GadgetKind::TwoSpinField;
    lib.tau = tau;
    lib.delta = delta;
    lib.mesh = tau * delta;
    auto [xlo, xhi] = twospin_merge_fixpoint_bracket(ctx.params, tau / 1000000);
    lib.x_lo = xlo;
    lib.x_hi = xhi;
    Rat center = (xlo + xhi) / 2;
    lib.lo = center - tau;
    lib.hi = center + tau;
    if (lib.lo <= ctx.params.gamma)
        throw ValidationError("tau too large: interval leaves the monotone range (gamma, 1/beta)");
    if (ctx.params.beta > 0 && lib.hi >= 1 / ctx.params.beta)
        throw ValidationError("tau too large: interval leaves the monotone range (gamma, 1/beta)");

    // Generators may live well outside the interval (clamped inside the
    // monotone range); only interval members ship in the library.
    Rat glo = (ctx.params.gamma + 3 * lib.lo) / 4;
    Rat ghi = ctx.params.beta > 0 ? Rat((3 * lib.hi + 1 / ctx.params.beta) / 4)
                                  : Rat(lib.hi + 3 * (lib.hi - lib.lo));
    std::vector<FieldGadget> pool;
    std::set<std::pair<Rat, Rat>> seen;
    auto push = [&](FieldGadget&& g) -> bool {
        if (!seen.insert({g.R, g.O}).second) return false;
        pool.push_back(std::move(g));
        return true;
    };
    push(make_degenerate(ctx));
    {
        FieldGadget p = make_degenerate(ctx);
        for (int k = 1; k <= 12; ++k) {
            auto c = compose_field(ctx, {&p});
            p = std::move(c.gadget);
            FieldGadget copy = p;
            push(std::move(copy));
        }
    }
    ClosureHooks cb;
    cb.pool_size = [&]() { return static_cast<int>(pool.size()); };
    cb.value = [&](int i) { return pool[static_cast<size_t>(i)].R; };
    cb.gadget_size = [&](int i) { return pool[static_cast<size_t>(i)].size(); };
    cb.compose_of_product = [&](const Rat& p) { return ctx.compose_value(p); };
    cb.make = [&](int i, int j) {
        std::vector<const FieldGadget*> ch{&pool[static_cast<size_t>(i)]};
        if (j >= 0) ch.push_back(&pool[static_cast<size_t>(j)]);
        auto comp = compose_field(ctx, ch);
        return push(std::move(comp.gadget));
    };
    run_binned_closure(cb, lib.lo, lib.hi, lib.mesh, glo, ghi, budget.max_members,
                       budget.max_rounds, budget.max_size);

    for (auto& g : pool)
        if (g.R >= lib.lo && g.R <= lib.hi) lib.field_members.push_back(g);
    std::sort(lib.field_members.begin(), lib.field_members.end(),
              [](const FieldGadget& a, const FieldGadget& b) { return a.R < b.R; });
    {
        std::vector<Rat> m;
        for (const auto& g : lib.field_members) m.push_back(g.R);
        lib.largest_gap = coverage_gap_width(m, lib.lo, lib.hi, lib.mesh);
    }
    if (lib.largest_gap > 0)
        throw BudgetError("library coverage not achieved within budget; largest gap width " +
                          to_string(lib.largest_gap) + " (~" + format_real(to_double(lib.largest_gap)) +
                          ") exceeds mesh " + format_real(to_double(lib.mesh)));
    return lib;
}

// ---------------------------------------------------------------------------
// Build-gadget
// ---------------------------------------------------------------------------

namespace {

struct RatInterval {
    Rat lo, hi;
};

RatInterval omega_interval_twospin(const TwoSpinParams& p, const Rat& lo, const Rat& hi) {
    // omega(R) = (1 + bg - bR - g/R)/(1 - bg); bR and g/R are monotone, so
    // endpoints give certified bounds.
    Rat d = 1 - p.beta * p.gamma;
    Rat wlo = (1 + p.beta * p.gamma - p.beta * hi - p.gamma / lo) / d;
    Rat whi = (1 + p.beta * p.gamma - p.beta * lo - p.gamma / hi) / d;
    if (wlo > whi) std::swap(wlo, whi);
    return {wlo, whi};
}

RatInterval theta_interval_twospin(const TwoSpinRecursion& ctx, const Rat& lo, const Rat& hi) {
    const auto& p = ctx.params;
    const auto& obs = ctx.obs;
    Rat d = 1 - p.beta * p.gamma;
    auto scale = [](const RatInterval& iv, const Rat& c) {
        RatInterval r{iv.lo * c, iv.hi * c};
        if (r.lo > r.hi) std::swap(r.lo, r.hi);
        return r;
    };
    RatInterval om = omega_interval_twospin(p, lo, hi);
    RatInterval t1 = scale(om, -obs.a);
    RatInterval rmg{lo - p.gamma, hi - p.gamma};
    RatInterval t2 = scale(rmg, -obs.b * p.beta / d);
    RatInterval invr{1 / hi - p.beta, 1 / lo - p.beta};
    RatInterval t3 = scale(invr, obs.c * p.gamma / d);
    return {t1.lo + t2.lo + t3.lo, t1.hi + t2.hi + t3.hi};
}

}  // namespace

BuildContext make_build_context(const TwoSpinRecursion& rec, const GadgetLibrary& lib) {
    if (lib.kind != GadgetKind::TwoSpinField)
        throw ValidationError("build_gadget requires a two-spin field library");
    if (lib.field_members.empty()) throw ValidationError("library is empty");
    BuildContext ctx{rec, lib, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    const auto& p = rec.params;
    Rat center = (lib.x_lo + lib.x_hi) / 2;
    auto om = omega_interval_twospin(p, lib.x_lo, lib.x_hi);
    Rat w_lo = rat_abs(om.lo), w_hi = rat_abs(om.hi);
    if (w_lo > w_hi) std::swap(w_lo, w_hi);
    if (!(w_lo > 0 && w_hi < 1))
        throw NumericalError("omega(x*) not certified inside (0,1)");
    ctx.I_lo = center - lib.tau * w_lo / 2;
    ctx.I_hi = center + lib.tau * w_lo / 2;
    ctx.Ip_lo = center - 2 * lib.tau * w_hi / (1 - w_hi);
    ctx.Ip_hi = center + 2 * lib.tau * w_hi / (1 - w_hi);
    if (ctx.Ip_lo <= p.gamma || (p.beta > 0 && ctx.Ip_hi >= 1 / p.beta))
        throw ValidationError("I' leaves the monotone range; decrease tau");

    // Invariant hull: close hull(I' ∪ {1}) under all library maps.
    Rat h_lo = rat_min(ctx.Ip_lo, Rat(1));
    Rat h_hi = rat_max(ctx.Ip_hi, Rat(1));
    auto phi = [&](const Rat& Ri, const Rat& R) { return rec.compose_value(R * Ri); };
    bool stable = false;
    for (int round = 0; round < 64 && !stable; ++round) {
        stable = true;
        for (const auto& m : lib.field_members) {
            // phi decreasing in R
            Rat img_lo = phi(m.R, h_hi), img_hi = phi(m.R, h_lo);
            if (img_lo < h_lo) {
                h_lo = img_lo;
                stable = false;
            }
            if (img_hi > h_hi) {
                h_hi = img_hi;
                stable = false;
            }
        }
    }
    if (!stable) throw NumericalError("hull closure did not stabilize");
    ctx.hull_lo = h_lo;
    ctx.hull_hi = h_hi;
    if (h_lo <= 0) throw NumericalError("hull reaches zero; derivative bound unavailable");

    // |phi_i'(R)| = lambda R_i (1 - beta gamma) / (beta + lambda R R_i)^2,
    // decreasing in R: extremes at the hull endpoints.
    Rat cmax(0), cmin(-1);
    Rat one_m_bg = 1 - p.beta * p.gamma;
    for (const auto& m : lib.field_members) {
        Rat dlo = p.beta + p.lambda * h_lo * m.R;
        Rat dhi = p.beta + p.lambda * h_hi * m.R;
        Rat up = p.lambda * m.R * one_m_bg / (dlo * dlo);
        Rat dn = p.lambda * m.R * one_m_bg / (dhi * dhi);
        cmax = rat_max(cmax, up);
        cmin = (cmin < 0) ? dn : rat_min(cmin, dn);
    }
    if (cmax >= 1)
        throw NumericalError("certified contraction failed: C_max >= 1 over the hull");
    ctx.C_max = cmax;
    ctx.C_min = cmin;
    ctx.C = h_hi - h_lo;

    auto th = theta_interval_twospin(rec, ctx.Ip_lo, ctx.Ip_hi);
    ctx.T_hat = rat_max(rat_abs(th.lo), rat_abs(th.hi));
    Rat maxO(0);
    for (const auto& m : lib.field_members) maxO = rat_max(maxO, rat_abs(m.O));
    ctx.T = (ctx.T_hat + maxO) / (1 - ctx.C_max);
    return ctx;
}

FieldGadget build_gadget(const BuildContext& ctx, const Rat& x, int t) {
    if (x < ctx.I_lo || x > ctx.I_hi) throw ValidationError("build_gadget: x outside I");
    if (t < 0) throw ValidationError("build_gadget: t must be >= 0");
    if (t == 0) return make_degenerate(ctx.rec);
    const auto& p = ctx.rec.params;
    // y = phi_i^{-1}(x) = (1 - beta x) / (lambda R_i (x - gamma)); pick the
    // member whose pullback lands deepest inside I (deterministic tiebreak by
    // library order).
    Rat center = (ctx.I_lo + ctx.I_hi) / 2;
    int best = -1;
    Rat best_dist;
    Rat y_best;
    for (size_t i = 0; i < ctx.lib.field_members.size(); ++i) {
        const auto& m = ctx.lib.field_members[i];
        Rat y = (1 - p.beta * x) / (p.lambda * m.R * (x - p.gamma));
        if (y < ctx.I_lo || y > ctx.I_hi) continue;
        Rat dist = rat_abs(y - center);
        if (best < 0 || dist < best_dist) {
            best = static_cast<int>(i);
            best_dist = dist;
            y_best = y;
        }
    }
    if (best < 0)
        throw NumericalError("build_gadget: no covering map found (library too coarse)");
    FieldGadget sub = build_gadget(ctx, y_best, t - 1);
    auto comp = compose_field(ctx.rec, {&sub, &ctx.lib.field_members[static_cast<size_t>(best)]});
    return std::move(comp.gadget);
}

// ---------------------------------------------------------------------------
// Pair search
// ---------------------------------------------------------------------------

namespace {

// Sliding-window scan over value-sorted candidates: best |gap_i - gap_j| with
// |value_i - value_j| <= 2r.
template <typename GetValue, typename GetGap>
std::optional<std::pair<int, int>> best_matched_pair(int n, const Rat& two_r, GetValue value,
                                                     GetGap gap) {
    std::optional<std::pair<int, int>> best;
    Rat best_diff(-1);
    std::deque<int> maxdq, mindq;
    int left = 0;
    for (int i = 0; i < n; ++i) {
        while (!maxdq.empty() && gap(maxdq.back()) <= gap(i)) maxdq.pop_back();
        maxdq.push_back(i);
        while (!mindq.empty() && gap(mindq.back()) >= gap(i)) mindq.pop_back();
        mindq.push_back(i);
        while (value(i) - value(left) > two_r) {
            if (maxdq.front() == left) maxdq.pop_front();
            if (mindq.front() == left) mindq.pop_front();
            ++left;
        }
        Rat d = gap(maxdq.front()) - gap(mindq.front());
        if (d > best_diff) {
            best_diff = d;
            best = std::make_pair(maxdq.front(), mindq.front());
        }
    }
    return best;
}

}  // namespace

EdgeGadgetPair search_gadget_pair_potts(const PottsRecursion& ctx, const Rat& r, const Rat& gap_min,
                                        const PairBudget& budget) {
    if (r <= 0 || r >= Rat(1, 2)) throw ValidationError("pair search requires r in (0, 1/2)");
    // Working window (1, 1 + tau_w]: confines omega so the gap interval J is
    // certified; gaps of window-confined compositions cannot exceed 2T.
    Rat tau_w = rat_min(Rat(1, 20), Rat((ctx.gamma_hat - 1) / 4));
    GadgetLibrary lib = build_dense_library_potts(ctx, tau_w, Rat(1, 2),
                                                  LibraryBudget{budget.max_members, budget.max_rounds,
                                                                budget.max_size});
    // Densify pairs: compose members with near-1 paths to multiply variants.
    auto ports_bipartite_ok = [&](const EdgeGadget& g) {
        if (!budget.bipartite_ports) return true;
        auto colors = g.graph.bipartition();
        return colors && (*colors)[static_cast<size_t>(g.port_a)] !=
                             (*colors)[static_cast<size_t>(g.port_b)];
    };
    std::vector<EdgeGadget> pool;
    std::set<std::pair<Rat, Rat>> seen;
    for (const auto& g : lib.edge_members)
        if (ports_bipartite_ok(g) && seen.insert({g.B, g.S}).second) pool.push_back(g);
    size_t base = pool.size();
    for (size_t i = 0; i < base && static_cast<int>(pool.size()) < budget.max_members; ++i) {
        for (size_t j = i; j < base && static_cast<int>(pool.size()) < budget.max_members; ++j) {
            int sz = 2 + pool[i].size() + pool[j].size();
            if (sz > budget.max_size) continue;
            auto comp = compose_edge(ctx, {&pool[i], &pool[j]});
            if (comp.gadget.B > 1 && comp.gadget.B <= lib.hi && ports_bipartite_ok(comp.gadget) &&
                seen.insert({comp.gadget.B, comp.gadget.S}).second)
                pool.push_back(std::move(comp.gadget));
        }
    }
    if (pool.empty()) throw BudgetError("pair search: no bipartite-compatible candidates");

    // Certified gap bound over the window.
    Rat omax = rat_abs(ctx.omega(lib.hi));  // |omega| increases with B on (1, gamma_hat)
    Rat that = ctx.theta(lib.hi);       // theta increases from 0 on B >= 1
    Rat maxS(0);
    for (const auto& g : pool) maxS = rat_max(maxS, rat_abs(g.S));
    if (omax >= 1) throw NumericalError("window too wide: |omega| >= 1");
    Rat T = (that + maxS) / (1 - omax);
    Rat bound = 2 * T;
    if (gap_min > bound)
        throw ValidationError("requested gap_min " + to_string(gap_min) +
                              " exceeds the certified bound 2T = " + to_string(bound));

    std::sort(pool.begin(), pool.end(), [](const EdgeGadget& a, const EdgeGadget& b) {
        return a.B != b.B ? a.B < b.B : a.S < b.S;
    });
    auto best = best_matched_pair(
        static_cast<int>(pool.size()), 2 * r,
        [&](int i) { return pool[static_cast<size_t>(i)].B; },
        [&](int i) { return pool[static_cast<size_t>(i)].S; });
    if (!best) throw BudgetError("pair search: no candidates generated");
    EdgeGadgetPair out{pool[static_cast<size_t>(best->first)], pool[static_cast<size_t>(best->second)],
                       rat_abs(pool[static_cast<size_t>(best->first)].B -
                           pool[static_cast<size_t>(best->second)].B),
                       rat_abs(pool[static_cast<size_t>(best->first)].S -
                           pool[static_cast<size_t>(best->second)].S),
                       bound};
    if (out.gap_diff < gap_min)
        throw BudgetError("pair search budget exhausted; best gap found " + to_string(out.gap_diff) +
                          " (~" + format_real(to_double(out.gap_diff)) + ") with value diff " +
                          format_real(to_double(out.value_diff)) + " < requested " +
                          to_string(gap_min));
    return out;
}

FieldGadgetPair search_gadget_pair_twospin(const TwoSpinRecursion& ctx, const Rat& r,
                                           const Rat& gap_min, const PairBudget& budget) {
    if (r <= 0 || r >= Rat(1, 2)) throw ValidationError("pair search requires r in (0, 1/2)");
    GadgetLibrary lib = build_dense_library_twospin(ctx, Rat(1, 25), Rat(1, 2),
                                                    LibraryBudget{budget.max_members, budget.max_rounds,
                                                                  budget.max_size});
    BuildContext bctx = make_build_context(ctx, lib);

    std::vector<FieldGadget> pool = lib.field_members;
    std::set<std::pair<Rat, Rat>> seen;
    for (auto& g : pool) seen.insert({g.R, g.O});
    size_t base = pool.size();
    for (size_t i = 0; i < base && static_cast<int>(pool.size()) < budget.max_members; ++i) {
        for (size_t j = i; j < base && static_cast<int>(pool.size()) < budget.max_members; ++j) {
            int sz = 2 + pool[i].size() + pool[j].size();
            if (sz > budget.max_size) continue;
            auto comp = compose_field(ctx, {&pool[i], &pool[j]});
            if (comp.gadget.R >= lib.lo && comp.gadget.R <= lib.hi &&
                seen.insert({comp.gadget.R, comp.gadget.O}).second)
                pool.push_back(std::move(comp.gadget));
        }
    }

    Rat bound = 2 * bctx.T;
    if (gap_min > bound)
        throw ValidationError("requested gap_min " + to_string(gap_min) +
                              " exceeds the certified bound 2T = " + to_string(bound));

    std::sort(pool.begin(), pool.end(), [](const FieldGadget& a, const FieldGadget& b) {
        return a.R != b.R ? a.R < b.R : a.O < b.O;
    });
    auto best = best_matched_pair(
        static_cast<int>(pool.size()), 2 * r,
        [&](int i) { return pool[static_cast<size_t>(i)].R; },
        [&](int i) { return pool[static_cast<size_t>(i)].O; });
    if (!best) throw BudgetError("pair search: no candidates generated");
    FieldGadgetPair out{pool[static_cast<size_t>(best->first)],
                        pool[static_cast<size_t>(best->second)],
                        rat_abs(pool[static_cast<size_t>(best->first)].R -
                            pool[static_cast<size_t>(best->second)].R),
                        rat_abs(pool[static_cast<size_t>(best->first)].O -
                            pool[static_cast<size_t>(best->second)].O),
                        bound};
    if (out.gap_diff < gap_min)
        throw BudgetError("pair search budget exhausted; best gap found " + to_string(out.gap_diff) +
                          " < requested " + to_string(gap_min));
    return out;
}

// ---------------------------------------------------------------------------
// Recipes
// ---------------------------------------------------------------------------

namespace {

struct RecipeEnv {
    const PottsRecursion* pc;
    const TwoSpinRecursion* tc;
    std::map<std::string, EdgeGadget> edges;
    std::map<std::string, FieldGadget> fields;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// splits "a,b,c" at top level (no nested-paren commas)
std::vector<std::string> split_args(const std::string& s, int line) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth < 0) throw ValidationError("recipe line " + std::to_string(line) + ": unbalanced ')'");
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (depth != 0) throw ValidationError("recipe line " + std::to_string(line) + ": unbalanced '('");
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

EdgeGadget eval_edge(RecipeEnv& env, const std::string& expr, int line);
FieldGadget eval_field(RecipeEnv& env, const std::string& expr, int line);

EdgeGadget eval_edge(RecipeEnv& env, const std::string& expr, int line) {
    if (!env.pc) throw ValidationError("recipe line " + std::to_string(line) +
                                       ": edge-gadget expression without Potts parameters");
    std::string e = trim(expr);
    if (e == "edge") return make_single_edge(*env.pc);
    if (e.rfind("path", 0) == 0) {
        std::istringstream in(e.substr(4));
        int k;
        if (!(in >> k) || k < 1)
            throw ValidationError("recipe line " + std::to_string(line) + ": path <k> with k >= 1");
        return make_path_gadget(*env.pc, k);
    }
    if (e.rfind("composeE(", 0) == 0 && e.back() == ')') {
        auto args = split_args(e.substr(9, e.size() - 10), line);
        if (args.empty())
            throw ValidationError("recipe line " + std::to_string(line) + ": composeE needs children");
        std::vector<EdgeGadget> kids;
        for (auto& a : args) kids.push_back(eval_edge(env, a, line));
        std::vector<const EdgeGadget*> ptrs;
        for (auto& k : kids) ptrs.push_back(&k);
        return compose_edge(*env.pc, ptrs).gadget;
    }
    auto it = env.edges.find(e);
    if (it != env.edges.end()) return it->second;
    throw ValidationError("recipe line " + std::to_string(line) + ": unknown edge expression '" + e + "'");
}

FieldGadget eval_field(RecipeEnv& env, const std::string& expr, int line) {
    if (!env.tc) throw ValidationError("recipe line " + std::to_string(line) +
                                       ": field-gadget expression without two-spin parameters");
    std::string e = trim(expr);
    if (e == "degenerate") return make_degenerate(*env.tc);
    if (e == "edge") return make_field_edge(*env.tc);
    if (e.rfind("path", 0) == 0) {
        std::istringstream in(e.substr(4));
        int k;
        if (!(in >> k) || k < 1)
            throw ValidationError("recipe line " + std::to_string(line) + ": path <k> with k >= 1");
        return make_field_path(*env.tc, k);
    }
    if (e.rfind("composeF(", 0) == 0 && e.back() == ')') {
        auto args = split_args(e.substr(9, e.size() - 10), line);
        if (args.empty())
            throw ValidationError("recipe line " + std::to_string(line) + ": composeF needs children");
        std::vector<FieldGadget> kids;
        for (auto& a : args) kids.push_back(eval_field(env, a, line));
        std::vector<const FieldGadget*> ptrs;
        for (auto& k : kids) ptrs.push_back(&k);
        return compose_field(*env.tc, ptrs).gadget;
    }
    auto it = env.fields.find(e);
    if (it != env.fields.end()) return it->second;
    throw ValidationError("recipe line " + std::to_string(line) + ": unknown field expression '" + e + "'");
}

bool is_field_expr(const RecipeEnv& env, const std::string& e) {
    if (e.rfind("composeF", 0) == 0 || e == "degenerate") return true;
    if (e.rfind("composeE", 0) == 0) return false;
    if (env.fields.count(e)) return true;
    if (env.edges.count(e)) return false;
    // bare edge/path: decided by which parameter set was supplied
    return env.tc != nullptr && env.pc == nullptr;
}

}  // namespace

RecipeResult evaluate_recipe(const std::string& text, const PottsRecursion* potts_ctx,
                             const TwoSpinRecursion* twospin_ctx) {
    RecipeEnv env{potts_ctx, twospin_ctx, {}, {}};
    RecipeResult result;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool any = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto pos = s.find('#');
        if (pos != std::string::npos) s = s.substr(0, pos);
        s = trim(s);
        if (s.empty()) continue;
        any = true;
        std::string name, expr = s;
        auto eq = s.find('=');
        if (eq != std::string::npos && s.rfind("compose", 0) != 0) {
            name = trim(s.substr(0, eq));
            expr = trim(s.substr(eq + 1));
            if (name.empty()) throw ValidationError("recipe line " + std::to_string(line) + ": empty name");
        }
        result = RecipeResult{};
        if (is_field_expr(env, expr)) {
            FieldGadget f = eval_field(env, expr, line);
            if (!name.empty()) env.fields[name] = f;
            result.field = std::move(f);
        } else {
            EdgeGadget g = eval_edge(env, expr, line);
            if (!name.empty()) env.edges[name] = g;
            result.edge = std::move(g);
        }
    }
    if (!any) throw ValidationError("recipe: empty input");
    return result;
}

}  // namespace spinobs
