#include "spinobs/model.hpp"

#include <algorithm>
#include <set>

namespace spinobs {

void validate(const ModelParams& m) {
    if (is_potts(m))
        as_potts(m).validate();
    else
        as_twospin(m).validate();
}

bool VertexEdgeObservable::trivial_on_general(const TwoSpinParams& p) const {
    if (a == 0 && b == 0 && c == 0) return true;
    if (p.beta == 0 && a == 0 && c == 0) return true;
    if (p.gamma == 0 && a == 0 && b == 0) return true;
    if (p.beta == p.gamma && p.lambda == 1 && b + c == 0) return true;
    return false;
}

bool VertexEdgeObservable::trivial_on_bipartite(const TwoSpinParams& p) const {
    return trivial_on_general(p) || (p.beta == p.gamma && p.lambda == 1);
}

void PinSet::validate(int n, int q) const {
    std::set<int> pinned;
    for (auto [v, s] : assign) {
        if (v < 0 || v >= n) throw ValidationError("pin on out-of-range vertex");
        if (s < 0 || s >= q) throw ValidationError("pin spin out of range");
        if (!pinned.insert(v).second) throw ValidationError("vertex pinned twice");
    }
    for (const auto& r : rel) {
        if (r.u < 0 || r.u >= n || r.v < 0 || r.v >= n)
            throw ValidationError("relational pin on out-of-range vertex");
        if (r.u == r.v) throw ValidationError("relational pin requires distinct vertices");
    }
}

SubgraphRef SubgraphRef::whole(int n, int m) {
    SubgraphRef f;
    f.vertices.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) f.vertices[static_cast<size_t>(i)] = i;
    f.edge_indices.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) f.edge_indices[static_cast<size_t>(i)] = i;
    return f;
}

SubgraphRef SubgraphRef::edges_only(const std::vector<int>& edge_indices,
                                    const std::vector<std::pair<int, int>>& all_edges) {
    SubgraphRef f;
    f.edge_indices = edge_indices;
    std::set<int> vs;
    for (int e : edge_indices) {
        vs.insert(all_edges[static_cast<size_t>(e)].first);
        vs.insert(all_edges[static_cast<size_t>(e)].second);
    }
    f.vertices.assign(vs.begin(), vs.end());
    return f;
}

}  // namespace spinobs
