#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinobs/errors.hpp"
#include "spinobs/rational.hpp"

namespace spinobs {

struct PottsParams {
    int q;      // q >= 2
    Rat beta;   // > 0
    void validate() const {
        if (q < 2) throw ValidationError("Potts requires q >= 2");
        if (beta <= 0) throw ValidationError("Potts requires beta > 0");
    }
};

struct TwoSpinParams {
    Rat beta;    // (0,0) edge activity, >= 0
    Rat gamma;   // (1,1) edge activity, >= 0
    Rat lambda;  // vertex activity, > 0
    void validate() const {
        if (beta < 0 || gamma < 0) throw ValidationError("two-spin activities must be >= 0");
        if (beta == 0 && gamma == 0) throw ValidationError("two-spin: beta and gamma cannot both be 0");
        if (lambda <= 0) throw ValidationError("two-spin requires lambda > 0");
    }
    bool antiferromagnetic() const { return beta * gamma < 1; }
};

inline TwoSpinParams hardcore(const Rat& lambda) { return TwoSpinParams{Rat(1), Rat(0), lambda}; }
inline TwoSpinParams ising(const Rat& b, const Rat& lambda) { return TwoSpinParams{b, b, lambda}; }

using ModelParams = std::variant<PottsParams, TwoSpinParams>;

inline bool is_potts(const ModelParams& m) { return std::holds_alternative<PottsParams>(m); }
inline const PottsParams& as_potts(const ModelParams& m) { return std::get<PottsParams>(m); }
inline const TwoSpinParams& as_twospin(const ModelParams& m) { return std::get<TwoSpinParams>(m); }
inline int spin_count(const ModelParams& m) { return is_potts(m) ? as_potts(m).q : 2; }
void validate(const ModelParams& m);

// (a,b,c) vertex-edge observable: E[a|sigma| + b m0 + c m1]. For Potts the
// observable of record is the monochromatic edge count; the triple is unused.
struct VertexEdgeObservable {
    Rat a, b, c;
    Rat weight_abs() const { return abs(a) + abs(b) + abs(c); }
    bool trivial_on_general(const TwoSpinParams& p) const;
    bool trivial_on_bipartite(const TwoSpinParams& p) const;
};

inline VertexEdgeObservable magnetization() { return {Rat(1), Rat(0), Rat(0)}; }
inline VertexEdgeObservable susceptibility_obs() { return {Rat(0), Rat(1), Rat(1)}; }

using SpinConfig = std::vector<int>;  // vertex -> spin, 0-based ([0,q) or {0,1})

// Partial assignment plus relational constraints (equal/distinct spin pairs).
struct PinSet {
    std::vector<std::pair<int, int>> assign;           // (vertex, spin)
    struct Rel {
        int u, v;
        bool equal;  // true: sigma_u == sigma_v, false: sigma_u != sigma_v
    };
    std::vector<Rel> rel;

    PinSet& pin(int v, int spin) {
        assign.push_back({v, spin});
        return *this;
    }
    PinSet& equal_spins(int u, int v) {
        rel.push_back({u, v, true});
        return *this;
    }
    PinSet& distinct_spins(int u, int v) {
        rel.push_back({u, v, false});
        return *this;
    }
    bool empty() const { return assign.empty() && rel.empty(); }
    void validate(int n, int q) const;
};

// Vertex set + edge-index set of a subgraph; observables restricted to F use
// exactly these vertices/edges.
struct SubgraphRef {
    std::vector<int> vertices;
    std::vector<int> edge_indices;
    static SubgraphRef whole(int n, int m);
    static SubgraphRef edges_only(const std::vector<int>& edge_indices,
                                  const std::vector<std::pair<int, int>>& all_edges);
};

}  // namespace spinobs
