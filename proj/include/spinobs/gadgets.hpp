#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinobs/exact.hpp"
#include "spinobs/graph.hpp"
#include "spinobs/model.hpp"

namespace spinobs {

// ---------------------------------------------------------------------------
// Composition recursion constants.
//
// Potts (q >= 3, beta > 1): composing edge-interaction gadgets with effective
// interactions B_i into a new gadget (children bridged by pendant port edges)
// gives
//   B = (1 + gamma_hat * lambda_hat * prod B_i) / (beta_hat + lambda_hat * prod B_i)
//   S = theta(B) - omega(B) * sum S_i
// with beta_hat = 1 + (beta-1)^2 / ((q-1)(2 beta + q - 2)),
//      gamma_hat = 1 + (beta-1)^2 / (2 beta + q - 2),
//      lambda_hat = (1 - beta_hat)/(1 - gamma_hat) = 1/(q-1).
// Two-spin: R = (1 + gamma lambda prod R_i) / (beta + lambda prod R_i),
//           O = theta(R) - omega(R) * sum O_i.
// ---------------------------------------------------------------------------

struct PottsRecursion {
    int q;
    Rat beta;
    Rat beta_hat, gamma_hat, lambda_hat;
    Rat kappa;  // (beta_hat-1)(gamma_hat-1)/(beta_hat*gamma_hat - 1), in (0,1)

    static PottsRecursion make(int q, const Rat& beta);
    Rat compose_value(const Rat& prod_B) const;
    Rat omega(const Rat& B) const;  // in (-1,0) for B in (1, gamma_hat)
    Rat theta(const Rat& B) const;
    // Exact one-step decay ratio of the odd-path recursion at current value B:
    // lambda_hat (gamma_hat - 1) / (beta_hat + lambda_hat B); increases to kappa as B -> 1.
    Rat path_step_ratio(const Rat& B) const;
};

struct TwoSpinRecursion {
    TwoSpinParams params;
    VertexEdgeObservable obs;

    static TwoSpinRecursion make(const TwoSpinParams& p, const VertexEdgeObservable& obs);
    Rat compose_value(const Rat& prod_R) const;
    Rat omega(const Rat& R) const;  // in (0,1) for R in (gamma, 1/beta)
    Rat theta(const Rat& R) const;
};

// ---------------------------------------------------------------------------
// Gadgets. Exact statistics are carried alongside unnormalized aggregates
// that are maintained structurally (two-terminal transfer state for Potts,
// rooted-tree sums for two-spin); those aggregates are the scalable exact
// route, independent of the closed-form recursion they are checked against.
// ---------------------------------------------------------------------------

// Aggregates over port-spin classes: z_same = Z(ports 1,1), z_diff = Z(ports 1,2),
// m_* the corresponding weighted monochromatic-edge sums.
struct PottsPairState {
    Rat z_same, z_diff, m_same, m_diff;
};

struct EdgeGadget {
    Multigraph graph;
    int port_a = 0, port_b = 0;
    std::string recipe;
    Rat B, S, A;  // effective interaction, susceptibility gap, A = E[m | ports equal]
    PottsPairState state;
    int size() const { return graph.vertex_count(); }
};

// z_s / w_s: weight and weight*observable sums over configurations with the
// root pinned to spin s (root activity included).
struct FieldGadget {
    Multigraph graph;
    int root = 0;
    std::string recipe;
    Rat R, O, A;  // effective field, observable gap, A = E[o | root = 0]
    Rat z0, z1, w0, w1;
    int size() const { return graph.vertex_count(); }
};

EdgeGadget make_single_edge(const PottsRecursion& ctx);
EdgeGadget make_path_gadget(const PottsRecursion& ctx, int edges);  // any length >= 1 (even paths included)

struct EdgeComposition {
    EdgeGadget gadget;
    Rat predicted_B, predicted_S;
};
// Identify the children's first ports into u and second ports into v, then
// add pendant edges {rho,u}, {v,rho'}. k >= 1.
EdgeComposition compose_edge(const PottsRecursion& ctx, const std::vector<const EdgeGadget*>& children);

FieldGadget make_degenerate(const TwoSpinRecursion& ctx);
FieldGadget make_field_edge(const TwoSpinRecursion& ctx);
FieldGadget make_field_path(const TwoSpinRecursion& ctx, int edges);

struct FieldComposition {
    FieldGadget gadget;
    Rat predicted_R, predicted_O;
};
// Identify the children's roots into u, then add the edge {rho,u}. k >= 1.
FieldComposition compose_field(const TwoSpinRecursion& ctx, const std::vector<const FieldGadget*>& children);

// Brute-force statistics from the graph (enumeration; budgeted). The
// independent cross-check route for tests and for arbitrary input graphs.
struct EdgeStatsResult {
    Rat B, S, A;
};
EdgeStatsResult edge_gadget_stats(const Multigraph& g, int port_a, int port_b, int q, const Rat& beta,
                                  const EnumOptions& opts = {});
struct FieldStatsResult {
    Rat R, O, A;
};
FieldStatsResult field_gadget_stats(const Multigraph& g, int root, const TwoSpinParams& p,
                                    const VertexEdgeObservable& obs, const EnumOptions& opts = {});

// Rooted-tree aggregates (z0,z1,w0,w1); handles leaf-attached 4-cycles when
// lambda == (1-beta)/(1-gamma), per the field-gadget definition.
struct FieldAggregates {
    Rat z0, z1, w0, w1;
};
FieldAggregates field_tree_aggregates(const Multigraph& g, int root, const TwoSpinParams& p,
                                      const VertexEdgeObservable& obs);

// Confluent series/parallel reduction: contract degree-2 interior vertices
// and merge parallel edges until fixpoint; two-terminal series-parallel
// graphs reduce to the single edge {s,t}.
bool is_two_terminal_series_parallel(const Multigraph& g, int s, int t);

void validate_edge_gadget(const EdgeGadget& g);
void validate_field_gadget(const FieldGadget& g, const TwoSpinParams& p);

// ---------------------------------------------------------------------------
// Path builder: shortest odd path with 0 < B - 1 < r by the exact recursion.
// ---------------------------------------------------------------------------
struct PathBuild {
    EdgeGadget path;
    int steps;        // recursion depth ell; path has 2*ell + 1 edges
    long ell_bound;   // ceil(log r / log kappa), the a-priori bound
};
PathBuild build_path(const PottsRecursion& ctx, const Rat& r);

// ---------------------------------------------------------------------------
// Dense libraries around the merge fixpoint, by breadth-limited compositional
// closure with exact deduplicated values.
// ---------------------------------------------------------------------------
enum class GadgetKind { PottsEdge, TwoSpinField };

struct LibraryBudget {
    int max_members = 6000;   // candidate pool cap
    int max_rounds = 10;      // closure rounds
    int max_size = 120;       // per-gadget vertex cap
};

struct GadgetLibrary {
    GadgetKind kind;
    std::vector<EdgeGadget> edge_members;    // sorted by B
    std::vector<FieldGadget> field_members;  // sorted by R
    Rat lo, hi;     // covered interval (rational bounds)
    Rat tau, delta; // requested density parameters
    Rat mesh;       // tau * delta, certified
    Rat largest_gap;
    Rat x_lo, x_hi;  // rational bracket of the merge fixpoint (two-spin)
    int members() const {
        return static_cast<int>(kind == GadgetKind::PottsEdge ? edge_members.size()
                                                              : field_members.size());
    }
};

// Rational bracket [lo,hi] of the positive root of x (beta + lambda x^2) =
// 1 + gamma lambda x^2 with hi - lo <= width.
std::pair<Rat, Rat> twospin_merge_fixpoint_bracket(const TwoSpinParams& p, const Rat& width);

GadgetLibrary build_dense_library_potts(const PottsRecursion& ctx, const Rat& tau, const Rat& delta,
                                        const LibraryBudget& budget = {});
GadgetLibrary build_dense_library_twospin(const TwoSpinRecursion& ctx, const Rat& tau, const Rat& delta,
                                          const LibraryBudget& budget = {});

// ---------------------------------------------------------------------------
// Build-gadget: iterated pullback through the library maps
// phi_i(R) = (1 + gamma lambda R R_i)/(beta + lambda R R_i). All interval
// bounds and contraction constants are certified rationals.
// ---------------------------------------------------------------------------
struct BuildContext {
    TwoSpinRecursion rec;
    GadgetLibrary lib;
    Rat I_lo, I_hi;    // target interval I
    Rat Ip_lo, Ip_hi;  // enclosing interval I'
    Rat hull_lo, hull_hi;  // invariant hull containing every intermediate value
    Rat C_min, C_max;  // certified |phi'| range over the hull, C_max < 1
    Rat C;             // envelope constant: |R_t - x| <= C * C_max^t
    Rat T_hat, T;      // |theta| bound on I' and the closure bound; J = [-T, T]
};

BuildContext make_build_context(const TwoSpinRecursion& rec, const GadgetLibrary& lib);
FieldGadget build_gadget(const BuildContext& ctx, const Rat& x, int t);

// ---------------------------------------------------------------------------
// Matched-interaction / separated-gap pair search.
// ---------------------------------------------------------------------------
struct PairBudget {
    int max_members = 8000;
    int max_rounds = 10;
    int max_size = 60;
    // Potts: keep only gadgets whose ports lie in different classes of a
    // bipartition, so the pair can bridge phase-gadget copies in a bipartite
    // composite. Field gadgets are trees and need no filter.
    bool bipartite_ports = true;
};

struct EdgeGadgetPair {
    EdgeGadget first, second;
    Rat value_diff;  // |B1 - B2| <= 2r
    Rat gap_diff;    // |S1 - S2|
    Rat gap_bound;   // 2T: certified upper bound on any achievable gap difference
};
struct FieldGadgetPair {
    FieldGadget first, second;
    Rat value_diff;
    Rat gap_diff;
    Rat gap_bound;
};

EdgeGadgetPair search_gadget_pair_potts(const PottsRecursion& ctx, const Rat& r, const Rat& gap_min,
                                        const PairBudget& budget = {});
FieldGadgetPair search_gadget_pair_twospin(const TwoSpinRecursion& ctx, const Rat& r,
                                           const Rat& gap_min, const PairBudget& budget = {});

// ---------------------------------------------------------------------------
// Recipe evaluation: one expression per line, named bindings 'name = expr',
// expressions: edge | degenerate | path <k> | composeE(e1,...) | composeF(f1,...).
// The last line is the result.
// ---------------------------------------------------------------------------
struct RecipeResult {
    std::optional<EdgeGadget> edge;
    std::optional<FieldGadget> field;
};
RecipeResult evaluate_recipe(const std::string& text, const PottsRecursion* potts_ctx,
                             const TwoSpinRecursion* twospin_ctx);

}  // namespace spinobs
