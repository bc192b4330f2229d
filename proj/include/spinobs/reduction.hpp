#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinobs/gadgets.hpp"
#include "spinobs/graph.hpp"
#include "spinobs/phase.hpp"

namespace spinobs {

// ---------------------------------------------------------------------------
// Composite instances H^ell: every H-vertex becomes a phase-gadget copy;
// H-edges become port-to-port bridges (Potts: ell paths + one edge gadget;
// two-spin: direct +/+ and -/- edges), two-spin vertices additionally carry
// field-gadget attachments.
// ---------------------------------------------------------------------------

struct CompositeInstance {
    Multigraph graph;
    std::vector<int> gadget_offset;  // H-vertex -> vertex offset of its phase-gadget copy
    // per H-edge: the identified port vertices used by each bridge copy
    struct Bridge {
        int h_edge;
        int port_u, port_v;
        bool is_probe;  // the edge-interaction gadget (vs. a path copy)
    };
    std::vector<Bridge> bridges;
    // two-spin: root ports of the attached field gadgets
    struct Attachment {
        int h_vertex;
        int port;
        int kind;  // 0: T (probe), +1: T_plus, -1: T_minus
    };
    std::vector<Attachment> attachments;
    int delta = 0;

    void audit() const;  // bipartite, degree <= delta, port single-use
};

CompositeInstance build_composite_potts(const Multigraph& H, const PhaseGadget& G,
                                        const EdgeGadget& probe, const EdgeGadget& path, int ell);

CompositeInstance build_composite_twospin(const Multigraph& H, const PhaseGadget& G,
                                          const FieldGadget& T_plus, const FieldGadget& T_minus,
                                          const FieldGadget& probe, int ell_plus, int ell_minus);

// ---------------------------------------------------------------------------
// Effective parameters: the port-collision probabilities R0 > R1 and the
// quantities derived from them.
// ---------------------------------------------------------------------------

struct PottsEffectiveParams {
    Rat p;          // port bias
    Rat R0, R1;     // same-phase / cross-phase collision probabilities
    Rat A0, A1;     // probe-edge alignment probabilities
    Rat beta_hat;   // effective edge activity of the reduced instance
    Rat B_probe, B_path;
    int ell;
};

PottsEffectiveParams potts_effective_params(int q, const Rat& p, const Rat& B_probe,
                                            const Rat& B_path, int ell);

struct TwoSpinEffectiveParams {
    Rat q_plus, q_minus;
    Rat M_pp, M_mm, M_pm, M_mp;  // edge-factor matrix entries
    Rat alpha;                   // M_pp M_mm / (M_pm M_mp), in (0,1)
    Rat lambda_hat;              // effective field of the reduced instance
    Rat R, R_plus, R_minus;
    int ell_plus, ell_minus;
};

TwoSpinEffectiveParams twospin_effective_params(const TwoSpinParams& base, const Rat& q_plus,
                                                const Rat& q_minus, const Rat& R,
                                                const Rat& R_plus, const Rat& R_minus,
                                                int ell_plus, int ell_minus);

// ---------------------------------------------------------------------------
// Reduction planning. Desk-scale parameters are chosen explicitly; the
// paper-prescribed (astronomical) values are computed and reported alongside.
// ---------------------------------------------------------------------------

struct OracleCall {
    std::string graph;     // description of the instance to hand to the oracle
    std::string quantity;  // what to read off
};

struct PottsReductionPlan {
    int q, delta;
    Rat beta;
    Rat target_beta_hat;
    double eta;
    Rat p;             // rational port-bias surrogate used for exact algebra
    bool p_exact;      // true when certified as an exact root
    Rat R0, R1;
    int ell;           // minimal crossing index, ell >= 1
    Rat product_at_ell, product_below;  // crossing audit values
    Rat r_desk, B_path, B_probe_1, B_probe_2, S_probe_1, S_probe_2;
    std::string probe_recipe_1, probe_recipe_2, path_recipe;
    int t_desk;
    double epsilon_paper, t_paper, r_paper;  // the paper's prescriptions
    std::vector<OracleCall> schedule;
    std::string serialize() const;
};

PottsReductionPlan plan_reduction_potts(int q, int delta, const Rat& beta,
                                        const Multigraph& H, const Rat& target_beta_hat,
                                        double eta);

struct TwoSpinReductionPlan {
    TwoSpinParams base;
    VertexEdgeObservable obs;
    int delta;
    Rat target_lambda_hat;
    double eta;
    Rat q_plus, q_minus, alpha;  // rational surrogates
    Rat Lambda_hat;              // target after removing the probe factor
    bool swap_roles;             // Lambda_hat < 1 branch: roles of T_plus/T_minus swap
    int ell;                     // ell_plus = ell_minus = ell
    Rat product_at_ell, product_below;
    Rat R, R_plus, R_minus, O_1, O_2;
    std::string probe_recipe_1, probe_recipe_2, plus_recipe, minus_recipe;
    int t_desk;
    double epsilon_paper, t_paper;
    std::vector<OracleCall> schedule;
    std::string serialize() const;
};

TwoSpinReductionPlan plan_reduction_twospin(const TwoSpinParams& base,
                                            const VertexEdgeObservable& obs, int delta,
                                            const Multigraph& H, const Rat& target_lambda_hat,
                                            double eta);

// ---------------------------------------------------------------------------
// Subtraction estimators (exact algebraic inverses of the forward identities
// at eps' = 0).
// ---------------------------------------------------------------------------

struct PottsReadings {
    Rat S_hat_1, S_hat_2;  // oracle susceptibilities of the two composites
    Rat A_probe_1, A_probe_2;
    Rat S_probe_1, S_probe_2;
};
Rat subtraction_estimate_potts(const PottsReadings& r, const Rat& A0, const Rat& A1,
                               long edges_of_H, const Rat& min_gap = Rat(0));

struct TwoSpinReadings {
    Rat M_hat_1, M_hat_2;  // oracle observable values of the two composites
    Rat A_1, A_2;          // E[o_T | root=0] of the two probes
    Rat O_1, O_2;          // observable gaps of the two probes
};
Rat subtraction_estimate_twospin(const TwoSpinReadings& r, const Rat& q_plus, const Rat& q_minus,
                                 long vertices_of_H, const Rat& min_gap = Rat(0));

// ---------------------------------------------------------------------------
// Idealized phase-marginal identity: under exact product port laws the phase
// vector Y of the composite is Gibbs-distributed on H with the effective
// parameters; returns the maximum relative deviation (exactly 0 by algebra).
// ---------------------------------------------------------------------------

// `target_beta_hat` overrides the implied effective activity (used to measure
// the sensitivity of the identity to port-law perturbations).
Rat idealized_phase_marginal_check_potts(const Multigraph& H, int q, const Rat& p,
                                         const Rat& B_probe, const Rat& B_path, int ell,
                                         const EnumOptions& opts = {},
                                         const std::optional<Rat>& target_beta_hat = std::nullopt);

Rat idealized_phase_marginal_check_twospin(const Multigraph& H, const TwoSpinParams& base,
                                           const Rat& q_plus, const Rat& q_minus, const Rat& R,
                                           const Rat& R_plus, const Rat& R_minus, int ell_plus,
                                           int ell_minus, const EnumOptions& opts = {});

// ---------------------------------------------------------------------------
// Perturbation bounds.
// ---------------------------------------------------------------------------

struct PerturbationResult {
    Rat bound;
    Rat measured;
};

// Potts: F-edges keep activity beta; the rest carry beta0 vs beta1.
// |E_mu[m_F] - E_mu'[m_F]| <= |E(H)|^2 |beta0 - beta1|.
PerturbationResult perturbation_bound_potts(const Multigraph& H, const std::vector<int>& F_edges,
                                            int q, const Rat& beta, const Rat& beta0,
                                            const Rat& beta1, const EnumOptions& opts = {});

// Two-spin: vertices in S carry lambda1 vs lambda2, the rest lambda.
// |E[o_F] difference| <= 2(|a|+|b|+|c|)(|V|^2+|E|^2) |lambda2/lambda1 - 1|.
PerturbationResult perturbation_bound_twospin(const Multigraph& G, const std::vector<int>& S,
                                              const TwoSpinParams& base,
                                              const VertexEdgeObservable& obs, const Rat& lambda1,
                                              const Rat& lambda2,
                                              const std::optional<SubgraphRef>& F = std::nullopt,
                                              const EnumOptions& opts = {});

}  // namespace spinobs
