#include "spinobs/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "spinobs/criticality.hpp"
#include "spinobs/errors.hpp"

namespace spinobs {

void CompositeInstance::audit() const {
    if (!graph.bipartition()) throw ValidationError("composite is not bipartite");
    auto deg = graph.degrees();
    for (int v = 0; v < graph.vertex_count(); ++v)
        if (deg[static_cast<size_t>(v)] > delta)
            throw ValidationError("composite degree exceeds Delta at vertex " + std::to_string(v));
    std::set<int> used;
    for (const auto& b : bridges) {
        if (!used.insert(b.port_u).second || !used.insert(b.port_v).second)
            throw ValidationError("composite uses a port twice");
    }
    for (const auto& a : attachments)
        if (!used.insert(a.port).second) throw ValidationError("composite uses a port twice");
}

namespace {

void require_cubic_bipartite(const Multigraph& H) {
    if (!H.bipartition()) throw ValidationError("H must be bipartite");
    for (int d : H.degrees())
        if (d > 3) throw ValidationError("H must have maximum degree 3");
}

// Deterministic per-copy port allocator over the left (plus) or right (minus)
// side of a phase-gadget copy.
struct PortAllocator {
    int offset, t, side;
    int next_left = 0, next_right = 0;
    int take(bool left_side) {
        int& ctr = left_side ? next_left : next_right;
        if (ctr >= t) throw ValidationError("port budget exceeded on a phase-gadget copy");
        int local = left_side ? ctr : side + ctr;
        ++ctr;
        return offset + local;
    }
};

// Bridges u_port -- gadget -- v_port by appending a gadget copy and
// identifying its ports with the two composite vertices.
void splice_edge_gadget(Multigraph& g, const EdgeGadget& e, int u_port, int v_port) {
    int off = g.append_disjoint(e.graph);
    g.merge_vertices(u_port, off + e.port_a);
    g.merge_vertices(v_port, off + e.port_b);
}

void splice_field_gadget(Multigraph& g, const FieldGadget& f, int port) {
    if (f.graph.vertex_count() == 1) return;  // degenerate: the root is the port itself
    int off = g.append_disjoint(f.graph);
    g.merge_vertices(port, off + f.root);
}

std::vector<std::pair<int, int>> sorted_edges(const Multigraph& H) {
    std::vector<std::pair<int, int>> es = H.edges();
    for (auto& [u, v] : es)
        if (u > v) std::swap(u, v);
    std::sort(es.begin(), es.end());
    return es;
}

}  // namespace

CompositeInstance build_composite_potts(const Multigraph& H, const PhaseGadget& G,
                                        const EdgeGadget& probe, const EdgeGadget& path, int ell) {
    require_cubic_bipartite(H);
    if (ell < 0) throw ValidationError("ell must be >= 0");
    if (G.t < 3 * (ell + 1))
        throw ValidationError("port budget: need t >= 3(ell+1), have t = " + std::to_string(G.t));
    validate_edge_gadget(probe);
    validate_edge_gadget(path);

    CompositeInstance out;
    out.delta = G.delta;
    out.graph = Multigraph(0);
    const int nH = H.vertex_count();
    std::vector<PortAllocator> alloc;
    for (int v = 0; v < nH; ++v) {
        int off = out.graph.append_disjoint(G.graph);
        out.gadget_offset.push_back(off);
        alloc.push_back(PortAllocator{off, G.t, G.side_size()});
    }
    auto es = sorted_edges(H);
    for (size_t ei = 0; ei < es.size(); ++ei) {
        auto [u, v] = es[ei];
        // left-side ports on both copies: the copies' left sides land in
        // opposite classes of the bipartition since H is bipartite
        for (int i = 0; i < ell + 1; ++i) {
            int pu = alloc[static_cast<size_t>(u)].take(true);
            int pv = alloc[static_cast<size_t>(v)].take(true);
            const EdgeGadget& gad = (i == ell) ? probe : path;
            splice_edge_gadget(out.graph, gad, pu, pv);
            out.bridges.push_back({static_cast<int>(ei), pu, pv, i == ell});
        }
    }
    auto remap = out.graph.compact();  // drops the merged-away gadget port slots
    for (auto& b : out.bridges) {
        b.port_u = remap[static_cast<size_t>(b.port_u)];
        b.port_v = remap[static_cast<size_t>(b.port_v)];
    }
    for (auto& off : out.gadget_offset) off = remap[static_cast<size_t>(off)];
    out.audit();
    return out;
}

CompositeInstance build_composite_twospin(const Multigraph& H, const PhaseGadget& G,
                                          const FieldGadget& T_plus, const FieldGadget& T_minus,
                                          const FieldGadget& probe, int ell_plus, int ell_minus) {
    require_cubic_bipartite(H);
    if (ell_plus < 0 || ell_minus < 0) throw ValidationError("ell_pm must be >= 0");
    if (G.t < 5 + std::max(ell_plus, ell_minus))
        throw ValidationError("port budget: need t >= 5 + max(ell+, ell-), have t = " +
                              std::to_string(G.t));

    CompositeInstance out;
    out.delta = G.delta;
    out.graph = Multigraph(0);
    const int nH = H.vertex_count();
    std::vector<PortAllocator> alloc;
    for (int v = 0; v < nH; ++v) {
        int off = out.graph.append_disjoint(G.graph);
        out.gadget_offset.push_back(off);
        alloc.push_back(PortAllocator{off, G.t, G.side_size()});
    }
    for (int v = 0; v < nH; ++v) {
        int port = alloc[static_cast<size_t>(v)].take(true);
        splice_field_gadget(out.graph, probe, port);
        out.attachments.push_back({v, port, 0});
        for (int i = 0; i < ell_plus; ++i) {
            int pp = alloc[static_cast<size_t>(v)].take(true);
            splice_field_gadget(out.graph, T_plus, pp);
            out.attachments.push_back({v, pp, +1});
        }
        for (int i = 0; i < ell_minus; ++i) {
            int pm = alloc[static_cast<size_t>(v)].take(false);
            splice_field_gadget(out.graph, T_minus, pm);
            out.attachments.push_back({v, pm, -1});
        }
    }
    auto es = sorted_edges(H);
    for (size_t ei = 0; ei < es.size(); ++ei) {
        auto [u, v] = es[ei];
        int pu = alloc[static_cast<size_t>(u)].take(true);
        int pv = alloc[static_cast<size_t>(v)].take(true);
        out.graph.add_edge(pu, pv);
        out.bridges.push_back({static_cast<int>(ei), pu, pv, false});
        int mu = alloc[static_cast<size_t>(u)].take(false);
        int mv = alloc[static_cast<size_t>(v)].take(false);
        out.graph.add_edge(mu, mv);
        out.bridges.push_back({static_cast<int>(ei), mu, mv, false});
    }
    auto remap = out.graph.compact();
    for (auto& b : out.bridges) {
        b.port_u = remap[static_cast<size_t>(b.port_u)];
        b.port_v = remap[static_cast<size_t>(b.port_v)];
    }
    for (auto& a : out.attachments) a.port = remap[static_cast<size_t>(a.port)];
    for (auto& off : out.gadget_offset) off = remap[static_cast<size_t>(off)];
    out.audit();
    return out;
}

// ---------------------------------------------------------------------------
// Effective parameters
// ---------------------------------------------------------------------------

PottsEffectiveParams potts_effective_params(int q, const Rat& p, const Rat& B_probe,
                                            const Rat& B_path, int ell) {
    if (q < 3) throw ValidationError("q >= 3 required");
    if (!(p > Rat(1, q) && p < 1)) throw ValidationError("port bias p must lie in (1/q, 1)");
    if (ell < 0) throw ValidationError("ell >= 0 required");
    PottsEffectiveParams e;
    e.p = p;
    e.B_probe = B_probe;
    e.B_path = B_path;
    e.ell = ell;
    Rat onemp = 1 - p;
    e.R0 = p * p + onemp * onemp / (q - 1);
    e.R1 = 2 * p * onemp / (q - 1) + Rat(q - 2) * onemp * onemp / Rat((q - 1) * (q - 1));
    if (!(1 > e.R0 && e.R0 > e.R1 && e.R1 > 0))
        throw NumericalError("collision probabilities violate 1 > R0 > R1 > 0");
    auto align = [&](const Rat& Rj) -> Rat { return B_probe / (B_probe + (1 - Rj) / Rj); };
    e.A0 = align(e.R0);
    e.A1 = align(e.R1);
    auto factor = [&](const Rat& B) -> Rat {
        return (1 + (B - 1) * e.R0) / (1 + (B - 1) * e.R1);
    };
    e.beta_hat = rat_pow(factor(B_path), ell) * factor(B_probe);
    if (B_probe > 1 && B_path > 1 && !(e.beta_hat > 1))
        throw NumericalError("effective beta_hat should exceed 1");
    return e;
}

TwoSpinEffectiveParams twospin_effective_params(const TwoSpinParams& base, const Rat& q_plus,
                                                const Rat& q_minus, const Rat& R,
                                                const Rat& R_plus, const Rat& R_minus,
                                                int ell_plus, int ell_minus) {
    base.validate();
    if (q_plus == q_minus) throw ValidationError("degenerate branch marginals: q+ = q-");
    if (!(q_plus > 0 && q_plus < 1 && q_minus > 0 && q_minus < 1))
        throw ValidationError("q_pm must lie in (0,1)");
    TwoSpinEffectiveParams e;
    e.q_plus = q_plus;
    e.q_minus = q_minus;
    e.R = R;
    e.R_plus = R_plus;
    e.R_minus = R_minus;
    e.ell_plus = ell_plus;
    e.ell_minus = ell_minus;
    auto edge_factor = [&](const Rat& r, const Rat& s) -> Rat {
        return base.beta * (1 - r) * (1 - s) + base.gamma * r * s + r * (1 - s) + (1 - r) * s;
    };
    e.M_pp = edge_factor(q_plus, q_plus);
    e.M_mm = edge_factor(q_minus, q_minus);
    e.M_pm = edge_factor(q_plus, q_minus);
    e.M_mp = e.M_pm;
    e.alpha = e.M_pp * e.M_mm / (e.M_pm * e.M_mp);
    if (base.antiferromagnetic() && !(e.alpha > 0 && e.alpha < 1))
        throw NumericalError("alpha should lie in (0,1) for antiferromagnetic parameters");
    auto vf = [&](const Rat& qq, const Rat& r) -> Rat { return qq * r + 1 - qq; };
    auto ratio = [&](const Rat& r) -> Rat { return vf(q_plus, r) / vf(q_minus, r); };
    e.lambda_hat = ratio(R) * rat_pow(ratio(R_plus), ell_plus) / rat_pow(ratio(R_minus), ell_minus);
    return e;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

namespace {

Rat rat_from_double(double x) {
    // exact dyadic representation of the double
    Rat r;
    mpq_set_d(r.get_mpq_t(), x);
    return r;
}

}  // namespace

std::string PottsReductionPlan::serialize() const {
    std::ostringstream o;
    o << "plan=potts\n";
    o << "q=" << q << "\ndelta=" << delta << "\nbeta=" << to_string(beta) << "\n";
    o << "target_beta_hat=" << to_string(target_beta_hat) << "\neta=" << format_real(eta) << "\n";
    o << "p=" << to_string(p) << "\np_exact=" << (p_exact ? 1 : 0) << "\n";
    o << "R0=" << to_string(R0) << "\nR1=" << to_string(R1) << "\n";
    o << "ell=" << ell << "\n";
    o << "product_at_ell=" << to_string(product_at_ell) << "\n";
    o << "product_below=" << to_string(product_below) << "\n";
    o << "r_desk=" << to_string(r_desk) << "\n";
    o << "B_path=" << to_string(B_path) << "\n";
    o << "B_probe_1=" << to_string(B_probe_1) << "\nB_probe_2=" << to_string(B_probe_2) << "\n";
    o << "S_probe_1=" << to_string(S_probe_1) << "\nS_probe_2=" << to_string(S_probe_2) << "\n";
    o << "path_recipe=" << path_recipe << "\n";
    o << "probe_recipe_1=" << probe_recipe_1 << "\nprobe_recipe_2=" << probe_recipe_2 << "\n";
    o << "t_desk=" << t_desk << "\n";
    o << "epsilon_paper=" << format_real(epsilon_paper) << "\n";
    o << "t_paper=" << format_real(t_paper) << "\n";
    o << "r_paper=" << format_real(r_paper) << "\n";
    o << "glauber_escape_below=" << format_real(std::pow((q - 1) / 3.0, 1.0 / delta))
      << "  # targets under this activity are sampled directly instead\n";
    for (size_t i = 0; i < schedule.size(); ++i)
        o << "oracle_call_" << i << "=" << schedule[i].quantity << " @ " << schedule[i].graph << "\n";
    return o.str();
}

PottsReductionPlan plan_reduction_potts(int q, int delta, const Rat& beta, const Multigraph& H,
                                        const Rat& target_beta_hat, double eta) {
    require_cubic_bipartite(H);
    if (!(target_beta_hat > 1)) throw ValidationError("target beta_hat must exceed 1");
    if (to_double(beta) <= potts_beta_c(q, delta))
        throw NumericalError("subcritical base: beta <= beta_c(q,Delta)");
    if (!(eta > 0 && eta < 1)) throw ValidationError("eta must lie in (0,1)");

    PottsReductionPlan plan;
    plan.q = q;
    plan.delta = delta;
    plan.beta = beta;
    plan.target_beta_hat = target_beta_hat;
    plan.eta = eta;

    auto bias = potts_port_bias(q, delta, beta);
    plan.p_exact = bias.exact_p.has_value();
    plan.p = plan.p_exact ? *bias.exact_p : rat_from_double(bias.p);

    long m = H.edge_count();
    double eps = eta / std::pow(static_cast<double>(m), 5);
    plan.epsilon_paper = eps;

    auto ctx = PottsRecursion::make(q, beta);
    // Desk-scale probe pair and interpolation path.
    plan.r_desk = Rat(1, 100);
    auto pair = search_gadget_pair_potts(ctx, plan.r_desk, Rat(0));
    plan.B_probe_1 = pair.first.B;
    plan.B_probe_2 = pair.second.B;
    plan.S_probe_1 = pair.first.S;
    plan.S_probe_2 = pair.second.S;
    plan.probe_recipe_1 = pair.first.recipe;
    plan.probe_recipe_2 = pair.second.recipe;
    auto pb = build_path(ctx, plan.r_desk);
    plan.B_path = pb.path.B;
    plan.path_recipe = pb.path.recipe;

    auto eff = potts_effective_params(q, plan.p, plan.B_probe_1, plan.B_path, 0);
    plan.R0 = eff.R0;
    plan.R1 = eff.R1;
    auto factor = [&](const Rat& B) -> Rat {
        return (1 + (B - 1) * eff.R0) / (1 + (B - 1) * eff.R1);
    };
    Rat f_path = factor(plan.B_path), f_probe = factor(plan.B_probe_1);
    if (!(f_path > 1)) throw NumericalError("path factor must exceed 1");
    int ell = 1;
    Rat prod = f_path * f_probe;
    while (prod <= target_beta_hat) {
        prod *= f_path;
        ++ell;
        if (ell > 1000000) throw BudgetError("ell search exceeded 1e6");
    }
    plan.ell = ell;
    plan.product_at_ell = prod;
    plan.product_below = prod / f_path;
    if (!(plan.product_below <= target_beta_hat))
        throw NumericalError("ell minimality audit failed");

    plan.t_desk = 3 * (ell + 1);
    double B1 = to_double(plan.B_probe_1);
    double logb = std::log(to_double(target_beta_hat));
    double deltac = 0.5;  // window constant; the desk pair already satisfies B in (1, 1+delta)
    double beta0 = std::pow((q - 1) / 3.0, 1.0 / delta);  // small-activity escape threshold
    plan.t_paper = std::ceil(std::pow(m * logb / (eps * deltac * (B1 - 1)), 4.0));
    plan.r_paper = std::pow(eps, 4) / (10 * deltac * to_double(eff.R0 - eff.R1) * beta0);

    plan.schedule.push_back({"composite H^ell with probe 1", "susceptibility S"});
    plan.schedule.push_back({"composite H^ell with probe 2", "susceptibility S"});
    plan.schedule.push_back({"probe 1 with ports identified", "susceptibility (gives A_probe_1)"});
    plan.schedule.push_back({"probe 2 with ports identified", "susceptibility (gives A_probe_2)"});
    plan.schedule.push_back({"probe 1", "susceptibility (S_probe via 2A - S)"});
    plan.schedule.push_back({"probe 2", "susceptibility (S_probe via 2A - S)"});
    return plan;
}

std::string TwoSpinReductionPlan::serialize() const {
    std::ostringstream o;
    o << "plan=twospin\n";
    o << "beta=" << to_string(base.beta) << "\ngamma=" << to_string(base.gamma)
      << "\nlambda=" << to_string(base.lambda) << "\n";
    o << "obs_a=" << to_string(obs.a) << "\nobs_b=" << to_string(obs.b)
      << "\nobs_c=" << to_string(obs.c) << "\n";
    o << "delta=" << delta << "\n";
    o << "target_lambda_hat=" << to_string(target_lambda_hat) << "\neta=" << format_real(eta) << "\n";
    o << "q_plus=" << to_string(q_plus) << "\nq_minus=" << to_string(q_minus) << "\n";
    o << "alpha=" << to_string(alpha) << "\n";
    o << "Lambda_hat=" << to_string(Lambda_hat) << "\n";
    o << "swap_roles=" << (swap_roles ? 1 : 0) << "\n";
    o << "ell=" << ell << "\n";
    o << "product_at_ell=" << to_string(product_at_ell) << "\n";
    o << "product_below=" << to_string(product_below) << "\n";
    o << "R=" << to_string(R) << "\nR_plus=" << to_string(R_plus)
      << "\nR_minus=" << to_string(R_minus) << "\n";
    o << "O_1=" << to_string(O_1) << "\nO_2=" << to_string(O_2) << "\n";
    o << "probe_recipe_1=" << probe_recipe_1 << "\nprobe_recipe_2=" << probe_recipe_2 << "\n";
    o << "plus_recipe=" << plus_recipe << "\nminus_recipe=" << minus_recipe << "\n";
    o << "t_desk=" << t_desk << "\n";
    o << "epsilon_paper=" << format_real(epsilon_paper) << "\n";
    o << "t_paper=" << format_real(t_paper) << "\n";
    for (size_t i = 0; i < schedule.size(); ++i)
        o << "oracle_call_" << i << "=" << schedule[i].quantity << " @ " << schedule[i].graph << "\n";
    return o.str();
}

TwoSpinReductionPlan plan_reduction_twospin(const TwoSpinParams& base,
                                            const VertexEdgeObservable& obs, int delta,
                                            const Multigraph& H, const Rat& target_lambda_hat,
                                            double eta) {
    require_cubic_bipartite(H);
    if (!(target_lambda_hat > 0)) throw ValidationError("target lambda_hat must be positive");
    if (!(eta > 0 && eta < 1)) throw ValidationError("eta must lie in (0,1)");
    auto uniq = twospin_uniqueness(base, delta);
    if (!uniq.in_nonuniqueness)
        throw NumericalError("base parameters are not in the non-uniqueness region N_Delta");

    TwoSpinReductionPlan plan;
    plan.base = base;
    plan.obs = obs;
    plan.delta = delta;
    plan.target_lambda_hat = target_lambda_hat;
    plan.eta = eta;

    auto bm = twospin_branch_marginals(base, delta);
    plan.q_plus = rat_from_double(bm.q_plus);
    plan.q_minus = rat_from_double(bm.q_minus);

    auto ctx = TwoSpinRecursion::make(base, obs);
    auto pair = search_gadget_pair_twospin(ctx, Rat(1, 100), Rat(0));
    plan.O_1 = pair.first.O;
    plan.O_2 = pair.second.O;
    plan.probe_recipe_1 = pair.first.recipe;
    plan.probe_recipe_2 = pair.second.recipe;
    plan.R = pair.first.R;

    // Interpolation gadgets: two library members with close but distinct
    // effective fields, R_plus > R_minus.
    GadgetLibrary lib = build_dense_library_twospin(ctx, Rat(1, 25), Rat(1, 2));
    if (lib.members() < 2) throw BudgetError("library too small for interpolation gadgets");
    const auto& members = lib.field_members;
    size_t pick = members.size() / 2;
    plan.R_minus = members[pick - 1].R;
    plan.R_plus = members[pick].R;
    plan.minus_recipe = members[pick - 1].recipe;
    plan.plus_recipe = members[pick].recipe;
    if (!(plan.R_plus > plan.R_minus)) throw NumericalError("interpolation gadgets not ordered");

    auto eff0 = twospin_effective_params(base, plan.q_plus, plan.q_minus, plan.R, plan.R_plus,
                                         plan.R_minus, 0, 0);
    plan.alpha = eff0.alpha;
    auto vf = [&](const Rat& qq, const Rat& r) -> Rat { return qq * r + 1 - qq; };
    auto ratio = [&](const Rat& r) -> Rat { return vf(plan.q_plus, r) / vf(plan.q_minus, r); };
    plan.Lambda_hat = target_lambda_hat / ratio(plan.R);
    plan.swap_roles = plan.Lambda_hat < 1;

    Rat step = plan.swap_roles ? Rat(ratio(plan.R_minus) / ratio(plan.R_plus))
                               : Rat(ratio(plan.R_plus) / ratio(plan.R_minus));
    if (plan.swap_roles ? !(step < 1) : !(step > 1))
        throw NumericalError("interpolation step has the wrong direction");
    int ell = 1;
    Rat prod = ratio(plan.R) * step;
    auto crossed = [&](const Rat& x) {
        return plan.swap_roles ? x <= target_lambda_hat : x >= target_lambda_hat;
    };
    while (!crossed(prod)) {
        prod *= step;
        ++ell;
        if (ell > 1000000) throw BudgetError("ell search exceeded 1e6");
    }
    plan.ell = ell;
    plan.product_at_ell = prod;
    plan.product_below = prod / step;
    if (crossed(plan.product_below) && ell > 1)
        throw NumericalError("ell minimality audit failed");

    plan.t_desk = 5 + ell;
    long n = H.vertex_count();
    plan.epsilon_paper = eta / std::pow(static_cast<double>(n), 8);
    plan.t_paper = std::ceil(std::pow(
        std::pow(static_cast<double>(n), 2) * std::abs(std::log(to_double(target_lambda_hat))) /
            plan.epsilon_paper,
        6.0));

    plan.schedule.push_back({"composite H^{l+,l-} with probe 1", "(a,b,c) observable"});
    plan.schedule.push_back({"composite H^{l+,l-} with probe 2", "(a,b,c) observable"});
    plan.schedule.push_back({"probe tree 1 (rooted)", "A_1 = E[o | root=0] by tree DP"});
    plan.schedule.push_back({"probe tree 2 (rooted)", "A_2 = E[o | root=0] by tree DP"});
    return plan;
}

// ---------------------------------------------------------------------------
// Subtraction estimators
// ---------------------------------------------------------------------------

Rat subtraction_estimate_potts(const PottsReadings& r, const Rat& A0, const Rat& A1,
                               long edges_of_H, const Rat& min_gap) {
    Rat gap = r.S_probe_1 - r.S_probe_2;
    if (gap == 0 || rat_abs(gap) < min_gap)
        throw NumericalError("probe susceptibility gaps too close: |S1 - S2| below threshold");
    if (A0 == A1) throw NumericalError("degenerate alignment probabilities: A0 = A1");
    Rat m(edges_of_H);
    return (((r.S_hat_1 - r.S_hat_2) - m * (r.A_probe_1 - r.A_probe_2)) / gap - A1 * m) / (A0 - A1);
}

Rat subtraction_estimate_twospin(const TwoSpinReadings& r, const Rat& q_plus, const Rat& q_minus,
                                 long vertices_of_H, const Rat& min_gap) {
    Rat gap = r.O_1 - r.O_2;
    if (gap == 0 || rat_abs(gap) < min_gap)
        throw NumericalError("probe observable gaps too close: |O1 - O2| below threshold");
    if (q_plus == q_minus) throw NumericalError("degenerate branch marginals: q+ = q-");
    Rat n(vertices_of_H);
    return (((r.M_hat_1 - r.M_hat_2) - n * (r.A_1 - r.A_2)) / gap - q_minus * n) /
           (q_plus - q_minus);
}

// ---------------------------------------------------------------------------
// Idealized phase-marginal identity
// ---------------------------------------------------------------------------

Rat idealized_phase_marginal_check_potts(const Multigraph& H, int q, const Rat& p,
                                         const Rat& B_probe, const Rat& B_path, int ell,
                                         const EnumOptions& opts,
                                         const std::optional<Rat>& target_beta_hat) {
    auto eff = potts_effective_params(q, p, B_probe, B_path, ell);
    if (target_beta_hat) eff.beta_hat = *target_beta_hat;
    const int n = H.vertex_count();
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<uint64_t>(q);
        if (total > opts.max_configs) throw BudgetError("phase-vector enumeration budget exceeded");
    }
    auto contrib = [&](const Rat& B, const Rat& Rj) -> Rat { return 1 + (B - 1) * Rj; };
    std::vector<Rat> ideal, target;
    Rat zi(0), zt(0);
    SpinConfig Y(static_cast<size_t>(n), 0);
    for (;;) {
        Rat w(1), wt(1);
        for (auto [u, v] : H.edges()) {
            bool same = Y[static_cast<size_t>(u)] == Y[static_cast<size_t>(v)];
            const Rat& Rj = same ? eff.R0 : eff.R1;
            w *= rat_pow(contrib(B_path, Rj), ell) * contrib(B_probe, Rj);
            if (same) wt *= eff.beta_hat;
        }
        ideal.push_back(w);
        target.push_back(wt);
        zi += w;
        zt += wt;
        int v = 0;
        while (v < n) {
            if (++Y[static_cast<size_t>(v)] < q) break;
            Y[static_cast<size_t>(v)] = 0;
            ++v;
        }
        if (v == n) break;
    }
    Rat worst(0);
    for (size_t i = 0; i < ideal.size(); ++i) {
        Rat ratio = (ideal[i] / zi) / (target[i] / zt);
        worst = rat_max(worst, rat_abs(ratio - 1));
    }
    return worst;
}

Rat idealized_phase_marginal_check_twospin(const Multigraph& H, const TwoSpinParams& base,
                                           const Rat& q_plus, const Rat& q_minus, const Rat& R,
                                           const Rat& R_plus, const Rat& R_minus, int ell_plus,
                                           int ell_minus, const EnumOptions& opts) {
    auto eff = twospin_effective_params(base, q_plus, q_minus, R, R_plus, R_minus, ell_plus,
                                        ell_minus);
    const int n = H.vertex_count();
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= 2;
        if (total > opts.max_configs) throw BudgetError("phase-vector enumeration budget exceeded");
    }
    auto vf = [&](const Rat& qq, const Rat& r) -> Rat { return qq * r + 1 - qq; };
    // phase + contributes vf(q+,R) vf(q+,R+)^{l+} vf(q-,R-)^{l-}; phase -
    // swaps the port marginals
    Rat vplus = vf(q_plus, R) * rat_pow(vf(q_plus, R_plus), ell_plus) *
                rat_pow(vf(q_minus, R_minus), ell_minus);
    Rat vminus = vf(q_minus, R) * rat_pow(vf(q_minus, R_plus), ell_plus) *
                 rat_pow(vf(q_plus, R_minus), ell_minus);
    std::vector<Rat> ideal, target;
    Rat zi(0), zt(0);
    SpinConfig Y(static_cast<size_t>(n), 0);
    for (;;) {
        Rat w(1), wt(1);
        int occupied = 0;
        for (int v = 0; v < n; ++v)
            if (Y[static_cast<size_t>(v)] == 0) {  // phase 0 is '+'
                w *= vplus;
                ++occupied;
            } else {
                w *= vminus;
            }
        for (auto [u, v] : H.edges()) {
            bool same = Y[static_cast<size_t>(u)] == Y[static_cast<size_t>(v)];
            w *= same ? eff.M_pp * eff.M_mm : eff.M_pm * eff.M_mp;
            if (same) wt *= eff.alpha;
        }
        wt *= rat_pow(eff.lambda_hat, occupied);
        ideal.push_back(w);
        target.push_back(wt);
        zi += w;
        zt += wt;
        int v = 0;
        while (v < n) {
            if (++Y[static_cast<size_t>(v)] < 2) break;
            Y[static_cast<size_t>(v)] = 0;
            ++v;
        }
        if (v == n) break;
    }
    Rat worst(0);
    for (size_t i = 0; i < ideal.size(); ++i) {
        Rat ratio = (ideal[i] / zi) / (target[i] / zt);
        worst = rat_max(worst, rat_abs(ratio - 1));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Perturbation bounds
// ---------------------------------------------------------------------------

PerturbationResult perturbation_bound_potts(const Multigraph& H, const std::vector<int>& F_edges,
                                            int q, const Rat& beta, const Rat& beta0,
                                            const Rat& beta1, const EnumOptions& opts) {
    std::set<int> inF(F_edges.begin(), F_edges.end());
    auto build = [&](const Rat& off_beta) {
        Multigraph g = H;
        for (int e = 0; e < g.edge_count(); ++e)
            g.set_edge_activity(e, inF.count(e) ? beta : off_beta);
        return g;
    };
    SubgraphRef F = SubgraphRef::edges_only(F_edges, H.edges());
    ModelParams m0 = PottsParams{q, beta};
    Multigraph g0 = build(beta0), g1 = build(beta1);
    Rat e0 = observable_expectation(g0, m0, {}, {}, F, opts);
    Rat e1 = observable_expectation(g1, m0, {}, {}, F, opts);
    PerturbationResult r;
    r.measured = rat_abs(e0 - e1);
    r.bound = Rat(H.edge_count()) * Rat(H.edge_count()) * rat_abs(beta0 - beta1);
    return r;
}

PerturbationResult perturbation_bound_twospin(const Multigraph& G, const std::vector<int>& S,
                                              const TwoSpinParams& base,
                                              const VertexEdgeObservable& obs, const Rat& lambda1,
                                              const Rat& lambda2,
                                              const std::optional<SubgraphRef>& F,
                                              const EnumOptions& opts) {
    auto build = [&](const Rat& lam_s) {
        Multigraph g = G;
        for (int v : S) g.set_vertex_activity(v, lam_s);
        return g;
    };
    ModelParams m = base;
    Multigraph g1 = build(lambda1), g2 = build(lambda2);
    Rat e1 = observable_expectation(g1, m, obs, {}, F, opts);
    Rat e2 = observable_expectation(g2, m, obs, {}, F, opts);
    PerturbationResult r;
    r.measured = rat_abs(e2 - e1);
    Rat nn(G.vertex_count()), mm(G.edge_count());
    r.bound = 2 * obs.weight_abs() * (nn * nn + mm * mm) * rat_abs(lambda2 / lambda1 - 1);
    return r;
}

}  // namespace spinobs
