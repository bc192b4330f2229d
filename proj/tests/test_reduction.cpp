#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spinobs/criticality.hpp"
#include "spinobs/exact.hpp"
#include "spinobs/reduction.hpp"
#include "spinobs/rng.hpp"

using namespace spinobs;

TEST_CASE("effective parameters: worked Potts values") {
    auto e = potts_effective_params(3, Rat(4, 5), Rat(6, 5), Rat(6, 5), 0);
    CHECK(e.R0 == Rat(33, 50));
    CHECK(e.R1 == Rat(17, 100));
    CHECK(e.beta_hat == Rat(566, 517));  // == 1132/1034

    // fixpoint: B = 1 everywhere gives beta_hat = 1
    auto f = potts_effective_params(3, Rat(4, 5), Rat(1), Rat(1), 3);
    CHECK(f.beta_hat == Rat(1));
    CHECK(f.R0 > f.R1);
    CHECK_THROWS_AS(potts_effective_params(3, Rat(1, 4), Rat(6, 5), Rat(6, 5), 0),
                    ValidationError);  // p <= 1/q
}

TEST_CASE("effective parameters: two-spin matrix and alpha") {
    TwoSpinParams is = ising(Rat(1, 2), Rat(1));
    auto e = twospin_effective_params(is, Rat(7, 10), Rat(3, 10), Rat(1), Rat(1), Rat(1), 0, 0);
    CHECK(e.M_pp == Rat(71, 100));
    CHECK(e.M_mm == Rat(71, 100));
    CHECK(e.M_pm == Rat(79, 100));
    CHECK(e.alpha == Rat(71 * 71, 79 * 79));
    CHECK(to_double(e.alpha) == doctest::Approx(0.8077).epsilon(1e-3));
    CHECK(e.lambda_hat == Rat(1));  // R = R+ = R- = 1 fixpoint
    CHECK_THROWS_AS(
        twospin_effective_params(is, Rat(1, 2), Rat(1, 2), Rat(1), Rat(1), Rat(1), 0, 0),
        ValidationError);  // degenerate q+ = q-
}

TEST_CASE("composite builder: Potts structural audits") {
    auto G = sample_phase_gadget(4, 6, 3, 3);  // t = 6 >= 3(ell+1) for ell = 1
    auto ctx = PottsRecursion::make(3, Rat(2));
    auto e = make_single_edge(ctx);
    auto probe = compose_edge(ctx, {&e}).gadget;  // 3-edge path, odd parity
    auto path = make_path_gadget(ctx, 3);
    Multigraph H = complete_bipartite(3, 3);
    auto comp = build_composite_potts(H, G, probe, path, 1);
    comp.audit();
    // vertex count: |V(H)| * |V(G)| + bridge interiors
    int bridge_interior = (probe.size() - 2) + (path.size() - 2);
    CHECK(comp.graph.vertex_count() ==
          H.vertex_count() * G.graph.vertex_count() + H.edge_count() * bridge_interior);
    CHECK(comp.bridges.size() == static_cast<size_t>(H.edge_count() * 2));

    // t too small for the port budget
    auto Gsmall = sample_phase_gadget(4, 5, 3, 3);
    CHECK_THROWS_AS(build_composite_potts(H, Gsmall, probe, path, 1), ValidationError);
    // H must be bipartite
    CHECK_THROWS_AS(build_composite_potts(complete_graph(3), G, probe, path, 0), ValidationError);
}

TEST_CASE("composite builder: two-spin structural audits") {
    auto G = sample_phase_gadget(4, 6, 3, 9);  // t = 6 >= 5 + max(1,1)
    auto ctx = TwoSpinRecursion::make(hardcore(Rat(1)), magnetization());
    auto plus = make_field_path(ctx, 2);
    auto minus = make_field_path(ctx, 1);
    auto probe = make_field_path(ctx, 3);
    Multigraph H = cycle_graph(6);
    auto comp = build_composite_twospin(H, G, plus, minus, probe, 1, 1);
    comp.audit();
    CHECK(comp.graph.bipartition().has_value());
    CHECK(comp.attachments.size() == static_cast<size_t>(3 * H.vertex_count()));
    // vertex count: |V(H)| * |V(G)| plus field-gadget interiors (roots merge
    // into the ports they attach to)
    int per_vertex_interior = (probe.size() - 1) + (plus.size() - 1) + (minus.size() - 1);
    CHECK(comp.graph.vertex_count() ==
          H.vertex_count() * (G.graph.vertex_count() + per_vertex_interior));
    auto Gsmall = sample_phase_gadget(4, 5, 3, 9);
    CHECK_THROWS_AS(build_composite_twospin(H, Gsmall, plus, minus, probe, 1, 1),
                    ValidationError);
}

TEST_CASE("plan: minimal crossing index for Potts") {
    Multigraph H = complete_bipartite(3, 3);
    auto plan = plan_reduction_potts(3, 3, Rat(4), H, Rat(21, 20), 0.1);
    CHECK(plan.p == Rat(2, 3));
    CHECK(plan.p_exact);
    CHECK(plan.ell >= 1);
    CHECK(plan.product_at_ell > Rat(21, 20));
    CHECK(plan.product_below <= Rat(21, 20));
    CHECK(plan.t_desk >= 3 * (plan.ell + 1));
    CHECK(!plan.serialize().empty());

    CHECK_THROWS_AS(plan_reduction_potts(3, 3, Rat(4), H, Rat(1), 0.1), ValidationError);
    CHECK_THROWS_AS(plan_reduction_potts(3, 3, Rat(3), H, Rat(3, 2), 0.1), NumericalError);
}

TEST_CASE("plan: two-spin branch selection") {
    Multigraph H = cycle_graph(6);
    auto plan = plan_reduction_twospin(hardcore(Rat(1)), magnetization(), 6, H, Rat(3, 2), 0.1);
    CHECK(plan.ell >= 1);
    CHECK(plan.alpha > 0);
    CHECK(plan.alpha < 1);
    // large target -> Lambda_hat >= 1 branch, small target -> swapped roles
    auto plan2 = plan_reduction_twospin(hardcore(Rat(1)), magnetization(), 6, H, Rat(1, 3), 0.1);
    CHECK(plan2.swap_roles != plan.swap_roles);
    CHECK_THROWS_AS(plan_reduction_twospin(hardcore(Rat(1)), magnetization(), 5, H, Rat(2), 0.1),
                    NumericalError);  // Delta=5 is in uniqueness at lambda=1
}

TEST_CASE("subtraction estimator: exact synthetic round trip (Potts)") {
    // forward identity with eps' = 0 and matched B: readings constructed from
    // S_{q,beta_hat}(H), then inverted
    Multigraph H = complete_bipartite(3, 3);
    auto eff = potts_effective_params(3, Rat(2, 3), Rat(22, 21), Rat(342, 341), 2);
    Rat S_H = observable_expectation(H, PottsParams{3, eff.beta_hat}, susceptibility_obs());
    long m = H.edge_count();
    Rat bulk(171, 13);  // arbitrary shared bulk term
    PottsReadings r;
    r.A_probe_1 = Rat(18, 11);
    r.A_probe_2 = Rat(7, 5);
    r.S_probe_1 = Rat(16, 77);
    r.S_probe_2 = Rat(1, 19);
    r.S_hat_1 = r.A_probe_1 * m + bulk + r.S_probe_1 * ((eff.A0 - eff.A1) * S_H + eff.A1 * m);
    r.S_hat_2 = r.A_probe_2 * m + bulk + r.S_probe_2 * ((eff.A0 - eff.A1) * S_H + eff.A1 * m);
    Rat rec = subtraction_estimate_potts(r, eff.A0, eff.A1, m);
    CHECK(rec == S_H);

    r.S_probe_2 = r.S_probe_1;  // zero gap rejected
    CHECK_THROWS_AS(subtraction_estimate_potts(r, eff.A0, eff.A1, m), NumericalError);
    r.S_probe_2 = r.S_probe_1 - Rat(1, 1000);  // below an explicit threshold
    CHECK_THROWS_AS(subtraction_estimate_potts(r, eff.A0, eff.A1, m, Rat(1, 100)),
                    NumericalError);
}

TEST_CASE("subtraction estimator: exact synthetic round trip (two-spin)") {
    Multigraph H = cycle_graph(6);
    TwoSpinParams is = ising(Rat(1, 2), Rat(1));
    Rat qp(7, 10), qm(3, 10);
    auto eff = twospin_effective_params(is, qp, qm, Rat(9, 10), Rat(1), Rat(1), 0, 0);
    ModelParams target = ising(eff.alpha, eff.lambda_hat);
    Rat M_H = observable_expectation(H, target, magnetization());
    long n = H.vertex_count();
    Rat bulk(355, 113);
    TwoSpinReadings r;
    r.A_1 = Rat(2, 7);
    r.A_2 = Rat(3, 5);
    r.O_1 = Rat(-1, 2);
    r.O_2 = Rat(1, 4);
    r.M_hat_1 = r.A_1 * n + bulk + r.O_1 * ((qp - qm) * M_H + qm * n);
    r.M_hat_2 = r.A_2 * n + bulk + r.O_2 * ((qp - qm) * M_H + qm * n);
    CHECK(subtraction_estimate_twospin(r, qp, qm, n) == M_H);
}

TEST_CASE("idealized phase-marginal identity holds exactly") {
    // Potts: deviation is identically zero for any H and rational inputs
    for (const Multigraph& H : {complete_bipartite(3, 3), cycle_graph(6), path_graph(4)}) {
        Rat dev = idealized_phase_marginal_check_potts(H, 3, Rat(2, 3), Rat(22, 21),
                                                       Rat(342, 341), 2);
        CHECK(dev == 0);
    }
    TwoSpinParams is = ising(Rat(1, 2), Rat(1));
    for (const Multigraph& H : {cycle_graph(6), complete_bipartite(2, 3), path_graph(5)}) {
        Rat dev = idealized_phase_marginal_check_twospin(H, is, Rat(7, 10), Rat(3, 10),
                                                         Rat(9, 10), Rat(19, 20), Rat(9, 10), 2,
                                                         1);
        CHECK(dev == 0);
    }

    // beta_hat = 1 (B = 1 bridges): the phase law is exactly uniform
    Multigraph H = cycle_graph(4);
    auto eff = potts_effective_params(3, Rat(2, 3), Rat(1), Rat(1), 2);
    CHECK(eff.beta_hat == 1);
    CHECK(idealized_phase_marginal_check_potts(H, 3, Rat(2, 3), Rat(1), Rat(1), 2) == 0);

    // perturbing the port law against the unperturbed target breaks the
    // identity; the deviation is nonzero and bounded by a recomputed sensitivity
    auto eff0 = potts_effective_params(3, Rat(2, 3), Rat(22, 21), Rat(342, 341), 2);
    Rat dev = idealized_phase_marginal_check_potts(H, 3, Rat(2, 3) + Rat(1, 1000), Rat(22, 21),
                                                   Rat(342, 341), 2, {}, eff0.beta_hat);
    CHECK(dev > 0);
    auto effp = potts_effective_params(3, Rat(2, 3) + Rat(1, 1000), Rat(22, 21), Rat(342, 341), 2);
    Rat ratio = effp.beta_hat / eff0.beta_hat;
    Rat sensitivity = rat_pow(rat_max(ratio, 1 / ratio), H.edge_count()) - 1;
    CHECK(dev <= 2 * sensitivity);
}

TEST_CASE("perturbation bounds: worked examples and randomized instances") {
    // 3-edge path, F = first edge, beta0=2 vs beta1=21/10: bound 9/10
    auto r = perturbation_bound_potts(path_graph(3), {0}, 3, Rat(2), Rat(2), Rat(21, 10));
    CHECK(r.bound == Rat(9, 10));
    CHECK(r.measured <= r.bound);

    auto z = perturbation_bound_potts(path_graph(3), {0}, 3, Rat(2), Rat(2), Rat(2));
    CHECK(z.bound == 0);
    CHECK(z.measured == 0);

    // hard-core K2, S = {u}, lambda 1 vs 11/10, magnetization: bound 1
    auto h = perturbation_bound_twospin(k2(), {0}, hardcore(Rat(1)), magnetization(), Rat(1),
                                        Rat(11, 10));
    CHECK(h.bound == Rat(1));
    CHECK(h.measured <= h.bound);

    Xoshiro256 rng(2024);
    for (int it = 0; it < 25; ++it) {
        int n = 3 + static_cast<int>(rng.below(5));
        Multigraph g(n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.below(2)) g.add_edge(u, v);
        if (g.edge_count() == 0) continue;
        std::vector<int> F{0};
        Rat b0(2 + static_cast<long>(rng.below(3)), 1);
        Rat b1 = b0 + Rat(static_cast<long>(rng.below(5)) + 1, 10);
        auto rp = perturbation_bound_potts(g, F, 3, Rat(2), b0, b1);
        CHECK(rp.measured <= rp.bound);

        std::vector<int> S{0};
        Rat l1(1), l2 = 1 + Rat(static_cast<long>(rng.below(4)) + 1, 10);
        auto rt = perturbation_bound_twospin(g, S, hardcore(Rat(1)), magnetization(), l1, l2);
        CHECK(rt.measured <= rt.bound);
        auto ri = perturbation_bound_twospin(g, S, ising(Rat(1, 3), Rat(1)), susceptibility_obs(),
                                             l1, l2);
        CHECK(ri.measured <= ri.bound);
    }
}

TEST_CASE("beta_hat is monotone in ell when B_path > 1") {
    Rat prev(0);
    for (int ell = 0; ell <= 6; ++ell) {
        auto e = potts_effective_params(3, Rat(2, 3), Rat(22, 21), Rat(342, 341), ell);
        if (ell > 0) CHECK(e.beta_hat > prev);
        prev = e.beta_hat;
    }
}

TEST_CASE("end-to-end: plan feeds a buildable, auditable composite") {
    Multigraph H = complete_bipartite(3, 3);
    auto plan = plan_reduction_potts(3, 3, Rat(4), H, Rat(21, 20), 0.1);
    auto ctx = PottsRecursion::make(3, Rat(4));
    auto probe = evaluate_recipe(plan.probe_recipe_1, &ctx, nullptr);
    auto path = evaluate_recipe(plan.path_recipe, &ctx, nullptr);
    REQUIRE(probe.edge.has_value());
    REQUIRE(path.edge.has_value());
    CHECK(probe.edge->B == plan.B_probe_1);
    CHECK(path.edge->B == plan.B_path);
    auto G = sample_phase_gadget(4, plan.t_desk, 3, 77);
    auto comp = build_composite_potts(H, G, *probe.edge, *path.edge, plan.ell);
    comp.audit();
    CHECK(comp.graph.bipartition().has_value());
}
