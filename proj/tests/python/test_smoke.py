"""Smoke tests for the python module: every major operation is exercised once
against a known exact value."""

from fractions import Fraction

import pytest

import spinobs as so


def test_exact_partition_and_observables():
    g = so.k2()
    potts = so.PottsParams(3, Fraction(2))
    assert so.partition_function(g, potts) == Fraction(12)
    assert so.observable_expectation(g, potts, so.susceptibility()) == Fraction(1, 2)
    hc = so.hardcore(Fraction(1))
    assert so.partition_function(g, hc) == Fraction(3)
    assert so.observable_expectation(g, hc, so.magnetization()) == Fraction(2, 3)


def test_pins_and_probability():
    pins = so.PinSet().equal_spins(0, 1)
    assert so.gibbs_probability(so.k2(), so.PottsParams(3, Fraction(2)), pins) == Fraction(1, 2)
    both = so.PinSet().pin(0, 1).pin(1, 1)
    assert so.gibbs_probability(so.k2(), so.hardcore(Fraction(1)), both) == 0


def test_graph_io_and_validation():
    g = so.Multigraph.from_edge_list("2 1\n0 1\n")
    assert g.vertex_count == 2 and g.edge_count == 1
    with pytest.raises(ValueError):
        so.Multigraph.from_edge_list("2 1\n0 1 2//3\n")
    with pytest.raises(ValueError):
        g2 = so.Multigraph(2)
        g2.add_edge(0, 0)


def test_criticality():
    assert abs(so.potts_beta_c(3, 3) - 3.847322) < 1e-5
    bias = so.potts_port_bias(3, 3, Fraction(4))
    assert bias.exact_p == Fraction(2, 3)
    assert so.hardcore_lambda_c(6) == Fraction(3125, 4096)
    assert so.twospin_uniqueness(so.hardcore(Fraction(1)), 6).in_nonuniqueness
    assert not so.twospin_uniqueness(so.hardcore(Fraction(1)), 5).in_nonuniqueness
    bm = so.twospin_branch_marginals(so.hardcore(Fraction(1)), 6)
    assert bm.q_plus > bm.q_minus and bm.residual <= 1e-10


def test_gadget_algebra():
    ctx = so.PottsRecursion.make(3, Fraction(2))
    assert ctx.kappa == Fraction(1, 16)
    p3 = so.make_path_gadget(ctx, 3)
    assert p3.B == Fraction(22, 21)
    e1, e2 = so.make_single_edge(ctx), so.make_single_edge(ctx)
    comp, pred_B, pred_S = so.compose_edge(ctx, [e1, e2])
    assert comp.B == pred_B == Fraction(34, 31)

    tctx = so.TwoSpinRecursion.make(so.hardcore(Fraction(1)), so.magnetization())
    f1, f2 = so.make_field_edge(tctx), so.make_field_edge(tctx)
    two, pred_R, pred_O = so.compose_field(tctx, [f1, f2])
    assert two.R == Fraction(4, 5) and two.O == 0

    pb = so.build_path(ctx, Fraction(1, 20))
    assert pb.path.graph.edge_count == 3 and pb.path.B - 1 == Fraction(1, 21)


def test_recipe_round_trip():
    ctx = so.PottsRecursion.make(3, Fraction(2))
    res = so.evaluate_recipe("composeE(path 3,edge)", potts_ctx=ctx)
    assert res.edge is not None
    rebuilt = so.evaluate_recipe(res.edge.recipe, potts_ctx=ctx)
    assert rebuilt.edge.B == res.edge.B


def test_library_and_build_gadget():
    tctx = so.TwoSpinRecursion.make(so.hardcore(Fraction(1)), so.magnetization())
    lib = so.build_dense_library_twospin(tctx, Fraction(1, 50), Fraction(1, 4))
    assert lib.largest_gap == 0 and lib.members() >= 2
    bctx = so.make_build_context(tctx, lib)
    assert 0 < bctx.C_max < 1
    x = (bctx.I_lo + bctx.I_hi) / 2
    g = so.build_gadget(bctx, x, 5)
    assert abs(g.R - x) <= bctx.C * bctx.C_max**5


def test_pair_search():
    ctx = so.PottsRecursion.make(3, Fraction(2))
    pair = so.search_gadget_pair_potts(ctx, Fraction(1, 100), Fraction(0))
    assert pair.value_diff <= Fraction(2, 100)
    assert pair.gap_diff > 0


def test_phase_gadgets():
    pg = so.sample_phase_gadget(4, 2, 3, seed=42)
    pg.audit()
    a = so.assess_phase_gadget_exact(
        so.sample_phase_gadget(2, 1, 3, seed=7), so.PottsParams(3, Fraction(5)), 2 / 3
    )
    assert a.eps_balance == 0
    with pytest.raises(ValueError):
        so.sample_phase_gadget(1, 0, 3, seed=1)


def test_reduction_round_trip():
    H = so.complete_bipartite(3, 3)
    eff = so.potts_effective_params(3, Fraction(2, 3), Fraction(22, 21), Fraction(342, 341), 2)
    assert eff.R0 == Fraction(1, 2)  # (2/3)^2 + (1/3)^2 / 2
    S_H = so.observable_expectation(H, so.PottsParams(3, eff.beta_hat), so.susceptibility())
    m = H.edge_count
    readings = so.PottsReadings(
        S_hat_1=Fraction(18, 11) * m + Fraction(1, 7)
        + Fraction(16, 77) * ((eff.A0 - eff.A1) * S_H + eff.A1 * m),
        S_hat_2=Fraction(7, 5) * m + Fraction(1, 7)
        + Fraction(1, 19) * ((eff.A0 - eff.A1) * S_H + eff.A1 * m),
        A_probe_1=Fraction(18, 11),
        A_probe_2=Fraction(7, 5),
        S_probe_1=Fraction(16, 77),
        S_probe_2=Fraction(1, 19),
    )
    assert so.subtraction_estimate_potts(readings, eff.A0, eff.A1, m) == S_H
    dev = so.idealized_phase_marginal_check_potts(
        H, 3, Fraction(2, 3), Fraction(22, 21), Fraction(342, 341), 2
    )
    assert dev == 0


def test_perturbation_bound():
    r = so.perturbation_bound_potts(
        so.path_graph(3), [0], 3, Fraction(2), Fraction(2), Fraction(21, 10)
    )
    assert r.bound == Fraction(9, 10) and r.measured <= r.bound


def test_interpolation():
    import math

    potts = so.PottsParams(3, Fraction(2))
    oracle = so.OracleHandle()
    res = so.integrate_log_partition(potts, so.k2(), oracle, Fraction(2), 1000)
    assert res.bracket.lower <= math.log(12) <= res.bracket.upper
    assert res.bracket.width() <= 1e-3
    M = so.grid_for_error(potts, so.k2(), Fraction(2), 1.0, so.GridMode.Paper)
    assert M == 60**4


def test_sampler():
    est = so.mc_estimate(
        so.k2(), so.PottsParams(3, Fraction(2)), so.susceptibility(), 20000, 2000, 2, seed=7
    )
    assert abs(est.mean - 0.5) <= 4 * est.std_error
    c1 = so.glauber_run(so.cycle_graph(5), so.hardcore(Fraction(1)), 1000, seed=3)
    c2 = so.glauber_run(so.cycle_graph(5), so.hardcore(Fraction(1)), 1000, seed=3)
    assert c1.config == c2.config
    P = so.glauber_kernel(so.k2(), so.hardcore(Fraction(1)))
    assert sum(P[0]) == 1
