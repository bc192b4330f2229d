#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinobs/phase.hpp"

using namespace spinobs;

TEST_CASE("configuration-model sample: degree audit and determinism") {
    auto g1 = sample_phase_gadget(4, 2, 3, 42);
    auto g2 = sample_phase_gadget(4, 2, 3, 42);
    CHECK(g1.graph.to_edge_list() == g2.graph.to_edge_list());
    auto g3 = sample_phase_gadget(4, 2, 3, 43);
    // degree multiset per side: {3,3,3,3,2,2}
    auto deg = g1.graph.degrees();
    int d3 = 0, d2 = 0;
    for (int v = 0; v < g1.side_size(); ++v)
        (deg[static_cast<size_t>(v)] == 3 ? d3 : d2) += 1;
    CHECK(d3 == 4);
    CHECK(d2 == 2);
    g1.audit();
    g3.audit();
    CHECK_THROWS_AS(sample_phase_gadget(1, 0, 3, 1), ValidationError);  // K_{1,1} infeasible
}

TEST_CASE("phase extraction: argmax with exact tie attribution") {
    auto g = sample_phase_gadget(2, 1, 3, 7);
    ModelParams potts = PottsParams{3, Rat(5)};
    // all-0 interior: phase 0 with certainty
    SpinConfig sigma(static_cast<size_t>(g.graph.vertex_count()), 0);
    auto attr = phase_attribution(g, sigma, potts);
    CHECK(attr[0] == Rat(1));
    // two-way tie splits 1/2-1/2: colour the left interior 1, right interior 2
    for (int v : g.interior()) sigma[static_cast<size_t>(v)] = g.left(v) ? 1 : 2;
    attr = phase_attribution(g, sigma, potts);
    CHECK(attr[1] == Rat(1, 2));
    CHECK(attr[2] == Rat(1, 2));
    Xoshiro256 rng(1);
    int y = phase_of(g, sigma, potts, rng);
    CHECK((y == 1 || y == 2));

    // two-spin: side with more occupied interior vertices
    ModelParams hc = hardcore(Rat(1));
    SpinConfig tau(static_cast<size_t>(g.graph.vertex_count()), 0);
    int marked = 0;
    for (int v : g.interior())
        if (g.left(v) && marked < 2) {
            tau[static_cast<size_t>(v)] = 1;
            ++marked;
        }
    auto attr2 = phase_attribution(g, tau, hc);
    CHECK(attr2[0] == Rat(1));
}

TEST_CASE("exact assessment: Potts balance is exactly 1/q") {
    auto g = sample_phase_gadget(2, 1, 3, 7);
    ModelParams potts = PottsParams{3, Rat(5)};
    auto a = assess_phase_gadget_exact(g, potts, 2.0 / 3);
    CHECK(a.eps_balance == 0);  // colour symmetry, uniform tie splitting
    CHECK(a.eps_port >= 0);
    // reproducible
    auto b = assess_phase_gadget_exact(g, potts, 2.0 / 3);
    CHECK(a.eps_port == b.eps_port);
}

TEST_CASE("ideal port laws") {
    auto law = ideal_port_distribution_potts(3, 2.0 / 3, 0, {10, 11});
    CHECK(law.probs[0][0] == doctest::Approx(2.0 / 3));
    CHECK(law.probs[0][1] == doctest::Approx(1.0 / 6));
    double total = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) total += law.prob_of({a, b});
    CHECK(total == doctest::Approx(1.0));
    CHECK_THROWS_AS(ideal_port_distribution_potts(3, 0.2, 0, {0}), ValidationError);

    auto law2 = ideal_port_distribution_twospin(0.7, 0.3, 0, {0, 1}, {true, false});
    CHECK(law2.probs[0][1] == doctest::Approx(0.7));
    CHECK(law2.probs[1][1] == doctest::Approx(0.3));
    auto law3 = ideal_port_distribution_twospin(0.7, 0.3, 1, {0, 1}, {true, false});
    CHECK(law3.probs[0][1] == doctest::Approx(0.3));

    // sampler frequencies match the law within 3 sigma at 1e5 draws
    Xoshiro256 rng(99);
    int hits = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i)
        if (law.sample(rng)[0] == 0) ++hits;
    double p = 2.0 / 3, se = std::sqrt(p * (1 - p) / N);
    CHECK(std::abs(static_cast<double>(hits) / N - p) <= 3 * se);
}

TEST_CASE("MC assessment is consistent with exact on a tiny gadget") {
    // mild activity so the chain actually mixes between phases
    auto g = sample_phase_gadget(2, 1, 3, 7);
    ModelParams potts = PottsParams{3, Rat(3, 2)};
    double p = 0.55;  // any admissible port law works for the comparison
    auto ex = assess_phase_gadget_exact(g, potts, p);
    auto mc = assess_phase_gadget_mc(g, potts, p, 0, 40000, 5000, 12345);
    CHECK(std::abs(mc.eps_balance - ex.eps_balance) <= 3 * mc.se_balance + 0.02);
    CHECK(std::abs(mc.eps_port - ex.eps_port) <= 3 * mc.se_port + 0.05);
    CHECK_THROWS_AS(assess_phase_gadget_mc(g, potts, p, 0, 0, 0, 1), ValidationError);
}

TEST_CASE("MC standard errors shrink like 1/sqrt(N)") {
    auto g = sample_phase_gadget(2, 1, 3, 7);
    ModelParams hc = hardcore(Rat(1));
    double se_small = 0, se_big = 0;
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        se_small += assess_phase_gadget_mc(g, hc, 0.55, 0.45, 20000, 2000, seed).se_balance;
        se_big += assess_phase_gadget_mc(g, hc, 0.55, 0.45, 80000, 2000, seed).se_balance;
    }
    double ratio = se_small / se_big;  // expect sqrt(80000/20000) = 2
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}
