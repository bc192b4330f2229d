#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinobs/interpolate.hpp"

using namespace spinobs;

TEST_CASE("grid sizes: paper and tight modes") {
    ModelParams potts = PottsParams{3, Rat(2)};
    // paper mode: ceil((10*3*2*1/1)^4) = 60^4
    Int mp = grid_for_error(potts, k2(), Rat(2), 1.0, GridMode::Paper);
    CHECK(mp == Int(12960000));
    // tight mode at eps = 1e-3: M <= ceil(m (beta*-1)/eps) = 1000
    Int mt = grid_for_error(potts, k2(), Rat(2), 1e-3, GridMode::Tight);
    CHECK(mt <= Int(1000));
    CHECK(mt >= Int(1));
    // crude bound suffices: eps >= m log beta* -> M = 1
    Int m1 = grid_for_error(potts, k2(), Rat(2), std::log(2.0), GridMode::Tight);
    CHECK(m1 == Int(1));
    CHECK_THROWS_AS(grid_for_error(potts, k2(), Rat(2), -1.0, GridMode::Tight), ValidationError);
    CHECK_THROWS_AS(grid_for_error(potts, k2(), Rat(1, 2), 0.1, GridMode::Tight), ValidationError);
}

TEST_CASE("K2 bracket contains log 12 and matches the closed form") {
    ModelParams potts = PottsParams{3, Rat(2)};
    OracleHandle oracle;  // exact
    auto res = integrate_log_partition(potts, k2(), oracle, Rat(2), 1000);
    double logz = std::log(12.0);
    CHECK(res.bracket.lower <= logz);
    CHECK(res.bracket.upper >= logz);
    CHECK(res.bracket.width() <= 1e-3);
    CHECK(res.base_term == doctest::Approx(std::log(9.0)));
    // closed form of the integral part: int_1^2 dx/(x+2) = log(4/3)
    double integral = std::log(4.0 / 3.0);
    CHECK(res.lower_sum <= integral);
    CHECK(res.upper_sum >= integral);
    CHECK(res.monotone_ok);
    CHECK(res.oracle_calls == 1001);
}

TEST_CASE("target at the base point returns the base term exactly") {
    ModelParams potts = PottsParams{3, Rat(2)};
    OracleHandle oracle;
    auto res = integrate_log_partition(potts, k2(), oracle, Rat(1), 10);
    CHECK(res.bracket.width() == 0);
    CHECK(res.bracket.lower == doctest::Approx(std::log(9.0)));
}

TEST_CASE("bracket correctness across small graphs, both models") {
    OracleHandle oracle;
    for (const Multigraph& g : {path_graph(3), cycle_graph(5), complete_graph(4),
                                complete_bipartite(2, 3)}) {
        ModelParams potts = PottsParams{3, Rat(2)};
        auto res = integrate_log_partition(potts, g, oracle, Rat(2), 400);
        double logz = log_rat(partition_function(g, potts));
        CHECK(res.bracket.lower <= logz + 1e-12);
        CHECK(res.bracket.upper >= logz - 1e-12);

        ModelParams is = ising(Rat(1, 2), Rat(3, 2));
        auto res2 = integrate_log_partition(is, g, oracle, Rat(3, 2), 400);
        double logz2 = log_rat(partition_function(g, is));
        CHECK(res2.bracket.lower <= logz2 + 1e-12);
        CHECK(res2.bracket.upper >= logz2 - 1e-12);

        ModelParams hc = hardcore(Rat(2));
        auto res3 = integrate_log_partition(hc, g, oracle, Rat(2), 400);
        double logz3 = log_rat(partition_function(g, hc));
        CHECK(res3.bracket.lower <= logz3 + 1e-12);
        CHECK(res3.bracket.upper >= logz3 - 1e-12);
    }
}

TEST_CASE("bracket width obeys the rectangle bound") {
    ModelParams potts = PottsParams{3, Rat(2)};
    OracleHandle oracle;
    Multigraph g = cycle_graph(5);
    long long M = 250;
    auto res = integrate_log_partition(potts, g, oracle, Rat(2), M);
    double m = g.edge_count();
    double bound = (2.0 - 1.0) / static_cast<double>(M) * (m - m / 3.0);
    CHECK(res.bracket.width() <= bound + 1e-12);
}

TEST_CASE("synthetic noise stays inside the inflated bracket") {
    ModelParams potts = PottsParams{3, Rat(2)};
    OracleHandle noisy;
    noisy.kind = OracleKind::SyntheticNoise;
    noisy.rel_err = 1e-3;
    noisy.seed = 77;
    auto res = integrate_log_partition(potts, k2(), noisy, Rat(2), 10000);
    double logz = std::log(12.0);
    CHECK(res.bracket.lower <= logz);
    CHECK(res.bracket.upper >= logz);
    CHECK(res.monotone_ok);

    // midpoint error <= width + eps_o * |sum of readings| (coarse noise bound)
    OracleHandle exact;
    auto ref = integrate_log_partition(potts, k2(), exact, Rat(2), 10000);
    double sum_abs = 0;
    for (double r : ref.readings) sum_abs += std::abs(r);
    CHECK(std::abs(res.bracket.midpoint() - logz) <=
          res.bracket.width() + noisy.rel_err * sum_abs);
}

TEST_CASE("non-monotone readings beyond the tolerance raise the flag") {
    // an MC oracle with very few samples produces readings that cannot be
    // explained by the declared tolerance on a flat integrand
    ModelParams hc = hardcore(Rat(1));
    Multigraph g = cycle_graph(6);
    bool tripped = false;
    for (uint64_t seed = 1; seed <= 10 && !tripped; ++seed) {
        OracleHandle mc;
        mc.kind = OracleKind::Mc;
        mc.mc_samples = 10;
        mc.mc_burn_in = 5;
        mc.seed = seed;
        auto res = integrate_log_partition(hc, g, mc, Rat(101, 100), 6);
        tripped = !res.monotone_ok;
    }
    CHECK(tripped);
}

TEST_CASE("log_rat is overflow-safe") {
    Rat big = rat_pow(Rat(10), 400) + 1;
    CHECK(log_rat(big) == doctest::Approx(400 * std::log(10.0)));
    CHECK(log_rat(1 / big) == doctest::Approx(-400 * std::log(10.0)));
    CHECK_THROWS_AS(log_rat(Rat(0)), NumericalError);
}
