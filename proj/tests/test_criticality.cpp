#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinobs/criticality.hpp"
#include "spinobs/errors.hpp"

using namespace spinobs;

TEST_CASE("potts_beta_c closed form") {
    CHECK(potts_beta_c(3, 3) == doctest::Approx(1.0 / (std::cbrt(2.0) - 1)).epsilon(1e-12));
    CHECK(potts_beta_c(3, 4) == doctest::Approx(1.0 / (std::sqrt(2.0) - 1)).epsilon(1e-12));
    CHECK(potts_beta_c(4, 4) == doctest::Approx(2.0 / (std::sqrt(3.0) - 1)).epsilon(1e-12));
    CHECK_THROWS_AS(potts_beta_c(2, 3), ValidationError);
}

TEST_CASE("port bias: exact root at (3,3,4), subcritical rejection") {
    auto b = potts_port_bias(3, 3, Rat(4));
    REQUIRE(b.exact_x.has_value());
    CHECK(*b.exact_x == Rat(4));
    CHECK(*b.exact_p == Rat(2, 3));
    CHECK(b.residual <= 1e-12);
    CHECK(b.p > 1.0 / 3);

    CHECK_THROWS_AS(potts_port_bias(3, 3, Rat(3)), NumericalError);  // beta_c ~ 3.847 > 3
}

TEST_CASE("port bias residual invariant over a beta scan") {
    for (Rat beta : {Rat(4), Rat(9, 2), Rat(5), Rat(8)}) {
        auto b = potts_port_bias(3, 3, beta);
        CHECK(b.residual <= 1e-12);
        CHECK(b.p > 1.0 / 3);
        CHECK(b.x > 1);
    }
    // p -> 1 as beta grows
    CHECK(potts_port_bias(3, 3, Rat(1000)).p > 0.99);
}

TEST_CASE("hard-core uniqueness classification at lambda = 1") {
    auto r6 = twospin_uniqueness(hardcore(Rat(1)), 6);
    CHECK(r6.in_nonuniqueness);
    auto r5 = twospin_uniqueness(hardcore(Rat(1)), 5);
    CHECK(!r5.in_nonuniqueness);
    CHECK(r5.residual <= 1e-12);
    CHECK(r6.residual <= 1e-12);
    CHECK(hardcore_lambda_c(6) == Rat(3125, 4096));
    CHECK(hardcore_lambda_c(5) == Rat(256, 243));
}

TEST_CASE("beta = gamma = 1 gives a constant recursion") {
    auto r = twospin_uniqueness(TwoSpinParams{Rat(1), Rat(1), Rat(2)}, 5);
    CHECK(r.derivative_magnitude == 0);
    CHECK(!r.in_nonuniqueness);
    CHECK_THROWS_AS(twospin_uniqueness(TwoSpinParams{Rat(2), Rat(2), Rat(1)}, 4), ValidationError);
}

TEST_CASE("hard-core uniqueness crossing matches the closed form") {
    // scan lambda, bracket the |f'| = 1 crossing, compare with
    // (D-1)^(D-1)/(D-2)^D
    for (int delta = 3; delta <= 8; ++delta) {
        double lc = to_double(hardcore_lambda_c(delta));
        double lo = lc / 4, hi = lc * 4;
        CHECK(!twospin_uniqueness(hardcore(Rat(lo * 1000000, 1000000)), delta).in_nonuniqueness);
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            Rat lam(static_cast<long>(mid * 1e9), 1000000000L);
            if (twospin_uniqueness(hardcore(lam), delta).in_nonuniqueness)
                hi = mid;
            else
                lo = mid;
        }
        CHECK(std::abs(0.5 * (lo + hi) - lc) <= 1e-6);  // bisection grid resolution
        // direct check at the threshold +- 1e-9 band
        auto below = twospin_uniqueness(hardcore(Rat(static_cast<long>((lc - 1e-4) * 1e9), 1000000000L)), delta);
        auto above = twospin_uniqueness(hardcore(Rat(static_cast<long>((lc + 1e-4) * 1e9), 1000000000L)), delta);
        CHECK(!below.in_nonuniqueness);
        CHECK(above.in_nonuniqueness);
    }
}

TEST_CASE("hard-core lambda scan has exactly one uniqueness crossing") {
    for (int delta : {3, 6}) {
        Rat lc = hardcore_lambda_c(delta);
        int flips = 0;
        bool prev = false;
        for (int i = 0; i <= 60; ++i) {
            Rat lam = lc * Rat(25 + i * 5, 100);  // scan lc/4 .. ~3 lc
            bool now = twospin_uniqueness(hardcore(lam), delta, 1e-12).in_nonuniqueness;
            if (i > 0 && now != prev) ++flips;
            prev = now;
        }
        CHECK(flips == 1);
    }
}

TEST_CASE("branch marginals: hard-core Delta=6") {
    auto bm = twospin_branch_marginals(hardcore(Rat(1)), 6);
    CHECK(!bm.degenerate);
    CHECK(bm.q_plus > bm.q_minus);
    CHECK(bm.residual <= 1e-10);
    CHECK(bm.y > bm.x);
    CHECK(bm.x > 0);
}

TEST_CASE("branch marginals: Ising symmetry q+ + q- = 1") {
    for (auto [b, d] : std::vector<std::pair<Rat, int>>{{Rat(1, 4), 4}, {Rat(1, 3), 5},
                                                        {Rat(1, 10), 3}}) {
        auto bm = twospin_branch_marginals(ising(b, Rat(1)), d);
        CHECK(!bm.degenerate);
        CHECK(std::abs(bm.q_plus + bm.q_minus - 1.0) <= 1e-10);
        CHECK(std::abs(bm.x * bm.y - 1.0) <= 1e-9);
    }
}

TEST_CASE("branch marginals degenerate in the uniqueness region") {
    auto bm = twospin_branch_marginals(hardcore(Rat(1)), 5);  // lambda_c(5) > 1
    CHECK(bm.degenerate);
    CHECK(bm.q_plus == bm.q_minus);
}

TEST_CASE("two-cycle residual: applying f twice returns x") {
    auto bm = twospin_branch_marginals(hardcore(Rat(1)), 6);
    double beta = 1, gamma = 0, lambda = 1;
    auto f = [&](double x) { return (1 / lambda) * std::pow((beta * x + 1) / (x + gamma), 5); };
    CHECK(std::abs(f(f(bm.x)) - bm.x) <= 1e-10);
}
