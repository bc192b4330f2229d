#pragma once

#include <optional>

#include "spinobs/model.hpp"

namespace spinobs {

// beta_c(q, Delta) = (q-2) / ((q-1)^{1-2/Delta} - 1), q,Delta >= 3.
double potts_beta_c(int q, int delta);

// Hard-core uniqueness threshold (Delta-1)^{Delta-1} / (Delta-2)^Delta.
Rat hardcore_lambda_c(int delta);

struct PortBias {
    double x;                    // largest root > 1 of x = ((bx+q-1)/(x+b+q-2))^{Delta-1}
    double p;                    // x / (x + q - 1)
    double residual;             // |x - f(x)|
    std::optional<Rat> exact_x;  // set when a small rational root certifies exactly
    std::optional<Rat> exact_p;
};

// Requires beta > beta_c(q, Delta); throws NumericalError("subcritical") otherwise.
PortBias potts_port_bias(int q, int delta, const Rat& beta);

enum class UniquenessVerdict { Uniqueness, NonUniqueness, Boundary };

struct UniquenessReport {
    double x_star;                // fixpoint of f(x) = (1/lambda)((beta x + 1)/(x + gamma))^{Delta-1}
    double derivative_magnitude;  // |f'(x_star)|
    bool in_nonuniqueness;        // strict |f'| > 1, outside the guard band
    UniquenessVerdict verdict;    // Boundary when | |f'| - 1 | <= guard band
    double residual;              // |x_star - f(x_star)|
};

UniquenessReport twospin_uniqueness(const TwoSpinParams& p, int delta, double guard_band = 1e-9);

struct BranchMarginals {
    double x, y;            // two-cycle solution, y > x > 0
    double q_plus, q_minus; // 1/(1+x) > 1/(1+y)
    double residual;        // max of the two equation residuals
    bool degenerate;        // set when parameters are in uniqueness (x == y == x*)
};

BranchMarginals twospin_branch_marginals(const TwoSpinParams& p, int delta);

}  // namespace spinobs
