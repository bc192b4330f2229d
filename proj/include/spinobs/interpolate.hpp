#pragma once

#include <cstdint>
#include <vector>

#include "spinobs/exact.hpp"
#include "spinobs/graph.hpp"
#include "spinobs/model.hpp"

namespace spinobs {

// Reconstructs log Z from an observable oracle along a parameter grid.
//
// Potts: d log Z / d beta_hat = S(beta_hat)/beta_hat, so
//   log Z(beta*) = n log q + integral_1^{beta*} S/beta_hat d(beta_hat).
// Two-spin (edge activities fixed): d log Z / d lambda_hat = M/lambda_hat,
// with the base term log Z at lambda_hat = 1 evaluated exactly.
//
// S (resp. M) is nondecreasing in the parameter (the derivative of log Z in
// the log parameter is the observable; its second derivative is a variance),
// so per grid cell [x_i, x_{i+1}]:
//   S_i log(x_{i+1}/x_i)  <=  integral_cell  <=  S_{i+1} log(x_{i+1}/x_i),
// which gives rigorous lower/upper Riemann brackets.

enum class OracleKind { Exact, Mc, SyntheticNoise };

struct OracleHandle {
    OracleKind kind = OracleKind::Exact;
    double rel_err = 0;  // SyntheticNoise: per-reading relative error bound
    uint64_t seed = 0;
    long long mc_samples = 20000;
    long long mc_burn_in = 5000;
};

struct Bracket {
    double lower = 0, upper = 0;
    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

enum class GridMode { Paper, Tight };

// Paper mode: M = ceil((10 q beta* m / eps)^4) (Potts) or the two-spin
// analogue; tight mode: M from the endpoint-difference width bound.
Int grid_for_error(const ModelParams& model, const Multigraph& g, const Rat& target, double eps,
                   GridMode mode);

struct IntegrationResult {
    Bracket bracket;        // includes the base term
    double base_term;       // n log q (Potts) or exact log Z at lambda_hat = 1
    double lower_sum, upper_sum;  // integral part only
    bool monotone_ok;       // readings nondecreasing up to the noise tolerance
    long long oracle_calls;
    std::vector<double> grid;
    std::vector<double> readings;
};

IntegrationResult integrate_log_partition(const ModelParams& model, const Multigraph& g,
                                          const OracleHandle& oracle, const Rat& target,
                                          long long M, const EnumOptions& opts = {});

// Overflow-safe log of a positive rational.
double log_rat(const Rat& x);

}  // namespace spinobs
