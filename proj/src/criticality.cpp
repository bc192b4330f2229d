#include "spinobs/criticality.hpp"

#include <cmath>
#include <functional>

#include "spinobs/errors.hpp"

namespace spinobs {

namespace {

// Bisection to ~1e-15, then a few Newton polish steps with numeric derivative.
double refine_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) throw NumericalError("refine_root: endpoints do not bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0))
            lo = mid, flo = fm;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        double h = 1e-7 * (1 + std::abs(x));
        double d = (f(x + h) - f(x - h)) / (2 * h);
        if (d == 0) break;
        double nx = x - f(x) / d;
        if (nx > lo && nx < hi) x = nx;
    }
    return x;
}

}  // namespace

double potts_beta_c(int q, int delta) {
    if (q < 3 || delta < 3) throw ValidationError("potts_beta_c requires q, Delta >= 3");
    return (q - 2) / (std::pow(q - 1, 1.0 - 2.0 / delta) - 1.0);
}

Rat hardcore_lambda_c(int delta) {
    if (delta < 3) throw ValidationError("hardcore_lambda_c requires Delta >= 3");
    return rat_pow(Rat(delta - 1), delta - 1) / rat_pow(Rat(delta - 2), delta);
}

PortBias potts_port_bias(int q, int delta, const Rat& beta) {
    if (q < 3 || delta < 3) throw ValidationError("potts_port_bias requires q, Delta >= 3");
    double b = to_double(beta);
    if (b <= potts_beta_c(q, delta))
        throw NumericalError("subcritical: beta <= beta_c(q,Delta), no root x > 1");

    auto g = [&](double x) {
        return std::pow((b * x + q - 1) / (x + b + q - 2), delta - 1) - x;
    };
    // g(1) = 0 always; the supercritical fixpoint is the rightmost sign change.
    // Scan down from beyond the maximum possible root.
    double xmax = std::pow(b, delta - 1) + q;
    const int grid = 4096;
    double hi = xmax, lo = 1.0;
    bool found = false;
    double prev_x = xmax, prev_g = g(xmax);
    for (int i = 1; i <= grid; ++i) {
        double x = xmax + (1.0 + 1e-9 - xmax) * i / grid;  // downward toward 1
        double gx = g(x);
        if ((gx > 0) != (prev_g > 0) || gx == 0) {
            lo = x, hi = prev_x;
            found = true;
            break;
        }
        prev_x = x, prev_g = gx;
    }
    if (!found) throw NumericalError("subcritical: no root x > 1 located");
    PortBias out;
    out.x = refine_root(g, lo, hi);
    out.p = out.x / (out.x + q - 1);
    out.residual = std::abs(g(out.x));
    if (out.x <= 1 + 1e-9) throw NumericalError("subcritical: root collapsed to x = 1");

    // Try to certify a nearby small rational as an exact root of
    // x (x + beta + q - 2)^{Delta-1} = (beta x + q - 1)^{Delta-1}.
    for (long den = 1; den <= 64 && !out.exact_x; ++den) {
        long num = std::lround(out.x * static_cast<double>(den));
        Rat cand(num, den);
        cand.canonicalize();
        if (std::abs(to_double(cand) - out.x) > 1e-6) continue;
        Rat lhs = cand * rat_pow(cand + beta + (q - 2), delta - 1);
        Rat rhs = rat_pow(beta * cand + (q - 1), delta - 1);
        if (lhs == rhs && cand > 1) {
            out.exact_x = cand;
            out.exact_p = cand / (cand + (q - 1));
        }
    }
    return out;
}

UniquenessReport twospin_uniqueness(const TwoSpinParams& p, int delta, double guard_band) {
    p.validate();
    if (delta < 3) throw ValidationError("twospin_uniqueness requires Delta >= 3");
    UniquenessReport rep{};
    if (p.beta == 1 && p.gamma == 1) {
        // f is constant; report the trivial fixpoint directly
        rep.x_star = 1.0 / to_double(p.lambda);
        rep.derivative_magnitude = 0;
        rep.in_nonuniqueness = false;
        rep.verdict = UniquenessVerdict::Uniqueness;
        rep.residual = 0;
        return rep;
    }
    if (!p.antiferromagnetic())
        throw ValidationError("twospin_uniqueness requires antiferromagnetic (beta*gamma < 1)");
    double beta = to_double(p.beta), gamma = to_double(p.gamma), lambda = to_double(p.lambda);
    int d = delta - 1;
    auto f = [&](double x) { return (1.0 / lambda) * std::pow((beta * x + 1) / (x + gamma), d); };

    // f is strictly decreasing for antiferromagnetic parameters, so x - f(x)
    // has a unique sign change on (0, inf).
    double lo = 1e-12, hi = 1.0;
    while (f(hi) > hi) hi *= 2;
    while (f(lo) < lo) lo /= 2;
    double x = refine_root([&](double t) { return t - f(t); }, lo, hi);
    rep.x_star = x;
    rep.residual = std::abs(x - f(x));
    // f'(x) = (Delta-1) f(x) (beta*gamma - 1) / ((beta x + 1)(x + gamma))
    double fp = d * f(x) * (beta * gamma - 1) / ((beta * x + 1) * (x + gamma));
    rep.derivative_magnitude = std::abs(fp);
    if (std::abs(rep.derivative_magnitude - 1.0) <= guard_band) {
        rep.verdict = UniquenessVerdict::Boundary;
        rep.in_nonuniqueness = false;
    } else if (rep.derivative_magnitude > 1.0) {
        rep.verdict = UniquenessVerdict::NonUniqueness;
        rep.in_nonuniqueness = true;
    } else {
        rep.verdict = UniquenessVerdict::Uniqueness;
        rep.in_nonuniqueness = false;
    }
    return rep;
}

BranchMarginals twospin_branch_marginals(const TwoSpinParams& p, int delta) {
    auto rep = twospin_uniqueness(p, delta);
    double beta = to_double(p.beta), gamma = to_double(p.gamma), lambda = to_double(p.lambda);
    int d = delta - 1;
    auto f = [&](double x) { return (1.0 / lambda) * std::pow((beta * x + 1) / (x + gamma), d); };

    BranchMarginals out{};
    if (rep.verdict != UniquenessVerdict::NonUniqueness) {
        out.x = out.y = rep.x_star;
        out.q_plus = out.q_minus = 1.0 / (1.0 + rep.x_star);
        out.residual = rep.residual;
        out.degenerate = true;
        return out;
    }
    // Two-cycle: x = f(y), y = f(x) with y > x. g(t) = f(f(t)) - t is positive
    // near 0 and negative just below x*, so the small branch brackets there.
    auto g = [&](double t) { return f(f(t)) - t; };
    double hi = rep.x_star * (1 - 1e-9);
    double lo = hi;
    for (int it = 0; it < 2000; ++it) {
        lo = lo / 2;
        if (g(lo) > 0) break;
        if (lo < 1e-300) throw NumericalError("branch marginal bracket not found");
    }
    if (g(lo) <= 0) throw NumericalError("branch marginal bracket not found");
    double x = refine_root(g, lo, hi);
    double y = f(x);
    out.x = x;
    out.y = y;
    out.q_plus = 1.0 / (1.0 + x);
    out.q_minus = 1.0 / (1.0 + y);
    out.residual = std::max(std::abs(x - f(y)), std::abs(y - f(x)));
    out.degenerate = false;
    if (!(y > x)) throw NumericalError("branch marginals: expected y > x");
    return out;
}

}  // namespace spinobs
