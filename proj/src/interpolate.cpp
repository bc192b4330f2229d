#include "spinobs/interpolate.hpp"

#include <cmath>

#include <algorithm>

#include "spinobs/errors.hpp"
#include "spinobs/sampler.hpp"

namespace spinobs {

double log_rat(const Rat& x) {
    if (x <= 0) throw NumericalError("log of non-positive rational");
    long en, ed;
    double mn = mpz_get_d_2exp(&en, x.get_num().get_mpz_t());
    double md = mpz_get_d_2exp(&ed, x.get_den().get_mpz_t());
    return std::log(mn) - std::log(md) + (en - ed) * std::log(2.0);
}

namespace {

// Exact observable readings reused across the whole grid from a single
// enumeration sweep.
struct GridOracle {
    bool potts;
    int q;
    Rat beta_fixed, gamma_fixed;  // two-spin edge activities
    std::vector<Int> mono_hist;   // Potts: counts by m(sigma)
    std::map<std::array<int, 3>, Int> ts_hist;

    Rat exact_reading(const Rat& x) const {
        if (potts) {
            // S(beta_hat) = sum k n_k beta^k / sum n_k beta^k
            Rat num(0), den(0), pw(1);
            for (size_t k = 0; k < mono_hist.size(); ++k) {
                Rat term = Rat(mono_hist[k]) * pw;
                den += term;
                num += Rat(static_cast<long>(k)) * term;
                pw *= x;
            }
            return num / den;
        }
        Rat num(0), den(0);
        for (const auto& [key, cnt] : ts_hist) {
            auto [size, m0, m1] = key;
            Rat w = Rat(cnt) * rat_pow(beta_fixed, m0) * rat_pow(gamma_fixed, m1) *
                    rat_pow(x, size);
            den += w;
            num += Rat(size) * w;
        }
        return num / den;
    }
};

GridOracle make_grid_oracle(const ModelParams& model, const Multigraph& g,
                            const EnumOptions& opts) {
    GridOracle go;
    go.potts = is_potts(model);
    if (go.potts) {
        go.q = as_potts(model).q;
        go.mono_hist = potts_mono_histogram(g, go.q, opts);
    } else {
        go.q = 2;
        go.beta_fixed = as_twospin(model).beta;
        go.gamma_fixed = as_twospin(model).gamma;
        go.ts_hist = twospin_histogram(g, opts);
    }
    return go;
}

}  // namespace

Int grid_for_error(const ModelParams& model, const Multigraph& g, const Rat& target, double eps,
                   GridMode mode) {
    validate(model);
    if (eps <= 0) throw ValidationError("eps must be positive");
    double t = to_double(target);
    if (is_potts(model)) {
        if (!(target > 1)) throw ValidationError("Potts target beta* must exceed 1");
        long m = g.edge_count();
        int q = as_potts(model).q;
        if (mode == GridMode::Paper) {
            double v = std::pow(10.0 * q * t * m / eps, 4.0);
            Int M;
            mpz_set_d(M.get_mpz_t(), std::ceil(v));
            return M < 1 ? Int(1) : M;
        }
        // width <= (beta*-1)/M * (S(beta*) - S(1)) <= (beta*-1)/M * m(1-1/q)
        double range = m * (1.0 - 1.0 / q);
        double v = std::ceil((t - 1) * range / eps);
        Int M;
        mpz_set_d(M.get_mpz_t(), v);
        return M < 1 ? Int(1) : M;
    }
    if (!(target > 0)) throw ValidationError("two-spin target lambda* must be positive");
    long n = g.vertex_count();
    const auto& p = as_twospin(model);
    double alpha = to_double(p.beta);
    if (mode == GridMode::Paper) {
        double v = std::pow(10.0 * t * n / (eps * std::max(alpha, 1e-30)), 4.0);
        Int M;
        mpz_set_d(M.get_mpz_t(), std::ceil(v));
        return M < 1 ? Int(1) : M;
    }
    // M range over [1, lambda*]: at most n - n a^3/(1+a^3) on cubic graphs,
    // and at most n always.
    double a3 = std::pow(alpha, 3.0);
    double range = n * (1.0 - a3 / (1.0 + a3));
    double v = std::ceil(std::abs(t - 1) * range / eps);
    Int M;
    mpz_set_d(M.get_mpz_t(), v);
    return M < 1 ? Int(1) : M;
}

IntegrationResult integrate_log_partition(const ModelParams& model, const Multigraph& g,
                                          const OracleHandle& oracle, const Rat& target,
                                          long long M, const EnumOptions& opts) {
    validate(model);
    if (M < 1) throw ValidationError("grid size M must be >= 1");
    const bool potts = is_potts(model);
    if (potts && !(target >= 1))
        throw ValidationError("Potts interpolation integrates beta_hat from 1 upward");
    if (!potts && !(target >= 1))
        throw ValidationError("two-spin interpolation integrates lambda_hat from 1 upward");

    IntegrationResult res;
    res.oracle_calls = 0;
    res.monotone_ok = true;

    GridOracle go;
    if (oracle.kind != OracleKind::Mc) go = make_grid_oracle(model, g, opts);
    // MC chains warm-start: the previous grid point's final configuration
    // seeds the next chain, so only the first point pays the full burn-in.
    std::optional<SpinConfig> warm;

    auto reading_at = [&](const Rat& x, long long i) -> double {
        ++res.oracle_calls;
        switch (oracle.kind) {
            case OracleKind::Exact:
                return to_double(go.exact_reading(x));
            case OracleKind::SyntheticNoise: {
                double exact = to_double(go.exact_reading(x));
                Xoshiro256 rng(oracle.seed, static_cast<uint64_t>(i) + 1);
                double u = 2 * rng.uniform() - 1;
                return exact * (1 + oracle.rel_err * u);
            }
            case OracleKind::Mc: {
                ModelParams m2 = model;
                if (potts) {
                    auto p = as_potts(model);
                    p.beta = x;
                    m2 = p;
                } else {
                    auto p = as_twospin(model);
                    p.lambda = x;
                    m2 = p;
                }
                long long burn = warm ? std::max<long long>(oracle.mc_burn_in / 8, 1)
                                      : oracle.mc_burn_in;
                ChainState chain = glauber_init(g, m2, oracle.seed ^ static_cast<uint64_t>(i * 0x9e37 + 1),
                                                warm);
                for (long long k = 0; k < burn; ++k) glauber_step(g, m2, chain);
                long long thin = g.vertex_count();
                double sum = 0;
                for (long long s = 0; s < oracle.mc_samples; ++s) {
                    for (long long k = 0; k < thin; ++k) glauber_step(g, m2, chain);
                    sum += observable_value(g, m2, magnetization(), chain.config);
                }
                warm = chain.config;
                return sum / static_cast<double>(oracle.mc_samples);
            }
        }
        return 0;
    };

    // base term
    if (potts) {
        res.base_term = g.vertex_count() * std::log(static_cast<double>(as_potts(model).q));
    } else {
        auto p = as_twospin(model);
        p.lambda = 1;
        res.base_term = log_rat(partition_function(g, p, opts));
    }

    if (target == 1) {
        res.lower_sum = res.upper_sum = 0;
        res.bracket = Bracket{res.base_term, res.base_term};
        return res;
    }

    Rat step = Rat(target - 1) / Rat(static_cast<long>(M));
    double lower = 0, upper = 0;
    double prev_reading = 0;
    double noise = (oracle.kind == OracleKind::SyntheticNoise) ? oracle.rel_err : 0;
    double mc_slack = (oracle.kind == OracleKind::Mc) ? 0.25 : 0;
    for (long long i = 0; i <= M; ++i) {
        Rat x = 1 + step * Rat(static_cast<long>(i));
        double r = reading_at(x, i);
        res.grid.push_back(to_double(x));
        res.readings.push_back(r);
        if (i > 0 && r < prev_reading * (1 - 2 * noise - mc_slack) - 1e-12)
            res.monotone_ok = false;
        if (i > 0) {
            // cell [x_prev, x]: S_prev * log(x/x_prev) <= integral <= S * log(x/x_prev)
            Rat x_prev = 1 + step * Rat(static_cast<long>(i - 1));
            double dlog = log_rat(x / x_prev);
            double r_prev = res.readings[static_cast<size_t>(i - 1)];
            lower += (r_prev / (1 + noise)) * dlog;
            upper += (r / std::max(1 - noise, 1e-12)) * dlog;
        }
        prev_reading = r;
    }
    res.lower_sum = lower;
    res.upper_sum = upper;
    res.bracket = Bracket{res.base_term + lower, res.base_term + upper};
    return res;
}

}  // namespace spinobs
