#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace spinobs {

// Exact rational arithmetic. All model activities, partition functions and
// gadget statistics are mpq; floating point only enters for fixpoint solvers
// and Monte Carlo summaries.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

// x^e with the convention 0^0 == 1.
inline Rat rat_pow(const Rat& x, long e) {
    if (e == 0) return Rat(1);
    if (e < 0) {
        if (x == 0) throw std::domain_error("rat_pow: 0 to negative power");
        return 1 / rat_pow(x, -e);
    }
    Rat acc(1), base(x);
    unsigned long n = static_cast<unsigned long>(e);
    while (n) {
        if (n & 1) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

inline double to_double(const Rat& x) { return x.get_d(); }

inline Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }
inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// Accepts "p/q", integer literals, and decimal literals ("0.25", "-3.1e2").
std::optional<Rat> try_parse_rational(const std::string& s);

inline Rat parse_rational(const std::string& s) {
    auto r = try_parse_rational(s);
    if (!r) throw std::invalid_argument("malformed rational: '" + s + "'");
    return *r;
}

inline std::string to_string(const Rat& x) { return x.get_str(); }

// 17 significant digits, the CSV convention for reals.
std::string format_real(double x);

}  // namespace spinobs
