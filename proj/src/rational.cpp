#include "spinobs/rational.hpp"

#include <cctype>
#include <cstdio>

namespace spinobs {

namespace {

bool valid_integer(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

std::optional<Rat> try_parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!valid_integer(num) || !valid_integer(den)) return std::nullopt;
        Rat r;
        if (r.set_str(num + "/" + den, 10) != 0) return std::nullopt;
        if (r.get_den() == 0) return std::nullopt;
        r.canonicalize();
        if (r.get_den() < 0) return std::nullopt;
        return r;
    }
    if (valid_integer(s)) {
        Rat r;
        if (r.set_str(s, 10) != 0) return std::nullopt;
        return r;
    }
    // Decimal / scientific literal: parse mantissa and exponent exactly.
    size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = (s[i] == '-'), ++i;
    std::string digits;
    long frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) return std::nullopt;
    long exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::string e = s.substr(i + 1);
        if (!valid_integer(e)) return std::nullopt;
        try {
            exp10 = std::stol(e);
        } catch (...) {
            return std::nullopt;
        }
        i = s.size();
    }
    if (i != s.size()) return std::nullopt;
    Int mant(digits.empty() ? "0" : digits);
    Rat r(mant);
    long net = exp10 - frac_digits;
    Rat ten(10);
    r *= rat_pow(ten, net);
    if (neg) r = -r;
    r.canonicalize();
    return r;
}

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace spinobs
