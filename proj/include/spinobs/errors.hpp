#pragma once

#include <stdexcept>
#include <string>

namespace spinobs {

// Error taxonomy mirrors the CLI exit codes: validation -> 2, budget -> 3,
// numerical failure -> 4.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinobs
