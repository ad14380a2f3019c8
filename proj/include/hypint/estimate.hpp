#pragma once

#include <cstdint>
#include <string>

namespace hypint {

// Value with uncertainty: std_err is the statistical error (0 for
// deterministic quadrature), error_bound the systematic/quadrature bound.
struct Estimate {
    double value = 0.0;
    double std_err = 0.0;
    long long n_samples = 0;
    std::string method; // "quadrature" | "monte-carlo"
    double error_bound = 0.0;

    double total_tolerance(double sigma_mult = 3.0) const {
        return sigma_mult * std_err + error_bound;
    }
};

} // namespace hypint
