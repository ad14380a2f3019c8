#pragma once

#include <functional>
#include <stdexcept>

namespace hypint {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // estimated bound
    long long evals = 0;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod 7/15 on [a,b].
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 28);

// Trapezoid rule with doubling for smooth 1-periodic integrands on [0,1);
// converges spectrally, stops when two consecutive doublings agree.
QuadResult integrate_periodic(const std::function<double(double)>& f, double abs_tol,
                              int n0 = 16, int n_max = 1 << 20);

// Adaptive tensor quadrature on [u0,u1]x[v0,v1] by tile splitting.
QuadResult integrate_2d(const std::function<double(double, double)>& f, double u0,
                        double u1, double v0, double v1, double abs_tol,
                        int max_depth = 14);

} // namespace hypint
