#pragma once

#include <functional>

namespace rankone {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;  // accumulated error estimate
    int intervals = 0;       // number of leaf intervals used
};

// Adaptive Gauss(7)-Kronrod(15) quadrature on [a, b]. Splits intervals
// until |K15 - G7| on each leaf is below the interval's share of the
// tolerance. Target tolerances per the library default: rel 1e-12 with a
// 1e-10 guarantee on smooth integrands.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-12, double abs_tol = 1e-14,
                                    int max_depth = 40);

// Convenience wrapper returning just the value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-14);

}  // namespace rankone
