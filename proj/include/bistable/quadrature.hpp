#pragma once

#include <functional>

namespace bistable {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_panels = 4000;
    int initial_panels = 8;
};

struct QuadratureOutcome {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

// Adaptive Gauss-Kronrod (G7, K15) on [a, b]. Panels are split worst-first
// until the summed K15-G7 deviations fall below abs_tol. Throws
// QuadratureFailure if the panel budget is exhausted first.
QuadratureOutcome integrate_gk(const std::function<double(double)>& f, double a, double b,
                               const QuadratureOptions& opts = {});

}  // namespace bistable
