#pragma once

#include <cmath>
#include <functional>

namespace firming {

// Brent root bracketing refinement: f(a) and f(b) must have opposite signs.
// Combines bisection with inverse quadratic interpolation / secant steps.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-10, int max_iters = 128);

struct ScalarMin {
    double x = 0.0;
    double value = 0.0;
};

// Brent minimization (golden section with parabolic interpolation) of f on
// [a, b]; returns the located minimizer and its value.
ScalarMin brent_minimize(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-9, int max_iters = 200);

}  // namespace firming
