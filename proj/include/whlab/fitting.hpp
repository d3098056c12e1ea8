#pragma once

#include <vector>

namespace whlab {

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double weighted_r2 = 0;
};

// Weighted least squares of y against x; weights must be nonnegative with at
// least two carrying distinct x.
LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w);

// Removes 2 pi jumps so successive differences lie in (-pi, pi].
std::vector<double> unwrap_phases(std::vector<double> phases);

struct PowerLawFit {
    double a = 0, b = 0, c = 0;  // model y = a x^b + c
    double rms = 0;              // root mean square residual
    double b_stderr = 0;
    int iterations = 0;
    bool converged = false;
};

// Damped Gauss-Newton fit of y = a x^b + c; the exponent is seeded by a grid
// scan with (a, c) solved linearly at each candidate b. Requires x > 0 and at
// least four points.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace whlab
