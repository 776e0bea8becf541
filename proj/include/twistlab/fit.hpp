#ifndef TWISTLAB_FIT_HPP
#define TWISTLAB_FIT_HPP

#include <utility>
#include <vector>

namespace twistlab {

struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0; // log-space
    double ci = 0.0;        // ~95% half-width from residual variance
};

/// Least squares on (log t, log v).  Requires >= 5 samples spanning at
/// least one decade in t and strictly positive values.
PowerFit fit_power_law(const std::vector<std::pair<double, double>>& samples);

} // namespace twistlab

#endif
