#ifndef TWISTLAB_MONTECARLO_HPP
#define TWISTLAB_MONTECARLO_HPP

#include <cstdint>
#include <vector>

#include "twistlab/geometry.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

struct BridgeEstimate {
    Point3 x{0, 0, 0};
    double t = 0.0;
    double delta = 0.0;
    long paths = 0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    bool zero_survivors = false; // p_hat floored; only the upper CI is meaningful

    /// kernel estimate khat(t,x,x) = e^{E1 t} (4 pi t)^{-3/2} p_hat
    double khat(double e1) const;
    double khat_stderr(double e1) const;
};

/// Survival fraction of Brownian bridges (generator = Laplacian, so
/// variance rate 2 per coordinate) from x back to x over [0, t], killed
/// when a dyadic sample point leaves the twisted tube.  Paths are built by
/// midpoint bisection down to resolution <= delta and paired antithetically.
BridgeEstimate survival_probability(const ShapeDescriptor& shape, const TwistProfile& tw,
                                    const Point3& x, double t, long M, double delta,
                                    unsigned seed);

/// Same estimator against a half-space at distance d (1D barrier), whose
/// exact bridge survival is 1 - exp(-d^2/t).
BridgeEstimate halfspace_survival(double d, double t, long M, double delta,
                                  unsigned seed);
double halfspace_exact(double d, double t);

/// Log-log slope of khat(t,x,x) over the time grid; samples with relative
/// standard error above 20% are dropped.
ExperimentReport exponent_probe(const ShapeDescriptor& shape, const TwistProfile& tw,
                                double e1, const Point3& x,
                                const std::vector<double>& times, long M,
                                double delta, unsigned seed);

} // namespace twistlab

#endif
