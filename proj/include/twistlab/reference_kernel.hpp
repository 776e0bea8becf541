#ifndef TWISTLAB_REFERENCE_KERNEL_HPP
#define TWISTLAB_REFERENCE_KERNEL_HPP

#include <vector>

#include "twistlab/eigen2d.hpp"
#include "twistlab/geometry.hpp"
#include "twistlab/longitudinal.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

/// Product weight w_j(x) = psi_1(x') g_j(x3) on the tube grid.
struct WeightField {
    int j = 0;
    Vec values;

    double at(std::int64_t node) const { return values[node]; }
};

WeightField weight_field(const TubeGrid& grid, const EigenBasis2D& basis,
                         const std::vector<double>& g, int j);

struct RefKernelValue {
    double value = 0.0;
    double tail_bound = 0.0; // spectral-gap estimate of the dropped modes
    bool tail_warning = false; // tail bound above 1% of the value
};

/// Tensor kernel of the reference operator A = -Lap + theta_dot^2 - E1:
/// sum_{j<=m} e^{t(E1-E_j)} psi_j(x') psi_j(y') q(t, x3, y3).
/// Requires m < basis.m so the first dropped eigenvalue is available for
/// the tail estimate.
RefKernelValue ref_kernel(const TubeGrid& grid, const EigenBasis2D& basis,
                          const Kernel1D& k1, double t, std::int64_t x,
                          std::int64_t y, int m = 12);

/// Empirical constant of the diagonal envelope
///   e^{-tA}(x,x) <= c w0(x)^2 gamma(t),
/// gamma(t) = t^{-5/2} for t <= 1 and t^{-3/2} after.  Only meaningful for
/// a genuinely twisted profile; the straight tube is flagged as skipped.
ExperimentReport ref_envelope_check(const TubeGrid& grid, const EigenBasis2D& basis,
                                    const Kernel1D& k1, const WeightField& w0,
                                    bool twisted, const std::vector<double>& times,
                                    const std::vector<std::int64_t>& nodes, int m = 12);

struct NashCheckResult {
    bool pass = false;
    double lambda_star = 0.0; // smallest dyadic lambda that works
    double worst_margin = 0.0; // min over trials of energy / rate at lambda_star
    double worst_r = 0.0;      // offending L2(w^2) mass when no lambda works
};

/// Sampled weighted Nash inequality: for f with ||f||_{L1(w^2)} = 1,
///   rate_lambda(||f||^2_{L2(w^2)}) <= integral |grad f|^2 w^2,
/// rate = xi_lambda (use_vartheta = false) or vartheta_lambda, over random
/// compactly supported product-tent test functions plus a dilation sweep.
/// Searches lambda in {1, 2, 4, ..., 2^10}.
NashCheckResult nash_inequality_check(const TubeGrid& grid, const WeightField& w,
                                      bool use_vartheta, int trials, unsigned seed);

/// Cross-sectional ultracontractivity surrogate: empirical c with
///   sum_{j<=m} e^{t(E1-E_j)} psi_j(x')^2 <= c psi_1(x')^2  for t >= 1,
/// maximized over interior nodes and the given times.
double cross_ultracontractivity_check(const EigenBasis2D& basis,
                                      const CrossSection& cs,
                                      const std::vector<double>& times);

} // namespace twistlab

#endif
