#ifndef TWISTLAB_GREENS_HPP
#define TWISTLAB_GREENS_HPP

#include <string>
#include <vector>

#include "twistlab/reference_kernel.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab {

/// Shifted reference operator A - E1h = (-Lap - E1h) + diag(theta_dot^2)
/// on the tube grid, assembled from the straight-tube Gram form.
SpMat reference_shifted_matrix(const TubeGrid& grid, const TwistProfile& profile,
                               const EigenBasis2D& basis);

struct GreenColumn {
    std::string tag;
    std::int64_t source = -1;
    Vec values;
    double residual = 0.0;

    double at(std::int64_t node) const { return values[node]; }
};

/// Column of the truncated-domain Green function: (H - E1h) G = delta_y /
/// cellvolume with zero Dirichlet data at the truncation ends.  Refuses the
/// critical (straight, unperturbed) operator, whose Green function grows
/// linearly with the truncation length.
GreenColumn green_solve(const SpMat& shifted, const TubeGrid& grid, std::int64_t y,
                        const std::string& tag, bool subcritical);

/// Two-sided Green equivalence between the twisted operator and its
/// reference: empirical C = max over pairs of max(G_t/G_A, G_A/G_t).
ExperimentReport green_ratio_check(const SpMat& shifted_twisted,
                                   const SpMat& shifted_reference,
                                   const TubeGrid& grid,
                                   const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);

/// Positive profile v with (H - E1h) v = 0 in the interior and v = end
/// data at the two truncation ends (per-cross-node values end_lo/end_hi),
/// compared two-sidedly against the product weight w_j over the inner half
/// of the tube.
ExperimentReport harmonic_profile_check(const TwistedOperator& op, const WeightField& wj,
                                        const Vec& end_lo, const Vec& end_hi);

} // namespace twistlab

#endif
