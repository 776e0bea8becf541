#ifndef TWISTLAB_VARIATIONAL_HPP
#define TWISTLAB_VARIATIONAL_HPP

#include <vector>

#include "twistlab/reference_kernel.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab {

enum class HardyWeight { ThetaDotSq, InverseOneX3Sq };

/// Best constant in the discrete Hardy inequality u^T (H - E1h) u >= c
/// u^T W u on the truncated grid: smallest generalized eigenvalue, found
/// by power iteration on (H - E1h)^{-1} W.
double hardy_constant(const TwistedOperator& op, HardyWeight weight,
                      int max_iters = 300, double tol = 1e-8);

/// Number of eigenvalues of H - E1h - alpha V strictly below -1e-6, by
/// the inertia of a sparse LDL^T factorization.
int count_eigenvalues_below(const TwistedOperator& op, const Vec& V, double alpha);

/// Counting bound N(alpha) <= L_emp * integral (alpha V)^{3/2} (1+x3^2):
/// reports N, the weighted integral and their ratio per alpha.
ExperimentReport lieb_bound_check(const TwistedOperator& op, const Vec& V,
                                  const std::vector<double>& alphas);

/// Plateau profile: 1 on [-R, R], affine ramps of length n down to zero,
/// sampled on the tube grid slices.
std::vector<double> plateau_profile(const TubeGrid& grid, double R, double n);

/// Weighted Sobolev-type inequality
///   Q[u] >= C_p ( integral |u|^p (1+x3^2)^{-gamma} )^{2/p},
/// gamma = (p+2)/4 by default, checked over random compactly supported
/// test functions and the adversarial plateau family u_n = w0 * g_n.
/// C_p_emp is the minimal sampled ratio.
ExperimentReport sobolev_check(const TwistedOperator& op, const WeightField& w0,
                               double p, int trials, unsigned seed,
                               double gamma_override = -1.0);

} // namespace twistlab

#endif
