#ifndef TWISTLAB_EXPERIMENTS_HPP
#define TWISTLAB_EXPERIMENTS_HPP

#include <vector>

#include "twistlab/reference_kernel.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab {

/// Mixed-exponent off-diagonal bound: for mu, nu in [0,1],
///   k(t,x,y) <= C rho(x) rho(y) (1+x3^2)^{mu/2} (1+y3^2)^{nu/2}
///              * t^{-(1+mu+nu)/2},
/// reporting the empirical C over the sampled pairs and times.
ExperimentReport mixed_offdiag_check(const TwistedOperator& op, double mu, double nu,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts = {});

/// Decay of || exp(-t(H-E1h)) ||_{L^2((1+x3^2)^beta) -> L^2} by power
/// iteration on the weighted propagator normal operator, fitted over the
/// time grid.  Requires beta > (1+kappa)/2; the fitted slope is compared
/// against -(1+kappa)/4 by the caller.
ExperimentReport weighted_decay_check(const TwistedOperator& op, double beta,
                                      double kappa, const std::vector<double>& times,
                                      int power_iters = 30,
                                      const EvolveOptions& opts = {});

/// L^1_beta -> L^2 decay, beta in [0, 1/2]: the upper rate from the
/// weighted supremum of sqrt(k(2t,x,x)) over an axis source family, and a
/// lower probe with the moving source 1 + z3(t)^2 = 2t.  Both slopes are
/// fitted; the target rate is -(1/4) - beta.
ExperimentReport l1_linf_decay_check(const TwistedOperator& op, double beta,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts = {});

/// Kernel-ratio trajectories k(t,x,y)/k(t,x0,y0) for the tensor reference
/// kernel; flat trajectories support pointwise kernel comparability.  No
/// pass/fail is attached: only the flatness of the last decade is logged.
ExperimentReport davies_ratio_plot(const TubeGrid& grid, const EigenBasis2D& basis,
                                   const Kernel1D& k1,
                                   const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                   std::pair<std::int64_t, std::int64_t> base,
                                   const std::vector<double>& times, int m = 12);

} // namespace twistlab

#endif
