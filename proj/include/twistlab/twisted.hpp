#ifndef TWISTLAB_TWISTED_HPP
#define TWISTLAB_TWISTED_HPP

#include <Eigen/Sparse>

#include <optional>
#include <vector>

#include "twistlab/eigen2d.hpp"
#include "twistlab/geometry.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

/// Straightened twisted Dirichlet Laplacian assembled as a Gram form
/// H = G^T G: one difference row per lattice edge for the transverse
/// gradients and one row per node for d_3 + theta_dot * (x1 d_2 - x2 d_1),
/// all with zero extension outside the mask.  With theta_dot == 0 the form
/// block-separates and its transverse part reproduces the 5-point stencil
/// of eigen2d exactly, so the stored discrete shift E1h cancels the
/// cross-sectional ground energy with no spurious exponential factor.
class TwistedOperator {
public:
    TwistedOperator(const TubeGrid& grid, const TwistProfile& profile,
                    const EigenBasis2D& basis,
                    const std::optional<Vec>& v_pert = std::nullopt);

    const TubeGrid& grid() const { return *grid_; }
    const TwistProfile& profile() const { return *profile_; }
    const SpMat& form_matrix() const { return H_; }      // H (unshifted)
    const SpMat& shifted_matrix() const { return Hs_; }  // H - E1h
    double E1h() const { return e1h_; }
    bool has_perturbation() const { return perturbed_; }
    bool subcritical() const { return !profile_->is_straight() || perturbed_; }

    double quadratic_form(const Vec& u) const { return u.dot(H_ * u); }
    double shifted_form(const Vec& u) const { return u.dot(Hs_ * u); }

private:
    const TubeGrid* grid_;
    const TwistProfile* profile_;
    SpMat H_, Hs_;
    double e1h_;
    bool perturbed_ = false;
};

/// One evolved kernel column: u(t_k, .) ~ exp(-t_k (H - E1h))(., x0) / vol.
struct KernelField {
    std::int64_t source = -1;
    std::vector<double> times;
    std::vector<Vec> columns;
    double cell_volume = 0.0;
    double e1h = 0.0;
    long total_steps = 0;
    double max_residual = 0.0;

    int time_index(double t) const;
    /// unshifted total mass at t (should stay <= 1 up to CN tolerance)
    double unshifted_mass(double t) const;
    double value_at(double t, std::int64_t node) const;
};

struct EvolveOptions {
    double dt_cap = 0.05;        // absolute sub-step cap
    double dt_frac = 1.0 / 20.0; // sub-step <= t_k * dt_frac
    double cg_tol = 1e-10;
    int rannacher_halfsteps = 4; // implicit-Euler start-up half-steps
};

/// Crank-Nicolson evolution of the shifted operator from a delta at x0.
KernelField evolve(const TwistedOperator& op, std::int64_t x0,
                   const std::vector<double>& times,
                   const EvolveOptions& opts = {});

/// k(2t, x0, x0) as the volume-weighted squared norm of the column at t.
double diag_via_l2(const KernelField& field, double t);

/// Apply exp(-t (H - E1h)) to arbitrary (smooth) initial data.  For
/// non-delta data the start-up damping and the small absolute step cap
/// are unnecessary, so steps follow a geometric ladder with the same
/// per-segment refinement as evolve.
Vec apply_semigroup(const TwistedOperator& op, const Vec& u0, double t,
                    const EvolveOptions& opts = {});

/// Geometric time grid t0 * ratio^k up to t1 (inclusive within rounding).
std::vector<double> geometric_times(double t0, double t1, double ratio);

/// Two-sided long-time envelope check:
/// ratio = k(t,x,x) / (rho^2(x) t^{-1/2} min{(1+x3^2)/t, 1}).
/// Diagonals are extracted with the L2 trick, so columns are evolved to
/// half of the largest requested time.
ExperimentReport envelope_check_main(const TwistedOperator& op,
                                     const std::vector<std::int64_t>& sources,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts = {});

/// Small-time two-sided envelope against min{rho^2/t, 1} t^{-3/2};
/// samples with t < 25 h^2 are dropped with a warning flag.
ExperimentReport small_time_check(const TwistedOperator& op,
                                  const std::vector<std::int64_t>& sources,
                                  const std::vector<double>& times,
                                  const EvolveOptions& opts = {});

/// Off-diagonal Gaussian bound with C = 8: reports the minimal feasible K
/// and the Cauchy-Schwarz diagonal cross-check.
ExperimentReport offdiag_check(const TwistedOperator& op,
                               const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                               const std::vector<double>& times,
                               const EvolveOptions& opts = {});

/// Straight tube plus a nonnegative compactly supported potential bump:
/// the same long-time envelope as envelope_check_main, applied to the
/// perturbed semigroup.  With a nontrivial bump the diagonal decays like
/// t^{-3/2}; with v_pert == 0 it falls back to the critical t^{-1/2} rate.
ExperimentReport perturbation_mode_check(const TubeGrid& grid, const EigenBasis2D& basis,
                                         const Vec& v_pert,
                                         const std::vector<std::int64_t>& sources,
                                         const std::vector<double>& times,
                                         const EvolveOptions& opts = {});

} // namespace twistlab

#endif
