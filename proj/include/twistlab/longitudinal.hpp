#ifndef TWISTLAB_LONGITUDINAL_HPP
#define TWISTLAB_LONGITUDINAL_HPP

#include <Eigen/Dense>

#include <vector>

#include "twistlab/geometry.hpp"

namespace twistlab {

/// Uniform longitudinal grid on (-L, L): interior nodes r_k = -L + (k+1)h3,
/// k = 0 .. n-1, Dirichlet at the two ends.
struct Grid1D {
    double L;
    double h3;
    int n; // interior node count

    Grid1D(double L_, double h3_);
    double r(int k) const { return -L + (k + 1) * h3; }
    /// index of the interior node nearest to r (clamped)
    int node_near(double rr) const;
};

enum class GroundSide { Left, Right };

/// One positive zero-energy solution of -g'' + theta_dot^2 g = 0,
/// normalized g(0) = 1.  side == Right: g is constant for r >= R and
/// affine for r <= -R (and mirrored for Left).
std::vector<double> ground_state(const TwistProfile& tw, GroundSide side,
                                 const Grid1D& grid, double rk_step = 1e-4);

/// Evaluate a ground state at an arbitrary point (constant / affine
/// far-field extension beyond [-R, R], piecewise from the RK solve).
class GroundStateFn {
public:
    GroundStateFn(const TwistProfile& tw, GroundSide side, double rk_step = 1e-4);
    double operator()(double r) const;
    /// Linear growth rate of the normalized (g(0) = 1) solution on its
    /// growing side.
    double far_slope() const {
        return (side_ == GroundSide::Right ? slope_left_ : slope_right_) / norm_;
    }
    bool critical() const { return critical_; }

private:
    GroundSide side_;
    double R_;
    std::vector<double> samples_; // on [-R, R] at rk_step spacing (right side solve)
    double step_;
    double val_left_, slope_left_; // value and derivative at -R (right solve)
    double slope_right_;           // mirrored case
    double norm_;
    bool critical_;
};

struct GroundStates {
    std::vector<double> g1, g2, g0; // sampled on the grid
    double slope1, slope2;          // far-field slopes (g1 at -inf, g2 at +inf)
    bool critical;                  // theta_dot identically zero
};

GroundStates ground_states(const TwistProfile& tw, const Grid1D& grid);

/// Heat kernel of P = -d^2/dr^2 + theta_dot^2 on the truncated interval via
/// full eigendecomposition of the tridiagonal discretization.
class Kernel1D {
public:
    Kernel1D(const TwistProfile& tw, const Grid1D& grid);

    const Grid1D& grid() const { return grid_; }
    /// q(t, r, s) at grid nodes nearest (r, s)
    double q(double t, double r, double s) const;
    double q_nodes(double t, int kr, int ks) const;
    /// heuristic truncation validity: t <= (L - max|r|,|s|)^2 / 8
    bool truncation_valid(double t, double r, double s) const;

    const Eigen::VectorXd& eigenvalues() const { return lambda_; }

private:
    Grid1D grid_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd phi_; // columns, unit Euclidean norm
};

struct RatioEnvelope {
    double c_emp = 0.0;
    double slope = 0.0;      // fitted log-log slope where applicable
    double slope_ci = 0.0;
    bool truncation_warned = false;
};

/// Empirical constant of q(t,r,r) <= c min{ g0(r)^2 t^{-3/2}, t^{-1/2} },
/// plus a log-log slope fit of q(t,0,0) over the largest valid window.
RatioEnvelope kernel1d_envelope_check(const Kernel1D& k, const std::vector<double>& g0,
                            const std::vector<double>& times,
                            const std::vector<double>& points);

struct SobolevCheck1D {
    bool pass = false;
    double min_ratio = 0.0;
};

/// Sampled weighted Sobolev inequality
///   int |f'|^2 g0^2 >= c (int |f|^6 g0^2)^{1/3}
/// over random compactly supported piecewise-linear test functions.
SobolevCheck1D weighted_sobolev_check(const std::vector<double>& g0, const Grid1D& grid,
                                      int trials, unsigned seed);

} // namespace twistlab

#endif
