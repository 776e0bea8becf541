#include "twistlab/longitudinal.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "twistlab/fit.hpp"

namespace twistlab {

Grid1D::Grid1D(double L_, double h3_) : L(L_), h3(h3_) {
    if (L <= 0 || h3 <= 0) throw std::invalid_argument("bad 1D grid");
    double m = 2.0 * L / h3;
    int mt = static_cast<int>(std::llround(m));
    if (std::abs(m - mt) > 1e-9) throw std::invalid_argument("h3 must divide 2L");
    n = mt - 1;
}

int Grid1D::node_near(double rr) const {
    int k = static_cast<int>(std::llround((rr + L) / h3)) - 1;
    return std::clamp(k, 0, n - 1);
}

GroundStateFn::GroundStateFn(const TwistProfile& tw, GroundSide side, double rk_step)
    : side_(side), R_(tw.R()), step_(rk_step), critical_(tw.is_straight()) {
    // Shoot from the flat side where the solution is exactly constant:
    // g(R) = 1, g'(R) = 0, integrate -g'' + theta_dot^2 g = 0 down to -R
    // with classical RK4.  The Left solution is the mirror image (the
    // default bump is even).
    int nsteps = static_cast<int>(std::ceil(2.0 * R_ / rk_step));
    step_ = 2.0 * R_ / nsteps;
    samples_.assign(nsteps + 1, 1.0);
    double g = 1.0, dg = 0.0;
    samples_[nsteps] = g;
    auto rhs = [&](double r, double gv, double dgv, double& og, double& odg) {
        double td = tw.theta_dot(r);
        og = dgv;
        odg = td * td * gv;
    };
    for (int i = nsteps; i > 0; --i) {
        double r = -R_ + i * step_;
        double hh = -step_;
        double k1g, k1d, k2g, k2d, k3g, k3d, k4g, k4d;
        rhs(r, g, dg, k1g, k1d);
        rhs(r + hh / 2, g + hh / 2 * k1g, dg + hh / 2 * k1d, k2g, k2d);
        rhs(r + hh / 2, g + hh / 2 * k2g, dg + hh / 2 * k2d, k3g, k3d);
        rhs(r + hh, g + hh * k3g, dg + hh * k3d, k4g, k4d);
        g += hh / 6 * (k1g + 2 * k2g + 2 * k3g + k4g);
        dg += hh / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
        samples_[i - 1] = g;
        if (g <= 0.0) throw std::runtime_error("numerical loss of minimality");
    }
    val_left_ = g;
    slope_left_ = dg; // <= 0: the solution grows linearly to the left
    slope_right_ = -dg;
    // normalize g(0) = 1
    int k0 = static_cast<int>(std::llround(R_ / step_));
    norm_ = samples_[std::clamp(k0, 0, nsteps)];
}

double GroundStateFn::operator()(double r) const {
    double rr = (side_ == GroundSide::Right) ? r : -r;
    double raw;
    if (rr >= R_) {
        raw = 1.0;
    } else if (rr <= -R_) {
        raw = val_left_ + slope_left_ * (rr + R_);
    } else {
        double u = (rr + R_) / step_;
        int i = std::clamp(static_cast<int>(u), 0, static_cast<int>(samples_.size()) - 2);
        double w = u - i;
        raw = (1 - w) * samples_[i] + w * samples_[i + 1];
    }
    return raw / norm_;
}

std::vector<double> ground_state(const TwistProfile& tw, GroundSide side,
                                 const Grid1D& grid, double rk_step) {
    GroundStateFn fn(tw, side, rk_step);
    std::vector<double> g(grid.n);
    for (int k = 0; k < grid.n; ++k) {
        g[k] = fn(grid.r(k));
        if (g[k] <= 0.0) throw std::runtime_error("numerical loss of minimality");
    }
    return g;
}

GroundStates ground_states(const TwistProfile& tw, const Grid1D& grid) {
    GroundStates gs;
    GroundStateFn f1(tw, GroundSide::Right), f2(tw, GroundSide::Left);
    gs.g1.resize(grid.n);
    gs.g2.resize(grid.n);
    gs.g0.resize(grid.n);
    for (int k = 0; k < grid.n; ++k) {
        double r = grid.r(k);
        gs.g1[k] = f1(r);
        gs.g2[k] = f2(r);
        gs.g0[k] = 0.5 * (gs.g1[k] + gs.g2[k]);
    }
    gs.slope1 = f1.far_slope();
    gs.slope2 = f2.far_slope();
    gs.critical = tw.is_straight();
    return gs;
}

Kernel1D::Kernel1D(const TwistProfile& tw, const Grid1D& grid) : grid_(grid) {
    const int n = grid.n;
    const double ih2 = 1.0 / (grid.h3 * grid.h3);
    std::vector<double> d(n), e(n - 1, -ih2);
    for (int k = 0; k < n; ++k) {
        double td = tw.theta_dot(grid.r(k));
        d[k] = 2.0 * ih2 + td * td;
    }
    phi_.resize(n, n);
    lambda_.resize(n);
    lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, d.data(), e.data(),
                                     phi_.data(), n);
    if (info != 0) throw std::runtime_error("tridiagonal eigensolver failed");
    for (int k = 0; k < n; ++k) lambda_[k] = d[k];
}

double Kernel1D::q_nodes(double t, int kr, int ks) const {
    const int n = grid_.n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        double lt = lambda_[j] * t;
        if (lt > 45.0) break; // ascending eigenvalues: tail below 1e-19
        acc += std::exp(-lt) * phi_(kr, j) * phi_(ks, j);
    }
    return acc / grid_.h3;
}

double Kernel1D::q(double t, double r, double s) const {
    return q_nodes(t, grid_.node_near(r), grid_.node_near(s));
}

bool Kernel1D::truncation_valid(double t, double r, double s) const {
    double d = grid_.L - std::max(std::abs(r), std::abs(s));
    return t <= d * d / 8.0;
}

RatioEnvelope kernel1d_envelope_check(const Kernel1D& k, const std::vector<double>& g0,
                            const std::vector<double>& times,
                            const std::vector<double>& points) {
    RatioEnvelope env;
    std::vector<std::pair<double, double>> slope_samples;
    for (double t : times) {
        for (double r : points) {
            if (!k.truncation_valid(t, r, r)) {
                env.truncation_warned = true;
                continue;
            }
            int kr = k.grid().node_near(r);
            double qv = k.q_nodes(t, kr, kr);
            double bound = std::min(g0[kr] * g0[kr] * std::pow(t, -1.5),
                                    std::pow(t, -0.5));
            env.c_emp = std::max(env.c_emp, qv / bound);
            if (r == 0.0 && t >= 8.0) slope_samples.emplace_back(t, qv);
        }
    }
    if (slope_samples.size() >= 5) {
        PowerFit f = fit_power_law(slope_samples);
        env.slope = f.slope;
        env.slope_ci = f.ci;
    }
    return env;
}

SobolevCheck1D weighted_sobolev_check(const std::vector<double>& g0, const Grid1D& grid,
                                      int trials, unsigned seed) {
    if (trials < 100) throw std::invalid_argument("need at least 100 trials");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_int_distribution<int> pos(0, grid.n - 1);
    SobolevCheck1D out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    const double h = grid.h3;
    for (int trial = 0; trial < trials; ++trial) {
        int c = pos(rng);
        int w = 2 + static_cast<int>(std::abs(uni(rng)) * grid.n / 4);
        int lo = std::max(0, c - w), hi = std::min(grid.n - 1, c + w);
        std::vector<double> f(grid.n, 0.0);
        for (int i = lo + 1; i < hi; ++i) f[i] = uni(rng);
        double num = 0.0, den = 0.0;
        for (int i = 0; i + 1 < grid.n; ++i) {
            double df = (f[i + 1] - f[i]) / h;
            num += df * df * g0[i] * g0[i] * h;
            den += std::pow(std::abs(f[i]), 6.0) * g0[i] * g0[i] * h;
        }
        if (den <= 0.0) continue; // degenerate draw; excluded by construction
        double ratio = num / std::cbrt(den);
        out.min_ratio = std::min(out.min_ratio, ratio);
    }
    out.pass = std::isfinite(out.min_ratio) && out.min_ratio > 0.0;
    return out;
}

} // namespace twistlab
