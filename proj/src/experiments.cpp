#include "twistlab/experiments.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "twistlab/fit.hpp"

namespace twistlab {

PowerFit fit_power_law(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 5)
        throw std::invalid_argument("power-law fit needs at least 5 samples");
    double tmin = samples.front().first, tmax = samples.front().first;
    for (auto& [t, v] : samples) {
        if (v <= 0.0) throw std::invalid_argument("power-law fit needs positive values");
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    if (tmax < 10.0 * tmin * (1.0 - 1e-12))
        throw std::invalid_argument("power-law fit needs a decade of abscissa span");

    const int n = static_cast<int>(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [t, v] : samples) {
        double x = std::log(t), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    PowerFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (auto& [t, v] : samples) {
        double r = std::log(v) - fit.slope * std::log(t) - fit.intercept;
        ss += r * r;
    }
    if (n > 2) {
        double var = ss / (n - 2) * n / denom;
        fit.ci = 2.0 * std::sqrt(std::max(var, 0.0));
    }
    return fit;
}

ExperimentReport mixed_offdiag_check(const TwistedOperator& op, double mu, double nu,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts) {
    if (mu < 0 || mu > 1 || nu < 0 || nu > 1)
        throw std::invalid_argument("mu, nu must lie in [0, 1]");
    ExperimentReport rep;
    rep.tag = "mixed_offdiag";
    rep.columns = {"t", "x", "y", "k", "bound", "C"};
    const TubeGrid& grid = op.grid();

    std::map<std::int64_t, KernelField> fields;
    for (auto& [x, y] : pairs)
        if (!fields.count(x)) fields.emplace(x, evolve(op, x, times, opts));

    double C_emp = 0.0;
    for (auto& [x, y] : pairs) {
        double rx = grid.rho(x), ry = grid.rho(y);
        double wx = 1.0 + grid.x3_of(x) * grid.x3_of(x);
        double wy = 1.0 + grid.x3_of(y) * grid.x3_of(y);
        for (double t : times) {
            double k = fields.at(x).value_at(t, y);
            double bound = rx * ry * std::pow(wx, 0.5 * mu) * std::pow(wy, 0.5 * nu) *
                           std::pow(t, -0.5 * (1.0 + mu + nu));
            double C = std::max(k, 0.0) / bound;
            C_emp = std::max(C_emp, C);
            rep.add_row({t, static_cast<double>(x), static_cast<double>(y), k, bound, C});
        }
    }
    rep.envelopes["C_emp"] = C_emp;
    return rep;
}

ExperimentReport weighted_decay_check(const TwistedOperator& op, double beta,
                                      double kappa, const std::vector<double>& times,
                                      int power_iters, const EvolveOptions& opts) {
    if (kappa < 0.0 || kappa > 2.0) throw std::invalid_argument("kappa must lie in [0, 2]");
    if (beta <= 0.5 * (1.0 + kappa))
        throw std::invalid_argument("hypothesis violated: need beta > (1+kappa)/2");

    const TubeGrid& grid = op.grid();
    const std::int64_t N = grid.n_nodes();
    Vec wmb(N); // (1+x3^2)^{-beta/2}
    for (std::int64_t k = 0; k < N; ++k) {
        double x3 = grid.x3_of(k);
        wmb[k] = std::pow(1.0 + x3 * x3, -0.5 * beta);
    }

    ExperimentReport rep;
    rep.tag = "weighted_decay";
    rep.columns = {"t", "norm"};

    // warm-started power iteration on w^{-b/2} S_{2t} w^{-b/2} per time
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    Vec v(N);
    for (std::int64_t k = 0; k < N; ++k) v[k] = gauss(rng);
    v /= v.norm();

    std::vector<std::pair<double, double>> samples;
    for (double t : times) {
        double lam = 0.0;
        for (int it = 0; it < power_iters; ++it) {
            Vec y = wmb.cwiseProduct(apply_semigroup(op, wmb.cwiseProduct(v), 2.0 * t, opts));
            double lam_new = v.dot(y);
            y /= y.norm();
            v = y;
            if (it >= 2 && std::abs(lam_new - lam) <= 1e-6 * std::abs(lam_new)) {
                lam = lam_new;
                break;
            }
            lam = lam_new;
        }
        double norm = std::sqrt(std::max(lam, 0.0));
        samples.emplace_back(t, norm);
        rep.add_row({t, norm});
    }
    PowerFit fit = fit_power_law(samples);
    rep.exponents["slope"] = fit.slope;
    rep.exponent_cis["slope"] = fit.ci;
    rep.envelopes["target"] = -0.25 * (1.0 + kappa);
    return rep;
}

ExperimentReport l1_linf_decay_check(const TwistedOperator& op, double beta,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts) {
    if (beta < 0.0 || beta > 0.5)
        throw std::invalid_argument("beta must lie in [0, 1/2]");
    const TubeGrid& grid = op.grid();
    ExperimentReport rep;
    rep.tag = "l1_linf_decay";
    rep.columns = {"t", "upper", "moving"};

    // axis source family for the weighted supremum
    std::vector<std::int64_t> sources;
    for (double z : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0,
                     -2.0, -4.0, -8.0})
        sources.push_back(grid.node_near(z));

    std::vector<double> half_times;
    for (double t : times) half_times.push_back(0.5 * t);
    std::vector<double> upper(times.size(), 0.0);
    std::map<std::int64_t, KernelField> fields;
    for (std::int64_t s : sources)
        if (!fields.count(s)) fields.emplace(s, evolve(op, s, half_times, opts));
    for (auto& [s, f] : fields) {
        double x3 = grid.x3_of(s);
        double w = std::pow(1.0 + x3 * x3, -beta);
        for (std::size_t k = 0; k < times.size(); ++k)
            upper[k] = std::max(upper[k], w * std::sqrt(diag_via_l2(f, half_times[k])));
    }

    std::vector<std::pair<double, double>> up_samples, mv_samples;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t = times[k];
        // moving probe: source at 1 + z3^2 = 2t (clipped to the grid's
        // truncation-validity window)
        double z3 = std::sqrt(std::max(2.0 * t - 1.0, 0.0));
        double moving = std::numeric_limits<double>::quiet_NaN();
        if (z3 <= 0.6 * grid.L()) {
            std::int64_t zsrc = grid.node_near(z3);
            KernelField f = evolve(op, zsrc, {0.5 * t}, opts);
            double w = std::pow(1.0 + z3 * z3, -beta);
            moving = w * std::sqrt(diag_via_l2(f, 0.5 * t));
            mv_samples.emplace_back(t, moving);
        }
        up_samples.emplace_back(t, upper[k]);
        rep.add_row({t, upper[k], moving});
    }
    PowerFit up = fit_power_law(up_samples);
    rep.exponents["upper_slope"] = up.slope;
    rep.exponent_cis["upper_slope"] = up.ci;
    if (mv_samples.size() >= 5) {
        PowerFit mv = fit_power_law(mv_samples);
        rep.exponents["moving_slope"] = mv.slope;
        rep.exponent_cis["moving_slope"] = mv.ci;
    }
    rep.envelopes["target"] = -0.25 - beta;
    return rep;
}

ExperimentReport davies_ratio_plot(const TubeGrid& grid, const EigenBasis2D& basis,
                                   const Kernel1D& k1,
                                   const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                   std::pair<std::int64_t, std::int64_t> base,
                                   const std::vector<double>& times, int m) {
    ExperimentReport rep;
    rep.tag = "davies_ratio";
    rep.columns = {"t", "x", "y", "ratio"};

    // flatness of the last decade, logged per pair (no pass/fail)
    double worst_drift = 0.0;
    for (auto& [x, y] : pairs) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double t : times) {
            double num = ref_kernel(grid, basis, k1, t, x, y, m).value;
            double den = ref_kernel(grid, basis, k1, t, base.first, base.second, m).value;
            double r = num / den;
            rep.add_row({t, static_cast<double>(x), static_cast<double>(y), r});
            if (t >= times.back() / 10.0) {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        worst_drift = std::max(worst_drift, hi / lo - 1.0);
    }
    rep.envelopes["last_decade_drift"] = worst_drift;
    return rep;
}

} // namespace twistlab
