#include "twistlab/nash.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace twistlab {

namespace {
const double kCross = std::pow(2.0, 2.5); // value of t^{-5/2} at t = 1/2
}

double gamma_envelope(double t) {
    if (t <= 0) throw std::invalid_argument("gamma_envelope: t must be positive");
    return t <= 1.0 ? std::pow(t, -2.5) : std::pow(t, -1.5);
}

double Gamma_envelope(double t) {
    if (t <= 0) throw std::invalid_argument("Gamma_envelope: t must be positive");
    return t <= 1.0 ? std::pow(t, -2.5) : std::pow(t, -0.5);
}

ConvexBridge::ConvexBridge(double slope_left, double slope_right)
    : s0_(slope_left), s1_(slope_right), v0_(kCross) {
    const double a = 0.5, b = 1.0;
    const double dv = 1.0 - kCross;
    // one-knot piecewise-linear derivative: pick the knot, solve the middle
    // slope from the area constraint, and require monotone slopes
    tau_ = 0.75;
    bool ok = false;
    for (double tau : {0.75, 0.7, 0.8, 0.65, 0.85, 0.6, 0.9}) {
        double sm = (2.0 * dv - (tau - a) * s0_ - (b - tau) * s1_) / (b - a);
        if (s0_ <= sm && sm <= s1_ && sm < 0.0) {
            tau_ = tau;
            sm_ = sm;
            ok = true;
            break;
        }
    }
    if (!ok) throw std::runtime_error("no admissible convex bridge for these slopes");
    vtau_ = v0_ + s0_ * (tau_ - a) + (sm_ - s0_) * (tau_ - a) / 2.0;

    // startup verification at 1000 points: strictly decreasing, convex,
    // endpoint matching
    double prev_v = value(a), prev_d = derivative(a);
    for (int i = 1; i <= 1000; ++i) {
        double t = a + (b - a) * i / 1000.0;
        double v = value(t), d = derivative(t);
        if (v >= prev_v || d < prev_d - 1e-12)
            throw std::runtime_error("convex bridge verification failed");
        prev_v = v;
        prev_d = d;
    }
    if (std::abs(value(a) - kCross) > 1e-12 || std::abs(value(b) - 1.0) > 1e-12)
        throw std::runtime_error("convex bridge endpoint mismatch");
}

double ConvexBridge::derivative(double t) const {
    const double a = 0.5, b = 1.0;
    if (t <= tau_) return s0_ + (sm_ - s0_) * (t - a) / (tau_ - a);
    return sm_ + (s1_ - sm_) * (t - tau_) / (b - tau_);
}

double ConvexBridge::value(double t) const {
    const double a = 0.5, b = 1.0;
    if (t <= tau_) {
        double u = t - a;
        return v0_ + s0_ * u + (sm_ - s0_) * u * u / (2.0 * (tau_ - a));
    }
    double u = t - tau_;
    return vtau_ + sm_ * u + (s1_ - sm_) * u * u / (2.0 * (b - tau_));
}

double ConvexBridge::inverse(double v) const {
    double lo = 0.5, hi = 1.0; // value decreasing: value(lo) = 2^{5/2}, value(hi) = 1
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (value(mid) > v)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

NashFamily::NashFamily(double lambda)
    : lambda_(lambda),
      chi_(-2.5 * std::pow(0.5, -3.5), -1.5),
      chi_tilde_(-2.5 * std::pow(0.5, -3.5), -0.5) {
    if (lambda < 1.0) throw std::invalid_argument("NashFamily: lambda must be >= 1");
}

double NashFamily::m(double t) const {
    if (t <= 0) throw std::invalid_argument("m_lambda: t must be positive");
    if (t <= 0.5) return lambda_ * std::pow(t, -2.5);
    if (t <= 1.0) return lambda_ * chi_.value(t);
    return lambda_ * std::pow(t, -1.5);
}

double NashFamily::mu(double t) const {
    if (t <= 0) throw std::invalid_argument("mu_lambda: t must be positive");
    if (t <= 0.5) return lambda_ * std::pow(t, -2.5);
    if (t <= 1.0) return lambda_ * chi_tilde_.value(t);
    return lambda_ * std::pow(t, -0.5);
}

double NashFamily::m_inverse(double r) const {
    if (r <= 0) throw std::invalid_argument("m_inverse: r must be positive");
    double rr = r / lambda_;
    if (rr >= kCross) return std::pow(rr, -0.4);
    if (rr <= 1.0) return std::pow(rr, -2.0 / 3.0);
    return chi_.inverse(rr);
}

double NashFamily::mu_inverse(double r) const {
    if (r <= 0) throw std::invalid_argument("mu_inverse: r must be positive");
    double rr = r / lambda_;
    if (rr >= kCross) return std::pow(rr, -0.4);
    if (rr <= 1.0) return std::pow(rr, -2.0);
    return chi_tilde_.inverse(rr);
}

double NashFamily::xi(double r) const {
    if (r <= 0) throw std::invalid_argument("xi_lambda: r must be positive");
    if (r <= lambda_) return 1.5 * std::pow(lambda_, -2.0 / 3.0) * std::pow(r, 5.0 / 3.0);
    if (r >= kCross * lambda_) return 2.5 * std::pow(lambda_, -0.4) * std::pow(r, 1.4);
    return -lambda_ * chi_.derivative(chi_.inverse(r / lambda_));
}

double NashFamily::vartheta(double r) const {
    if (r <= 0) throw std::invalid_argument("vartheta_lambda: r must be positive");
    if (r <= lambda_) return 0.5 * std::pow(lambda_, -2.0) * r * r * r;
    if (r >= kCross * lambda_) return 2.5 * std::pow(lambda_, -0.4) * std::pow(r, 1.4);
    return -lambda_ * chi_tilde_.derivative(chi_tilde_.inverse(r / lambda_));
}

XiScalingResult xi_scaling_check(const std::vector<double>& kappas,
                             const std::vector<double>& lambdas,
                             const std::vector<double>& r_grid) {
    XiScalingResult res;
    res.pass = true;
    for (double kappa : kappas) {
        double cx = 0.0, cv = 0.0;
        for (double lam : lambdas) {
            NashFamily fam(lam);
            double cxl = 0.0, cvl = 0.0;
            for (double r : r_grid) {
                cxl = std::max(cxl, fam.xi(kappa * r) / fam.xi(r));
                cvl = std::max(cvl, fam.vartheta(kappa * r) / fam.vartheta(r));
            }
            res.C_xi_by_lambda[kappa][lam] = cxl;
            res.C_vartheta_by_lambda[kappa][lam] = cvl;
            cx = std::max(cx, cxl);
            cv = std::max(cv, cvl);
        }
        res.C_xi[kappa] = cx;
        res.C_vartheta[kappa] = cv;
        if (!std::isfinite(cx) || !std::isfinite(cv)) res.pass = false;
        // lambda uniformity: within a factor 2 across the lambda grid
        auto uniform = [&](const std::map<double, double>& tab) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (auto& [lam, c] : tab) {
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            return hi <= 2.0 * lo;
        };
        if (!uniform(res.C_xi_by_lambda[kappa]) ||
            !uniform(res.C_vartheta_by_lambda[kappa]))
            res.pass = false;
    }
    return res;
}

} // namespace twistlab
