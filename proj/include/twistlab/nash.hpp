#ifndef TWISTLAB_NASH_HPP
#define TWISTLAB_NASH_HPP

#include <map>
#include <vector>

namespace twistlab {

/// Long-time envelope profiles: gamma(t) = t^{-5/2} on (0,1], t^{-3/2}
/// after; Gamma(t) identical for small t with a t^{-1/2} tail.
double gamma_envelope(double t);
double Gamma_envelope(double t);

/// C^1 decreasing convex bridge between two power branches on (1/2, 1]:
/// a one-knot piecewise quadratic matching values and derivatives at both
/// ends.  (A single cubic Hermite through these data is not convex.)
class ConvexBridge {
public:
    /// endpoint values are fixed to (2^{5/2}, 1); slopes are those of the
    /// adjacent power branches
    ConvexBridge(double slope_left, double slope_right);
    double value(double t) const;
    double derivative(double t) const;
    /// inverse on [1, 2^{5/2}] by bisection
    double inverse(double v) const;

private:
    double tau_;     // knot
    double s0_, sm_, s1_;
    double v0_;      // value at 1/2
    double vtau_;    // value at the knot
};

/// The decreasing bijections m_lambda (5/2 -> 3/2 tails) and mu_lambda
/// (5/2 -> 1/2 tails) of the Nash machinery, their inverses, and the rate
/// functions xi_lambda, vartheta_lambda.
class NashFamily {
public:
    explicit NashFamily(double lambda);

    double lambda() const { return lambda_; }
    double m(double t) const;
    double mu(double t) const;
    double m_inverse(double r) const;
    double mu_inverse(double r) const;
    double xi(double r) const;
    double vartheta(double r) const;

private:
    double lambda_;
    ConvexBridge chi_;
    ConvexBridge chi_tilde_;
};

struct XiScalingResult {
    bool pass = false;
    // per kappa: max over (r, lambda) of xi(kappa r)/xi(r), and vartheta
    std::map<double, double> C_xi;
    std::map<double, double> C_vartheta;
    // per (kappa, lambda) tables for the uniformity check
    std::map<double, std::map<double, double>> C_xi_by_lambda;
    std::map<double, std::map<double, double>> C_vartheta_by_lambda;
};

XiScalingResult xi_scaling_check(const std::vector<double>& kappas,
                             const std::vector<double>& lambdas,
                             const std::vector<double>& r_grid);

} // namespace twistlab

#endif
