#include <doctest.h>

#include <cmath>

#include "twistlab/nash.hpp"

using namespace twistlab;

TEST_SUITE_BEGIN("nash");

TEST_CASE("envelope profiles gamma and Gamma") {
    CHECK(gamma_envelope(0.25) == doctest::Approx(std::pow(0.25, -2.5)));
    CHECK(gamma_envelope(4.0) == doctest::Approx(std::pow(4.0, -1.5)));
    CHECK(Gamma_envelope(0.25) == doctest::Approx(std::pow(0.25, -2.5)));
    CHECK(Gamma_envelope(4.0) == doctest::Approx(std::pow(4.0, -0.5)));
    // continuity at t = 1 and pointwise domination
    CHECK(gamma_envelope(1.0) == doctest::Approx(1.0));
    CHECK(Gamma_envelope(1.0) == doctest::Approx(1.0));
    for (double t = 0.01; t < 100.0; t *= 1.17) {
        CHECK(gamma_envelope(t) <= Gamma_envelope(t) * (1 + 1e-12));
        CHECK(gamma_envelope(t * 1.17) < gamma_envelope(t));
        CHECK(Gamma_envelope(t * 1.17) < Gamma_envelope(t));
    }
}

TEST_CASE("xi branch values") {
    NashFamily f1(1.0);
    CHECK(f1.xi(1.0) == doctest::Approx(1.5).epsilon(1e-12));
    double rc = std::pow(2.0, 2.5);
    CHECK(f1.xi(rc) == doctest::Approx(2.5 * std::pow(rc, 1.4)).epsilon(1e-9));
    CHECK(f1.xi(rc) == doctest::Approx(5.0 * rc).epsilon(1e-9));
    NashFamily f4(4.0);
    CHECK(f4.xi(1.0) == doctest::Approx(1.5 * std::pow(4.0, -2.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS(f1.xi(0.0));
    CHECK_THROWS(f1.xi(-1.0));
}

TEST_CASE("vartheta branch values and monotonicity") {
    NashFamily f1(1.0);
    CHECK(f1.vartheta(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f1.vartheta(0.5) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    double prev = 0.0;
    for (double r = 1e-3; r < 1e4; r *= 1.1) {
        double v = f1.vartheta(r);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS(f1.vartheta(0.0));
}

TEST_CASE("m and mu are decreasing bijections with exact inverses") {
    for (double lambda : {1.0, 4.0, 16.0}) {
        NashFamily f(lambda);
        double prev_m = 1e300, prev_mu = 1e300;
        for (int k = 0; k < 200; ++k) {
            double t = std::pow(10.0, -3.0 + 6.0 * k / 199.0);
            double m = f.m(t), mu = f.mu(t);
            CHECK(m < prev_m);
            CHECK(mu < prev_mu);
            prev_m = m;
            prev_mu = mu;
            CHECK(f.m_inverse(m) == doctest::Approx(t).epsilon(1e-10));
            CHECK(f.mu_inverse(mu) == doctest::Approx(t).epsilon(1e-10));
        }
    }
}

TEST_CASE("C1 matching of m at the bridge endpoints") {
    NashFamily f(1.0);
    double eps = 1e-7;
    for (double t0 : {0.5, 1.0}) {
        double dl = (f.m(t0) - f.m(t0 - eps)) / eps;
        double dr = (f.m(t0 + eps) - f.m(t0)) / eps;
        CHECK(std::abs(dl - dr) < 1e-4 * std::abs(dl));
        double dlu = (f.mu(t0) - f.mu(t0 - eps)) / eps;
        double dru = (f.mu(t0 + eps) - f.mu(t0)) / eps;
        CHECK(std::abs(dlu - dru) < 1e-4 * std::abs(dlu));
    }
}

TEST_CASE("xi increasing and scaled by lambda") {
    NashFamily f1(1.0), f8(8.0);
    double prev = 0.0;
    for (int k = 0; k < 200; ++k) {
        double r = std::pow(10.0, -3.0 + 6.0 * k / 199.0);
        double v = f1.xi(r);
        CHECK(v > prev);
        prev = v;
        // xi_lambda(r) = lambda xi_1(r / lambda)
        CHECK(f8.xi(8.0 * r) == doctest::Approx(8.0 * v).epsilon(1e-9));
    }
}

TEST_CASE("scaling constants C_kappa: identity, powers, uniformity") {
    std::vector<double> rs;
    for (double r = 1e-3; r < 1e4; r *= 1.15) rs.push_back(r);
    XiScalingResult res = xi_scaling_check({1.0, 2.0}, {1.0, 4.0, 16.0}, rs);
    CHECK(res.C_xi.at(1.0) == doctest::Approx(1.0).epsilon(1e-9));
    // kappa = 2 must cover at least the power-branch homogeneity factors
    CHECK(res.C_xi.at(2.0) >= std::pow(2.0, 5.0 / 3.0) - 1e-9);
    CHECK(res.C_xi.at(2.0) < 10.0);
    CHECK(res.C_vartheta.at(2.0) >= 8.0 - 1e-9); // cube branch
    CHECK(res.pass);
}

TEST_SUITE_END();
