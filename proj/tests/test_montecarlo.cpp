#include <doctest.h>

#include <cmath>

#include "twistlab/montecarlo.hpp"

using namespace twistlab;

namespace {

// Discrete monitoring of the bridge misses excursions between sample
// points, so the estimator targets a barrier shifted outward by
// beta1 * sigma_step with beta1 = -zeta(1/2)/sqrt(2pi) (Broadie-Glasserman);
// here sigma_step = sqrt(2 dt) because the generator is the full Laplacian.
double halfspace_discrete(double d, double t, double dt) {
    double d_eff = d + 0.5826 * std::sqrt(2.0 * dt);
    return 1.0 - std::exp(-d_eff * d_eff / t);
}

} // namespace

TEST_SUITE_BEGIN("montecarlo");

TEST_CASE("half-space bridge survival matches the corrected closed form") {
    for (auto [d, t] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 1.0}}) {
        BridgeEstimate est = halfspace_survival(d, t, 200000, t / 1024.0, 42);
        CHECK(halfspace_exact(d, t) ==
              doctest::Approx(1.0 - std::exp(-d * d / t)).epsilon(1e-12));
        // raw estimate overestimates the continuous survival ...
        CHECK(est.p_hat > halfspace_exact(d, t) - 3.0 * est.stderr_);
        // ... and matches the barrier-shift correction to 3 sigma + O(dt)
        double ref = halfspace_discrete(d, t, est.delta);
        CHECK(std::abs(est.p_hat - ref) < 3.0 * est.stderr_ + 3.0 * est.delta / t);
        CHECK(est.stderr_ < 0.01);
        CHECK_FALSE(est.zero_survivors);
    }
}

TEST_CASE("monitoring bias shrinks like sqrt(delta)") {
    double exact = halfspace_exact(1.0, 1.0);
    BridgeEstimate coarse = halfspace_survival(1.0, 1.0, 400000, 1.0 / 64, 3);
    BridgeEstimate fine = halfspace_survival(1.0, 1.0, 400000, 1.0 / 1024, 4);
    double bias_c = coarse.p_hat - exact;
    double bias_f = fine.p_hat - exact;
    CHECK(bias_c > 0.0);
    CHECK(bias_f > 0.0);
    // dt shrinks 16x, so the bias should shrink ~4x
    CHECK(bias_f / bias_c > 0.15);
    CHECK(bias_f / bias_c < 0.45);
}

TEST_CASE("estimates are deterministic for a fixed seed") {
    BridgeEstimate a = halfspace_survival(1.0, 1.0, 20000, 0.02, 7);
    BridgeEstimate b = halfspace_survival(1.0, 1.0, 20000, 0.02, 7);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.stderr_ == b.stderr_);
    BridgeEstimate c = halfspace_survival(1.0, 1.0, 20000, 0.02, 8);
    CHECK(a.p_hat != c.p_hat);
}

TEST_CASE("tube survival tends to one as t -> 0 and falls with t") {
    ShapeDescriptor fat;
    fat.a = 3.5;
    fat.b = 2.5;
    TwistProfile tw(3.0, 1.0);
    Point3 x{0.0, 0.0, 0.0};
    BridgeEstimate tiny = survival_probability(fat, tw, x, 0.05, 20000, 0.005, 11);
    CHECK(tiny.p_hat > 0.98);
    BridgeEstimate mid = survival_probability(fat, tw, x, 2.0, 20000, 0.01, 11);
    BridgeEstimate late = survival_probability(fat, tw, x, 8.0, 20000, 0.02, 11);
    CHECK(mid.p_hat > late.p_hat + 3.0 * (mid.stderr_ + late.stderr_));
    CHECK(late.p_hat > 0.0);
}

TEST_CASE("anchor outside the tube is refused") {
    ShapeDescriptor ell; // default a = 0.7, b = 0.5
    TwistProfile tw(3.0, 1.0);
    CHECK_THROWS_AS(survival_probability(ell, tw, {0.69, 0.3, 0.0}, 1.0, 100, 0.01, 1),
                    std::invalid_argument);
}

TEST_CASE("zero survivors produce the rule-of-three upper bound") {
    // thin tube over a long horizon: no path survives at this sample size
    ShapeDescriptor ell;
    TwistProfile tw(0.0, 1.0);
    BridgeEstimate est = survival_probability(ell, tw, {0.0, 0.0, 0.0}, 50.0, 2000, 0.1, 5);
    CHECK(est.zero_survivors);
    CHECK(est.p_hat == 0.0);
    CHECK(est.stderr_ == doctest::Approx(3.0 / est.paths));
}

TEST_CASE("kernel estimate normalization") {
    BridgeEstimate est = halfspace_survival(1.0, 2.0, 10000, 0.02, 9);
    double e1 = 0.7;
    double expect = std::exp(e1 * 2.0) * std::pow(4.0 * M_PI * 2.0, -1.5) * est.p_hat;
    CHECK(est.khat(e1) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(est.khat_stderr(e1) / est.khat(e1) ==
          doctest::Approx(est.stderr_ / est.p_hat).epsilon(1e-12));
}

TEST_CASE("exponent probe fits a slope and drops noisy samples") {
    ShapeDescriptor fat;
    fat.a = 3.5;
    fat.b = 2.5;
    TwistProfile tw(0.0, 1.0);
    std::vector<double> times;
    for (double t = 0.5; t <= 16.0 + 1e-9; t *= std::sqrt(2.0)) times.push_back(t);
    ExperimentReport rep =
        exponent_probe(fat, tw, 0.0, {0.0, 0.0, 0.0}, times, 30000, 0.02, 13);
    REQUIRE(rep.exponents.count("slope") == 1);
    CHECK(std::isfinite(rep.exponents.at("slope")));
    CHECK(rep.exponents.at("slope") < 0.0);
    CHECK(rep.samples.size() == times.size());
    // with e1 = 0 the kernel estimate decreases in t on the used samples
    double prev = 1e300;
    for (auto& row : rep.samples) {
        if (row[4] == 0.0) continue;
        CHECK(row[3] < prev);
        prev = row[3];
    }
}

TEST_SUITE_END();
